#pragma once

#include "crabgate/rng.hpp"
#include "crabgate/lattice.hpp"
#include "crabgate/params.hpp"
#include "crabgate/agent.hpp"
#include "crabgate/metrics.hpp"
#include "crabgate/swarm.hpp"
#include "crabgate/layout.hpp"
#include "crabgate/parallel.hpp"
#include "crabgate/gate.hpp"
#include "crabgate/experiments.hpp"
#include "crabgate/render.hpp"
