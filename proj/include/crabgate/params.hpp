#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "crabgate/lattice.hpp"

namespace crabgate {

/// Parameters of the swarm update rule.
struct ModelParams {
    int num_transitions = 20;     ///< P, potential transitions per agent and step
    double alpha_deg = 120.0;     ///< width of the sampling cone around the heading
    double noise_amplitude = 0.0; ///< lambda, external noise on velocity matching
    int nm_radius = 2;            ///< matching / anticipation neighborhood (24 cells)
    int nf_radius = 1;            ///< following neighborhood (8 cells)
    int popularity_threshold = 1; ///< a target qualifies when popularity exceeds this
    double wall_weight = 0.7;     ///< blend toward the wall flow vector
    std::uint64_t seed = 0;

    void validate() const {
        if (num_transitions < 1) throw Error("num_transitions (P) must be >= 1");
        if (!(alpha_deg >= 0.0 && alpha_deg <= 360.0)) throw Error("alpha must lie in [0, 360] degrees");
        if (!(noise_amplitude >= 0.0) || !std::isfinite(noise_amplitude)) {
            throw Error("noise amplitude (lambda) must be finite and >= 0");
        }
        if (nm_radius != 2) throw Error("nm_radius is fixed at 2");
        if (nf_radius != 1) throw Error("nf_radius is fixed at 1");
        if (popularity_threshold < 0) throw Error("popularity_threshold must be >= 0");
        if (!(wall_weight >= 0.0 && wall_weight <= 1.0)) throw Error("wall_weight must lie in [0, 1]");
    }
};

}  // namespace crabgate
