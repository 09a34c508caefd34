#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "crabgate/lattice.hpp"

namespace crabgate {

struct Agent {
    int id = 0;
    Cell pos;
    Vec2 heading{1.0, 0.0};           ///< principal vector, unit length
    std::vector<Cell> transitions;    ///< potential transitions drawn this step
};

/// A world together with the agents living in it. The world's occupancy grid
/// holds, for every occupied cell, the slot of the agent in `agents()`.
class Swarm {
public:
    Swarm() = default;
    explicit Swarm(World world) : world_(std::move(world)) { world_.clear_occupancy(); }

    const World& world() const { return world_; }
    World& world() { return world_; }
    const std::vector<Agent>& agents() const { return agents_; }
    std::vector<Agent>& agents() { return agents_; }
    std::size_t size() const { return agents_.size(); }

    /// Places a new agent; returns its id.
    int add(Cell pos, Vec2 heading) {
        if (!world_.is_free(pos)) throw Error("cannot place agent on a wall or outside the world");
        if (world_.occupant(pos) != World::kEmpty) throw Error("cannot place agent on an occupied cell");
        const double n = heading.norm();
        if (!(n > 0.0)) throw Error("agent heading must be nonzero");
        Agent a;
        a.id = next_id_++;
        a.pos = pos;
        a.heading = heading * (1.0 / n);
        world_.set_occupant(pos, static_cast<int>(agents_.size()));
        agents_.push_back(std::move(a));
        return agents_.back().id;
    }

    /// Moves the agent in `slot` to an adjacent vacant cell and points its
    /// heading along the step.
    void move(std::size_t slot, Cell to) {
        Agent& a = agents_[slot];
        const auto [dc, dr] = world_.displacement(a.pos, to);
        world_.set_occupant(a.pos, World::kEmpty);
        world_.set_occupant(to, static_cast<int>(slot));
        a.pos = to;
        if (dc != 0 || dr != 0) a.heading = unit_step(dc, dr);
    }

    /// Removes every agent matching `pred`, keeping the order of the rest.
    template <typename Pred>
    std::size_t remove_if(Pred pred) {
        std::vector<Agent> kept;
        kept.reserve(agents_.size());
        for (auto& a : agents_) {
            if (pred(static_cast<const Agent&>(a))) {
                world_.set_occupant(a.pos, World::kEmpty);
            } else {
                kept.push_back(std::move(a));
            }
        }
        const std::size_t removed = agents_.size() - kept.size();
        agents_ = std::move(kept);
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            world_.set_occupant(agents_[i].pos, static_cast<int>(i));
        }
        return removed;
    }

    /// Empty string when occupancy and headings are consistent, otherwise a
    /// description of the first violation found.
    std::string check_invariants(double heading_tolerance = 1e-9) const {
        std::size_t occupied = 0;
        for (std::size_t i = 0; i < world_.area(); ++i) {
            const int slot = world_.occupant(world_.cell_at(i));
            if (slot == World::kEmpty) continue;
            ++occupied;
            if (slot < 0 || static_cast<std::size_t>(slot) >= agents_.size()) {
                return "occupancy refers to a missing agent";
            }
            if (world_.index(agents_[static_cast<std::size_t>(slot)].pos) != i) {
                return "occupancy does not match agent position";
            }
        }
        if (occupied != agents_.size()) return "agents share a cell or are missing from occupancy";
        for (const auto& a : agents_) {
            if (!world_.is_free(a.pos)) return "agent " + std::to_string(a.id) + " stands on a wall";
            if (std::abs(a.heading.norm() - 1.0) > heading_tolerance) {
                return "agent " + std::to_string(a.id) + " heading is not unit length";
            }
        }
        return {};
    }

private:
    World world_;
    std::vector<Agent> agents_;
    int next_id_ = 0;
};

}  // namespace crabgate
