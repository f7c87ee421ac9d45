#pragma once

// 11x11 grid split into four rooms by a wall cross at x=5 and y=5, with one
// door in each wall segment. 104 free cells.

#include "rvs/env/grid.hpp"

namespace rvs {

class FourRooms : public GridEnvironment {
public:
    FourRooms() : GridEnvironment(make_spec(), Grid(layout())) {}

    static std::vector<std::string> layout() {
        return {
            ".....#.....",
            ".....#.....",
            "...........",
            ".....#.....",
            ".....#.....",
            "##.#####.##",
            ".....#.....",
            ".....#.....",
            "...........",
            ".....#.....",
            ".....#.....",
        };
    }

    /// Room index 0..3 for a free non-door cell, -1 for doors.
    static int room_of(Cell c) {
        if (c.x == 5 || c.y == 5) return -1;
        return (c.x > 5 ? 1 : 0) + (c.y > 5 ? 2 : 0);
    }

    EnvState reset(std::uint64_t seed, const std::optional<std::vector<double>>& goal) const override {
        Rng rng = make_rng(seed, "start");
        return reset_at(Grid::obs_of(grid_.free_cells()[uniform_index(rng, grid_.free_cells().size())]), goal);
    }

    std::vector<double> scripted_action(const std::string& policy, const EnvState& state, double noise,
                                        Rng& rng) const override {
        require_policy(policy);
        if (!state.has_goal) return {static_cast<double>(kStay)};
        return toward(Grid::cell_of(state.goal), state, noise, rng);
    }

private:
    static EnvSpec make_spec() {
        EnvSpec s;
        s.id = "four_rooms";
        s.horizon = 50;
        s.goal_task = true;
        s.scripted_policies = {"expert"};
        s.reference = {kRandomReturn, kExpertReturn};
        s.description = "11x11 four-room gridworld, goal = any free cell, reward 1 on arrival";
        return s;
    }

public:
    // Mean return of the uniform-random and shortest-path policies over 1000
    // evaluation episodes (see compute_reference_scores).
    static constexpr double kRandomReturn = 0.15;
    static constexpr double kExpertReturn = 1.0;
};

}  // namespace rvs
