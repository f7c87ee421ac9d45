#pragma once

// 15x15 corridor maze with three waypoints. A sits in a small room at the top
// left, B in the corner of a room at the top right, C at the bottom of a long
// corridor leaving the B room. Demonstrations cover A->B and B->C separately;
// evaluation starts in the A room and commands C.

#include <string>

#include "rvs/data/trajectory.hpp"
#include "rvs/env/grid.hpp"

namespace rvs {

class StitchMaze : public GridEnvironment {
public:
    StitchMaze() : GridEnvironment(make_spec(), Grid(layout())) {
        a_region_ = grid_.cells_marked("aA");
        b_region_ = grid_.cells_marked("bB");
    }

    // a/A: A room (A is the waypoint), b/B: B room (B is the waypoint), C: goal.
    static std::vector<std::string> layout() {
        return {
            "###############",
            "#aA........Bbb#",
            "#aa########bbb#",
            "###########bbb#",
            "#############.#",
            "#############.#",
            "#######.......#",
            "#######.#######",
            "#######.#######",
            "#######.#######",
            "#######.#######",
            "#######C#######",
            "###############",
            "###############",
            "###############",
        };
    }

    static constexpr Cell kA{2, 1};
    static constexpr Cell kB{11, 1};
    static constexpr Cell kC{7, 11};

    bool in_a_region(Cell c) const { return grid_.free(c) && (grid_.at(c) == 'a' || grid_.at(c) == 'A'); }
    bool in_b_region(Cell c) const { return grid_.free(c) && (grid_.at(c) == 'b' || grid_.at(c) == 'B'); }
    bool in_c_region(Cell c) const { return c == kC; }

    EnvState reset(std::uint64_t seed, const std::optional<std::vector<double>>& goal) const override {
        Rng rng = make_rng(seed, "start");
        return reset_at(Grid::obs_of(a_region_[uniform_index(rng, a_region_.size())]), goal);
    }

    /// Evaluation always commands C.
    std::vector<double> sample_eval_goal(std::uint64_t) const override { return Grid::obs_of(kC); }

    EnvState scripted_setup(const std::string& policy, std::uint64_t seed, Rng& rng) const override {
        require_policy(policy);
        if (policy == "corridor_BC") {
            return reset_at(Grid::obs_of(b_region_[uniform_index(rng, b_region_.size())]), std::nullopt);
        }
        if (policy == "expert") return reset(seed, Grid::obs_of(kC));
        return reset(seed, std::nullopt);
    }

    std::vector<double> scripted_action(const std::string& policy, const EnvState& state, double noise,
                                        Rng& rng) const override {
        require_policy(policy);
        if (policy == "corridor_AB") return toward(kB, state, noise, rng);
        return toward(kC, state, noise, rng);
    }

private:
    static EnvSpec make_spec() {
        EnvSpec s;
        s.id = "stitch_maze";
        s.horizon = 50;
        s.goal_task = true;
        s.scripted_policies = {"corridor_AB", "corridor_BC", "expert"};
        s.reference = {kRandomReturn, kExpertReturn};
        s.description = "15x15 corridor maze; demos A->B and B->C, evaluation A->C";
        return s;
    }

    std::vector<Cell> a_region_;
    std::vector<Cell> b_region_;

public:
    static constexpr double kRandomReturn = 0.0;
    static constexpr double kExpertReturn = 1.0;
};

/// Refuses datasets in which any trajectory visits the A room and later
/// reaches C; such a dataset would make the stitching evaluation meaningless.
inline void audit_no_a_to_c(const StitchMaze& env, const Dataset& ds) {
    if (ds.env_id != env.spec().id) throw AuditError("dataset is for '" + ds.env_id + "', not stitch_maze");
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& tr = ds.trajectories[i];
        bool seen_a = false;
        // States before each action, plus the successor of the last action,
        // which the trajectory does not store.
        for (std::size_t t = 0; t <= tr.length(); ++t) {
            Cell c;
            if (t < tr.length()) {
                c = Grid::cell_of(tr.state(t));
            } else {
                c = env.grid().move(Grid::cell_of(tr.state(t - 1)), static_cast<int>(std::lround(tr.action(t - 1)[0])));
            }
            if (env.in_a_region(c)) seen_a = true;
            if (seen_a && env.in_c_region(c)) {
                throw AuditError("trajectory " + std::to_string(i) + " travels from the A room to C (step " +
                                 std::to_string(t) + ")");
            }
        }
    }
}

}  // namespace rvs
