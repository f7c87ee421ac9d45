#pragma once

// Offline episodes. Timesteps are 0-based throughout: a trajectory of length T
// holds s_0..s_{T-1}, a_0..a_{T-1}, r_0..r_{T-1}.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rvs/common.hpp"

namespace rvs {

struct Trajectory {
    std::size_t state_dim = 0;
    std::size_t action_dim = 0;
    std::vector<double> states;   // T * state_dim, row-major
    std::vector<double> actions;  // T * action_dim
    std::vector<double> rewards;  // T
    bool terminated = false;      // ended before the horizon

    Trajectory() = default;
    Trajectory(std::size_t sd, std::size_t ad) : state_dim(sd), action_dim(ad) {}

    std::size_t length() const noexcept { return rewards.size(); }

    std::span<const double> state(std::size_t t) const { return {states.data() + t * state_dim, state_dim}; }
    std::span<const double> action(std::size_t t) const { return {actions.data() + t * action_dim, action_dim}; }

    void push(std::span<const double> s, std::span<const double> a, double r) {
        if (s.size() != state_dim || a.size() != action_dim) throw UsageError("transition has the wrong dimensions");
        states.insert(states.end(), s.begin(), s.end());
        actions.insert(actions.end(), a.begin(), a.end());
        rewards.push_back(r);
    }

    double total_reward() const {
        double sum = 0.0;
        for (double r : rewards) sum += r;
        return sum;
    }

    bool operator==(const Trajectory&) const = default;
};

struct Dataset {
    std::string env_id;
    std::size_t horizon = 0;
    std::size_t state_dim = 0;
    std::size_t action_dim = 0;
    std::string provenance;
    std::vector<Trajectory> trajectories;

    std::size_t size() const noexcept { return trajectories.size(); }

    std::size_t transition_count() const {
        std::size_t n = 0;
        for (const auto& t : trajectories) n += t.length();
        return n;
    }

    /// Same header, no trajectories.
    Dataset empty_like() const { return Dataset{env_id, horizon, state_dim, action_dim, provenance, {}}; }

    /// Structural invariants; throws UsageError naming the first violation.
    void validate() const {
        if (horizon == 0) throw UsageError("dataset horizon must be positive");
        if (state_dim == 0 || action_dim == 0) throw UsageError("dataset dimensions must be positive");
        if (trajectories.empty()) throw UsageError("dataset has no trajectories");
        for (std::size_t i = 0; i < trajectories.size(); ++i) {
            const auto& t = trajectories[i];
            const std::string where = "trajectory " + std::to_string(i) + ": ";
            if (t.state_dim != state_dim || t.action_dim != action_dim) throw UsageError(where + "dimension mismatch");
            const std::size_t T = t.length();
            if (T == 0) throw UsageError(where + "empty");
            if (T > horizon) throw UsageError(where + "longer than the horizon");
            if (t.states.size() != T * state_dim || t.actions.size() != T * action_dim) {
                throw UsageError(where + "array lengths disagree");
            }
            if (!all_finite(t.states.data(), t.states.size()) || !all_finite(t.actions.data(), t.actions.size()) ||
                !all_finite(t.rewards.data(), t.rewards.size())) {
                throw UsageError(where + "non-finite value");
            }
        }
    }

    bool operator==(const Dataset&) const = default;
};

}  // namespace rvs
