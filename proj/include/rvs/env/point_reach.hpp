#pragma once

// Continuous 2-D reaching: position in [0,10]^2, velocity action in [-1,1]^2,
// success within 0.5 of the goal.

#include <algorithm>

#include "rvs/env/spec.hpp"

namespace rvs {

class PointReach : public Environment {
public:
    static constexpr double kSize = 10.0;
    static constexpr double kRadius = 0.5;

    PointReach() {
        spec_.id = "point_reach";
        spec_.state_dim = 2;
        spec_.action_space = ActionSpace::box(2, -1.0, 1.0);
        spec_.horizon = 50;
        spec_.goal_extractor_id = "xy";
        spec_.goal_dim = 2;
        spec_.success_radius = kRadius;
        spec_.goal_task = true;
        spec_.scripted_policies = {"expert"};
        spec_.reference = {kRandomReturn, kExpertReturn};
        spec_.description = "2-D point mass, velocity control, reach a goal within 0.5";
    }

    const EnvSpec& spec() const override { return spec_; }

    EnvState reset(std::uint64_t seed, const std::optional<std::vector<double>>& goal) const override {
        Rng rng = make_rng(seed, "start");
        const double x = uniform(rng, 0.0, kSize);
        const double y = uniform(rng, 0.0, kSize);
        return reset_at({x, y}, goal);
    }

    EnvState reset_at(const std::vector<double>& observation,
                      const std::optional<std::vector<double>>& goal) const override {
        if (!goal_in_space(observation)) throw UsageError("start outside [0,10]^2");
        check_goal(goal);
        EnvState s;
        s.observation = observation;
        if (goal) {
            s.goal = *goal;
            s.has_goal = true;
            if (goal_reached(observation, *goal)) s.done = s.success = true;
        }
        return s;
    }

    StepResult step(const EnvState& state, std::span<const double> action) const override {
        check_steppable(state);
        if (action.size() != 2) throw UsageError("point_reach actions are 2-d");
        StepResult r;
        r.state = state;
        r.executed_action.resize(2);
        bool clipped = false;
        for (std::size_t d = 0; d < 2; ++d) {
            if (!std::isfinite(action[d])) throw NumericError("non-finite action");
            const double a = std::clamp(action[d], -1.0, 1.0);
            clipped = clipped || a != action[d];
            r.executed_action[d] = a;
            r.state.observation[d] = std::clamp(state.observation[d] + a, 0.0, kSize);
        }
        if (clipped) ++r.state.clip_count;
        ++r.state.elapsed;
        if (state.has_goal && goal_reached(r.state.observation, state.goal)) {
            r.reward = 1.0;
            r.state.success = r.state.done = true;
        }
        if (r.state.elapsed >= spec_.horizon) r.state.done = true;
        r.done = r.state.done;
        return r;
    }

    bool goal_in_space(std::span<const double> g) const override {
        return g.size() == 2 && g[0] >= 0.0 && g[0] <= kSize && g[1] >= 0.0 && g[1] <= kSize;
    }

    std::vector<double> sample_goal(Rng& rng) const override {
        const double x = uniform(rng, 0.0, kSize);
        const double y = uniform(rng, 0.0, kSize);
        return {x, y};
    }

    std::vector<double> random_action(Rng& rng) const override {
        const double x = uniform(rng, -1.0, 1.0);
        const double y = uniform(rng, -1.0, 1.0);
        return {x, y};
    }

    /// Heads straight for the goal at full speed per axis.
    std::vector<double> scripted_action(const std::string& policy, const EnvState& state, double noise,
                                        Rng& rng) const override {
        require_policy(policy);
        std::vector<double> a(2, 0.0);
        if (!state.has_goal) return a;
        for (std::size_t d = 0; d < 2; ++d) {
            a[d] = std::clamp(state.goal[d] - state.observation[d], -1.0, 1.0);
            if (noise > 0.0) a[d] = std::clamp(a[d] + noise * standard_normal(rng), -1.0, 1.0);
        }
        return a;
    }

    static constexpr double kRandomReturn = 0.129;
    static constexpr double kExpertReturn = 1.0;

private:
    EnvSpec spec_;
};

}  // namespace rvs
