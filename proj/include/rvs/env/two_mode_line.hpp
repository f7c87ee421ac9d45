#pragma once

// 1-D track. Action = target speed in [0,1]; reward per step = realized speed.
// Observation = (position, elapsed / H); position advances by speed / H, so a
// full-speed episode ends at position 1.

#include <algorithm>

#include "rvs/env/spec.hpp"

namespace rvs {

class TwoModeLine : public Environment {
public:
    TwoModeLine() {
        spec_.id = "two_mode_line";
        spec_.state_dim = 2;
        spec_.action_space = ActionSpace::box(1, 0.0, 1.0);
        spec_.horizon = 50;
        spec_.goal_extractor_id = "identity";  // lets goal-conditioned policies train on it
        spec_.goal_dim = 2;
        spec_.goal_task = false;
        spec_.scripted_policies = {"medium", "expert"};
        spec_.reference = {kRandomReturn, kExpertReturn};
        spec_.description = "1-D track, reward = speed; medium (0.5) and expert (1.0) scripted drivers";
    }

    const EnvSpec& spec() const override { return spec_; }

    EnvState reset(std::uint64_t, const std::optional<std::vector<double>>& goal) const override {
        return reset_at({0.0, 0.0}, goal);
    }

    EnvState reset_at(const std::vector<double>& observation,
                      const std::optional<std::vector<double>>& goal) const override {
        if (goal) throw UsageError("two_mode_line has no goal task");
        if (observation.size() != 2) throw UsageError("two_mode_line observations are 2-d");
        EnvState s;
        s.observation = observation;
        s.elapsed = static_cast<std::size_t>(std::lround(observation[1] * static_cast<double>(spec_.horizon)));
        return s;
    }

    StepResult step(const EnvState& state, std::span<const double> action) const override {
        check_steppable(state);
        if (action.size() != 1) throw UsageError("two_mode_line actions are 1-d");
        if (!std::isfinite(action[0])) throw NumericError("non-finite action");
        StepResult r;
        r.state = state;
        const double speed = std::clamp(action[0], 0.0, 1.0);
        if (speed != action[0]) ++r.state.clip_count;
        const double H = static_cast<double>(spec_.horizon);
        ++r.state.elapsed;
        r.state.observation[0] = state.observation[0] + speed / H;
        r.state.observation[1] = static_cast<double>(r.state.elapsed) / H;
        r.reward = speed;
        r.executed_action = {speed};
        r.state.done = r.state.elapsed >= spec_.horizon;
        r.done = r.state.done;
        return r;
    }

    bool goal_in_space(std::span<const double> g) const override {
        return g.size() == 2 && g[0] >= 0.0 && g[0] <= 1.0 && g[1] >= 0.0 && g[1] <= 1.0;
    }

    std::vector<double> sample_goal(Rng& rng) const override {
        const double p = uniform01(rng);
        const double t = uniform01(rng);
        return {p, t};
    }

    std::vector<double> random_action(Rng& rng) const override { return {uniform01(rng)}; }

    std::vector<double> scripted_action(const std::string& policy, const EnvState&, double noise,
                                        Rng& rng) const override {
        require_policy(policy);
        const double base = policy == "expert" ? 1.0 : 0.5;
        const double a = noise > 0.0 ? base + noise * standard_normal(rng) : base;
        return {std::clamp(a, 0.0, 1.0)};
    }

    static constexpr double kRandomReturn = 25.064170723933881;
    static constexpr double kExpertReturn = 50.0;

private:
    EnvSpec spec_;
};

}  // namespace rvs
