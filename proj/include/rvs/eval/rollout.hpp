#pragma once

// Conditioning plans and single-episode rollouts.

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rvs/data/outcome.hpp"
#include "rvs/env/collect.hpp"
#include "rvs/env/spec.hpp"
#include "rvs/nn/sample.hpp"
#include "rvs/train/artifact.hpp"

namespace rvs {

/// Command the env's evaluation goal (the standard goal-reaching protocol).
struct EvalGoal {};

/// Command one goal for every rollout.
struct FixedGoal {
    std::vector<double> goal;
};

/// Command a total return. The policy sees target / H for the whole episode;
/// with `recompute` it sees (target - return so far) / (H - t) instead.
struct FixedReturnTarget {
    double target = 0.0;
    bool recompute = false;
};

/// Command each waypoint in turn, moving on at the first step within `radius`
/// of the current one (negative radius: the env's success radius). The last
/// waypoint is the episode's goal.
struct DynamicGoal {
    std::vector<std::vector<double>> waypoints;
    double radius = -1.0;
};

/// No condition (plain BC). Goal tasks still get their evaluation goal, which
/// the policy never sees, so success can be measured.
struct Unconditioned {};

using ConditioningPlan = std::variant<EvalGoal, FixedGoal, FixedReturnTarget, DynamicGoal, Unconditioned>;

inline std::string describe(const ConditioningPlan& plan) {
    auto vec = [](const std::vector<double>& v) {
        std::string s = "(";
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + csv_number(v[i]);
        return s + ")";
    };
    if (std::holds_alternative<EvalGoal>(plan)) return "eval_goal";
    if (const auto* g = std::get_if<FixedGoal>(&plan)) return "fixed_goal" + vec(g->goal);
    if (const auto* r = std::get_if<FixedReturnTarget>(&plan)) {
        return "return_target(" + csv_number(r->target) + (r->recompute ? " recompute)" : ")");
    }
    if (const auto* d = std::get_if<DynamicGoal>(&plan)) {
        std::string s = "dynamic_goal";
        for (const auto& w : d->waypoints) s += vec(w);
        return s;
    }
    return "unconditioned";
}

/// Which outcome a plan conditions on, as an outcome name.
inline std::string plan_outcome(const ConditioningPlan& plan) {
    if (std::holds_alternative<FixedReturnTarget>(plan)) return "return";
    if (std::holds_alternative<Unconditioned>(plan)) return "none";
    return "goal";
}

struct RolloutResult {
    std::uint64_t seed = 0;
    double total_return = 0.0;
    std::optional<bool> success;  // set on goal tasks
    std::size_t steps = 0;
    std::vector<double> env_goal;                  // empty when the env has none
    std::vector<std::vector<double>> conditions;   // condition fed to the policy at each step
    Trajectory trajectory;
};

/// Maps (state, condition) to an action.
using Actor = std::function<std::vector<double>(std::span<const double> state, std::span<const double> condition, Rng&)>;

inline Actor policy_actor(const MlpPolicy& policy, SampleMode mode) {
    auto runner = std::make_shared<PolicyRunner>(policy);
    auto input = std::make_shared<std::vector<double>>();
    return [runner, input, mode](std::span<const double> s, std::span<const double> c, Rng& rng) {
        input->assign(s.begin(), s.end());
        input->insert(input->end(), c.begin(), c.end());
        return runner->act(*input, mode, rng);
    };
}

/// Checks that a plan fits an outcome spec and its condition width.
inline void check_plan(const Environment& env, const OutcomeSpec& outcome, const ConditioningPlan& plan) {
    if (plan_outcome(plan) != outcome_name(outcome)) {
        throw UsageError("plan " + describe(plan) + " needs a '" + plan_outcome(plan) + "'-conditioned policy, not '" +
                         outcome_name(outcome) + "'");
    }
    const std::size_t dim = condition_dim(outcome, env.spec().state_dim);
    auto check_goal = [&](const std::vector<double>& g) {
        if (g.size() != dim) throw UsageError("goal has " + std::to_string(g.size()) + " values; the policy expects " + std::to_string(dim));
        if (env.spec().goal_task && !env.goal_in_space(g)) throw UsageError("goal outside the goal space of " + env.spec().id);
    };
    if (const auto* g = std::get_if<FixedGoal>(&plan)) check_goal(g->goal);
    if (const auto* d = std::get_if<DynamicGoal>(&plan)) {
        if (d->waypoints.empty()) throw UsageError("dynamic goal needs at least one waypoint");
        for (const auto& w : d->waypoints) check_goal(w);
    }
    if (std::holds_alternative<EvalGoal>(plan)) {
        if (!env.spec().goal_task) throw UsageError(env.spec().id + " has no evaluation goals; pass a fixed goal");
        if (env.spec().goal_dim != dim) throw UsageError("policy goal width does not match " + env.spec().id);
    }
    if (const auto* r = std::get_if<FixedReturnTarget>(&plan)) {
        if (!std::isfinite(r->target)) throw UsageError("return target must be finite");
    }
}

/// One episode from the start determined by `seed`. The actor's randomness
/// comes from make_rng(seed, "action").
inline RolloutResult rollout_actor(const Environment& env, const OutcomeSpec& outcome, const ConditioningPlan& plan,
                                   const Actor& actor, std::uint64_t seed) {
    check_plan(env, outcome, plan);
    const auto& spec = env.spec();
    const double H = static_cast<double>(spec.horizon);

    std::optional<std::vector<double>> env_goal;
    if (spec.goal_task) {
        if (const auto* g = std::get_if<FixedGoal>(&plan)) {
            env_goal = g->goal;
        } else if (const auto* d = std::get_if<DynamicGoal>(&plan)) {
            env_goal = d->waypoints.back();
        } else {
            env_goal = env.sample_eval_goal(derive_seed(seed, "goal"));
        }
    }
    EnvState state = env.reset(seed, env_goal);
    Rng rng = make_rng(seed, "action");

    RolloutResult res;
    res.seed = seed;
    res.trajectory = Trajectory(spec.state_dim, spec.action_dim());
    if (env_goal) res.env_goal = *env_goal;

    std::size_t waypoint = 0;
    const auto* dyn = std::get_if<DynamicGoal>(&plan);
    const double radius = dyn && dyn->radius >= 0.0 ? dyn->radius : spec.success_radius;
    const auto* ret = std::get_if<AvgReturnOutcome>(&outcome);

    if (state.done) {
        // start already satisfies the goal
        res.success = state.success;
        res.total_return = state.success ? 1.0 : 0.0;
        return res;
    }
    std::vector<double> cond;
    while (!state.done) {
        const std::size_t t = state.elapsed;
        if (dyn) {
            while (waypoint + 1 < dyn->waypoints.size() &&
                   euclidean(std::span<const double>(state.observation).subspan(0, dyn->waypoints[waypoint].size()),
                             dyn->waypoints[waypoint]) <= radius) {
                ++waypoint;
            }
        }
        std::visit(
            [&](const auto& p) {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, FixedGoal>) {
                    cond = p.goal;
                } else if constexpr (std::is_same_v<P, DynamicGoal>) {
                    cond = p.waypoints[waypoint];
                } else if constexpr (std::is_same_v<P, EvalGoal>) {
                    cond = *env_goal;
                } else if constexpr (std::is_same_v<P, FixedReturnTarget>) {
                    const double w = p.recompute ? (p.target - res.total_return) / (H - static_cast<double>(t))
                                                 : p.target / H;
                    cond = {ret->encode(w)};
                } else {
                    cond.clear();
                }
            },
            plan);
        const auto action = actor(state.observation, cond, rng);
        StepResult r = env.step(state, action);
        res.trajectory.push(state.observation, r.executed_action, r.reward);
        res.conditions.push_back(cond);
        res.total_return += r.reward;
        state = std::move(r.state);
    }
    res.steps = state.elapsed;
    if (spec.goal_task) res.success = state.success;
    res.trajectory.terminated = state.elapsed < spec.horizon;
    return res;
}

inline RolloutResult rollout(const Environment& env, const PolicyArtifact& artifact, const ConditioningPlan& plan,
                             std::uint64_t seed, std::optional<SampleMode> mode = std::nullopt) {
    if (artifact.env_id != env.spec().id) throw UsageError("policy was trained on " + artifact.env_id);
    if (artifact.state_dim != env.spec().state_dim) throw UsageError("policy state width does not match the env");
    const Actor actor = policy_actor(artifact.policy, mode.value_or(artifact.config.sample_mode()));
    return rollout_actor(env, artifact.outcome, plan, actor, seed);
}

}  // namespace rvs
