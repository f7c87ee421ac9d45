#pragma once

// Offline data collection and reference-score measurement.

#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rvs/data/trajectory.hpp"
#include "rvs/env/spec.hpp"

namespace rvs {

using ActionFn = std::function<std::vector<double>(const EnvState&)>;

struct Episode {
    Trajectory trajectory;
    double total_return = 0.0;
    bool success = false;
    std::size_t steps = 0;
};

/// Runs from `start` until done or the horizon. A start that already
/// satisfies its goal counts as a success with return 1 and zero steps.
inline Episode run_episode(const Environment& env, EnvState state, const ActionFn& act) {
    const auto& spec = env.spec();
    Episode ep;
    ep.trajectory = Trajectory(spec.state_dim, spec.action_dim());
    if (state.done) {
        ep.success = state.success;
        ep.total_return = state.success ? 1.0 : 0.0;
        return ep;
    }
    while (!state.done) {
        const auto action = act(state);
        StepResult r = env.step(state, action);
        ep.trajectory.push(state.observation, r.executed_action, r.reward);
        ep.total_return += r.reward;
        state = std::move(r.state);
    }
    ep.steps = state.elapsed;
    ep.success = state.success;
    ep.trajectory.terminated = state.elapsed < spec.horizon;
    return ep;
}

/// Evaluation start for a seed: the env's start distribution plus, for goal
/// tasks, its evaluation goal.
inline EnvState eval_start(const Environment& env, std::uint64_t seed) {
    if (!env.spec().goal_task) return env.reset(seed, std::nullopt);
    return env.reset(seed, env.sample_eval_goal(derive_seed(seed, "goal")));
}

inline Dataset empty_dataset(const Environment& env, std::string provenance) {
    const auto& s = env.spec();
    return Dataset{s.id, s.horizon, s.state_dim, s.action_dim(), std::move(provenance), {}};
}

/// Uniform-random actions; goal tasks get a fresh random goal per episode
/// (never one already satisfied at the start). Stops once at least `n_steps`
/// transitions are stored.
inline Dataset collect_random(const Environment& env, std::size_t n_steps, std::uint64_t seed) {
    const auto& spec = env.spec();
    if (n_steps < spec.horizon) throw UsageError("collect at least one horizon of steps");
    Dataset ds = empty_dataset(env, "collector=random steps=" + std::to_string(n_steps) + " seed=" + std::to_string(seed));
    std::size_t collected = 0;
    for (std::uint64_t i = 0; collected < n_steps; ++i) {
        const std::uint64_t ep_seed = derive_seed(seed, "random-episode", i);
        Rng rng = make_rng(ep_seed, "policy");
        EnvState state = env.reset(ep_seed, std::nullopt);
        if (spec.goal_task) {
            Rng goal_rng = make_rng(ep_seed, "goal");
            std::vector<double> goal;
            do {
                goal = env.sample_goal(goal_rng);
            } while (env.goal_reached(state.observation, goal));
            state = env.reset(ep_seed, goal);
        }
        Episode ep = run_episode(env, state, [&](const EnvState&) { return env.random_action(rng); });
        collected += ep.trajectory.length();
        ds.trajectories.push_back(std::move(ep.trajectory));
    }
    return ds;
}

inline std::vector<std::string> split_list(const std::string& s, char sep = '+') {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

/// Scripted behavior. Several policies split `n_episodes` evenly (earlier ones
/// take the remainder) and are stored in list order.
inline Dataset collect_scripted(const Environment& env, const std::vector<std::string>& policies,
                                std::size_t n_episodes, std::uint64_t seed, double noise) {
    if (policies.empty()) throw UsageError("no collector given");
    if (n_episodes < policies.size()) throw UsageError("need at least one episode per collector");
    if (!(noise >= 0.0)) throw UsageError("noise must be non-negative");
    std::string names;
    for (const auto& p : policies) names += (names.empty() ? "" : "+") + p;
    std::ostringstream prov;
    prov << "collector=" << names << " episodes=" << n_episodes << " seed=" << seed << " noise=" << noise;
    Dataset ds = empty_dataset(env, prov.str());
    for (std::size_t k = 0; k < policies.size(); ++k) {
        const std::string& policy = policies[k];
        const std::size_t count = n_episodes / policies.size() + (k < n_episodes % policies.size() ? 1 : 0);
        for (std::size_t j = 0; j < count; ++j) {
            const std::uint64_t ep_seed = derive_seed(seed, policy, j);
            Rng rng = make_rng(ep_seed, "policy");
            EnvState start = env.scripted_setup(policy, ep_seed, rng);
            Episode ep = run_episode(env, start,
                                     [&](const EnvState& s) { return env.scripted_action(policy, s, noise, rng); });
            if (ep.trajectory.length() > 0) ds.trajectories.push_back(std::move(ep.trajectory));
        }
    }
    if (ds.trajectories.empty()) throw UsageError("scripted collection produced no transitions");
    return ds;
}

inline constexpr std::uint64_t kReferenceSeed = 20211203;

/// Mean return of the uniform-random policy and the noise-free "expert"
/// script over `episodes` evaluation starts. The results are frozen into each
/// env's spec; a unit test recomputes them.
inline ReferenceScores compute_reference_scores(const Environment& env, std::size_t episodes = 1000,
                                                std::uint64_t seed = kReferenceSeed) {
    double random_sum = 0.0, expert_sum = 0.0;
    for (std::size_t i = 0; i < episodes; ++i) {
        const std::uint64_t ep_seed = derive_seed(seed, "reference", i);
        Rng rng = make_rng(ep_seed, "random-policy");
        random_sum += run_episode(env, eval_start(env, ep_seed), [&](const EnvState&) { return env.random_action(rng); })
                          .total_return;
        Rng erng = make_rng(ep_seed, "expert-policy");
        expert_sum += run_episode(env, eval_start(env, ep_seed),
                                  [&](const EnvState& s) { return env.scripted_action("expert", s, 0.0, erng); })
                          .total_return;
    }
    const double n = static_cast<double>(episodes);
    return {random_sum / n, expert_sum / n};
}

}  // namespace rvs
