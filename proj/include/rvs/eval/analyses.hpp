#pragma once

// Analyses built on evaluate(): reward-target sweeps, goal-selection
// strategies for goal-conditioned policies on reward tasks, and the stitching
// evaluation.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rvs/data/filters.hpp"
#include "rvs/data/io.hpp"
#include "rvs/env/stitch_maze.hpp"
#include "rvs/eval/evaluate.hpp"

namespace rvs {

/// "lo:hi:step" (inclusive, so "0:50:5" is 11 values) or "a,b,c".
inline std::vector<double> parse_targets(const std::string& text) {
    auto number = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw UsageError("bad number '" + s + "' in target list '" + text + "'");
        }
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        const auto parts = split_list(text, ':');
        if (parts.size() != 3) throw UsageError("range must be lo:hi:step, got '" + text + "'");
        const double lo = number(parts[0]), hi = number(parts[1]), step = number(parts[2]);
        if (!(step > 0.0) || hi < lo) throw UsageError("range needs lo <= hi and a positive step");
        // index-based to avoid accumulating rounding; tolerate hi landing a hair off the grid
        const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
    } else {
        for (const auto& p : split_list(text, ',')) out.push_back(number(p));
    }
    if (out.empty()) throw UsageError("empty target list");
    return out;
}

struct TargetRow {
    double target = 0.0;
    EvalReport report;
};

inline std::vector<TargetRow> reward_target_sweep(const Environment& env, const PolicyArtifact& artifact,
                                                  const std::vector<double>& targets, std::size_t n_per_target,
                                                  std::uint64_t seed, std::size_t workers = 1, bool recompute = false,
                                                  std::optional<SampleMode> mode = std::nullopt) {
    if (!std::holds_alternative<AvgReturnOutcome>(artifact.outcome)) {
        throw UsageError("reward-target sweeps need a return-conditioned policy");
    }
    std::vector<TargetRow> rows;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        rows.push_back({targets[k], evaluate(env, artifact, FixedReturnTarget{targets[k], recompute}, n_per_target,
                                             derive_seed(seed, "target", k), workers, mode)});
    }
    return rows;
}

inline std::string target_sweep_csv(const std::vector<TargetRow>& rows) {
    std::string out = "target,n_rollouts,mean_return,std_return,normalized_score,success_rate\n";
    for (const auto& r : rows) {
        out += csv_number(r.target) + "," + std::to_string(r.report.n_rollouts) + "," +
               csv_number(r.report.mean_return) + "," + csv_number(r.report.std_return) + "," +
               csv_number(r.report.normalized_score) + "," + csv_number(r.report.success_rate) + "\n";
    }
    return out;
}

// ---- goal-selection strategies ----

struct GoalPool {
    std::vector<std::size_t> trajectories;    // dataset indices the pool draws from
    std::vector<std::vector<double>> goals;   // extractor outputs, in (trajectory, t) order
};

/// Goals from the last `tail_fraction` of timesteps (at least one) of the top
/// `top_fraction` trajectories ranked by `score`; ties follow the top-fraction
/// rule (earlier trajectories win).
inline GoalPool goal_pool(const Dataset& ds, const std::vector<double>& score, const GoalExtractor& extract,
                          double top_fraction = 0.1, double tail_fraction = 0.1) {
    GoalPool pool;
    pool.trajectories = top_fraction_indices(score, top_fraction);
    for (auto i : pool.trajectories) {
        const auto& tr = ds.trajectories[i];
        const std::size_t T = tr.length();
        const auto tail = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(T) - 1e-12)));
        for (std::size_t t = T - std::min(tail, T); t < T; ++t) pool.goals.push_back(extract(tr.state(t)));
    }
    return pool;
}

inline GoalPool reward_goal_pool(const Dataset& ds, const GoalExtractor& extract) {
    std::vector<double> totals;
    for (const auto& t : ds.trajectories) totals.push_back(t.total_reward());
    if (std::all_of(totals.begin(), totals.end(), [&](double v) { return v == totals.front(); })) {
        throw UsageError("every trajectory has the same total reward; reward goals are unavailable");
    }
    return goal_pool(ds, totals, extract);
}

inline GoalPool length_goal_pool(const Dataset& ds, const GoalExtractor& extract) {
    std::vector<double> lengths;
    for (const auto& t : ds.trajectories) lengths.push_back(static_cast<double>(t.length()));
    return goal_pool(ds, lengths, extract);
}

struct StrategyRow {
    std::string strategy;
    std::size_t candidates = 0;  // pool size (optimized_goal: candidates searched)
    std::size_t rollouts = 0;
    double mean_return = NAN;
    double std_return = NAN;
    double normalized_score = NAN;
    bool offline = true;         // false when the strategy queried the environment to choose goals
    std::string error;
};

struct StrategyOptions {
    std::size_t n_rollouts = 200;
    std::size_t optimized_candidates = 200;
    std::size_t optimized_rollouts_each = 10;
};

/// Rollouts with a goal drawn uniformly from `pool` per rollout.
inline EvalReport evaluate_pool(const Environment& env, const PolicyArtifact& a, const GoalPool& pool,
                                const std::string& name, std::size_t n, std::uint64_t seed, std::size_t workers) {
    if (pool.goals.empty()) throw UsageError("empty goal pool");
    const SampleMode mode = a.config.sample_mode();
    std::vector<RolloutRecord> records(n);
    parallel_for(n, workers, [&](std::size_t i) {
        const std::uint64_t s = rollout_seed(seed, i);
        Rng pick = make_rng(s, "pool-goal");
        const auto& goal = pool.goals[uniform_index(pick, pool.goals.size())];
        records[i] = to_record(i, rollout_actor(env, a.outcome, FixedGoal{goal}, policy_actor(a.policy, mode), s));
    });
    return aggregate(env.spec(), name, std::move(records));
}

inline std::vector<StrategyRow> goal_strategy_compare(const Environment& env, const Dataset& ds,
                                                      const PolicyArtifact& a,
                                                      const std::vector<std::string>& strategies, std::uint64_t seed,
                                                      const StrategyOptions& opt = {}, std::size_t workers = 1) {
    const auto* g = std::get_if<GoalOutcome>(&a.outcome);
    if (!g) throw UsageError("goal strategies need a goal-conditioned policy");
    const GoalExtractor extract = goal_extractor(g->extractor_id).fn;
    std::vector<StrategyRow> rows;
    for (const auto& name : strategies) {
        StrategyRow row;
        row.strategy = name;
        const std::uint64_t s = derive_seed(seed, name);
        try {
            if (name == "reward_goal" || name == "length_goal") {
                const GoalPool pool = name == "reward_goal" ? reward_goal_pool(ds, extract) : length_goal_pool(ds, extract);
                const EvalReport r = evaluate_pool(env, a, pool, name, opt.n_rollouts, s, workers);
                row.candidates = pool.goals.size();
                row.rollouts = r.n_rollouts;
                row.mean_return = r.mean_return;
                row.std_return = r.std_return;
                row.normalized_score = r.normalized_score;
            } else if (name == "optimized_goal") {
                // random search over length goals, scored by rollouts in the env
                const GoalPool pool = length_goal_pool(ds, extract);
                Rng pick = make_rng(s, "candidates");
                std::vector<double> means(opt.optimized_candidates);
                std::vector<double> stds(opt.optimized_candidates);
                for (std::size_t c = 0; c < opt.optimized_candidates; ++c) {
                    GoalPool one;
                    one.goals.push_back(pool.goals[uniform_index(pick, pool.goals.size())]);
                    const EvalReport r = evaluate_pool(env, a, one, name, opt.optimized_rollouts_each,
                                                       derive_seed(s, "candidate", c), workers);
                    means[c] = r.mean_return;
                    stds[c] = r.std_return;
                }
                const auto best = static_cast<std::size_t>(std::max_element(means.begin(), means.end()) - means.begin());
                row.candidates = opt.optimized_candidates;
                row.rollouts = opt.optimized_candidates * opt.optimized_rollouts_each;
                row.mean_return = means[best];
                row.std_return = stds[best];
                row.normalized_score = normalized_score(means[best], env.spec().reference.random_return,
                                                        env.spec().reference.expert_return);
                row.offline = false;
            } else {
                throw UsageError("unknown strategy '" + name + "' (reward_goal, length_goal, optimized_goal)");
            }
        } catch (const UsageError& e) {
            if (name != "reward_goal" && name != "length_goal" && name != "optimized_goal") throw;
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

inline std::string strategy_csv(const std::vector<StrategyRow>& rows) {
    std::string out = "strategy,candidates,rollouts,mean_return,std_return,normalized_score,offline,error\n";
    for (const auto& r : rows) {
        out += r.strategy + "," + std::to_string(r.candidates) + "," + std::to_string(r.rollouts) + "," +
               csv_number(r.mean_return) + "," + csv_number(r.std_return) + "," + csv_number(r.normalized_score) +
               "," + (r.offline ? "1" : "0 (uses environment access; not strictly offline)") + "," +
               csv_text(r.error) + "\n";
    }
    return out;
}

// ---- stitching ----

struct StitchingReport {
    EvalReport conditioned;    // goal-conditioned policy commanded to C
    EvalReport unconditioned;  // BC on the same data
};

/// Audits the dataset first and refuses (AuditError) if any trajectory goes
/// from the A room to C.
inline StitchingReport stitching_eval(const Environment& env, const Dataset& ds, const PolicyArtifact& goal_policy,
                                      const PolicyArtifact& bc_policy, std::size_t n, std::uint64_t seed,
                                      std::size_t workers = 1) {
    const auto* maze = dynamic_cast<const StitchMaze*>(&env);
    if (!maze) throw UsageError("stitching evaluation runs on stitch_maze");
    audit_no_a_to_c(*maze, ds);
    if (!std::holds_alternative<GoalOutcome>(goal_policy.outcome)) throw UsageError("first policy must be goal-conditioned");
    if (!std::holds_alternative<NoOutcome>(bc_policy.outcome)) throw UsageError("second policy must be unconditioned BC");
    StitchingReport r;
    r.conditioned = evaluate(env, goal_policy, EvalGoal{}, n, seed, workers);
    r.unconditioned = evaluate(env, bc_policy, Unconditioned{}, n, seed, workers);
    return r;
}

}  // namespace rvs
