#pragma once

// Many-rollout evaluation and its report. Rollout i uses seed
// derive_seed(seed, "rollout", i), so results do not depend on worker count.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rvs/data/filters.hpp"
#include "rvs/eval/rollout.hpp"
#include "rvs/train/trainer.hpp"
#include "rvs/util/parallel.hpp"

namespace rvs {

struct RolloutRecord {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    double total_return = 0.0;
    std::optional<bool> success;
    std::size_t steps = 0;

    bool operator==(const RolloutRecord&) const = default;
};

struct EvalReport {
    std::string env_id;
    std::string plan;
    std::size_t n_rollouts = 0;
    std::optional<double> success_rate;  // percent, goal tasks only
    double mean_return = 0.0;
    double std_return = 0.0;             // sample standard deviation; 0 for one rollout
    double normalized_score = 0.0;
    std::vector<RolloutRecord> records;

    bool operator==(const EvalReport& o) const {
        return env_id == o.env_id && plan == o.plan && n_rollouts == o.n_rollouts && success_rate == o.success_rate &&
               mean_return == o.mean_return && std_return == o.std_return && normalized_score == o.normalized_score &&
               records == o.records;
    }
};

/// Summary statistics from per-rollout records; summation runs in record order.
inline EvalReport aggregate(const EnvSpec& env, const std::string& plan, std::vector<RolloutRecord> records) {
    if (records.empty()) throw UsageError("no rollouts to aggregate");
    EvalReport r;
    r.env_id = env.id;
    r.plan = plan;
    r.n_rollouts = records.size();
    const double n = static_cast<double>(records.size());
    double sum = 0.0;
    std::size_t successes = 0;
    bool any_success_field = false;
    for (const auto& rec : records) {
        sum += rec.total_return;
        if (rec.success) {
            any_success_field = true;
            successes += *rec.success ? 1 : 0;
        }
    }
    r.mean_return = sum / n;
    double ss = 0.0;
    for (const auto& rec : records) ss += (rec.total_return - r.mean_return) * (rec.total_return - r.mean_return);
    r.std_return = records.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    if (any_success_field) r.success_rate = 100.0 * static_cast<double>(successes) / n;
    r.normalized_score = normalized_score(r.mean_return, env.reference.random_return, env.reference.expert_return);
    r.records = std::move(records);
    return r;
}

inline std::uint64_t rollout_seed(std::uint64_t seed, std::size_t i) { return derive_seed(seed, "rollout", i); }

inline RolloutRecord to_record(std::size_t i, const RolloutResult& r) {
    return {i, r.seed, r.total_return, r.success, r.steps};
}

/// Evaluates any actor; `make_actor` is called once per rollout so actors may
/// keep per-thread scratch.
inline EvalReport evaluate_actor(const Environment& env, const OutcomeSpec& outcome, const ConditioningPlan& plan,
                                 const std::function<Actor()>& make_actor, std::size_t n, std::uint64_t seed,
                                 std::size_t workers = 1) {
    if (n == 0) throw UsageError("evaluate at least one rollout");
    check_plan(env, outcome, plan);
    std::vector<RolloutRecord> records(n);
    parallel_for(n, workers, [&](std::size_t i) {
        records[i] = to_record(i, rollout_actor(env, outcome, plan, make_actor(), rollout_seed(seed, i)));
    });
    return aggregate(env.spec(), describe(plan), std::move(records));
}

inline EvalReport evaluate(const Environment& env, const PolicyArtifact& artifact, const ConditioningPlan& plan,
                           std::size_t n, std::uint64_t seed, std::size_t workers = 1,
                           std::optional<SampleMode> mode = std::nullopt) {
    if (artifact.env_id != env.spec().id) throw UsageError("policy was trained on " + artifact.env_id);
    if (artifact.state_dim != env.spec().state_dim) throw UsageError("policy state width does not match the env");
    const SampleMode m = mode.value_or(artifact.config.sample_mode());
    return evaluate_actor(
        env, artifact.outcome, plan, [&] { return policy_actor(artifact.policy, m); }, n, seed, workers);
}

/// The standard protocol for a trained artifact: goal policies get the env's
/// evaluation goals, BC runs unconditioned, return policies need a target.
inline ConditioningPlan default_plan(const PolicyArtifact& a, std::optional<double> return_target = std::nullopt) {
    if (std::holds_alternative<GoalOutcome>(a.outcome)) return EvalGoal{};
    if (std::holds_alternative<NoOutcome>(a.outcome)) return Unconditioned{};
    if (!return_target) throw UsageError("return-conditioned policies need a return target");
    return FixedReturnTarget{*return_target};
}

/// Mid-training evaluation hook for the trainer: one draw from the training
/// engine seeds the rollouts, so the training run stays reproducible.
inline std::function<EvalMetrics(const MlpPolicy&, std::size_t, Rng&)> training_evaluator(
    std::shared_ptr<const Environment> env, OutcomeSpec outcome, ConditioningPlan plan, SampleMode mode) {
    return [env, outcome, plan, mode](const MlpPolicy& policy, std::size_t n, Rng& rng) {
        const std::uint64_t seed = rng();
        const EvalReport r = evaluate_actor(*env, outcome, plan, [&] { return policy_actor(policy, mode); }, n, seed);
        return EvalMetrics{r.mean_return, r.success_rate};
    };
}

inline std::string report_csv(const EvalReport& r) {
    std::string out;
    out += "# env=" + r.env_id + "\n";
    out += "# plan=" + r.plan + "\n";
    out += "# n_rollouts=" + std::to_string(r.n_rollouts) + "\n";
    out += "# success_rate=" + csv_number(r.success_rate) + "\n";
    out += "# mean_return=" + csv_number(r.mean_return) + "\n";
    out += "# std_return=" + csv_number(r.std_return) + "\n";
    out += "# normalized_score=" + csv_number(r.normalized_score) + "\n";
    out += "rollout,seed,return,success,steps\n";
    for (const auto& rec : r.records) {
        out += std::to_string(rec.index) + "," + std::to_string(rec.seed) + "," + csv_number(rec.total_return) + "," +
               (rec.success ? (*rec.success ? "1" : "0") : "") + "," + std::to_string(rec.steps) + "\n";
    }
    return out;
}

}  // namespace rvs
