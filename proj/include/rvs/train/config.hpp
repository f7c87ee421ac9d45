#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "rvs/common.hpp"
#include "rvs/data/outcome.hpp"
#include "rvs/env/spec.hpp"
#include "rvs/nn/sample.hpp"

namespace rvs {

struct TrainConfig {
    std::size_t hidden_width = 256;
    double learning_rate = 1e-3;
    double dropout = 0.1;
    std::size_t batch_size = 256;
    std::size_t steps = 20000;
    std::string outcome = "goal";         // goal | return | none
    std::string goal_extractor;           // empty: the env's extractor
    bool normalize_return = false;
    bool normalize_inputs = true;         // standardize network inputs with training-split statistics
    std::string head = "categorical";     // categorical | gaussian
    std::size_t bins = 15;
    std::uint64_t seed = 0;
    double validation_fraction = 0.2;
    std::size_t eval_every = 1000;
    std::size_t eval_rollouts = 0;        // rollouts per metrics checkpoint; 0 keeps training offline
    std::size_t probe_size = 1024;        // examples in the fixed loss-probe batches
    std::string timestep_sampling = "per_trajectory";  // per_trajectory | length_weighted
    std::string eval_action = "default";  // default | stochastic | deterministic

    void validate() const {
        if (hidden_width == 0) throw UsageError("width must be positive");
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw UsageError("learning rate must be positive");
        if (!(dropout >= 0.0 && dropout < 1.0)) throw UsageError("dropout must be in [0, 1)");
        if (batch_size == 0) throw UsageError("batch size must be positive");
        if (outcome != "goal" && outcome != "return" && outcome != "none") {
            throw UsageError("outcome must be goal, return or none");
        }
        head_kind_from_string(head);
        if (bins < 2) throw UsageError("bins must be at least 2");
        if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
            throw UsageError("validation fraction must be in [0, 1)");
        }
        if (eval_every == 0) throw UsageError("eval_every must be positive");
        if (probe_size == 0) throw UsageError("probe size must be positive");
        if (timestep_sampling != "per_trajectory" && timestep_sampling != "length_weighted") {
            throw UsageError("timestep sampling must be per_trajectory or length_weighted");
        }
        if (eval_action != "default") sample_mode_from_string(eval_action);
    }

    HeadKind head_kind() const { return head_kind_from_string(head); }

    SampleMode sample_mode() const {
        return eval_action == "default" ? default_sample_mode(head_kind()) : sample_mode_from_string(eval_action);
    }

    TimestepSampling sampling_rule() const {
        return timestep_sampling == "length_weighted" ? TimestepSampling::length_weighted
                                                      : TimestepSampling::per_trajectory;
    }

    nlohmann::json to_json() const {
        return {{"hidden_width", hidden_width},
                {"learning_rate", learning_rate},
                {"dropout", dropout},
                {"batch_size", batch_size},
                {"steps", steps},
                {"outcome", outcome},
                {"goal_extractor", goal_extractor},
                {"normalize_return", normalize_return},
                {"normalize_inputs", normalize_inputs},
                {"head", head},
                {"bins", bins},
                {"seed", seed},
                {"validation_fraction", validation_fraction},
                {"eval_every", eval_every},
                {"eval_rollouts", eval_rollouts},
                {"probe_size", probe_size},
                {"timestep_sampling", timestep_sampling},
                {"eval_action", eval_action}};
    }

    /// Keys absent from `j` keep their defaults; unknown keys are an error.
    static TrainConfig from_json(const nlohmann::json& j) {
        TrainConfig c;
        const auto known = c.to_json();
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!known.contains(it.key())) throw UsageError("unknown config key '" + it.key() + "'");
        }
        try {
            auto get = [&](const char* key, auto& field) {
                if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
            };
            get("hidden_width", c.hidden_width);
            get("learning_rate", c.learning_rate);
            get("dropout", c.dropout);
            get("batch_size", c.batch_size);
            get("steps", c.steps);
            get("outcome", c.outcome);
            get("goal_extractor", c.goal_extractor);
            get("normalize_return", c.normalize_return);
            get("normalize_inputs", c.normalize_inputs);
            get("head", c.head);
            get("bins", c.bins);
            get("seed", c.seed);
            get("validation_fraction", c.validation_fraction);
            get("eval_every", c.eval_every);
            get("eval_rollouts", c.eval_rollouts);
            get("probe_size", c.probe_size);
            get("timestep_sampling", c.timestep_sampling);
            get("eval_action", c.eval_action);
        } catch (const nlohmann::json::exception& e) {
            throw UsageError(std::string("bad config value: ") + e.what());
        }
        c.validate();
        return c;
    }

    bool operator==(const TrainConfig&) const = default;
};

/// Outcome spec for a config on a given env. Normalization bounds, when
/// requested, come from the dataset the policy trains on.
inline OutcomeSpec make_outcome(const TrainConfig& c, const EnvSpec& env, const Dataset& train_data) {
    if (c.outcome == "none") return NoOutcome{};
    if (c.outcome == "goal") {
        const std::string id = c.goal_extractor.empty() ? env.goal_extractor_id : c.goal_extractor;
        if (id.empty()) throw UsageError(env.id + " has no goal extractor; pass one explicitly");
        return GoalOutcome{id};
    }
    if (c.normalize_return) return normalized_return_outcome(train_data);
    return AvgReturnOutcome{};
}

inline nlohmann::json outcome_to_json(const OutcomeSpec& o) {
    nlohmann::json j{{"kind", outcome_name(o)}};
    if (const auto* g = std::get_if<GoalOutcome>(&o)) j["extractor"] = g->extractor_id;
    if (const auto* r = std::get_if<AvgReturnOutcome>(&o)) {
        j["normalize"] = r->normalize;
        j["lo"] = r->lo;
        j["hi"] = r->hi;
    }
    return j;
}

inline OutcomeSpec outcome_from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "none") return NoOutcome{};
    if (kind == "goal") return GoalOutcome{j.at("extractor").get<std::string>()};
    if (kind == "return") {
        return AvgReturnOutcome{j.at("normalize").get<bool>(), j.at("lo").get<double>(), j.at("hi").get<double>()};
    }
    throw UsageError("unknown outcome kind '" + kind + "'");
}

enum class EpochConvention { pair_count, fixed };

/// Examples per epoch. pair_count: every (start, goal) pair of a full-length
/// trajectory, N * C(H, 2); fixed: a configured constant.
inline std::uint64_t epoch_length(std::size_t n_trajectories, std::size_t horizon, EpochConvention convention,
                                  std::uint64_t fixed_length = 2450000) {
    if (convention == EpochConvention::fixed) return fixed_length;
    const std::uint64_t pairs = static_cast<std::uint64_t>(horizon) * (horizon - 1) / 2;
    return static_cast<std::uint64_t>(n_trajectories) * pairs;
}

inline std::uint64_t epoch_length(const Dataset& ds, EpochConvention convention, std::uint64_t fixed_length = 2450000) {
    return epoch_length(ds.size(), ds.horizon, convention, fixed_length);
}

}  // namespace rvs
