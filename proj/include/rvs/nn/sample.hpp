#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rvs/common.hpp"
#include "rvs/nn/mlp.hpp"

namespace rvs {

enum class SampleMode { stochastic, deterministic };

inline SampleMode sample_mode_from_string(const std::string& s) {
    if (s == "stochastic") return SampleMode::stochastic;
    if (s == "deterministic") return SampleMode::deterministic;
    throw UsageError("unknown action selection '" + s + "' (expected stochastic or deterministic)");
}

inline std::string to_string(SampleMode m) { return m == SampleMode::stochastic ? "stochastic" : "deterministic"; }

/// Eval-time default: sample a categorical head, take the mean of a Gaussian.
inline SampleMode default_sample_mode(HeadKind k) {
    return k == HeadKind::categorical ? SampleMode::stochastic : SampleMode::deterministic;
}

/// Draw one action from a single row of head outputs.
inline std::vector<double> sample_action(const HeadSpec& head, const double* out_row, const Vector& log_std,
                                         SampleMode mode, Rng& rng) {
    std::vector<double> action(head.action_dims);
    if (head.kind == HeadKind::categorical) {
        for (std::size_t d = 0; d < head.action_dims; ++d) {
            const double* logits = out_row + d * head.bins;
            std::size_t best = 0;
            for (std::size_t k = 1; k < head.bins; ++k) {
                if (logits[k] > logits[best]) best = k;
            }
            std::size_t pick = best;
            if (mode == SampleMode::stochastic) {
                std::vector<double> p(head.bins);
                double sum = 0.0;
                for (std::size_t k = 0; k < head.bins; ++k) sum += p[k] = std::exp(logits[k] - logits[best]);
                double u = uniform01(rng) * sum;
                pick = head.bins - 1;
                for (std::size_t k = 0; k < head.bins; ++k) {
                    u -= p[k];
                    if (u < 0.0) {
                        pick = k;
                        break;
                    }
                }
            }
            action[d] = head.bin_center(d, pick);
        }
    } else {
        for (std::size_t d = 0; d < head.action_dims; ++d) {
            action[d] = out_row[d];
            if (mode == SampleMode::stochastic) {
                action[d] += std::exp(log_std[static_cast<Eigen::Index>(d)]) * standard_normal(rng);
            }
        }
    }
    return action;
}

/// Reusable single-input inference for rollouts; owns its scratch so one
/// instance per worker thread is enough.
class PolicyRunner {
public:
    explicit PolicyRunner(const MlpPolicy& policy) : policy_(&policy), input_(1, policy.input_dim()) {}

    std::vector<double> act(const std::vector<double>& input, SampleMode mode, Rng& rng) {
        if (input.size() != policy_->input_dim()) throw UsageError("policy input has the wrong dimension");
        for (std::size_t i = 0; i < input.size(); ++i) input_(0, static_cast<Eigen::Index>(i)) = input[i];
        forward(*policy_, input_, false, nullptr, cache_);
        const Vector log_std = policy_->log_std();
        return sample_action(policy_->head(), cache_.out.data(), log_std, mode, rng);
    }

private:
    const MlpPolicy* policy_;
    Matrix input_;
    ForwardCache cache_;
};

}  // namespace rvs
