#pragma once

// Training loop: sample relabeled batch, NLL, Adam; repeat for a fixed number
// of gradient steps. One engine (seeded from the config) drives batching,
// dropout and any mid-training evaluation, so a seed fixes every number.

#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rvs/common.hpp"
#include "rvs/data/filters.hpp"
#include "rvs/data/io.hpp"
#include "rvs/data/outcome.hpp"
#include "rvs/env/spec.hpp"
#include "rvs/nn/adam.hpp"
#include "rvs/nn/loss.hpp"
#include "rvs/train/artifact.hpp"
#include "rvs/train/config.hpp"

namespace rvs {

struct EvalMetrics {
    double mean_return = 0.0;
    std::optional<double> success_rate;
};

struct TrainHooks {
    /// Mid-training evaluation (only called when config.eval_rollouts > 0). It
    /// must draw all of its randomness from the engine it is handed.
    std::function<EvalMetrics(const MlpPolicy&, std::size_t rollouts, Rng&)> evaluate;
    /// Called with the current state after every metrics record.
    std::function<void(const PolicyArtifact&, const MetricsLog&)> on_checkpoint;
};

struct TrainResult {
    PolicyArtifact artifact;
    MetricsLog metrics;
    /// Examples drawn per original dataset trajectory, summed over every
    /// gradient step of this call.
    std::vector<std::uint64_t> gradient_examples;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> validation_indices;
};

inline std::string rng_state_string(const Rng& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

inline Rng rng_from_state(const std::string& state) {
    Rng rng;
    std::istringstream is(state);
    is >> rng;
    if (!is) throw ParseError("bad random-engine state", 0, 0);
    return rng;
}

class Trainer {
public:
    /// Splits `ds` into train / validation trajectories by the config seed and
    /// builds the fixed loss-probe batches.
    Trainer(const Dataset& ds, const EnvSpec& env, TrainConfig config)
        : config_(std::move(config)), env_(env), dataset_hash_(dataset_hash(ds)) {
        config_.validate();
        ds.validate();
        if (ds.env_id != env.id) throw UsageError("dataset was collected on " + ds.env_id + ", not " + env.id);
        if (config_.validation_fraction > 0.0 && ds.size() >= 2) {
            Split s = split_train_validation(ds, 1.0 - config_.validation_fraction, config_.seed);
            train_ = std::move(s.train);
            validation_ = std::move(s.validation);
            train_indices_ = std::move(s.train_indices);
            validation_indices_ = std::move(s.validation_indices);
        } else {
            train_ = ds;
            validation_ = ds.empty_like();
            train_indices_.resize(ds.size());
            for (std::size_t i = 0; i < ds.size(); ++i) train_indices_[i] = i;
        }
        n_original_ = ds.size();
        outcome_ = make_outcome(config_, env_, train_);
        sampler_.emplace(train_, outcome_, config_.sampling_rule());
        head_ = env_.head(config_.head_kind(), config_.bins);

        if (config_.normalize_inputs) input_stats();

        Rng probe_rng = make_rng(config_.seed, "probe");
        sampler_->sample(config_.probe_size, probe_rng, train_probe_);
        try {
            BatchSampler val_sampler(validation_, outcome_, config_.sampling_rule());
            Batch b;
            val_sampler.sample(config_.probe_size, probe_rng, b);
            val_probe_ = std::move(b);
        } catch (const UsageError&) {
            // no usable validation trajectories; val_loss is logged as nan
        }
    }

    // The sampler points into train_.
    Trainer(const Trainer&) = delete;
    Trainer& operator=(const Trainer&) = delete;

    const TrainConfig& config() const noexcept { return config_; }
    const OutcomeSpec& outcome() const noexcept { return outcome_; }
    const Dataset& train_data() const noexcept { return train_; }
    const Dataset& validation_data() const noexcept { return validation_; }
    std::size_t input_dim() const { return sampler_->input_dim(); }
    const Vector& input_shift() const noexcept { return input_shift_; }
    const Vector& input_scale() const noexcept { return input_scale_; }

    /// Untrained artifact at step 0.
    PolicyArtifact initial_artifact() const {
        PolicyArtifact a;
        a.policy = MlpPolicy::init(input_dim(), config_.hidden_width, head_, config_.dropout, config_.seed);
        if (config_.normalize_inputs) a.policy.set_input_normalization(input_shift_, input_scale_);
        a.adam = AdamState::for_policy(a.policy);
        a.config = config_;
        a.outcome = outcome_;
        a.env_id = env_.id;
        a.dataset_hash = dataset_hash_;
        a.gradient_step = 0;
        a.state_dim = env_.state_dim;
        a.rng_state = rng_state_string(make_rng(config_.seed, "train"));
        return a;
    }

    std::pair<double, double> probe_losses(const MlpPolicy& p) const {
        const double train = evaluate_loss(p, train_probe_.inputs, train_probe_.actions);
        const double val = val_probe_ ? evaluate_loss(p, val_probe_->inputs, val_probe_->actions) : NAN;
        return {train, val};
    }

    /// Trains from scratch to config.steps.
    TrainResult run(const TrainHooks& hooks = {}) const { return resume(initial_artifact(), {}, hooks); }

    /// Continues `start` (a fresh or checkpointed artifact) to config.steps.
    /// The result is bit-identical to an uninterrupted run. A fresh artifact
    /// gets a step-0 metrics record.
    TrainResult resume(PolicyArtifact start, MetricsLog log, const TrainHooks& hooks = {}) const {
        if (start.policy.input_dim() != input_dim() || start.policy.head() != head_) {
            throw UsageError("checkpoint architecture does not match this dataset and config");
        }
        if (start.gradient_step > config_.steps) throw UsageError("checkpoint is past the configured step count");
        TrainResult res;
        res.gradient_examples.assign(n_original_, 0);
        res.train_indices = train_indices_;
        res.validation_indices = validation_indices_;
        PolicyArtifact& a = res.artifact;
        a = std::move(start);
        a.config = config_;
        Rng rng = rng_from_state(a.rng_state);

        auto record = [&] {
            MetricsRecord m;
            m.step = a.gradient_step;
            std::tie(m.train_loss, m.val_loss) = probe_losses(a.policy);
            if (!std::isfinite(m.train_loss)) throw NumericError("non-finite training loss at step " + std::to_string(m.step));
            if (config_.eval_rollouts > 0 && hooks.evaluate) {
                const EvalMetrics e = hooks.evaluate(a.policy, config_.eval_rollouts, rng);
                m.eval_return = e.mean_return;
                m.eval_success = e.success_rate;
            }
            log.records.push_back(m);
            a.rng_state = rng_state_string(rng);
            if (hooks.on_checkpoint) hooks.on_checkpoint(a, log);
        };

        if (a.gradient_step == 0) record();
        Batch batch;
        ForwardCache cache;
        Vector grad;
        while (a.gradient_step < config_.steps) {
            sampler_->sample(config_.batch_size, rng, batch);
            const NllResult r = loss_and_gradient(a.policy, batch.inputs, batch.actions, true, &rng, cache, grad);
            if (!std::isfinite(r.loss)) {
                throw NumericError("non-finite loss at step " + std::to_string(a.gradient_step + 1));
            }
            adam_step(a.policy, grad, a.adam, config_.learning_rate);
            ++a.gradient_step;
            for (std::size_t ti : batch.trajectory_index) ++res.gradient_examples[train_indices_[ti]];
            if (a.gradient_step % config_.eval_every == 0 || a.gradient_step == config_.steps) record();
        }
        a.rng_state = rng_state_string(rng);
        res.metrics = std::move(log);
        return res;
    }

private:
    TrainConfig config_;
    EnvSpec env_;
    std::string dataset_hash_;
    Dataset train_;
    Dataset validation_;
    std::vector<std::size_t> train_indices_;
    std::vector<std::size_t> validation_indices_;
    std::size_t n_original_ = 0;
    OutcomeSpec outcome_;
    // Per-column mean and 1/std of inputs over training examples, drawn with
    // the batch distribution on a stream of their own. Constant columns are
    // only centered.
    void input_stats() {
        Batch b;
        Rng rng = make_rng(config_.seed, "input-stats");
        sampler_->sample(std::max<std::size_t>(config_.probe_size, 4096), rng, b);
        input_shift_ = b.inputs.colwise().mean().transpose();
        const Matrix centered = b.inputs.rowwise() - input_shift_.transpose();
        const Vector sd = (centered.array().square().colwise().sum() / static_cast<double>(b.inputs.rows())).sqrt().transpose();
        if (!input_shift_.allFinite() || !sd.allFinite()) throw NumericError("input statistics overflow");
        input_scale_ = sd.unaryExpr([](double v) { return v > 1e-8 ? 1.0 / v : 1.0; });
    }

    Vector input_shift_, input_scale_;
    std::optional<BatchSampler> sampler_;
    HeadSpec head_;
    Batch train_probe_;
    std::optional<Batch> val_probe_;
};

inline TrainResult train(const Dataset& ds, const EnvSpec& env, const TrainConfig& config,
                         const TrainHooks& hooks = {}) {
    return Trainer(ds, env, config).run(hooks);
}

}  // namespace rvs
