#include <gtest/gtest.h>

#include <filesystem>

#include "rvs/env/collect.hpp"
#include "rvs/env/registry.hpp"
#include "rvs/train/sweep.hpp"
#include "rvs/train/trainer.hpp"

using namespace rvs;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "rvs_unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

TrainConfig small_config() {
    TrainConfig c;
    c.hidden_width = 16;
    c.batch_size = 16;
    c.steps = 20;
    c.eval_every = 5;
    c.probe_size = 32;
    c.seed = 3;
    return c;
}

const Dataset& four_rooms_data() {
    static const Dataset ds = collect_random(*make_environment("four_rooms"), 2000, 11);
    return ds;
}

// One trajectory of length 1 on PointReach: a single (s, w, a) triple.
Dataset single_triple(const std::vector<double>& s, const std::vector<double>& a, double r) {
    auto env = make_environment("point_reach");
    Dataset ds = empty_dataset(*env, "toy");
    Trajectory t(2, 2);
    t.push(s, a, r);
    t.terminated = true;
    ds.trajectories.push_back(t);
    return ds;
}

}  // namespace

TEST(EpochLength, PairCount) {
    EXPECT_EQ(epoch_length(1000, 50, EpochConvention::pair_count), 1225000u);
    EXPECT_EQ(epoch_length(7, 2, EpochConvention::pair_count), 7u);
    EXPECT_EQ(epoch_length(3, 50, EpochConvention::fixed), 2450000u);
    EXPECT_EQ(epoch_length(3, 50, EpochConvention::fixed, 99), 99u);
}

TEST(TrainConfig, JsonRoundTripAndUnknownKeys) {
    TrainConfig c = small_config();
    c.head = "gaussian";
    c.learning_rate = 3.0e-4;
    EXPECT_EQ(TrainConfig::from_json(c.to_json()), c);
    EXPECT_THROW(TrainConfig::from_json({{"widht", 3}}), UsageError);
    EXPECT_THROW(TrainConfig::from_json({{"dropout", 1.0}}), UsageError);
    EXPECT_THROW(TrainConfig::from_json({{"steps", "many"}}), UsageError);
}

TEST(Train, ZeroStepsReturnsInit) {
    auto env = make_environment("four_rooms");
    TrainConfig c = small_config();
    c.steps = 0;
    Trainer trainer(four_rooms_data(), env->spec(), c);
    const auto res = trainer.run();
    auto init = MlpPolicy::init(4, 16, env->spec().head(HeadKind::categorical), c.dropout, c.seed);
    init.set_input_normalization(trainer.input_shift(), trainer.input_scale());
    EXPECT_EQ(res.artifact.policy, init);
    ASSERT_EQ(res.metrics.records.size(), 1u);
    EXPECT_EQ(res.metrics.records[0].step, 0u);
}

TEST(Train, StepCountAndMetricsSchedule) {
    auto env = make_environment("four_rooms");
    TrainConfig c = small_config();
    c.steps = 23;
    const auto res = train(four_rooms_data(), env->spec(), c);
    EXPECT_EQ(res.artifact.gradient_step, 23u);
    EXPECT_EQ(res.artifact.adam.step, 23u);
    std::vector<std::uint64_t> steps;
    for (const auto& r : res.metrics.records) {
        steps.push_back(r.step);
        EXPECT_TRUE(std::isfinite(r.train_loss));
        EXPECT_TRUE(std::isfinite(r.val_loss));
    }
    EXPECT_EQ(steps, (std::vector<std::uint64_t>{0, 5, 10, 15, 20, 23}));
    const std::string csv = res.metrics.to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,train_loss,val_loss,eval_return,eval_success");
}

TEST(Train, MemorizesSingleTriple) {
    auto env = make_environment("point_reach");
    const std::vector<double> a{0.3, -0.7};
    const Dataset ds = single_triple({4.0, 6.0}, a, 0.0);
    TrainConfig c;
    c.outcome = "return";
    c.head = "gaussian";
    c.hidden_width = 32;
    c.dropout = 0.0;
    c.batch_size = 8;
    c.steps = 2000;
    c.eval_every = 500;
    c.validation_fraction = 0.0;
    c.probe_size = 8;
    const auto res = train(ds, env->spec(), c);
    Matrix in(1, 3);
    in << 4.0, 6.0, 0.0;
    ForwardCache cache;
    forward(res.artifact.policy, in, false, nullptr, cache);
    EXPECT_LT(std::abs(cache.out(0, 0) - a[0]), 1e-3);
    EXPECT_LT(std::abs(cache.out(0, 1) - a[1]), 1e-3);
    // NLL heads toward the clamped-sigma floor: log_std decreasing, loss far below its start.
    EXPECT_LT(res.metrics.records.back().train_loss, res.metrics.records.front().train_loss - 2.0);
    EXPECT_LT(res.artifact.policy.log_std()[0], -1.0);
}

TEST(Train, LossDropsOnToyDataset) {
    // 8 distinct (state, return, action) examples from 8 length-1 trajectories.
    auto env = make_environment("four_rooms");
    Dataset ds = empty_dataset(*env, "toy");
    for (int i = 0; i < 8; ++i) {
        Trajectory t(2, 1);
        const double a = static_cast<double>(i % 5);
        t.push(std::vector<double>{static_cast<double>(1 + i), 1.0}, std::span<const double>(&a, 1), 0.0);
        ds.trajectories.push_back(t);
    }
    TrainConfig c;
    c.outcome = "return";
    c.steps = 5000;
    c.eval_every = 5000;
    c.validation_fraction = 0.0;
    c.hidden_width = 64;
    c.batch_size = 32;
    c.probe_size = 64;
    const auto res = train(ds, env->spec(), c);
    EXPECT_LT(res.metrics.records.back().train_loss, 0.1 * res.metrics.records.front().train_loss);
}

TEST(Train, Deterministic) {
    auto env = make_environment("four_rooms");
    const auto a = train(four_rooms_data(), env->spec(), small_config());
    const auto b = train(four_rooms_data(), env->spec(), small_config());
    EXPECT_EQ(a.artifact, b.artifact);
    EXPECT_EQ(a.metrics, b.metrics);
    EXPECT_EQ(encode_checkpoint(a.artifact), encode_checkpoint(b.artifact));
    TrainConfig other = small_config();
    other.seed = 4;
    EXPECT_FALSE(train(four_rooms_data(), env->spec(), other).artifact.policy == a.artifact.policy);
}

TEST(Train, ValidationTrajectoriesGetNoGradient) {
    auto env = make_environment("four_rooms");
    const auto res = train(four_rooms_data(), env->spec(), small_config());
    ASSERT_FALSE(res.validation_indices.empty());
    std::uint64_t total = 0;
    for (auto i : res.validation_indices) EXPECT_EQ(res.gradient_examples[i], 0u);
    for (auto i : res.train_indices) total += res.gradient_examples[i];
    EXPECT_EQ(total, 20u * 16u);
}

TEST(Train, InputsAreStandardized) {
    auto env = make_environment("four_rooms");
    const Dataset ds = collect_random(*env, 2000, 3);
    TrainConfig c;
    c.steps = 0;
    Trainer trainer(ds, env->spec(), c);
    Batch b;
    Rng rng = make_rng(11, "check");
    BatchSampler(trainer.train_data(), trainer.outcome()).sample(20000, rng, b);
    const MlpPolicy p = trainer.initial_artifact().policy;
    for (Eigen::Index j = 0; j < b.inputs.cols(); ++j) {
        const Vector z = (b.inputs.col(j).array() - p.input_shift()[j]) * p.input_scale()[j];
        EXPECT_NEAR(z.mean(), 0.0, 0.05);
        EXPECT_NEAR(std::sqrt(z.array().square().mean()), 1.0, 0.05);
    }
    c.normalize_inputs = false;
    Trainer raw(ds, env->spec(), c);
    EXPECT_EQ(raw.initial_artifact().policy.input_scale(), Vector::Ones(b.inputs.cols()));
}

TEST(Train, NonFiniteLossThrows) {
    auto env = make_environment("point_reach");
    const Dataset ds = single_triple({1e200, -1e200}, {0.5, 0.5}, 0.0);
    TrainConfig c = small_config();
    c.outcome = "return";
    c.head = "gaussian";
    c.validation_fraction = 0.0;
    EXPECT_THROW(train(ds, env->spec(), c), NumericError);
}

TEST(Checkpoint, RoundTripBitExact) {
    auto env = make_environment("four_rooms");
    const auto res = train(four_rooms_data(), env->spec(), small_config());
    const auto path = temp_path("ckpt_roundtrip.bin");
    save_checkpoint(res.artifact, path);
    const auto loaded = load_checkpoint(path);
    EXPECT_EQ(loaded, res.artifact);
    EXPECT_EQ(encode_checkpoint(loaded), encode_checkpoint(res.artifact));
}

TEST(Checkpoint, ResumeMatchesUninterrupted) {
    auto env = make_environment("four_rooms");
    TrainConfig c = small_config();
    c.steps = 10;
    const auto full = train(four_rooms_data(), env->spec(), c);

    const auto path = temp_path("ckpt_resume.bin");
    TrainHooks hooks;
    hooks.on_checkpoint = [&](const PolicyArtifact& a, const MetricsLog&) {
        if (a.gradient_step == 5) save_checkpoint(a, path);
    };
    train(four_rooms_data(), env->spec(), c, hooks);
    const PolicyArtifact mid = load_checkpoint(path);
    ASSERT_EQ(mid.gradient_step, 5u);
    const auto resumed = Trainer(four_rooms_data(), env->spec(), c).resume(mid, {});
    EXPECT_EQ(resumed.artifact, full.artifact);
    EXPECT_EQ(resumed.metrics.records.back(), full.metrics.records.back());
}

TEST(Checkpoint, HashMismatchWarnsAndTruncationFails) {
    auto env = make_environment("four_rooms");
    const auto res = train(four_rooms_data(), env->spec(), small_config());
    const auto path = temp_path("ckpt_warn.bin");
    save_checkpoint(res.artifact, path);
    std::vector<std::string> warnings;
    EXPECT_NO_THROW(load_checkpoint(path, res.artifact.dataset_hash, &warnings));
    EXPECT_TRUE(warnings.empty());
    EXPECT_NO_THROW(load_checkpoint(path, std::string("0000000000000000"), &warnings));
    ASSERT_EQ(warnings.size(), 1u);

    const std::string bytes = encode_checkpoint(res.artifact);
    for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
        EXPECT_THROW(decode_checkpoint(std::string_view(bytes).substr(0, cut)), ParseError) << cut;
    }
    EXPECT_THROW(decode_checkpoint(bytes + "x"), ParseError);
}

TEST(Sweep, CardinalityAndRerun) {
    auto env = make_environment("four_rooms");
    TrainConfig base = small_config();
    base.steps = 10;
    SweepAxes axes{{8, 16}, {0.0, 0.1}, {}};
    ArtifactEvaluator eval = [](const PolicyArtifact& a, std::uint64_t seed) {
        // stand-in metric: a pure function of the parameters and the seed
        return EvalMetrics{a.policy.params().sum() + static_cast<double>(seed % 7), std::nullopt};
    };
    const auto rows = run_sweep(four_rooms_data(), env->spec(), base, axes, {1, 2, 3, 4, 5}, eval, 3);
    ASSERT_EQ(rows.size(), 20u);
    for (const auto& r : rows) EXPECT_TRUE(r.error.empty()) << r.error;
    const auto serial = run_sweep(four_rooms_data(), env->spec(), base, axes, {1, 2, 3, 4, 5}, eval, 1);
    EXPECT_EQ(rows, serial);
    SweepRow again = rows[13];
    again.final_train_loss = again.final_val_loss = NAN;
    again.eval_return.reset();
    run_sweep_cell(four_rooms_data(), env->spec(), base, eval, again);
    EXPECT_EQ(again, rows[13]);

    EXPECT_EQ(run_sweep(four_rooms_data(), env->spec(), base, {{64}, {0.0}, {}}, {0}, eval).size(), 1u);
}

TEST(Sweep, FailedCellIsRecorded) {
    auto env = make_environment("point_reach");
    const Dataset ds = single_triple({1e200, -1e200}, {0.5, 0.5}, 0.0);
    TrainConfig base = small_config();
    base.outcome = "return";
    base.head = "gaussian";
    base.validation_fraction = 0.0;
    const auto rows = run_sweep(ds, env->spec(), base, {{8}, {0.0}, {}}, {1, 2}, nullptr);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_FALSE(rows[0].error.empty());
}
