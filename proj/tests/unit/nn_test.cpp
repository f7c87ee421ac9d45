#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rvs/nn/adam.hpp"
#include "rvs/nn/gradient_check.hpp"
#include "rvs/nn/loss.hpp"
#include "rvs/nn/sample.hpp"

using namespace rvs;

namespace {

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, lo, hi);
    return m;
}

HeadSpec cat_head(std::size_t dims, std::size_t bins) {
    return HeadSpec::categorical(dims, bins, std::vector<double>(dims, -1.0), std::vector<double>(dims, 1.0));
}

}  // namespace

TEST(Init, BiasesAndLogStdStartAtZero) {
    auto p = MlpPolicy::init(3, 4, HeadSpec::gaussian(2), 0.0, 7);
    for (std::size_t l = 0; l < 3; ++l) {
        for (Eigen::Index i = 0; i < p.bias(l).size(); ++i) EXPECT_EQ(p.bias(l)[i], 0.0);
    }
    ASSERT_EQ(p.log_std().size(), 2);
    EXPECT_EQ(p.log_std()[0], 0.0);
    EXPECT_EQ(p.log_std()[1], 0.0);
}

TEST(Init, DeterministicForSeed) {
    auto a = MlpPolicy::init(3, 4, HeadSpec::gaussian(2), 0.0, 7);
    auto b = MlpPolicy::init(3, 4, HeadSpec::gaussian(2), 0.0, 7);
    auto c = MlpPolicy::init(3, 4, HeadSpec::gaussian(2), 0.0, 8);
    EXPECT_TRUE(a == b);
    EXPECT_FALSE(a == c);
}

TEST(Init, ParameterCountWidth256) {
    auto p = MlpPolicy::init(3, 256, HeadSpec::gaussian(2), 0.0, 1);
    const std::size_t expected = 3 * 256 + 256 + 256 * 256 + 256 + 256 * 2 + 2 + 2;
    EXPECT_EQ(expected, 67332u);
    EXPECT_EQ(p.param_count(), expected);
}

TEST(Init, WeightsWithinFanInBound) {
    auto p = MlpPolicy::init(5, 16, cat_head(2, 7), 0.0, 3);
    const std::size_t fan_in[3] = {5, 16, 16};
    for (std::size_t l = 0; l < 3; ++l) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in[l]));
        EXPECT_LE(p.weights(l).cwiseAbs().maxCoeff(), limit);
        EXPECT_GT(p.weights(l).cwiseAbs().maxCoeff(), 0.5 * limit);
    }
}

TEST(Init, RejectsZeroDims) {
    EXPECT_THROW(MlpPolicy::init(0, 4, HeadSpec::gaussian(1), 0.0, 1), UsageError);
    EXPECT_THROW(MlpPolicy::init(2, 0, HeadSpec::gaussian(1), 0.0, 1), UsageError);
    EXPECT_THROW(MlpPolicy::init(2, 4, HeadSpec::gaussian(1), 1.0, 1), UsageError);
    EXPECT_THROW(cat_head(1, 1), UsageError);
}

TEST(Forward, ZeroWeightsGiveZeroMean) {
    auto p = MlpPolicy::init(3, 8, HeadSpec::gaussian(2), 0.0, 1);
    p.params().setZero();
    Rng rng(1);
    Matrix x = random_matrix(rng, 4, 3, -10, 10);
    ForwardCache c;
    forward(p, x, false, nullptr, c);
    EXPECT_EQ(c.out.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Forward, NoDropoutTrainEqualsEval) {
    auto p = MlpPolicy::init(3, 16, cat_head(2, 5), 0.0, 2);
    Rng rng(3);
    Matrix x = random_matrix(rng, 6, 3);
    ForwardCache a, b;
    forward(p, x, true, &rng, a);
    forward(p, x, false, nullptr, b);
    EXPECT_TRUE(a.out == b.out);
}

TEST(Forward, EvalModeIsPure) {
    auto p = MlpPolicy::init(4, 32, HeadSpec::gaussian(3), 0.3, 2);
    Rng rng(5);
    Matrix x = random_matrix(rng, 7, 4);
    ForwardCache a, b;
    forward(p, x, false, nullptr, a);
    forward(p, x, false, nullptr, b);
    EXPECT_TRUE(a.out == b.out);
}

TEST(Forward, InvertedDropoutPreservesExpectation) {
    auto p = MlpPolicy::init(3, 64, HeadSpec::gaussian(1), 0.5, 4);
    Rng rng(11);
    Matrix x = random_matrix(rng, 1, 3);
    ForwardCache eval;
    forward(p, x, false, nullptr, eval);
    const double eval_mass = eval.h1.sum();
    ASSERT_GT(eval_mass, 0.0);
    double mass = 0.0;
    const int draws = 10000;
    ForwardCache c;
    for (int i = 0; i < draws; ++i) {
        forward(p, x, true, &rng, c);
        mass += c.h1.sum();
    }
    EXPECT_NEAR(mass / draws / eval_mass, 1.0, 0.02);
}

TEST(Forward, RejectsBadInput) {
    auto p = MlpPolicy::init(3, 4, HeadSpec::gaussian(1), 0.0, 1);
    ForwardCache c;
    EXPECT_THROW(forward(p, Matrix::Zero(2, 4), false, nullptr, c), UsageError);
    Matrix x = Matrix::Zero(1, 3);
    x(0, 1) = std::nan("");
    EXPECT_THROW(forward(p, x, false, nullptr, c), NumericError);
}

TEST(Loss, UniformLogitsGiveLogBins) {
    auto head = cat_head(1, 4);
    Matrix out = Matrix::Zero(1, 4);
    Matrix a(1, 1);
    a << 0.3;
    EXPECT_NEAR(nll_loss(head, out, Vector(), a).loss, std::log(4.0), 1e-12);
}

TEST(Loss, StandardNormalAtMode) {
    Matrix out = Matrix::Zero(1, 1);
    Matrix a = Matrix::Zero(1, 1);
    Vector ls = Vector::Zero(1);
    EXPECT_NEAR(nll_loss(HeadSpec::gaussian(1), out, ls, a).loss, 0.5 * std::log(2.0 * std::numbers::pi), 1e-12);
    EXPECT_NEAR(0.5 * std::log(2.0 * std::numbers::pi), 0.918939, 1e-6);
}

TEST(Loss, CategoricalOutOfRangeClampsAndCounts) {
    auto head = cat_head(2, 3);
    Matrix out = Matrix::Zero(2, 6);
    out(0, 2) = 5.0;  // dim 0, top bin
    Matrix a(2, 2);
    a << 7.0, 0.0, -0.9, -3.0;
    auto r = nll_loss(head, out, Vector(), a);
    EXPECT_EQ(r.clamped, 2u);
    Matrix a_edge(2, 2);
    a_edge << 0.99, 0.0, -0.9, -0.99;
    EXPECT_DOUBLE_EQ(r.loss, nll_loss(head, out, Vector(), a_edge).loss);
}

TEST(Loss, CategoricalNonNegativeGaussianBounded) {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        auto head = cat_head(2, 5);
        Matrix out = random_matrix(rng, 8, 10, -20, 20);
        Matrix a = random_matrix(rng, 8, 2);
        EXPECT_GE(nll_loss(head, out, Vector(), a).loss, 0.0);

        Matrix mu = random_matrix(rng, 8, 2);
        Vector ls(2);
        ls << kLogStdMin, uniform(rng, kLogStdMin, kLogStdMax);
        // Per-sample floor: density at the mode with the smallest allowed sigma.
        const double mode_floor = 0.5 * std::log(2.0 * std::numbers::pi) + kLogStdMin;
        EXPECT_GE(nll_loss(HeadSpec::gaussian(2), mu, ls, a).loss, 2.0 * mode_floor);
    }
}

TEST(GradientCheck, SmallGaussianNetwork) {
    Rng rng(21);
    auto p = MlpPolicy::init(3, 2, HeadSpec::gaussian(2), 0.0, 21);
    p.log_std() << 0.3, -0.4;
    auto r = gradient_check(p, random_matrix(rng, 5, 3), random_matrix(rng, 5, 2), 1e-5);
    EXPECT_LE(r.max_relative_error, 1e-4);
}

TEST(GradientCheck, RandomNetworksBothHeads) {
    Rng rng(1234);
    for (int trial = 0; trial < 20; ++trial) {
        const auto in = 1 + uniform_index(rng, 6);
        const auto width = 1 + uniform_index(rng, 32);
        const auto batch = static_cast<Eigen::Index>(1 + uniform_index(rng, 16));
        const auto dims = 1 + uniform_index(rng, 3);
        for (HeadKind kind : {HeadKind::categorical, HeadKind::gaussian}) {
            HeadSpec head = kind == HeadKind::gaussian ? HeadSpec::gaussian(dims) : cat_head(dims, 2 + uniform_index(rng, 8));
            auto p = MlpPolicy::init(in, width, head, 0.0, rng());
            for (Eigen::Index i = 0; i < p.params().size(); ++i) p.params()[i] += uniform(rng, -0.1, 0.1);
            p.clamp_log_std();
            auto r = gradient_check(p, random_matrix(rng, batch, static_cast<Eigen::Index>(in)),
                                    random_matrix(rng, batch, static_cast<Eigen::Index>(dims)), 1e-5);
            EXPECT_LE(r.max_relative_error, 1e-4) << "trial " << trial << " head " << to_string(kind);
        }
    }
}

TEST(GradientCheck, FrozenDropoutMask) {
    Rng rng(77);
    auto p = MlpPolicy::init(4, 16, cat_head(2, 6), 0.3, 77);
    Rng mask_rng(5);
    auto r = gradient_check(p, random_matrix(rng, 8, 4), random_matrix(rng, 8, 2), 1e-5, true, &mask_rng);
    EXPECT_LE(r.max_relative_error, 1e-4);
}

TEST(GradientCheck, OutputLayerClosedForm) {
    // Gaussian NLL: dL/dmu = -(a - mu) / sigma^2 / n, so dL/dW3 = dmu^T h2 and
    // dL/dlog_std = mean(1 - (a - mu)^2 / sigma^2).
    Rng rng(31);
    auto p = MlpPolicy::init(2, 6, HeadSpec::gaussian(1), 0.0, 31);
    p.bias(0).setConstant(5.0);  // keep every ReLU active so the net is linear
    p.bias(1).setConstant(5.0);
    p.log_std()[0] = 0.25;
    Matrix x = random_matrix(rng, 4, 2);
    Matrix a = random_matrix(rng, 4, 1);

    ForwardCache c;
    forward(p, x, false, nullptr, c);
    ASSERT_EQ(c.gate1.minCoeff(), 1.0);
    ASSERT_EQ(c.gate2.minCoeff(), 1.0);
    const double var = std::exp(2.0 * 0.25);
    Matrix dmu = -(a - c.out) / var / 4.0;
    Matrix w3 = dmu.transpose() * c.h2;
    double dls = 0.0;
    for (int i = 0; i < 4; ++i) dls += (1.0 - std::pow(a(i, 0) - c.out(i, 0), 2) / var) / 4.0;

    auto r = gradient_check(p, x, a, 1e-5);
    const auto w3_off = p.weights(2).data() - p.params().data();
    for (Eigen::Index j = 0; j < 6; ++j) {
        EXPECT_NEAR(r.analytic[w3_off + j], w3(0, j), 1e-12);
        EXPECT_NEAR(r.numeric[w3_off + j], w3(0, j), 1e-7);
    }
    EXPECT_NEAR(r.analytic[static_cast<Eigen::Index>(p.log_std_offset())], dls, 1e-12);
    EXPECT_NEAR(r.numeric[static_cast<Eigen::Index>(p.log_std_offset())], dls, 1e-7);
}

TEST(Adam, ZeroGradientIsFixedPoint) {
    auto p = MlpPolicy::init(3, 8, HeadSpec::gaussian(2), 0.0, 1);
    auto before = p;
    auto s = AdamState::for_policy(p);
    adam_step(p, Vector::Zero(p.params().size()), s, 1e-3);
    EXPECT_TRUE(p == before);
    EXPECT_EQ(s.step, 1u);
    EXPECT_EQ(s.m.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(s.v.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Adam, FirstStepIsLrTimesSign) {
    Rng rng(4);
    Vector theta = Vector::Zero(50);
    Vector g(50);
    for (Eigen::Index i = 0; i < 50; ++i) g[i] = uniform(rng, -2.0, 2.0);
    AdamState s{Vector::Zero(50), Vector::Zero(50), 0};
    adam_update(theta, g, s, 1e-3);
    for (Eigen::Index i = 0; i < 50; ++i) {
        EXPECT_NEAR(theta[i], -1e-3 * (g[i] > 0 ? 1.0 : -1.0), 1e-3 * 1e-6);
    }
}

TEST(Adam, QuadraticConverges) {
    Vector theta = Vector::Zero(1);
    AdamState s{Vector::Zero(1), Vector::Zero(1), 0};
    double prev = 3.0;
    for (int step = 1; step <= 100; ++step) {
        Vector g(1);
        g[0] = 2.0 * (theta[0] - 3.0);
        adam_update(theta, g, s, 1e-2);
        const double dist = std::abs(theta[0] - 3.0);
        if (step > 10) {
            EXPECT_LT(dist, prev) << "step " << step;
        }
        prev = dist;
    }
    EXPECT_LT(prev, 3.0);
}

TEST(Adam, NonFiniteGradientAborts) {
    auto p = MlpPolicy::init(2, 4, HeadSpec::gaussian(1), 0.0, 1);
    auto before = p;
    auto s = AdamState::for_policy(p);
    Vector g = Vector::Ones(p.params().size());
    g[3] = std::numeric_limits<double>::infinity();
    EXPECT_THROW(adam_step(p, g, s, 1e-3), NumericError);
    EXPECT_TRUE(p == before);
    EXPECT_EQ(s.step, 0u);
}

TEST(Adam, LogStdStaysInBounds) {
    auto p = MlpPolicy::init(2, 4, HeadSpec::gaussian(2), 0.0, 1);
    auto s = AdamState::for_policy(p);
    Vector g = Vector::Zero(p.params().size());
    const auto off = static_cast<Eigen::Index>(p.log_std_offset());
    g[off] = 1.0;
    g[off + 1] = -1.0;
    for (int i = 0; i < 20; ++i) adam_step(p, g, s, 1.0);
    EXPECT_EQ(p.log_std()[0], kLogStdMin);
    EXPECT_EQ(p.log_std()[1], kLogStdMax);
}

TEST(Sample, DominantLogitDeterministic) {
    auto head = HeadSpec::categorical(1, 4, {0.0}, {4.0});
    Rng rng(1);
    double logits[4] = {10, 0, 0, 0};
    EXPECT_EQ(sample_action(head, logits, Vector(), SampleMode::deterministic, rng)[0], 0.5);
}

TEST(Sample, TieBreaksToLowestBin) {
    auto head = HeadSpec::categorical(1, 4, {0.0}, {4.0});
    Rng rng(1);
    double logits[4] = {1, 1, 1, 1};
    EXPECT_EQ(sample_action(head, logits, Vector(), SampleMode::deterministic, rng)[0], 0.5);
}

TEST(Sample, GaussianMeanPassthrough) {
    Rng rng(1);
    double mean[2] = {0.3, -0.2};
    Vector ls = Vector::Zero(2);
    auto a = sample_action(HeadSpec::gaussian(2), mean, ls, SampleMode::deterministic, rng);
    EXPECT_EQ(a[0], 0.3);
    EXPECT_EQ(a[1], -0.2);
}

TEST(Sample, CategoricalStochasticFollowsSoftmax) {
    auto head = HeadSpec::categorical(1, 3, {-0.5}, {2.5});
    Rng rng(8);
    double logits[3] = {0.0, std::log(2.0), std::log(3.0)};
    int counts[3] = {0, 0, 0};
    const int n = 60000;
    for (int i = 0; i < n; ++i) ++counts[static_cast<int>(sample_action(head, logits, Vector(), SampleMode::stochastic, rng)[0])];
    for (int k = 0; k < 3; ++k) {
        const double p = (k + 1) / 6.0;
        EXPECT_NEAR(counts[k], n * p, 4.0 * std::sqrt(n * p * (1 - p)));
    }
}

TEST(Head, BinCentersAreMidpoints) {
    auto head = HeadSpec::categorical(1, 5, {-0.5}, {4.5});
    for (std::size_t k = 0; k < 5; ++k) {
        EXPECT_DOUBLE_EQ(head.bin_center(0, k), static_cast<double>(k));
        bool clamped = true;
        EXPECT_EQ(head.bin_index(0, static_cast<double>(k), clamped), k);
        EXPECT_FALSE(clamped);
    }
}
