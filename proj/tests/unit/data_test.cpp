#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "rvs/data/filters.hpp"
#include "rvs/data/io.hpp"
#include "rvs/data/outcome.hpp"

using namespace rvs;

namespace {

Trajectory make_traj(const std::vector<std::vector<double>>& states, const std::vector<double>& rewards,
                     bool terminated = false) {
    Trajectory t(states.front().size(), 1);
    for (std::size_t k = 0; k < states.size(); ++k) {
        const double a = static_cast<double>(k % 5);
        t.push(states[k], std::span<const double>(&a, 1), rewards[k]);
    }
    t.terminated = terminated;
    return t;
}

Trajectory scalar_traj(std::size_t T, Rng& rng, std::size_t state_dim = 2) {
    Trajectory t(state_dim, 1);
    for (std::size_t k = 0; k < T; ++k) {
        std::vector<double> s(state_dim);
        for (auto& v : s) v = uniform(rng, -3.0, 3.0);
        const double a = static_cast<double>(uniform_index(rng, 5));
        t.push(s, std::span<const double>(&a, 1), std::floor(uniform(rng, 0.0, 3.0)));
    }
    return t;
}

Dataset random_dataset(std::size_t n, std::size_t horizon, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds{"toy", horizon, 2, 1, "test seed " + std::to_string(seed), {}};
    for (std::size_t i = 0; i < n; ++i) {
        auto t = scalar_traj(1 + uniform_index(rng, horizon), rng);
        t.terminated = t.length() < horizon;
        ds.trajectories.push_back(std::move(t));
    }
    return ds;
}

// Independent oracle: zero-pad rewards to H, then sum the 1-based definition.
double rtg_oracle(const Trajectory& tr, std::size_t t1, std::size_t H) {
    std::vector<double> padded(H, 0.0);
    for (std::size_t k = 0; k < tr.length(); ++k) padded[k] = tr.rewards[k];
    double sum = 0.0;
    for (std::size_t k = t1; k <= H; ++k) sum += padded[k - 1];
    return sum / static_cast<double>(H - t1 + 1);
}

std::filesystem::path temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "rvs_unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(SampleGoal, LastValidStepHasSingletonSupport) {
    auto tr = make_traj({{0}, {1}, {2}, {3}, {4}}, {0, 0, 0, 0, 0});
    auto id = goal_extractor("identity").fn;
    Rng rng(1);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_goal(tr, 3, id, rng), std::vector<double>{4});
}

TEST(SampleGoal, UniformOverFutureStates) {
    auto tr = make_traj({{0}, {1}, {2}, {3}, {4}}, {0, 0, 0, 0, 0});
    auto id = goal_extractor("identity").fn;
    Rng rng(2);
    std::map<double, int> counts;
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[sample_goal(tr, 1, id, rng)[0]];
    ASSERT_EQ(counts.size(), 3u);
    const double sigma = std::sqrt(n * (1.0 / 3) * (2.0 / 3));
    for (double s : {2.0, 3.0, 4.0}) EXPECT_NEAR(counts[s], n / 3.0, 3 * sigma);
}

TEST(SampleGoal, ExtractorPassthroughAndSlice) {
    auto tr = make_traj({{3, 4}, {3, 4}}, {0, 0});
    Rng rng(3);
    EXPECT_EQ(sample_goal(tr, 0, goal_extractor("identity").fn, rng), (std::vector<double>{3, 4}));
    auto tr3 = make_traj({{0, 0, 9}, {1, 2, 7}}, {0, 0});
    EXPECT_EQ(sample_goal(tr3, 0, goal_extractor("xy").fn, rng), (std::vector<double>{1, 2}));
    EXPECT_THROW(sample_goal(tr3, 1, goal_extractor("xy").fn, rng), UsageError);
    EXPECT_THROW(goal_extractor("nope"), UsageError);
}

TEST(SampleGoal, SupportMatchesEnumerationOnToyTrajectories) {
    // Toy env with 4 states; every trajectory of length <= 6 drawn from a few seeds.
    Rng rng(4);
    auto id = goal_extractor("identity").fn;
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t T = 2 + uniform_index(rng, 5);
        std::vector<std::vector<double>> states;
        for (std::size_t k = 0; k < T; ++k) states.push_back({static_cast<double>(uniform_index(rng, 4))});
        auto tr = make_traj(states, std::vector<double>(T, 0.0));
        for (std::size_t t = 0; t + 1 < T; ++t) {
            std::set<double> expected;
            for (std::size_t f = t + 1; f < T; ++f) expected.insert(states[f][0]);
            std::set<double> seen;
            for (int d = 0; d < 2000; ++d) seen.insert(sample_goal(tr, t, id, rng)[0]);
            EXPECT_EQ(seen, expected);
        }
    }
}

TEST(AvgReturnToGo, Examples) {
    auto tr = make_traj({{0}, {0}, {0}, {0}, {0}}, {1, 0, 2, 0, 1});
    EXPECT_DOUBLE_EQ(avg_return_to_go(tr, 1, 5), 0.75);
    auto zeros = make_traj({{0}, {0}, {0}}, {0, 0, 0});
    for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(avg_return_to_go(zeros, t, 7), 0.0);
    auto early = make_traj({{0}, {0}, {0}}, {1, 1, 1}, true);
    EXPECT_DOUBLE_EQ(avg_return_to_go(early, 0, 5), 0.6);
    EXPECT_THROW(avg_return_to_go(early, 3, 5), UsageError);
    EXPECT_THROW(avg_return_to_go(early, 0, 2), UsageError);
}

TEST(AvgReturnToGo, BitExactAgainstDirectSummation) {
    Rng rng(5);
    for (int c = 0; c < 1000; ++c) {
        const std::size_t T = 1 + uniform_index(rng, 20);
        auto tr = scalar_traj(T, rng);
        for (auto& r : tr.rewards) r = uniform(rng, -1.0, 2.0);
        const std::size_t H = T + uniform_index(rng, 10);
        const std::size_t t = uniform_index(rng, T);
        EXPECT_EQ(avg_return_to_go(tr, t, H), rtg_oracle(tr, t + 1, H));
    }
}

TEST(AvgReturnToGo, NonIncreasingInHorizon) {
    Rng rng(6);
    for (int c = 0; c < 200; ++c) {
        auto tr = scalar_traj(1 + uniform_index(rng, 10), rng);
        const std::size_t t = uniform_index(rng, tr.length());
        double prev = avg_return_to_go(tr, t, tr.length());
        for (std::size_t H = tr.length() + 1; H < tr.length() + 10; ++H) {
            const double w = avg_return_to_go(tr, t, H);
            EXPECT_LE(w, prev);
            prev = w;
        }
    }
}

TEST(BuildBatch, SingleValidTriple) {
    Dataset ds{"toy", 5, 2, 1, "", {make_traj({{1, 2}, {3, 4}}, {0, 0})}};
    Rng rng(7);
    auto b = build_batch(ds, GoalOutcome{"identity"}, 32, rng);
    for (Eigen::Index i = 0; i < 32; ++i) {
        EXPECT_EQ(b.inputs(i, 0), 1);
        EXPECT_EQ(b.inputs(i, 1), 2);
        EXPECT_EQ(b.inputs(i, 2), 3);
        EXPECT_EQ(b.inputs(i, 3), 4);
        EXPECT_EQ(b.actions(i, 0), 0);
    }
}

TEST(BuildBatch, ShapeContract) {
    auto ds = random_dataset(20, 10, 8);
    Rng rng(8);
    auto g = build_batch(ds, GoalOutcome{"identity"}, 256, rng);
    EXPECT_EQ(g.inputs.rows(), 256);
    EXPECT_EQ(g.inputs.cols(), 4);
    auto r = build_batch(ds, AvgReturnOutcome{}, 256, rng);
    EXPECT_EQ(r.inputs.cols(), 3);
    auto n = build_batch(ds, NoOutcome{}, 256, rng);
    EXPECT_EQ(n.inputs.cols(), 2);
    EXPECT_EQ(n.actions.rows(), 256);
}

TEST(BuildBatch, GoalNeedsLongerTrajectories) {
    Dataset ds{"toy", 5, 1, 1, "", {make_traj({{1}}, {0}), make_traj({{2}}, {1})}};
    Rng rng(9);
    EXPECT_THROW(build_batch(ds, GoalOutcome{}, 4, rng), UsageError);
    EXPECT_NO_THROW(build_batch(ds, AvgReturnOutcome{}, 4, rng));
}

TEST(BuildBatch, ReturnBatchFollowsProductLaw) {
    Dataset ds{"toy", 6, 1, 1, "", {make_traj({{0}, {1}}, {1, 0}), make_traj({{10}, {11}, {12}, {13}}, {0, 1, 0, 1})}};
    Rng rng(10);
    BatchSampler sampler(ds, AvgReturnOutcome{});
    std::map<std::pair<std::size_t, std::size_t>, int> counts;
    Batch b;
    const int per = 1000;
    for (int i = 0; i < 100; ++i) {
        sampler.sample(per, rng, b);
        for (int k = 0; k < per; ++k) {
            ++counts[{b.trajectory_index[k], b.timestep[k]}];
            const auto& tr = ds.trajectories[b.trajectory_index[k]];
            EXPECT_EQ(b.inputs(k, 1), avg_return_to_go(tr, b.timestep[k], 6));
        }
    }
    const double n = 100.0 * per;
    ASSERT_EQ(counts.size(), 6u);
    for (const auto& [key, c] : counts) {
        const double p = 0.5 / static_cast<double>(ds.trajectories[key.first].length());
        EXPECT_NEAR(c, n * p, 3 * std::sqrt(n * p * (1 - p)));
    }
}

TEST(BuildBatch, LengthWeightedIsUniformOverPairs) {
    Dataset ds{"toy", 6, 1, 1, "", {make_traj({{0}, {1}}, {1, 0}), make_traj({{10}, {11}, {12}, {13}}, {0, 1, 0, 1})}};
    Rng rng(11);
    BatchSampler sampler(ds, NoOutcome{}, TimestepSampling::length_weighted);
    std::map<std::pair<std::size_t, std::size_t>, int> counts;
    Batch b;
    sampler.sample(60000, rng, b);
    for (std::size_t k = 0; k < 60000; ++k) ++counts[{b.trajectory_index[k], b.timestep[k]}];
    for (const auto& [key, c] : counts) EXPECT_NEAR(c, 10000, 3 * std::sqrt(60000 * (1.0 / 6) * (5.0 / 6)));
}

TEST(Filters, TopFractionExamples) {
    Dataset ds{"toy", 3, 1, 1, "", {}};
    for (int i = 0; i < 10; ++i) ds.trajectories.push_back(make_traj({{double(i)}}, {double(i)}));
    auto top = filter_top_fraction(ds, 0.1);
    ASSERT_EQ(top.size(), 1u);
    EXPECT_EQ(top.trajectories[0].total_reward(), 9.0);
    auto all = filter_top_fraction(ds, 1.0);
    EXPECT_EQ(all.trajectories, ds.trajectories);

    Dataset tied{"toy", 3, 1, 1, "", {make_traj({{0}}, {5}), make_traj({{1}}, {5}), make_traj({{2}}, {1})}};
    auto one = filter_top_fraction(tied, 0.3);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one.trajectories[0].states[0], 0.0);
    EXPECT_THROW(filter_top_fraction(ds, 0.0), UsageError);
}

TEST(Filters, TopFractionMatchesSortOracle) {
    Rng rng(12);
    for (int c = 0; c < 1000; ++c) {
        const std::size_t n = 1 + uniform_index(rng, 30);
        std::vector<double> totals(n);
        for (auto& v : totals) v = static_cast<double>(uniform_index(rng, 6));
        const double fraction = std::max(1e-3, uniform01(rng));
        // Oracle: repeatedly take the first index holding the current maximum.
        const auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
        std::vector<bool> taken(n, false);
        std::vector<std::size_t> expected;
        for (std::size_t k = 0; k < keep; ++k) {
            std::size_t best = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (!taken[i] && (best == n || totals[i] > totals[best])) best = i;
            }
            taken[best] = true;
            expected.push_back(best);
        }
        std::sort(expected.begin(), expected.end());
        const auto got = top_fraction_indices(totals, fraction);
        ASSERT_EQ(got, expected);
        double min_kept = INFINITY, max_dropped = -INFINITY;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) {
                min_kept = std::min(min_kept, totals[i]);
            } else {
                max_dropped = std::max(max_dropped, totals[i]);
            }
        }
        EXPECT_GE(min_kept, max_dropped);
    }
}

TEST(Filters, Successful) {
    Dataset zeros{"toy", 3, 1, 1, "", {make_traj({{0}, {1}}, {0, 0}), make_traj({{0}}, {0})}};
    EXPECT_THROW(filter_successful(zeros), UsageError);
    Dataset one = zeros;
    one.trajectories.push_back(make_traj({{5}, {6}}, {0, 1}));
    auto s = filter_successful(one);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s.trajectories[0], one.trajectories[2]);

    Rng rng(13);
    auto mixed = random_dataset(200, 8, 13);
    std::vector<Trajectory> scan;
    for (const auto& t : mixed.trajectories) {
        for (double r : t.rewards) {
            if (r == 1.0) {
                scan.push_back(t);
                break;
            }
        }
    }
    EXPECT_EQ(filter_successful(mixed).trajectories, scan);
}

TEST(Filters, InputsUnmodified) {
    auto ds = random_dataset(40, 8, 14);
    const auto copy = ds;
    filter_top_fraction(ds, 0.1);
    filter_successful(ds);
    split_train_validation(ds, 0.8, 3);
    Rng rng(1);
    build_batch(ds, GoalOutcome{}, 64, rng);
    EXPECT_EQ(ds, copy);
}

TEST(Split, SizesDisjointDeterministic) {
    auto ds = random_dataset(10, 5, 15);
    auto a = split_train_validation(ds, 0.8, 42);
    EXPECT_EQ(a.train.size(), 8u);
    EXPECT_EQ(a.validation.size(), 2u);
    std::set<std::size_t> all(a.train_indices.begin(), a.train_indices.end());
    for (auto i : a.validation_indices) EXPECT_TRUE(all.insert(i).second);
    EXPECT_EQ(all.size(), 10u);
    auto b = split_train_validation(ds, 0.8, 42);
    EXPECT_EQ(a.train_indices, b.train_indices);
    EXPECT_EQ(a.train, b.train);
    auto five = split_train_validation(random_dataset(5, 5, 16), 0.8, 1);
    EXPECT_EQ(five.train.size(), 4u);
    EXPECT_EQ(five.validation.size(), 1u);
    EXPECT_THROW(split_train_validation(random_dataset(1, 5, 1), 0.8, 1), UsageError);
}

TEST(NormalizedScore, Formula) {
    EXPECT_EQ(normalized_score(10, 10, 110), 0.0);
    EXPECT_EQ(normalized_score(110, 10, 110), 100.0);
    EXPECT_EQ(normalized_score(60, 10, 110), 50.0);
    EXPECT_THROW(normalized_score(1, 2, 2), UsageError);
}

TEST(DatasetIo, RoundTripBothFormats) {
    auto ds = random_dataset(25, 12, 17);
    ds.trajectories[0].rewards[0] = 0.1;  // not exactly representable in short decimal
    ds.trajectories[1].states[0] = 1.0 / 3.0;
    const auto bin = temp_path("rt.rvsd");
    const auto txt = temp_path("rt.jsonl");
    save_dataset(ds, bin);
    save_dataset(ds, txt);
    EXPECT_EQ(load_dataset(bin), ds);
    EXPECT_EQ(load_dataset(txt), ds);
    EXPECT_EQ(load_dataset(bin), load_dataset(txt));
    EXPECT_EQ(dataset_hash(load_dataset(txt)), dataset_hash(ds));
}

TEST(DatasetIo, TruncatedBinaryIsParseError) {
    auto ds = random_dataset(5, 6, 18);
    const auto bytes = encode_dataset_binary(ds);
    for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
        try {
            decode_dataset(std::string_view(bytes).substr(0, cut));
            ADD_FAILURE() << "cut " << cut << " accepted";
        } catch (const ParseError& e) {
            EXPECT_LE(e.offset(), cut);
        }
    }
    std::string corrupt = bytes;
    corrupt[4] = 9;  // version
    EXPECT_THROW(decode_dataset(corrupt), ParseError);
}

TEST(DatasetIo, MalformedTextReportsLine) {
    auto text = encode_dataset_text(random_dataset(3, 6, 19));
    const auto second_nl = text.find('\n', text.find('\n') + 1);
    text.insert(second_nl + 1, "{\"states\": [[1,2]], oops\n");
    try {
        decode_dataset(text);
        FAIL() << "accepted malformed text";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(decode_dataset("{\"format\":\"rvs-dataset\"}\n"), ParseError);
    EXPECT_THROW(load_dataset(temp_path("does_not_exist.rvsd")), IoError);
}
