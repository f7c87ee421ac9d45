// rvs: collect offline data, train conditional BC policies, evaluate them and
// run the analyses. Exit codes: 0 ok, 2 usage, 3 I/O or bad input file,
// 4 numeric failure.

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "rvs/rvs.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace rvs;

namespace {

struct Globals {
    std::string workdir = ".";
    std::uint64_t seed = 0;
    std::size_t workers = 1;
};

fs::path resolve(const Globals& g, const std::string& p) {
    const fs::path q(p);
    return q.is_absolute() ? q : fs::path(g.workdir) / q;
}

fs::path existing(const Globals& g, const std::string& p, const std::string& what) {
    const fs::path q = resolve(g, p);
    if (p.empty()) throw UsageError(what + " path is required");
    if (!fs::exists(q)) throw UsageError(what + " not found: " + q.string());
    return q;
}

std::string utc_stamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

std::string file_hash(const fs::path& p) { return io::hex64(fnv1a(io::read_file(p))); }

/// One manifest per output directory, rewritten by every command that writes there.
class Manifest {
public:
    Manifest(std::string command, const Globals& g, int argc, char** argv)
        : command_(std::move(command)), started_(std::chrono::steady_clock::now()), started_utc_(utc_stamp()) {
        for (int i = 0; i < argc; ++i) argv_.push_back(argv[i]);
        j_["seed"] = g.seed;
        j_["workers"] = g.workers;
        j_["workdir"] = fs::absolute(g.workdir).string();
    }

    void options(const CLI::App& sub) {
        json o = json::object();
        for (const CLI::Option* opt : sub.get_options()) {
            const std::string name = opt->get_lnames().empty() ? "" : opt->get_lnames().front();
            if (name.empty() || name == "help") continue;
            const auto& res = opt->results();
            if (!res.empty()) {
                std::string v;
                for (const auto& r : res) v += (v.empty() ? "" : ",") + r;
                o[name] = v;
            } else {
                o[name] = opt->get_default_str();
            }
        }
        j_["options"] = o;
    }

    void set(const std::string& key, json value) { j_[key] = std::move(value); }
    void input(const fs::path& p, const std::string& hash) { inputs_.push_back({{"path", p.string()}, {"hash", hash}}); }
    void output(const fs::path& p) { outputs_.push_back({{"path", p.string()}, {"hash", file_hash(p)}}); }
    void warn(const std::string& w) {
        std::cerr << "warning: " << w << "\n";
        warnings_.push_back(w);
    }

    void write(const fs::path& dir, const std::string& status = "ok") {
        json j = j_;
        j["tool"] = "rvs";
        j["version"] = std::string(kVersion);
        j["command"] = command_;
        j["argv"] = argv_;
        j["status"] = status;
        j["inputs"] = inputs_;
        j["outputs"] = outputs_;
        j["warnings"] = warnings_;
        j["started_utc"] = started_utc_;
        j["wall_clock_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
        io::write_file(dir / "manifest.json", j.dump(2) + "\n");
    }

private:
    std::string command_;
    std::chrono::steady_clock::time_point started_;
    std::string started_utc_;
    std::vector<std::string> argv_;
    json j_ = json::object();
    json inputs_ = json::array();
    json outputs_ = json::array();
    std::vector<std::string> warnings_;
};

/// Writes `<env>_<analysis>_<timestamp>.csv`; a numeric suffix keeps outputs
/// from the same second apart.
fs::path write_analysis_csv(const fs::path& dir, const std::string& env, const std::string& analysis,
                            const std::string& text) {
    const std::string stem = env + "_" + analysis + "_" + utc_stamp();
    fs::path p = dir / (stem + ".csv");
    for (int k = 1; fs::exists(p); ++k) p = dir / (stem + "-" + std::to_string(k) + ".csv");
    io::write_file(p, text);
    return p;
}

std::vector<double> parse_vector(const std::string& s) {
    std::vector<double> v;
    for (const auto& p : split_list(s, ',')) {
        try {
            v.push_back(std::stod(p));
        } catch (const std::exception&) {
            throw UsageError("bad number '" + p + "' in '" + s + "'");
        }
    }
    if (v.empty()) throw UsageError("empty vector '" + s + "'");
    return v;
}

template <class T>
std::vector<T> parse_list(const std::string& s) {
    std::vector<T> out;
    for (double v : parse_vector(s)) {
        if constexpr (std::is_integral_v<T>) {
            if (v < 0 || v != std::floor(v)) throw UsageError("expected whole numbers in '" + s + "'");
        }
        out.push_back(static_cast<T>(v));
    }
    return out;
}

std::string fmt(double v, int precision = 2) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

void print_report(const EvalReport& r) {
    std::cout << r.env_id << " " << r.plan << ": " << r.n_rollouts << " rollouts";
    if (r.success_rate) std::cout << ", success " << csv_number(*r.success_rate) << "%";
    std::cout << ", mean return " << fmt(r.mean_return, 3) << " +- " << fmt(r.std_return, 3)
              << ", normalized " << fmt(r.normalized_score) << "\n";
}

struct LoadedPolicy {
    PolicyArtifact artifact;
    std::shared_ptr<const Environment> env;
};

LoadedPolicy load_policy(const Globals& g, const std::string& path, const std::string& data_path, Manifest& m) {
    const fs::path p = existing(g, path, "policy checkpoint");
    LoadedPolicy lp;
    std::optional<std::string> expected;
    if (!data_path.empty()) {
        const fs::path dp = existing(g, data_path, "dataset");
        expected = dataset_hash(load_dataset(dp));
        m.input(dp, *expected);
    }
    std::vector<std::string> warnings;
    lp.artifact = load_checkpoint(p, expected, &warnings);
    for (const auto& w : warnings) m.warn(w);
    m.input(p, checkpoint_hash(lp.artifact));
    lp.env = make_environment(lp.artifact.env_id);
    return lp;
}

// ---- collect ----

struct CollectArgs {
    std::string env;
    std::string collector;
    std::size_t steps = 50000;
    std::size_t episodes = 1000;
    double noise = 0.1;
    std::string out;
    std::string format = "binary";
};

void return_histogram(const Dataset& ds) {
    std::vector<double> totals;
    for (const auto& t : ds.trajectories) totals.push_back(t.total_reward());
    const auto [lo_it, hi_it] = std::minmax_element(totals.begin(), totals.end());
    const double lo = *lo_it, hi = *hi_it;
    double mean = 0.0;
    for (double v : totals) mean += v;
    mean /= static_cast<double>(totals.size());
    std::cout << "returns: min " << csv_number(lo) << ", mean " << fmt(mean, 3) << ", max " << csv_number(hi) << "\n";
    constexpr int kBins = 10;
    std::vector<std::size_t> counts(kBins, 0);
    for (double v : totals) {
        const int b = hi > lo ? std::min(kBins - 1, static_cast<int>((v - lo) / (hi - lo) * kBins)) : 0;
        ++counts[static_cast<std::size_t>(b)];
    }
    const std::size_t peak = *std::max_element(counts.begin(), counts.end());
    for (int b = 0; b < kBins; ++b) {
        if (hi <= lo && b > 0) break;
        const double edge = lo + (hi - lo) * b / kBins;
        const auto bar = static_cast<std::size_t>(40.0 * static_cast<double>(counts[static_cast<std::size_t>(b)]) /
                                                  static_cast<double>(std::max<std::size_t>(peak, 1)));
        std::cout << "  " << std::setw(9) << fmt(edge, 2) << " | " << std::string(bar, '#') << " "
                  << counts[static_cast<std::size_t>(b)] << "\n";
    }
}

int cmd_collect(const Globals& g, const CollectArgs& a, const CLI::App& sub, int argc, char** argv) {
    Manifest m("collect", g, argc, argv);
    m.options(sub);
    auto env = make_environment(a.env);
    if (a.format != "binary" && a.format != "text") throw UsageError("format must be binary or text");
    Dataset ds = a.collector == "random" ? collect_random(*env, a.steps, g.seed)
                                         : collect_scripted(*env, split_list(a.collector), a.episodes, g.seed, a.noise);
    const fs::path dir = resolve(g, a.out);
    const fs::path file = dir / (a.format == "binary" ? "dataset.rvsd" : "dataset.jsonl");
    save_dataset(ds, file, a.format == "binary" ? DatasetFormat::binary : DatasetFormat::text);
    m.output(file);
    m.set("dataset_hash", dataset_hash(ds));
    m.set("env", env->spec().to_json());
    m.write(dir);
    std::cout << "collected " << ds.size() << " trajectories, " << ds.transition_count() << " transitions -> "
              << file.string() << "\n";
    return_histogram(ds);
    return 0;
}

// ---- train ----

void add_train_options(CLI::App* sub, TrainConfig& c) {
    sub->add_option("--width", c.hidden_width, "hidden layer width")->capture_default_str();
    sub->add_option("--lr", c.learning_rate, "Adam learning rate")->capture_default_str();
    sub->add_option("--dropout", c.dropout, "dropout probability")->capture_default_str();
    sub->add_option("--batch", c.batch_size, "batch size")->capture_default_str();
    sub->add_option("--steps", c.steps, "gradient steps")->capture_default_str();
    sub->add_option("--outcome", c.outcome, "goal | return | none (BC)")->capture_default_str();
    sub->add_option("--goal-extractor", c.goal_extractor, "goal extractor id (default: the env's)");
    sub->add_flag("--normalize-return", c.normalize_return, "min-max normalize the return condition");
    sub->add_flag("--normalize-inputs,!--raw-inputs", c.normalize_inputs,
                  "standardize network inputs with training-split statistics (default on)");
    sub->add_option("--head", c.head, "categorical | gaussian")->capture_default_str();
    sub->add_option("--bins", c.bins, "bins per action dim (box actions)")->capture_default_str();
    sub->add_option("--validation-fraction", c.validation_fraction, "trajectories held out")->capture_default_str();
    sub->add_option("--eval-every", c.eval_every, "steps between metrics records")->capture_default_str();
    sub->add_option("--eval-rollouts", c.eval_rollouts, "rollouts per metrics record (0: offline)")
        ->capture_default_str();
    sub->add_option("--probe-size", c.probe_size, "examples in the loss probe batches")->capture_default_str();
    sub->add_option("--timestep-sampling", c.timestep_sampling, "per_trajectory | length_weighted")
        ->capture_default_str();
    sub->add_option("--eval-action", c.eval_action, "default | stochastic | deterministic")->capture_default_str();
}

struct TrainArgs {
    std::string data;
    std::string out;
    TrainConfig config;
    std::optional<double> target;
    bool resume = false;
};

int cmd_train(const Globals& g, TrainArgs a, const CLI::App& sub, int argc, char** argv) {
    Manifest m("train", g, argc, argv);
    m.options(sub);
    a.config.seed = g.seed;
    a.config.validate();
    const fs::path data_path = existing(g, a.data, "dataset");
    const Dataset ds = load_dataset(data_path);
    m.input(data_path, dataset_hash(ds));
    auto env = make_environment(ds.env_id);
    check_compatible(*env, ds);
    m.set("config", a.config.to_json());

    const fs::path dir = resolve(g, a.out);
    const fs::path ckpt = dir / "checkpoint.rvsc";
    const fs::path metrics = dir / "metrics.csv";
    Trainer trainer(ds, env->spec(), a.config);

    TrainHooks hooks;
    if (a.config.eval_rollouts > 0) {
        PolicyArtifact probe = trainer.initial_artifact();
        hooks.evaluate = training_evaluator(env, probe.outcome, default_plan(probe, a.target), a.config.sample_mode());
    }
    hooks.on_checkpoint = [&](const PolicyArtifact& art, const MetricsLog& log) {
        save_checkpoint(art, ckpt);
        io::write_file(metrics, log.to_csv());
    };

    PolicyArtifact start = trainer.initial_artifact();
    MetricsLog log;
    if (a.resume && fs::exists(ckpt)) {
        PolicyArtifact prev = load_checkpoint(ckpt);
        TrainConfig want = a.config, have = prev.config;
        want.steps = have.steps = 0;
        if (!(want == have) || prev.dataset_hash != start.dataset_hash) {
            throw UsageError("--resume: checkpoint in " + dir.string() + " was trained with another config or dataset");
        }
        if (fs::exists(metrics)) {
            log = MetricsLog::from_csv(io::read_file(metrics));
            std::erase_if(log.records, [&](const MetricsRecord& r) { return r.step > prev.gradient_step; });
        }
        std::cout << "resuming from step " << prev.gradient_step << "\n";
        start = std::move(prev);
    }

    TrainResult res;
    try {
        res = trainer.resume(std::move(start), std::move(log), hooks);
    } catch (const NumericError&) {
        if (fs::exists(ckpt)) m.output(ckpt);
        if (fs::exists(metrics)) m.output(metrics);
        m.write(dir, "aborted: non-finite loss; checkpoint holds the last good step");
        throw;
    }
    save_checkpoint(res.artifact, ckpt);
    io::write_file(metrics, res.metrics.to_csv());
    m.output(ckpt);
    m.output(metrics);
    m.set("checkpoint_hash", checkpoint_hash(res.artifact));
    std::uint64_t val_examples = 0;
    for (auto i : res.validation_indices) val_examples += res.gradient_examples[i];
    m.set("validation_trajectories", res.validation_indices.size());
    m.set("validation_gradient_examples", val_examples);
    m.write(dir);
    const auto& last = res.metrics.records.back();
    std::cout << "trained " << last.step << " steps: train loss " << fmt(last.train_loss, 4) << ", val loss "
              << fmt(last.val_loss, 4) << " -> " << ckpt.string() << "\n";
    return 0;
}

// ---- eval / interpolate ----

struct EvalArgs {
    std::string policy;
    std::string data;
    std::size_t n = 200;
    std::string goal;
    std::optional<double> target;
    bool recompute = false;
    std::string waypoints;
    double radius = -1.0;
    std::string mode;
    std::string out;
    std::string targets = "0:50:5";
};

std::optional<SampleMode> mode_of(const std::string& s) {
    if (s.empty() || s == "default") return std::nullopt;
    return sample_mode_from_string(s);
}

ConditioningPlan plan_from(const EvalArgs& a, const PolicyArtifact& art) {
    if (!a.waypoints.empty()) {
        DynamicGoal d;
        for (const auto& w : split_list(a.waypoints, ';')) d.waypoints.push_back(parse_vector(w));
        d.radius = a.radius;
        return d;
    }
    if (!a.goal.empty()) return FixedGoal{parse_vector(a.goal)};
    if (a.target) return FixedReturnTarget{*a.target, a.recompute};
    return default_plan(art);
}

int cmd_eval(const Globals& g, const EvalArgs& a, const CLI::App& sub, int argc, char** argv) {
    Manifest m("eval", g, argc, argv);
    m.options(sub);
    const LoadedPolicy lp = load_policy(g, a.policy, a.data, m);
    const ConditioningPlan plan = plan_from(a, lp.artifact);
    const EvalReport r = evaluate(*lp.env, lp.artifact, plan, a.n, g.seed, g.workers, mode_of(a.mode));
    const fs::path dir = resolve(g, a.out);
    m.output(write_analysis_csv(dir, r.env_id, "eval", report_csv(r)));
    m.write(dir);
    print_report(r);
    return 0;
}

int cmd_interpolate(const Globals& g, const EvalArgs& a, const CLI::App& sub, int argc, char** argv) {
    Manifest m("interpolate", g, argc, argv);
    m.options(sub);
    const LoadedPolicy lp = load_policy(g, a.policy, a.data, m);
    const auto targets = parse_targets(a.targets);
    const auto rows =
        reward_target_sweep(*lp.env, lp.artifact, targets, a.n, g.seed, g.workers, a.recompute, mode_of(a.mode));
    const fs::path dir = resolve(g, a.out);
    m.output(write_analysis_csv(dir, lp.artifact.env_id, "interpolate", target_sweep_csv(rows)));
    m.write(dir);
    std::cout << "target -> achieved mean return\n";
    for (const auto& r : rows) std::cout << "  " << std::setw(8) << csv_number(r.target) << " -> " << fmt(r.report.mean_return, 3) << "\n";
    return 0;
}

// ---- sweep ----

struct SweepArgs {
    std::string data;
    std::string out;
    TrainConfig config;
    std::string widths, dropouts, batches, seeds;
    std::size_t n = 200;
    std::optional<double> target;
};

int cmd_sweep(const Globals& g, SweepArgs a, const CLI::App& sub, int argc, char** argv) {
    Manifest m("sweep", g, argc, argv);
    m.options(sub);
    const fs::path data_path = existing(g, a.data, "dataset");
    const Dataset ds = load_dataset(data_path);
    m.input(data_path, dataset_hash(ds));
    auto env = make_environment(ds.env_id);
    check_compatible(*env, ds);
    SweepAxes axes;
    if (!a.widths.empty()) axes.width = parse_list<std::size_t>(a.widths);
    if (!a.dropouts.empty()) axes.dropout = parse_list<double>(a.dropouts);
    if (!a.batches.empty()) axes.batch = parse_list<std::size_t>(a.batches);
    const std::vector<std::uint64_t> seeds =
        a.seeds.empty() ? std::vector<std::uint64_t>{g.seed} : parse_list<std::uint64_t>(a.seeds);
    a.config.seed = g.seed;
    m.set("config", a.config.to_json());

    ArtifactEvaluator evaluator;
    if (a.n > 0) {
        const std::size_t n = a.n;
        const auto target = a.target;
        evaluator = [env, n, target](const PolicyArtifact& art, std::uint64_t seed) {
            const EvalReport r = evaluate(*env, art, default_plan(art, target), n, seed);
            return EvalMetrics{r.mean_return, r.success_rate};
        };
    }
    const auto rows = run_sweep(ds, env->spec(), a.config, axes, seeds, evaluator, g.workers);
    const fs::path dir = resolve(g, a.out);
    m.output(write_analysis_csv(dir, env->spec().id, "sweep", sweep_csv(rows)));
    m.write(dir);
    std::cout << "width dropout batch seed  val_loss  eval\n";
    for (const auto& r : rows) {
        std::cout << std::setw(5) << r.width << " " << std::setw(7) << r.dropout << " " << std::setw(5) << r.batch << " "
                  << std::setw(4) << r.seed << "  " << std::setw(8) << fmt(r.final_val_loss, 4) << "  "
                  << (r.eval_success ? fmt(*r.eval_success, 1) + "%" : r.eval_return ? fmt(*r.eval_return, 2) : "-")
                  << (r.error.empty() ? "" : "  FAILED: " + r.error) << "\n";
    }
    return 0;
}

// ---- stitch / strategies ----

struct StitchArgs {
    std::string data;
    std::string goal_policy;
    std::string bc_policy;
    std::size_t n = 200;
    std::string out;
};

int cmd_stitch(const Globals& g, const StitchArgs& a, const CLI::App& sub, int argc, char** argv) {
    Manifest m("stitch", g, argc, argv);
    m.options(sub);
    const fs::path data_path = existing(g, a.data, "dataset");
    const Dataset ds = load_dataset(data_path);
    m.input(data_path, dataset_hash(ds));
    const LoadedPolicy gp = load_policy(g, a.goal_policy, a.data, m);
    const LoadedPolicy bc = load_policy(g, a.bc_policy, a.data, m);
    const StitchingReport r = stitching_eval(*gp.env, ds, gp.artifact, bc.artifact, a.n, g.seed, g.workers);
    std::string csv = "policy,plan,n_rollouts,success_rate,mean_return,normalized_score\n";
    for (const auto* rep : {&r.conditioned, &r.unconditioned}) {
        csv += std::string(rep == &r.conditioned ? "goal_conditioned" : "bc") + "," + rep->plan + "," +
               std::to_string(rep->n_rollouts) + "," + csv_number(rep->success_rate) + "," +
               csv_number(rep->mean_return) + "," + csv_number(rep->normalized_score) + "\n";
    }
    const fs::path dir = resolve(g, a.out);
    m.output(write_analysis_csv(dir, gp.artifact.env_id, "stitching", csv));
    m.write(dir);
    std::cout << "dataset audit passed (no A-room-to-C trajectory)\n";
    print_report(r.conditioned);
    print_report(r.unconditioned);
    return 0;
}

struct StrategyArgs {
    std::string data;
    std::string policy;
    std::string strategies = "reward_goal,length_goal,optimized_goal";
    StrategyOptions options;
    std::string out;
};

int cmd_strategies(const Globals& g, const StrategyArgs& a, const CLI::App& sub, int argc, char** argv) {
    Manifest m("strategies", g, argc, argv);
    m.options(sub);
    const fs::path data_path = existing(g, a.data, "dataset");
    const Dataset ds = load_dataset(data_path);
    const LoadedPolicy lp = load_policy(g, a.policy, a.data, m);
    const auto rows = goal_strategy_compare(*lp.env, ds, lp.artifact, split_list(a.strategies, ','), g.seed,
                                            a.options, g.workers);
    const fs::path dir = resolve(g, a.out);
    m.output(write_analysis_csv(dir, lp.artifact.env_id, "strategies", strategy_csv(rows)));
    m.write(dir);
    for (const auto& r : rows) {
        std::cout << std::setw(15) << r.strategy << "  "
                  << (r.error.empty() ? "mean return " + fmt(r.mean_return, 3) + " over " + std::to_string(r.rollouts) +
                                            " rollouts" + (r.offline ? "" : " (uses environment access; not strictly offline)")
                                      : "unavailable: " + r.error)
                  << "\n";
    }
    return 0;
}

// ---- report ----

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string out;
};

struct EvalSummary {
    std::string env, plan;
    std::optional<double> success;
    double mean_return = 0.0, normalized = 0.0;
};

EvalSummary read_eval_header(const fs::path& p) {
    std::istringstream in(io::read_file(p));
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line) && line.rfind("# ", 0) == 0) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(2, eq - 2)] = line.substr(eq + 1);
    }
    auto num = [&](const std::string& k) {
        if (!kv.count(k)) throw ParseError(p.string() + ": missing '" + k + "' in header", 0, 0);
        return std::stod(kv[k]);
    };
    EvalSummary s;
    s.env = kv["env"];
    s.plan = kv["plan"];
    if (!kv["success_rate"].empty()) s.success = num("success_rate");
    s.mean_return = num("mean_return");
    s.normalized = num("normalized_score");
    return s;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
}

int cmd_report(const Globals& g, const ReportArgs& a, const CLI::App& sub, int argc, char** argv) {
    Manifest m("report", g, argc, argv);
    m.options(sub);
    std::vector<fs::path> files;
    for (const auto& in : a.inputs) {
        const fs::path dir = existing(g, in, "input directory");
        if (fs::is_regular_file(dir)) {
            files.push_back(dir);
            continue;
        }
        for (const auto& e : fs::recursive_directory_iterator(dir)) {
            const std::string name = e.path().filename().string();
            if (e.is_regular_file() && name.find("_eval_") != std::string::npos && e.path().extension() == ".csv") {
                files.push_back(e.path());
            }
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw UsageError("no eval CSVs found under the inputs");
    std::map<std::pair<std::string, std::string>, std::vector<EvalSummary>> groups;
    for (const auto& f : files) {
        EvalSummary s = read_eval_header(f);
        m.input(f, file_hash(f));
        groups[{s.env, s.plan}].push_back(s);
    }
    std::string csv = "env,plan,runs,success_mean,success_std,return_mean,return_std,normalized_mean,normalized_std\n";
    std::cout << "env            plan            runs  success            return             normalized\n";
    for (const auto& [key, runs] : groups) {
        std::vector<double> succ, ret, norm;
        for (const auto& r : runs) {
            if (r.success) succ.push_back(*r.success);
            ret.push_back(r.mean_return);
            norm.push_back(r.normalized);
        }
        std::string s_mean, s_std;
        if (succ.size() == runs.size()) {
            const auto [sm, ss] = mean_std(succ);
            s_mean = csv_number(sm);
            s_std = csv_number(ss);
        }
        const auto [rm, rs] = mean_std(ret);
        const auto [nm, ns] = mean_std(norm);
        csv += key.first + "," + key.second + "," + std::to_string(runs.size()) + "," + s_mean + "," + s_std + "," +
               csv_number(rm) + "," + csv_number(rs) + "," + csv_number(nm) + "," + csv_number(ns) + "\n";
        std::cout << std::left << std::setw(15) << key.first << std::setw(16) << key.second << std::right
                  << std::setw(4) << runs.size() << "  "
                  << std::setw(17) << (s_mean.empty() ? "-" : fmt(std::stod(s_mean), 1) + " +- " + fmt(std::stod(s_std), 1))
                  << "  " << std::setw(17) << fmt(rm, 3) + " +- " + fmt(rs, 3) << "  " << fmt(nm, 1) << " +- "
                  << fmt(ns, 1) << "\n";
    }
    const fs::path dir = resolve(g, a.out);
    m.output(write_analysis_csv(dir, "suite", "report", csv));
    m.write(dir);
    return 0;
}

int cmd_envs() {
    json j = json::array();
    for (const auto& id : env_ids()) j.push_back(make_environment(id)->spec().to_json());
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Offline RL via supervised learning: conditional behavior cloning lab"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file of option values; [train], [sweep], ... sections per command");
    app.set_version_flag("--version", std::string(kVersion));
    Globals g;
    app.add_option("--workdir", g.workdir, "base for relative paths")->capture_default_str();
    app.add_option("--seed", g.seed, "seed for all randomness of the command")->capture_default_str();
    app.add_option("--workers", g.workers, "threads for rollouts / sweep cells (results do not depend on it)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    CollectArgs ca;
    auto* collect = app.add_subcommand("collect", "collect an offline dataset");
    collect->add_option("--env", ca.env, "four_rooms | point_reach | stitch_maze | two_mode_line")->required();
    collect->add_option("--collector", ca.collector, "random, or scripted policies joined by '+'")->required();
    collect->add_option("--steps", ca.steps, "transitions (random collector)")->capture_default_str();
    collect->add_option("--episodes", ca.episodes, "episodes (scripted collectors)")->capture_default_str();
    collect->add_option("--noise", ca.noise, "scripted-policy noise")->capture_default_str();
    collect->add_option("--format", ca.format, "binary | text")->capture_default_str();
    collect->add_option("--out", ca.out, "output directory")->required();

    TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "train a policy on a dataset");
    train_cmd->add_option("--data", ta.data, "dataset file")->required();
    train_cmd->add_option("--out", ta.out, "output directory")->required();
    add_train_options(train_cmd, ta.config);
    train_cmd->add_option("--target", ta.target, "return target for mid-training evals of return policies");
    train_cmd->add_flag("--resume", ta.resume, "continue from the checkpoint in --out");

    EvalArgs ea;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a trained policy");
    eval_cmd->add_option("--policy", ea.policy, "checkpoint file")->required();
    eval_cmd->add_option("--data", ea.data, "dataset the policy should have been trained on (hash check)");
    eval_cmd->add_option("--n", ea.n, "rollouts")->capture_default_str();
    eval_cmd->add_option("--goal", ea.goal, "fixed goal 'x,y'");
    eval_cmd->add_option("--target", ea.target, "total-return target (return policies)");
    eval_cmd->add_flag("--recompute", ea.recompute, "recompute the return condition from the remaining target each step");
    eval_cmd->add_option("--waypoints", ea.waypoints, "dynamic goals 'x,y;x,y'");
    eval_cmd->add_option("--radius", ea.radius, "waypoint radius (default: env success radius)");
    eval_cmd->add_option("--mode", ea.mode, "stochastic | deterministic (default: by head)");
    eval_cmd->add_option("--out", ea.out, "output directory")->required();

    EvalArgs ia;
    ia.n = 50;
    auto* interp = app.add_subcommand("interpolate", "reward-target sweep of a return-conditioned policy");
    interp->add_option("--policy", ia.policy, "checkpoint file")->required();
    interp->add_option("--data", ia.data, "dataset (hash check)");
    interp->add_option("--targets", ia.targets, "lo:hi:step or a,b,c (total return)")->capture_default_str();
    interp->add_option("--n", ia.n, "rollouts per target")->capture_default_str();
    interp->add_flag("--recompute", ia.recompute, "recompute the return condition each step");
    interp->add_option("--mode", ia.mode, "stochastic | deterministic (default: by head)");
    interp->add_option("--out", ia.out, "output directory")->required();

    SweepArgs sa;
    auto* sweep = app.add_subcommand("sweep", "train the cross product of widths, dropouts and batch sizes");
    sweep->add_option("--data", sa.data, "dataset file")->required();
    sweep->add_option("--out", sa.out, "output directory")->required();
    add_train_options(sweep, sa.config);
    sweep->add_option("--widths", sa.widths, "comma list");
    sweep->add_option("--dropouts", sa.dropouts, "comma list");
    sweep->add_option("--batches", sa.batches, "comma list");
    sweep->add_option("--seeds", sa.seeds, "comma list of run seeds (default: --seed)");
    sweep->add_option("--n", sa.n, "evaluation rollouts per cell (0: none)")->capture_default_str();
    sweep->add_option("--target", sa.target, "return target for return policies");

    ReportArgs ra;
    auto* report = app.add_subcommand("report", "summarize eval CSVs: mean and std over runs per env");
    report->add_option("--inputs", ra.inputs, "directories (searched recursively) or eval CSV files")->required();
    report->add_option("--out", ra.out, "output directory")->required();

    StitchArgs sta;
    auto* stitch = app.add_subcommand("stitch", "stitching evaluation on stitch_maze (audits the dataset first)");
    stitch->add_option("--data", sta.data, "dataset the policies were trained on")->required();
    stitch->add_option("--goal-policy", sta.goal_policy, "goal-conditioned checkpoint")->required();
    stitch->add_option("--bc-policy", sta.bc_policy, "unconditioned BC checkpoint")->required();
    stitch->add_option("--n", sta.n, "rollouts per policy")->capture_default_str();
    stitch->add_option("--out", sta.out, "output directory")->required();

    StrategyArgs sga;
    auto* strat = app.add_subcommand("strategies", "compare goal-selection strategies for a goal policy");
    strat->add_option("--data", sga.data, "dataset")->required();
    strat->add_option("--policy", sga.policy, "goal-conditioned checkpoint")->required();
    strat->add_option("--strategies", sga.strategies, "reward_goal,length_goal,optimized_goal")->capture_default_str();
    strat->add_option("--n", sga.options.n_rollouts, "rollouts per pool strategy")->capture_default_str();
    strat->add_option("--candidates", sga.options.optimized_candidates, "optimized_goal candidates")
        ->capture_default_str();
    strat->add_option("--per-candidate", sga.options.optimized_rollouts_each, "rollouts per candidate")
        ->capture_default_str();
    strat->add_option("--out", sga.out, "output directory")->required();

    auto* envs = app.add_subcommand("envs", "list built-in environments");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (collect->parsed()) return cmd_collect(g, ca, *collect, argc, argv);
        if (train_cmd->parsed()) return cmd_train(g, ta, *train_cmd, argc, argv);
        if (eval_cmd->parsed()) return cmd_eval(g, ea, *eval_cmd, argc, argv);
        if (interp->parsed()) return cmd_interpolate(g, ia, *interp, argc, argv);
        if (sweep->parsed()) return cmd_sweep(g, sa, *sweep, argc, argv);
        if (report->parsed()) return cmd_report(g, ra, *report, argc, argv);
        if (stitch->parsed()) return cmd_stitch(g, sta, *stitch, argc, argv);
        if (strat->parsed()) return cmd_strategies(g, sga, *strat, argc, argv);
        if (envs->parsed()) return cmd_envs();
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "bad input file: " << e.what();
        if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
        std::cerr << " (byte " << e.offset() << ")\n";
        return 3;
    } catch (const AuditError& e) {
        std::cerr << "audit failed, refusing to report: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
