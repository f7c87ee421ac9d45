#pragma once

// Trained-policy artifacts and their checkpoint file, plus the metrics log.
//
// Checkpoint layout (little-endian):
//   "RVSC" u32 version
//   str env_id, str dataset_hash, str outcome_json, str config_json
//   u64 input_dim, u64 hidden_width, f64 dropout
//   u8 head_kind, u64 action_dims, u64 bins, [f64 low[dims], f64 high[dims]]
//   u64 n_params, f64 params[n]   (W1 b1 W2 b2 W3 b3 log_std)
//   f64 input_shift[input_dim], f64 input_scale[input_dim]
//   u64 adam_step, f64 m[n], f64 v[n]
//   u64 gradient_step, str rng_state

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rvs/common.hpp"
#include "rvs/data/outcome.hpp"
#include "rvs/io/binary.hpp"
#include "rvs/nn/adam.hpp"
#include "rvs/train/config.hpp"

namespace rvs {

struct PolicyArtifact {
    MlpPolicy policy;
    AdamState adam;
    TrainConfig config;
    OutcomeSpec outcome;
    std::string env_id;
    std::string dataset_hash;
    std::uint64_t gradient_step = 0;
    std::string rng_state;  // engine state text; lets training resume bit-exactly
    std::size_t state_dim = 0;

    std::size_t condition_dim() const { return policy.input_dim() - state_dim; }

    bool operator==(const PolicyArtifact&) const = default;
};

inline constexpr std::string_view kCheckpointMagic = "RVSC";
inline constexpr std::uint32_t kCheckpointVersion = 2;

inline std::string encode_checkpoint(const PolicyArtifact& a) {
    const auto& p = a.policy;
    const auto& h = p.head();
    io::BinaryWriter w;
    w.raw(kCheckpointMagic);
    w.u32(kCheckpointVersion);
    w.str(a.env_id);
    w.str(a.dataset_hash);
    w.str(outcome_to_json(a.outcome).dump());
    w.str(a.config.to_json().dump());
    w.u64(a.state_dim);
    w.u64(p.input_dim());
    w.u64(p.hidden_width());
    w.f64(p.dropout());
    w.u8(h.kind == HeadKind::categorical ? 0 : 1);
    w.u64(h.action_dims);
    w.u64(h.bins);
    if (h.kind == HeadKind::categorical) {
        w.f64s(h.low);
        w.f64s(h.high);
    }
    const auto n = static_cast<std::size_t>(p.params().size());
    w.u64(n);
    w.f64s({p.params().data(), n});
    w.f64s({p.input_shift().data(), p.input_dim()});
    w.f64s({p.input_scale().data(), p.input_dim()});
    w.u64(a.adam.step);
    w.f64s({a.adam.m.data(), static_cast<std::size_t>(a.adam.m.size())});
    w.f64s({a.adam.v.data(), static_cast<std::size_t>(a.adam.v.size())});
    w.u64(a.gradient_step);
    w.str(a.rng_state);
    return w.bytes();
}

inline PolicyArtifact decode_checkpoint(std::string_view bytes) {
    io::BinaryReader r(bytes);
    r.expect_magic(kCheckpointMagic, "checkpoint");
    const std::size_t version_at = r.offset();
    if (r.u32() != kCheckpointVersion) throw ParseError("unsupported checkpoint version", 0, version_at);
    PolicyArtifact a;
    a.env_id = r.str(1 << 16);
    a.dataset_hash = r.str(1 << 10);
    std::size_t json_at = r.offset();
    try {
        a.outcome = outcome_from_json(nlohmann::json::parse(r.str(1 << 20)));
        json_at = r.offset();
        a.config = TrainConfig::from_json(nlohmann::json::parse(r.str(1 << 20)));
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("bad embedded JSON: ") + e.what(), 0, json_at);
    }
    a.state_dim = r.u64();
    const std::size_t dims_at = r.offset();
    const auto input_dim = r.u64();
    const auto width = r.u64();
    const double dropout = r.f64();
    const auto kind = r.u8();
    const auto action_dims = r.u64();
    const auto bins = r.u64();
    if (kind > 1 || input_dim == 0 || width == 0 || action_dims == 0 || input_dim > (1u << 20) ||
        width > (1u << 20) || action_dims > (1u << 16) || bins > (1u << 20)) {
        throw ParseError("implausible network dimensions", 0, dims_at);
    }
    HeadSpec head;
    try {
        if (kind == 0) {
            std::vector<double> low(action_dims), high(action_dims);
            r.f64s(low);
            r.f64s(high);
            head = HeadSpec::categorical(action_dims, bins, low, high);
        } else {
            head = HeadSpec::gaussian(action_dims);
        }
    } catch (const UsageError& e) {
        throw ParseError(e.what(), 0, dims_at);
    }
    const std::size_t params_at = r.offset();
    const auto n = r.count(8, "parameter");
    Vector params(static_cast<Eigen::Index>(n));
    r.f64s({params.data(), n});
    const std::size_t norm_at = r.offset();
    Vector shift(static_cast<Eigen::Index>(input_dim)), scale(static_cast<Eigen::Index>(input_dim));
    r.f64s({shift.data(), input_dim});
    r.f64s({scale.data(), input_dim});
    try {
        a.policy = MlpPolicy::from_parts(input_dim, width, head, dropout, params);
    } catch (const UsageError& e) {
        throw ParseError(e.what(), 0, params_at);
    }
    try {
        a.policy.set_input_normalization(shift, scale);
    } catch (const UsageError& e) {
        throw ParseError(e.what(), 0, norm_at);
    }
    a.adam.step = r.u64();
    a.adam.m.resize(static_cast<Eigen::Index>(n));
    a.adam.v.resize(static_cast<Eigen::Index>(n));
    r.f64s({a.adam.m.data(), n});
    r.f64s({a.adam.v.data(), n});
    a.gradient_step = r.u64();
    a.rng_state = r.str(1 << 16);
    if (!r.at_end()) throw ParseError("trailing bytes after checkpoint", 0, r.offset());
    if (!all_finite(params.data(), n)) throw ParseError("non-finite parameter", 0, params_at);
    if (a.state_dim == 0 || a.state_dim > input_dim) throw ParseError("state dimension exceeds network input", 0, dims_at);
    return a;
}

inline void save_checkpoint(const PolicyArtifact& a, const std::filesystem::path& path) {
    io::write_file(path, encode_checkpoint(a));
}

/// Loads a checkpoint; when `expected_dataset_hash` is given and differs, a
/// warning is appended to `warnings` and loading still succeeds.
inline PolicyArtifact load_checkpoint(const std::filesystem::path& path,
                                      const std::optional<std::string>& expected_dataset_hash = std::nullopt,
                                      std::vector<std::string>* warnings = nullptr) {
    PolicyArtifact a = decode_checkpoint(io::read_file(path));
    if (expected_dataset_hash && *expected_dataset_hash != a.dataset_hash && warnings != nullptr) {
        warnings->push_back("checkpoint " + path.string() + " was trained on dataset " + a.dataset_hash +
                            ", not " + *expected_dataset_hash);
    }
    return a;
}

inline std::string checkpoint_hash(const PolicyArtifact& a) { return io::hex64(fnv1a(encode_checkpoint(a))); }

struct MetricsRecord {
    std::uint64_t step = 0;
    double train_loss = 0.0;
    double val_loss = NAN;
    std::optional<double> eval_return;
    std::optional<double> eval_success;

    bool operator==(const MetricsRecord& o) const {
        auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
        return step == o.step && same(train_loss, o.train_loss) && same(val_loss, o.val_loss) &&
               eval_return == o.eval_return && eval_success == o.eval_success;
    }
};

/// Round-trip decimal for CSV cells; empty for missing values.
inline std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::string csv_number(const std::optional<double>& v) { return v ? csv_number(*v) : std::string(); }

/// Free text made safe for a CSV cell.
inline std::string csv_text(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return s;
}

struct MetricsLog {
    std::vector<MetricsRecord> records;

    std::string to_csv() const {
        std::string out = "step,train_loss,val_loss,eval_return,eval_success\n";
        for (const auto& r : records) {
            out += std::to_string(r.step) + "," + csv_number(r.train_loss) + "," + csv_number(r.val_loss) + "," +
                   csv_number(r.eval_return) + "," + csv_number(r.eval_success) + "\n";
        }
        return out;
    }

    /// Inverse of to_csv; used when a run resumes from its output directory.
    static MetricsLog from_csv(const std::string& text) {
        MetricsLog log;
        std::istringstream in(text);
        std::string line;
        std::size_t line_no = 0;
        auto cell = [&](const std::string& s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            try {
                return std::stod(s);
            } catch (const std::exception&) {
                throw ParseError("bad number '" + s + "' in metrics", line_no, 0);
            }
        };
        while (std::getline(in, line)) {
            ++line_no;
            if (line_no == 1 || line.empty()) continue;
            std::vector<std::string> f;
            std::stringstream ls(line);
            std::string item;
            while (std::getline(ls, item, ',')) f.push_back(item);
            if (!line.empty() && line.back() == ',') f.emplace_back();
            if (f.size() != 5) throw ParseError("metrics row needs 5 fields", line_no, 0);
            MetricsRecord r;
            r.step = static_cast<std::uint64_t>(cell(f[0]).value_or(0));
            r.train_loss = cell(f[1]).value_or(NAN);
            r.val_loss = cell(f[2]).value_or(NAN);
            r.eval_return = cell(f[3]);
            r.eval_success = cell(f[4]);
            log.records.push_back(r);
        }
        return log;
    }

    bool operator==(const MetricsLog&) const = default;
};

}  // namespace rvs
