#pragma once

// Dataset files. Two encodings of the same content:
//   text   - JSON lines; a header record, then one record per trajectory
//   binary - "RVSD", u32 version, header, per-trajectory length-prefixed
//            little-endian f64 arrays
// load_dataset detects the encoding from the first bytes.

#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "rvs/common.hpp"
#include "rvs/data/trajectory.hpp"
#include "rvs/io/binary.hpp"

namespace rvs {

enum class DatasetFormat { text, binary };

inline constexpr std::string_view kDatasetMagic = "RVSD";
inline constexpr std::uint32_t kDatasetVersion = 1;

inline DatasetFormat dataset_format_for(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".jsonl" || ext == ".txt") return DatasetFormat::text;
    return DatasetFormat::binary;
}

inline std::string encode_dataset_binary(const Dataset& ds) {
    io::BinaryWriter w;
    w.raw(kDatasetMagic);
    w.u32(kDatasetVersion);
    w.str(ds.env_id);
    w.u64(ds.horizon);
    w.u64(ds.state_dim);
    w.u64(ds.action_dim);
    w.str(ds.provenance);
    w.u64(ds.trajectories.size());
    for (const auto& t : ds.trajectories) {
        w.u64(t.length());
        w.u8(t.terminated ? 1 : 0);
        w.f64s(t.states);
        w.f64s(t.actions);
        w.f64s(t.rewards);
    }
    return w.bytes();
}

inline Dataset decode_dataset_binary(std::string_view bytes) {
    io::BinaryReader r(bytes);
    r.expect_magic(kDatasetMagic, "dataset");
    const std::size_t version_at = r.offset();
    if (r.u32() != kDatasetVersion) throw ParseError("unsupported dataset version", 0, version_at);
    Dataset ds;
    ds.env_id = r.str(1 << 16);
    ds.horizon = r.u64();
    ds.state_dim = r.u64();
    ds.action_dim = r.u64();
    if (ds.state_dim == 0 || ds.action_dim == 0 || ds.state_dim > (1u << 20) || ds.action_dim > (1u << 20)) {
        throw ParseError("implausible dataset dimensions", 0, r.offset());
    }
    ds.provenance = r.str(1 << 20);
    const std::size_t per_step = 8 * (ds.state_dim + ds.action_dim + 1);
    const std::uint64_t n = r.count(9, "trajectory");
    ds.trajectories.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::size_t at = r.offset();
        const std::uint64_t T = r.count(per_step, "timestep");
        Trajectory t(ds.state_dim, ds.action_dim);
        const std::uint8_t term = r.u8();
        if (term > 1) throw ParseError("bad termination flag", 0, r.offset() - 1);
        t.terminated = term == 1;
        t.states.resize(T * ds.state_dim);
        t.actions.resize(T * ds.action_dim);
        t.rewards.resize(T);
        r.f64s(t.states);
        r.f64s(t.actions);
        r.f64s(t.rewards);
        if (T == 0 || T > ds.horizon) throw ParseError("trajectory length outside [1, horizon]", 0, at);
        if (!all_finite(t.states.data(), t.states.size()) || !all_finite(t.actions.data(), t.actions.size()) ||
            !all_finite(t.rewards.data(), t.rewards.size())) {
            throw ParseError("non-finite value in trajectory " + std::to_string(i), 0, at);
        }
        ds.trajectories.push_back(std::move(t));
    }
    if (!r.at_end()) throw ParseError("trailing bytes after last trajectory", 0, r.offset());
    if (ds.trajectories.empty()) throw ParseError("dataset has no trajectories", 0, r.offset());
    return ds;
}

inline std::string encode_dataset_text(const Dataset& ds) {
    using nlohmann::json;
    std::string out;
    json header{{"format", "rvs-dataset"},  {"version", kDatasetVersion}, {"env_id", ds.env_id},
                {"horizon_H", ds.horizon},   {"state_dim", ds.state_dim},   {"action_dim", ds.action_dim},
                {"provenance", ds.provenance}};
    out += header.dump() + "\n";
    for (const auto& t : ds.trajectories) {
        json states = json::array(), actions = json::array();
        for (std::size_t k = 0; k < t.length(); ++k) {
            auto s = t.state(k);
            auto a = t.action(k);
            states.push_back(std::vector<double>(s.begin(), s.end()));
            actions.push_back(std::vector<double>(a.begin(), a.end()));
        }
        json rec{{"states", states}, {"actions", actions}, {"rewards", t.rewards}, {"terminated", t.terminated}};
        out += rec.dump() + "\n";
    }
    return out;
}

inline Dataset decode_dataset_text(std::string_view text) {
    using nlohmann::json;
    Dataset ds;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), line_no, 0);
        }
        try {
            if (!have_header) {
                if (rec.value("format", "") != "rvs-dataset") throw ParseError("missing dataset header", line_no, 0);
                if (rec.at("version").get<std::uint32_t>() != kDatasetVersion) {
                    throw ParseError("unsupported dataset version", line_no, 0);
                }
                ds.env_id = rec.at("env_id").get<std::string>();
                ds.horizon = rec.at("horizon_H").get<std::size_t>();
                ds.state_dim = rec.at("state_dim").get<std::size_t>();
                ds.action_dim = rec.at("action_dim").get<std::size_t>();
                ds.provenance = rec.value("provenance", "");
                have_header = true;
                continue;
            }
            Trajectory t(ds.state_dim, ds.action_dim);
            const auto& states = rec.at("states");
            const auto& actions = rec.at("actions");
            t.rewards = rec.at("rewards").get<std::vector<double>>();
            t.terminated = rec.at("terminated").get<bool>();
            const std::size_t T = t.rewards.size();
            if (states.size() != T || actions.size() != T) throw ParseError("array lengths disagree", line_no, 0);
            if (T == 0 || T > ds.horizon) throw ParseError("trajectory length outside [1, horizon]", line_no, 0);
            for (std::size_t k = 0; k < T; ++k) {
                auto s = states[k].get<std::vector<double>>();
                auto a = actions[k].get<std::vector<double>>();
                if (s.size() != ds.state_dim || a.size() != ds.action_dim) {
                    throw ParseError("state or action has the wrong dimension", line_no, 0);
                }
                t.states.insert(t.states.end(), s.begin(), s.end());
                t.actions.insert(t.actions.end(), a.begin(), a.end());
            }
            ds.trajectories.push_back(std::move(t));
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad record: ") + e.what(), line_no, 0);
        }
    }
    if (!have_header) throw ParseError("missing dataset header", line_no == 0 ? 1 : line_no, 0);
    if (ds.trajectories.empty()) throw ParseError("dataset has no trajectories", line_no, 0);
    try {
        ds.validate();
    } catch (const UsageError& e) {
        throw ParseError(e.what(), line_no, 0);
    }
    return ds;
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path, DatasetFormat format) {
    ds.validate();
    io::write_file(path, format == DatasetFormat::binary ? encode_dataset_binary(ds) : encode_dataset_text(ds));
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    save_dataset(ds, path, dataset_format_for(path));
}

inline Dataset decode_dataset(std::string_view bytes) {
    if (bytes.substr(0, kDatasetMagic.size()) == kDatasetMagic) return decode_dataset_binary(bytes);
    return decode_dataset_text(bytes);
}

inline Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(io::read_file(path)); }

/// Content hash of a dataset, independent of the file encoding it came from.
inline std::string dataset_hash(const Dataset& ds) { return io::hex64(fnv1a(encode_dataset_binary(ds))); }

}  // namespace rvs
