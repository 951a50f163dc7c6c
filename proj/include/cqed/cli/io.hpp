// Copyright 2026 The cqed-toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// File ingestion helpers: unit-suffixed JSON keys / CSV columns, content
// digests and the run manifest embedded in every report.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"

#include "cqed/cli/csv.hpp"
#include "cqed/error.hpp"

namespace cqed::cli {

using json = nlohmann::ordered_json;

inline constexpr std::string_view tool_version = "0.1.0";

enum class Dim { frequency, time, length, area, volume, capacitance, current, inductance, power, charge_density, field };

namespace detail {

struct UnitEntry {
    std::string_view name;
    Dim dim;
    double factor;  // to SI
};

inline constexpr std::array<UnitEntry, 26> units{{
    {"Hz", Dim::frequency, 1.0},       {"kHz", Dim::frequency, 1e3},     {"MHz", Dim::frequency, 1e6},
    {"GHz", Dim::frequency, 1e9},      {"s", Dim::time, 1.0},            {"ms", Dim::time, 1e-3},
    {"us", Dim::time, 1e-6},           {"ns", Dim::time, 1e-9},          {"m", Dim::length, 1.0},
    {"mm", Dim::length, 1e-3},         {"um", Dim::length, 1e-6},        {"nm", Dim::length, 1e-9},
    {"m2", Dim::area, 1.0},            {"um2", Dim::area, 1e-12},        {"F", Dim::capacitance, 1.0},
    {"pF", Dim::capacitance, 1e-12},   {"fF", Dim::capacitance, 1e-15},  {"A", Dim::current, 1.0},
    {"nA", Dim::current, 1e-9},        {"H", Dim::inductance, 1.0},      {"nH", Dim::inductance, 1e-9},
    {"W", Dim::power, 1.0},            {"dBm", Dim::power, 0.0},         {"C_per_m2", Dim::charge_density, 1.0},
    {"V_per_m", Dim::field, 1.0},      {"m3", Dim::volume, 1.0},
}};

inline const UnitEntry *lookup_unit(std::string_view u) {
    for (const auto &e : units)
        if (e.name == u) return &e;
    return nullptr;
}

inline double to_si(const UnitEntry &u, double v) {
    if (u.name == "dBm") return 1e-3 * std::pow(10.0, v / 10.0);
    return v * u.factor;
}

}  // namespace detail

/// Finds the key `<base>_<unit>` of a JSON object. A key whose suffix is a
/// unit of another dimension is a unit mismatch.
inline std::optional<std::pair<std::string, const detail::UnitEntry *>> find_unit_key(const json &j,
                                                                                   std::string_view base, Dim dim,
                                                                                   std::string_view source) {
    std::optional<std::pair<std::string, const detail::UnitEntry *>> found;
    const std::string prefix = std::string(base) + "_";
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string &key = it.key();
        if (key.rfind(prefix, 0) != 0) continue;
        const auto *u = detail::lookup_unit(std::string_view(key).substr(prefix.size()));
        if (u == nullptr) continue;
        if (u->dim != dim) throw Error(ErrorKind::parse, std::string(source) + ": unit mismatch for '" + key + "'");
        if (found) throw Error(ErrorKind::parse, std::string(source) + ": '" + std::string(base) + "' given twice");
        found.emplace(key, u);
    }
    return found;
}

/// SI value of `<base>_<unit>`, if present.
inline std::optional<double> read_quantity(const json &j, std::string_view base, Dim dim, std::string_view source) {
    const auto k = find_unit_key(j, base, dim, source);
    if (!k) return std::nullopt;
    const json &v = j.at(k->first);
    if (!v.is_number()) throw Error(ErrorKind::parse, std::string(source) + ": '" + k->first + "' must be a number");
    return detail::to_si(*k->second, v.get<double>());
}

/// SI values of an array-valued `<base>_<unit>`, if present.
inline std::optional<std::vector<double>> read_quantity_array(const json &j, std::string_view base, Dim dim,
                                                              std::string_view source) {
    const auto k = find_unit_key(j, base, dim, source);
    if (!k) return std::nullopt;
    const json &v = j.at(k->first);
    if (!v.is_array()) throw Error(ErrorKind::parse, std::string(source) + ": '" + k->first + "' must be an array");
    std::vector<double> out;
    for (const auto &x : v) {
        if (!x.is_number()) throw Error(ErrorKind::parse, std::string(source) + ": '" + k->first + "' must hold numbers");
        out.push_back(detail::to_si(*k->second, x.get<double>()));
    }
    return out;
}

inline double require_quantity(const json &j, std::string_view base, Dim dim, std::string_view source) {
    auto v = read_quantity(j, base, dim, source);
    if (!v) throw Error(ErrorKind::parse, std::string(source) + ": missing '" + std::string(base) + "_<unit>'");
    return *v;
}

template <class T>
T value_or(const json &j, std::string_view key, T fallback) {
    const auto it = j.find(std::string(key));
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception &) {
        throw Error(ErrorKind::parse, "config: '" + std::string(key) + "' has the wrong type");
    }
}

/// Column `<base>_<unit>`: returns its index and the unit entry.
inline std::pair<std::size_t, const detail::UnitEntry *> find_column(const CsvTable &t, std::string_view base, Dim dim,
                                                                   std::string_view source) {
    const std::string prefix = std::string(base) + "_";
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        const std::string &h = t.header[i];
        if (h.rfind(prefix, 0) != 0) continue;
        const auto *u = detail::lookup_unit(std::string_view(h).substr(prefix.size()));
        if (u == nullptr) continue;
        if (u->dim != dim) throw Error(ErrorKind::parse, std::string(source) + ": unit mismatch in column '" + h + "'");
        return {i, u};
    }
    return {CsvTable::npos, nullptr};
}

inline double cell_si(const CsvTable &t, std::size_t row, std::pair<std::size_t, const detail::UnitEntry *> col,
                      std::string_view source) {
    return detail::to_si(*col.second, parse_number(t.rows[row][col.first], source, t.row_lines[row]));
}

inline std::string read_file(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorKind::parse, "cannot open '" + p.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline json parse_json(const std::string &text, std::string_view source) {
    try {
        return json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw Error(ErrorKind::parse, std::string(source) + ": " + e.what());
    }
}

inline CsvTable load_csv(const std::filesystem::path &p) {
    std::istringstream in(read_file(p));
    return parse_csv(in, p.string());
}

inline std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorKind::numeric, "sha256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

struct RunManifest {
    std::string subcommand;
    std::vector<std::string> inputs;
    std::string config_digest;
    std::string version{tool_version};
    std::optional<std::uint64_t> seed;
    std::string timestamp;

    json to_json() const {
        json j;
        j["subcommand"] = subcommand;
        j["inputs"] = inputs;
        j["config_digest"] = "sha256:" + config_digest;
        j["tool_version"] = version;
        j["seed"] = seed ? json(*seed) : json(nullptr);
        j["timestamp"] = timestamp;
        return j;
    }
};

inline std::string utc_timestamp(bool fixed) {
    if (fixed) return "1970-01-01T00:00:00Z";
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

/// Digest over the concatenated bytes of every input, each prefixed by its size.
inline RunManifest make_manifest(std::string subcommand, const std::vector<std::pair<std::string, std::string>> &inputs,
                                 std::optional<std::uint64_t> seed, bool fixed_timestamp) {
    RunManifest m;
    m.subcommand = std::move(subcommand);
    std::string all;
    for (const auto &[name, bytes] : inputs) {
        m.inputs.push_back(name);
        all += std::to_string(bytes.size()) + ":" + bytes;
    }
    m.config_digest = sha256_hex(all);
    m.seed = seed;
    m.timestamp = utc_timestamp(fixed_timestamp);
    return m;
}

inline void write_text(const std::filesystem::path &p, std::string_view text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::parse, "cannot write '" + p.string() + "'");
    out << text;
}

inline void write_json(const std::filesystem::path &p, const json &j) { write_text(p, j.dump(2) + "\n"); }

}  // namespace cqed::cli
