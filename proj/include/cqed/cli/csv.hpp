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

// Minimal RFC-4180 tables: a mandatory header row, quoted fields allowed,
// CRLF or LF line endings.

#include <charconv>
#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cqed/error.hpp"

namespace cqed::cli {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;  // 1-based source line of each row

    /// Index of the column whose name is `name`, or npos.
    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return npos;
    }
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

inline CsvTable parse_csv(std::istream &in, std::string_view source = "csv") {
    auto fail = [&](std::size_t line, const std::string &msg) {
        std::ostringstream os;
        os << source << ":" << line << ": " << msg;
        throw Error(ErrorKind::parse, os.str());
    };
    CsvTable t;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false, field_started = false, have_content = false;
    std::size_t line = 1, record_line = 1;
    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        const bool blank = record.size() == 1 && record[0].empty() && !have_content;
        if (!blank) {
            if (t.header.empty()) {
                t.header = record;
            } else {
                if (record.size() != t.header.size())
                    fail(record_line, "expected " + std::to_string(t.header.size()) + " fields, found " +
                                          std::to_string(record.size()));
                t.rows.push_back(record);
                t.row_lines.push_back(record_line);
            }
        }
        record.clear();
        have_content = false;
    };
    char c;
    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started) fail(line, "quote inside unquoted field");
                in_quotes = true;
                field_started = true;
                have_content = true;
                break;
            case ',':
                have_content = true;
                end_field();
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                ++line;
                record_line = line;
                break;
            default:
                field.push_back(c);
                field_started = true;
                have_content = true;
        }
    }
    if (in_quotes) fail(line, "unterminated quoted field");
    if (have_content || !field.empty() || !record.empty()) end_record();
    if (t.header.empty()) fail(1, "missing header row");
    return t;
}

inline double parse_number(std::string_view s, std::string_view source, std::size_t line) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        std::ostringstream os;
        os << source << ":" << line << ": not a number: '" << s << "'";
        throw Error(ErrorKind::parse, os.str());
    }
    return v;
}

/// Shortest round-trip decimal representation.
inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string quote_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

/// Writes rows with CRLF terminators as RFC 4180 prescribes.
class CsvWriter {
public:
    CsvWriter(std::ostream &out, const std::vector<std::string> &header) : out_(out), width_(header.size()) {
        write_fields(header);
    }

    void row(const std::vector<double> &values) {
        std::vector<std::string> f;
        f.reserve(values.size());
        for (double v : values) f.push_back(format_number(v));
        write_fields(f);
    }

    void write_fields(const std::vector<std::string> &fields) {
        if (fields.size() != width_) throw Error(ErrorKind::usage, "csv writer: row width does not match header");
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << quote_field(fields[i]);
        }
        out_ << "\r\n";
    }

private:
    std::ostream &out_;
    std::size_t width_;
};

}  // namespace cqed::cli
