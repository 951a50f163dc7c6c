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


#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"

#include "cqed/cli/csv.hpp"
#include "cqed/cli/io.hpp"

namespace fs = std::filesystem;
using namespace cqed;
using namespace cqed::cli;

namespace {

const fs::path kFixtures = CQED_FIXTURE_DIR;

const fs::path kScratchRoot = fs::temp_directory_path() / ("cqed_cli_test_" + std::to_string(::getpid()));

// Each test runs in its own process under ctest, so the root is removed per process.
struct ScratchCleanup {
    ~ScratchCleanup() {
        std::error_code ec;
        fs::remove_all(kScratchRoot, ec);
    }
} cleanup;

fs::path scratch(const std::string &name) {
    const fs::path p = kScratchRoot / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(const std::string &args, const fs::path &log) {
    const std::string cmd = std::string(CQED_BIN) + " " + args + " >" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path &p) { return read_file(p); }

}  // namespace

TEST(Csv, QuotedFieldsAndCrlf) {
    std::istringstream in("a,b\r\n\"x, y\",\"say \"\"hi\"\"\"\r\n\r\n1,\"multi\nline\"\n");
    const auto t = parse_csv(in);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[0][0], "x, y");
    EXPECT_EQ(t.rows[0][1], "say \"hi\"");
    EXPECT_EQ(t.rows[1][1], "multi\nline");
    EXPECT_EQ(t.row_lines[1], 4u);
}

TEST(Csv, ErrorsCarryLineNumbers) {
    std::istringstream ragged("a,b\n1,2\n3\n");
    try {
        parse_csv(ragged, "f.csv");
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::parse);
        EXPECT_NE(std::string(e.what()).find("f.csv:3"), std::string::npos);
    }
    std::istringstream open("a\n\"abc\n");
    EXPECT_THROW(parse_csv(open), Error);
    try {
        parse_number("1.5x", "g.csv", 7);
        FAIL();
    } catch (const Error &e) {
        EXPECT_NE(std::string(e.what()).find("g.csv:7"), std::string::npos);
    }
}

TEST(Csv, WriterRoundTrip) {
    std::ostringstream os;
    CsvWriter w(os, {"time_us", "label, quoted"});
    w.write_fields({"0.1", "a\"b"});
    EXPECT_THROW(w.row({1.0}), Error);
    std::istringstream in(os.str());
    const auto t = parse_csv(in);
    EXPECT_EQ(t.header[1], "label, quoted");
    EXPECT_EQ(t.rows[0][1], "a\"b");
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(parse_number(format_number(1.0 / 3.0), "", 0), 1.0 / 3.0);
}

TEST(Units, SuffixConversionAndMismatch) {
    const json j = json::parse(R"({"omega_r_GHz": 7.2686, "t_int_us": 57, "bad_nH": 1.0})");
    EXPECT_NEAR(*read_quantity(j, "omega_r", Dim::frequency, "cfg"), 7.2686e9, 1e-3);
    EXPECT_NEAR(*read_quantity(j, "t_int", Dim::time, "cfg"), 57e-6, 1e-18);
    EXPECT_FALSE(read_quantity(j, "absent", Dim::time, "cfg").has_value());
    try {
        read_quantity(j, "bad", Dim::frequency, "cfg");
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::parse);
        EXPECT_NE(std::string(e.what()).find("unit mismatch"), std::string::npos);
    }
    const json twice = json::parse(R"({"f_GHz": 1, "f_MHz": 1000})");
    EXPECT_THROW(read_quantity(twice, "f", Dim::frequency, "cfg"), Error);
}

TEST(Manifest, DigestIsDeterministic) {
    const auto a = make_manifest("extract", {{"a.json", "{}"}, {"b.csv", "x\n"}}, std::nullopt, true);
    const auto b = make_manifest("extract", {{"a.json", "{}"}, {"b.csv", "x\n"}}, std::nullopt, true);
    const auto c = make_manifest("extract", {{"a.json", "{}x"}, {"b.csv", "\n"}}, std::nullopt, true);
    EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
    EXPECT_NE(a.config_digest, c.config_digest);
    EXPECT_EQ(a.timestamp, "1970-01-01T00:00:00Z");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Binary, ExtractProducesTable) {
    const fs::path out = scratch("extract");
    ASSERT_EQ(run("--out " + out.string() + " --fixed-timestamp extract " + (kFixtures / "device/power_scan.json").string() +
                      " " + (kFixtures / "device/peaks.csv").string(),
                  out / "log"),
              0);
    const json r = json::parse(slurp(out / "report.json"));
    EXPECT_NEAR(r["system_params"]["chi_over_2pi"]["value"].get<double>(), -3.41, 0.02);
    EXPECT_TRUE(fs::exists(out / "summary.txt"));
}

TEST(Binary, UsageAndInputErrorsExitTwo) {
    const fs::path out = scratch("errors");
    EXPECT_EQ(run("", out / "log"), 2);
    EXPECT_EQ(run("--bogus", out / "log"), 2);
    EXPECT_EQ(run("--out " + out.string() + " simulate nonsense --config " + (kFixtures / "simulate/t1.json").string(),
                  out / "log"),
              2);
    const fs::path empty = out / "empty.csv";
    std::ofstream(empty) << "fock_n,center_GHz,intensity,width_MHz\n";
    EXPECT_EQ(run("--out " + out.string() + " extract " + (kFixtures / "device/power_scan.json").string() + " " +
                      empty.string(),
                  out / "log"),
              2);
    EXPECT_NE(slurp(out / "log").find("insufficient peaks"), std::string::npos);
    EXPECT_EQ(run("--out " + out.string() + " extract missing.json missing.csv", out / "log"), 2);
    EXPECT_EQ(run("--help", out / "log"), 0);
}

TEST(Binary, SimulateSinglePointAndDeterminism) {
    const fs::path a = scratch("sim_a"), b = scratch("sim_b");
    const std::string cfg = (kFixtures / "simulate/t1_single.json").string();
    ASSERT_EQ(run("--out " + a.string() + " --fixed-timestamp simulate t1 --config " + cfg, a / "log"), 0);
    ASSERT_EQ(run("--out " + b.string() + " --fixed-timestamp simulate t1 --config " + cfg, b / "log"), 0);
    std::istringstream in(slurp(a / "curves.csv"));
    EXPECT_EQ(parse_csv(in).rows.size(), 1u);
    EXPECT_EQ(slurp(a / "curves.csv"), slurp(b / "curves.csv"));
    EXPECT_EQ(slurp(a / "simulate_report.json"), slurp(b / "simulate_report.json"));
}

TEST(Binary, SeedOverrideChangesNoisyOutput) {
    const fs::path a = scratch("seed_a"), b = scratch("seed_b");
    const std::string cfg = (kFixtures / "simulate/t1.json").string();
    ASSERT_EQ(run("--out " + a.string() + " --fixed-timestamp --seed 1 simulate t1 --config " + cfg, a / "log"), 0);
    ASSERT_EQ(run("--out " + b.string() + " --fixed-timestamp --seed 2 simulate t1 --config " + cfg, b / "log"), 0);
    EXPECT_NE(slurp(a / "curves.csv"), slurp(b / "curves.csv"));
}
