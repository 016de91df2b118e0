// Copyright 2026 The covaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "covaudit/report.hpp"

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args) {
  const std::string out_path = "cli_stdout.tmp";
  const std::string err_path = "cli_stderr.tmp";
  const std::string cmd = std::string(COVAUDIT_CLI_PATH) + " " + args + " >" +
                          out_path + " 2>" + err_path;
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WEXITSTATUS(status);
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return result;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Blank the wall_ms column so timing does not affect comparisons.
std::string strip_wall_ms(const std::string& csv) {
  std::string out;
  for (const std::string& line : lines_of(csv)) {
    const std::size_t cut = line.rfind(',');
    out += line.substr(0, cut);
    out += '\n';
  }
  return out;
}

}  // namespace

TEST_CASE("usage errors exit with code 2 and name the offender") {
  const RunResult bad_delta =
      run_cli("run-attack --mechanism gaussian_dp --delta 2.0 --trials 100");
  CHECK(bad_delta.exit_code == 2);
  CHECK(bad_delta.err.find("delta") != std::string::npos);

  const RunResult unknown_flag = run_cli("run-attack --frobnicate 1");
  CHECK(unknown_flag.exit_code == 2);

  const RunResult no_command = run_cli("");
  CHECK(no_command.exit_code == 2);

  const RunResult bad_mechanism = run_cli("run-attack --mechanism psychic");
  CHECK(bad_mechanism.exit_code == 2);
  CHECK(bad_mechanism.err.find("mechanism") != std::string::npos);
}

TEST_CASE("valid run-attack on the empirical mechanism") {
  const RunResult result = run_cli(
      "run-attack --d 5 --n 100 --trials 500 --mechanism empirical --seed 42");
  CHECK(result.exit_code == 0);
  const auto lines = lines_of(result.out);
  REQUIRE(lines.size() >= 3);
  CHECK(lines[0] == covaudit::kCsvHeader);
  bool found = false;
  for (const std::string& line : lines)
    if (line.find("attack/in_sample_sum,") == 0 &&
        line.find(",15,eq-within,true,") != std::string::npos)
      found = true;
  CHECK(found);
}

TEST_CASE("config file values are overridden by flags") {
  {
    std::ofstream cfg("cli_config.tmp.json");
    cfg << R"({"d": 5, "trials": 400, "mechanism": "empirical", "seed": 7})";
  }
  // Flag wins: d = 2 gives the bound 3 = d(d+1)/2.
  const RunResult result =
      run_cli("run-attack --config cli_config.tmp.json --d 2 --n 50");
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("attack/in_sample_sum,") != std::string::npos);
  bool bound_is_three = false;
  for (const std::string& line : lines_of(result.out))
    if (line.find("attack/in_sample_sum,") == 0)
      bound_is_three = line.find(",3,eq-within,") != std::string::npos;
  CHECK(bound_is_three);

  {
    std::ofstream cfg("cli_config.tmp.json");
    cfg << R"({"d": 5, "banana": 1})";
  }
  const RunResult unknown = run_cli("run-attack --config cli_config.tmp.json");
  CHECK(unknown.exit_code == 2);
  CHECK(unknown.err.find("banana") != std::string::npos);

  {
    std::ofstream cfg("cli_config.tmp.json");
    cfg << R"({"d": "five"})";
  }
  const RunResult bad_type = run_cli("run-attack --config cli_config.tmp.json");
  CHECK(bad_type.exit_code == 2);
  CHECK(bad_type.err.find("d") != std::string::npos);
  std::remove("cli_config.tmp.json");
}

TEST_CASE("reports are byte-identical under a fixed seed modulo wall_ms") {
  const std::string args =
      "verify-identities --d 3 --trials 300 --seed 42 --n 60";
  const RunResult first = run_cli(args);
  const RunResult second = run_cli(args);
  CHECK(first.exit_code == 0);
  CHECK(strip_wall_ms(first.out) == strip_wall_ms(second.out));

  const RunResult other_seed =
      run_cli("verify-identities --d 3 --trials 300 --seed 43 --n 60");
  CHECK(strip_wall_ms(first.out) != strip_wall_ms(other_seed.out));
}

TEST_CASE("json output validates against the published schema") {
  const RunResult result = run_cli(
      "run-attack --d 3 --n 50 --trials 300 --mechanism constant --format json");
  CHECK(result.exit_code == 0);
  int rows = 0;
  for (const std::string& line : lines_of(result.out)) {
    std::string why;
    CHECK(covaudit::matches_report_schema(nlohmann::json::parse(line), &why));
    ++rows;
  }
  CHECK(rows >= 2);
}

TEST_CASE("environment variable supplies the default seed") {
  const std::string out_path = "cli_stdout.tmp";
  const std::string cmd_env = std::string("COVAUDIT_SEED=4242 ") +
                              COVAUDIT_CLI_PATH +
                              " run-attack --d 3 --n 50 --trials 300 "
                              "--mechanism empirical >" +
                              out_path + " 2>/dev/null";
  REQUIRE(std::system(cmd_env.c_str()) == 0);
  const std::string via_env = slurp(out_path);
  const RunResult via_flag = run_cli(
      "run-attack --d 3 --n 50 --trials 300 --mechanism empirical --seed 4242");
  CHECK(strip_wall_ms(via_env) == strip_wall_ms(via_flag.out));
  std::remove(out_path.c_str());
}

TEST_CASE("report is written to a file when requested") {
  const RunResult result = run_cli(
      "run-attack --d 3 --n 50 --trials 300 --mechanism oracle --output "
      "cli_report.tmp.csv");
  CHECK(result.exit_code == 0);
  const std::string report = slurp("cli_report.tmp.csv");
  CHECK(report.find(covaudit::kCsvHeader) == 0);
  std::remove("cli_report.tmp.csv");
}
