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

#include <doctest.h>

#include <sstream>

#include "covaudit/report.hpp"

using namespace covaudit;

namespace {

ReportRow sample_row() {
  ReportRow row;
  row.check_id = "demo/check";
  row.estimate = 14.94;
  row.std_error = 0.18;
  row.bound = 15.0;
  row.direction = Direction::kEqWithin;
  row.satisfied = true;
  row.trials = 1000;
  row.seed = 42;
  row.wall_ms = 7;
  return row;
}

}  // namespace

TEST_CASE("direction names round trip") {
  for (const Direction d : {Direction::kLe, Direction::kGe, Direction::kEqWithin})
    CHECK(direction_from_name(direction_name(d)) == d);
  CHECK_THROWS_AS(direction_from_name("sideways"), std::invalid_argument);
}

TEST_CASE("format_double round trips") {
  for (const double v : {0.0, 20.0, -1.5, 0.1, 1e-300, 3.141592653589793,
                         1.0000000000000002}) {
    const std::string s = format_double(v);
    std::istringstream in(s);
    double back = 0.0;
    in >> back;
    CHECK(back == v);
  }
  CHECK(format_double(20.0) == "20");
  CHECK(format_double(100.0) == "100");
}

TEST_CASE("csv escaping is RFC 4180") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("line\nbreak") == "\"line\nbreak\"");
}

TEST_CASE("csv layout matches the documented header") {
  const std::string csv = to_csv({sample_row()});
  std::istringstream in(csv);
  std::string header, body;
  std::getline(in, header);
  std::getline(in, body);
  CHECK(header == kCsvHeader);
  CHECK(body == "demo/check,14.94,0.18,15,eq-within,true,1000,42,7");
}

TEST_CASE("json rows satisfy the published schema") {
  const nlohmann::json row = row_to_json(sample_row());
  std::string why;
  CHECK(matches_report_schema(row, &why));

  nlohmann::json missing = row;
  missing.erase("bound");
  CHECK_FALSE(matches_report_schema(missing, &why));
  CHECK(why == "missing key: bound");

  nlohmann::json extra = row;
  extra["surprise"] = 1;
  CHECK_FALSE(matches_report_schema(extra, &why));

  nlohmann::json bad_enum = row;
  bad_enum["direction"] = "upwards";
  CHECK_FALSE(matches_report_schema(bad_enum, &why));

  nlohmann::json bad_type = row;
  bad_type["trials"] = "many";
  CHECK_FALSE(matches_report_schema(bad_type, &why));

  const std::string lines = to_json_lines({sample_row(), sample_row()});
  std::istringstream in(lines);
  std::string line;
  int count = 0;
  while (std::getline(in, line)) {
    CHECK(matches_report_schema(nlohmann::json::parse(line)));
    ++count;
  }
  CHECK(count == 2);
}

TEST_CASE("satisfied is recomputable from the row fields") {
  const ReportRow row = sample_row();
  CHECK(row.satisfied ==
        check_satisfied(row.estimate, row.std_error, row.bound, row.direction));
  const ReportRow made =
      make_row("x", McEstimate{1.0, 0.1, 10, 7}, 2.0, Direction::kLe);
  CHECK(made.satisfied);
  CHECK(made.trials == 10);
  CHECK(made.seed == 7);
}

TEST_CASE("all_satisfied scans every row") {
  ReportRow good = sample_row();
  ReportRow bad = sample_row();
  bad.satisfied = false;
  CHECK(all_satisfied({good, good}));
  CHECK_FALSE(all_satisfied({good, bad}));
  CHECK(all_satisfied({}));
}

TEST_CASE("mc estimate helpers") {
  CHECK_THROWS_AS(make_estimate({1.0}, 0), std::invalid_argument);
  const McEstimate est = make_estimate({1.0, 2.0, 3.0, 4.0}, 9);
  CHECK(est.mean == doctest::Approx(2.5));
  CHECK(est.trials == 4);
  CHECK(est.std_error ==
        doctest::Approx(std::sqrt((5.0 / 3.0) / 4.0)));
  CHECK(binomial_std_error(0.0, 100) == 0.0);
  CHECK(binomial_std_error(0.5, 100) == doctest::Approx(0.05));

  std::vector<double> v(1000, 0.125);
  CHECK(pairwise_sum(v) == doctest::Approx(125.0).epsilon(1e-15));
}
