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

#ifndef COVAUDIT_REPORT_HPP_
#define COVAUDIT_REPORT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "covaudit/attack.hpp"

namespace covaudit {

// One check result. `satisfied` is recomputable from
// (estimate, std_error, bound, direction) with 3-standard-error slack.
struct ReportRow {
  std::string check_id;
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  Direction direction = Direction::kEqWithin;
  bool satisfied = false;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  std::int64_t wall_ms = 0;
};

inline constexpr const char* kCsvHeader =
    "check_id,estimate,std_error,bound,direction,satisfied,trials,seed,wall_ms";

std::string direction_name(Direction d);
Direction direction_from_name(const std::string& name);

// Shortest round-trip decimal representation.
std::string format_double(double v);

// RFC 4180: fields containing comma, quote, or newline are quoted with
// internal quotes doubled.
std::string csv_escape(const std::string& field);

std::string to_csv(const std::vector<ReportRow>& rows);

nlohmann::json row_to_json(const ReportRow& row);
std::string to_json_lines(const std::vector<ReportRow>& rows);

// Published schema for one JSON report row.
extern const char* const kReportRowSchema;

// Validates a row object against kReportRowSchema (required keys, types,
// enum values).
bool matches_report_schema(const nlohmann::json& row, std::string* error = nullptr);

ReportRow make_row(const std::string& check_id, const McEstimate& estimate,
                   double bound, Direction direction, std::int64_t wall_ms = 0);

ReportRow make_row(const std::string& check_id, const BoundReport& report,
                   std::uint64_t seed, std::int64_t wall_ms = 0);

bool all_satisfied(const std::vector<ReportRow>& rows);

}  // namespace covaudit

#endif  // COVAUDIT_REPORT_HPP_
