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

#include "covaudit/report.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace covaudit {

std::string direction_name(Direction d) {
  switch (d) {
    case Direction::kLe: return "le";
    case Direction::kGe: return "ge";
    case Direction::kEqWithin: return "eq-within";
  }
  return "unknown";
}

Direction direction_from_name(const std::string& name) {
  if (name == "le") return Direction::kLe;
  if (name == "ge") return Direction::kGe;
  if (name == "eq-within") return Direction::kEqWithin;
  throw std::invalid_argument("unknown direction: " + name);
}

std::string format_double(double v) {
  if (v == static_cast<double>(static_cast<long long>(v)) &&
      std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Trim to the shortest representation that still round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(shorter, "%lf", &back);
    if (back == v) return shorter;
  }
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string to_csv(const std::vector<ReportRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const ReportRow& row : rows) {
    out += csv_escape(row.check_id);
    out += ',';
    out += format_double(row.estimate);
    out += ',';
    out += format_double(row.std_error);
    out += ',';
    out += format_double(row.bound);
    out += ',';
    out += direction_name(row.direction);
    out += ',';
    out += row.satisfied ? "true" : "false";
    out += ',';
    out += std::to_string(row.trials);
    out += ',';
    out += std::to_string(row.seed);
    out += ',';
    out += std::to_string(row.wall_ms);
    out += '\n';
  }
  return out;
}

nlohmann::json row_to_json(const ReportRow& row) {
  return nlohmann::json{{"check_id", row.check_id},
                        {"estimate", row.estimate},
                        {"std_error", row.std_error},
                        {"bound", row.bound},
                        {"direction", direction_name(row.direction)},
                        {"satisfied", row.satisfied},
                        {"trials", row.trials},
                        {"seed", row.seed},
                        {"wall_ms", row.wall_ms}};
}

std::string to_json_lines(const std::vector<ReportRow>& rows) {
  std::string out;
  for (const ReportRow& row : rows) {
    out += row_to_json(row).dump();
    out += '\n';
  }
  return out;
}

const char* const kReportRowSchema = R"({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "covaudit report row",
  "type": "object",
  "required": ["check_id", "estimate", "std_error", "bound", "direction",
               "satisfied", "trials", "seed", "wall_ms"],
  "additionalProperties": false,
  "properties": {
    "check_id": {"type": "string"},
    "estimate": {"type": "number"},
    "std_error": {"type": "number"},
    "bound": {"type": "number"},
    "direction": {"enum": ["le", "ge", "eq-within"]},
    "satisfied": {"type": "boolean"},
    "trials": {"type": "integer"},
    "seed": {"type": "integer", "minimum": 0},
    "wall_ms": {"type": "integer"}
  }
})";

bool matches_report_schema(const nlohmann::json& row, std::string* error) {
  const auto fail = [&](const std::string& why) {
    if (error != nullptr) *error = why;
    return false;
  };
  if (!row.is_object()) return fail("row is not an object");
  const nlohmann::json schema = nlohmann::json::parse(kReportRowSchema);
  for (const auto& key : schema["required"])
    if (!row.contains(key.get<std::string>()))
      return fail("missing key: " + key.get<std::string>());
  for (const auto& [key, value] : row.items()) {
    if (!schema["properties"].contains(key)) return fail("unknown key: " + key);
    const auto& prop = schema["properties"][key];
    if (prop.contains("enum")) {
      bool ok = false;
      for (const auto& candidate : prop["enum"]) ok = ok || candidate == value;
      if (!ok) return fail("bad enum value for " + key);
      continue;
    }
    const std::string type = prop["type"].get<std::string>();
    const bool ok = (type == "string" && value.is_string()) ||
                    (type == "boolean" && value.is_boolean()) ||
                    (type == "integer" && value.is_number_integer()) ||
                    (type == "number" && value.is_number());
    if (!ok) return fail("bad type for " + key);
  }
  return true;
}

ReportRow make_row(const std::string& check_id, const McEstimate& estimate,
                   double bound, Direction direction, std::int64_t wall_ms) {
  ReportRow row;
  row.check_id = check_id;
  row.estimate = estimate.mean;
  row.std_error = estimate.std_error;
  row.bound = bound;
  row.direction = direction;
  row.satisfied =
      check_satisfied(estimate.mean, estimate.std_error, bound, direction);
  row.trials = estimate.trials;
  row.seed = estimate.master_seed;
  row.wall_ms = wall_ms;
  return row;
}

ReportRow make_row(const std::string& check_id, const BoundReport& report,
                   std::uint64_t seed, std::int64_t wall_ms) {
  ReportRow row;
  row.check_id = check_id;
  row.estimate = report.estimate.mean;
  row.std_error = report.estimate.std_error;
  row.bound = report.bound_value;
  row.direction = report.direction;
  row.satisfied = report.satisfied;
  row.trials = report.estimate.trials;
  row.seed = seed;
  row.wall_ms = wall_ms;
  return row;
}

bool all_satisfied(const std::vector<ReportRow>& rows) {
  for (const ReportRow& row : rows)
    if (!row.satisfied) return false;
  return true;
}

}  // namespace covaudit
