/* Copyright 2026 The certsmooth Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "certsmooth/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace certsmooth {

namespace {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
T parse_field(const std::string& field, const std::string& source, std::size_t line,
              const char* name) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw std::invalid_argument(source + ":" + std::to_string(line) + ": bad " + name + " '" +
                                field + "'");
  }
  return value;
}

}  // namespace

void write_report_csv(std::span<const CampaignRow> rows, std::ostream& out) {
  out << kReportHeader << '\n';
  for (const auto& row : rows) {
    const auto& o = row.outcome;
    const bool correct = o.prediction.has_value() && *o.prediction == row.label;
    out << row.idx << ',' << row.label << ','
        << (o.prediction ? std::to_string(*o.prediction) : std::string("ABSTAIN")) << ','
        << (correct ? 1 : 0) << ',' << format_real(o.radius) << ','
        << format_real(row.sigma_star) << ',' << format_real(o.p_lower) << ','
        << (row.adjusted_by_memory ? 1 : 0) << '\n';
  }
}

void emit_report(std::span<const CampaignRow> rows, const MetricsSummary& metrics,
                 const nlohmann::json& config, const std::filesystem::path& csv_path,
                 const std::filesystem::path& json_path) {
  {
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot open " + csv_path.string() + " for writing");
    write_report_csv(rows, csv);
    if (!csv) throw std::runtime_error("failed writing " + csv_path.string());
  }
  std::ofstream json(json_path, std::ios::trunc);
  if (!json) throw std::runtime_error("cannot open " + json_path.string() + " for writing");
  json << nlohmann::json{{"metrics", metrics.to_json()}, {"config", config}}.dump(2) << '\n';
  if (!json) throw std::runtime_error("failed writing " + json_path.string());
}

std::filesystem::path metrics_path_for(const std::filesystem::path& csv_path) {
  auto path = csv_path;
  path.replace_extension(".json");
  if (path == csv_path) path += ".json";
  return path;
}

std::vector<CampaignRow> parse_report_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(source + ": empty report");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kReportHeader) throw std::invalid_argument(source + ": unexpected report header");

  std::vector<CampaignRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8) {
      throw std::invalid_argument(source + ":" + std::to_string(line_no) +
                                  ": expected 8 fields");
    }
    CampaignRow row;
    row.idx = parse_field<std::size_t>(fields[0], source, line_no, "idx");
    row.label = parse_field<std::size_t>(fields[1], source, line_no, "label");
    if (fields[2] != "ABSTAIN") {
      row.outcome.prediction = parse_field<std::size_t>(fields[2], source, line_no, "prediction");
    }
    row.outcome.radius = parse_field<double>(fields[4], source, line_no, "radius");
    row.sigma_star = parse_field<double>(fields[5], source, line_no, "sigma_star");
    row.outcome.sigma_used = row.sigma_star;
    row.outcome.p_lower = parse_field<double>(fields[6], source, line_no, "p_lower");
    row.adjusted_by_memory = parse_field<int>(fields[7], source, line_no, "adjusted") != 0;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CampaignRow> read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report " + path.string());
  return parse_report_csv(in, path.string());
}

}  // namespace certsmooth
