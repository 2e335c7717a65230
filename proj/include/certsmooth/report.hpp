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

#ifndef CERTSMOOTH_REPORT_HPP_
#define CERTSMOOTH_REPORT_HPP_

#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "certsmooth/campaign.hpp"
#include "certsmooth/metrics.hpp"

namespace certsmooth {

inline constexpr const char* kReportHeader =
    "idx,label,prediction,correct,radius,sigma_star,p_lower,adjusted_by_memory";

/// Writes the per-input CSV. Reals use 17 significant digits so the file
/// round-trips exactly.
void write_report_csv(std::span<const CampaignRow> rows, std::ostream& out);

/// Writes the CSV to `csv_path` and {"metrics": ..., "config": ...} to
/// `json_path`.
void emit_report(std::span<const CampaignRow> rows, const MetricsSummary& metrics,
                 const nlohmann::json& config, const std::filesystem::path& csv_path,
                 const std::filesystem::path& json_path);

/// Companion metrics path for a report CSV: same stem, ".json" extension.
std::filesystem::path metrics_path_for(const std::filesystem::path& csv_path);

/// Parses a report CSV back into rows (prediction, radius, sigma and p_lower
/// are restored; sample counts are not stored).
std::vector<CampaignRow> parse_report_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<CampaignRow> read_report_csv(const std::filesystem::path& path);

}  // namespace certsmooth

#endif  // CERTSMOOTH_REPORT_HPP_
