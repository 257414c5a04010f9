#pragma once

// Recorded case data: `date,cumulative_confirmed[,positivity_rate][,mobility_index]`.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace epiguard {

struct CaseRecord {
  std::string date;  ///< ISO-8601
  long long day = 0; ///< days since 1970-01-01
  double cumulative_confirmed = 0.0;
  std::optional<double> positivity_rate;
  std::optional<double> mobility_index;
};

std::vector<CaseRecord> ingest_cases(const std::filesystem::path& path);
std::vector<CaseRecord> ingest_cases_text(std::string_view text, const std::string& source = "<cases>");

struct ScaledCases {
  std::vector<std::string> dates;
  std::vector<double> scaled_confirmed;
  double exponent = 1.0 / 3.0;
  double reference_positivity = 0.0;  ///< series minimum
  std::string formula;                ///< human-readable, written into output metadata
};

/// confirmed * (positivity / min positivity)^exponent. Needs positivity on every record.
ScaledCases scale_cases(const std::vector<CaseRecord>& records, double exponent = 1.0 / 3.0);

}  // namespace epiguard
