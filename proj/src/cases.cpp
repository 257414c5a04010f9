#include "epiguard/cases.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "epiguard/errors.hpp"
#include "epiguard/scenario_io.hpp"

namespace epiguard {

namespace {

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  const auto first = s.find_first_not_of(" \t");
  return first == std::string::npos ? std::string{} : s.substr(first);
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(strip(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double number(const std::string& source, std::size_t line, const std::string& column, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ParseError(source, line, column + " expects a number, got '" + text + "'");
  }
  return v;
}

}  // namespace

std::vector<CaseRecord> ingest_cases(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ingest_cases_text(buf.str(), path.string());
}

std::vector<CaseRecord> ingest_cases_text(std::string_view text, const std::string& source) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;

  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!strip(line).empty()) header = cells(strip(line));
  }
  if (header.empty()) throw ParseError(source, 0, "empty case file");
  if (header.size() < 2 || header[0] != "date" || header[1] != "cumulative_confirmed") {
    throw ParseError(source, line_no, "header must start with date,cumulative_confirmed");
  }
  int positivity_col = -1;
  int mobility_col = -1;
  for (std::size_t c = 2; c < header.size(); ++c) {
    if (header[c] == "positivity_rate" && positivity_col < 0 && mobility_col < 0) {
      positivity_col = static_cast<int>(c);
    } else if (header[c] == "mobility_index" && mobility_col < 0) {
      mobility_col = static_cast<int>(c);
    } else {
      throw ParseError(source, line_no, "unexpected column '" + header[c] + "'");
    }
  }

  std::vector<CaseRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    const auto row = cells(strip(line));
    if (row.size() != header.size()) {
      throw ParseError(source, line_no, "expected " + std::to_string(header.size()) + " columns, got " +
                                            std::to_string(row.size()));
    }
    CaseRecord rec;
    rec.date = row[0];
    try {
      rec.day = parse_iso_date(rec.date);
    } catch (const ValidationError& e) {
      throw ParseError(source, line_no, e.what());
    }
    rec.cumulative_confirmed = number(source, line_no, "cumulative_confirmed", row[1]);
    if (rec.cumulative_confirmed < 0.0) throw ParseError(source, line_no, "cumulative_confirmed must be >= 0");
    if (positivity_col >= 0 && !row[positivity_col].empty()) {
      const double p = number(source, line_no, "positivity_rate", row[positivity_col]);
      if (!(p > 0.0 && p <= 1.0)) throw ParseError(source, line_no, "positivity_rate must lie in (0, 1]");
      rec.positivity_rate = p;
    }
    if (mobility_col >= 0 && !row[mobility_col].empty()) {
      rec.mobility_index = number(source, line_no, "mobility_index", row[mobility_col]);
    }
    if (!records.empty()) {
      if (rec.day <= records.back().day) {
        throw ParseError(source, line_no, "date " + rec.date + " does not follow " + records.back().date);
      }
      if (rec.cumulative_confirmed < records.back().cumulative_confirmed) {
        throw ParseError(source, line_no, "cumulative_confirmed decreases on " + rec.date);
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

ScaledCases scale_cases(const std::vector<CaseRecord>& records, double exponent) {
  if (!std::isfinite(exponent)) throw ValidationError("scaling exponent must be finite");
  ScaledCases out;
  out.exponent = exponent;
  if (records.empty()) return out;
  for (const auto& r : records) {
    if (!r.positivity_rate) throw ValidationError("positivity_rate missing on " + r.date);
  }
  out.reference_positivity =
      std::min_element(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return *a.positivity_rate < *b.positivity_rate;
      })->positivity_rate.value();
  out.formula = "scaled = cumulative_confirmed * (positivity_rate / " + format_number(out.reference_positivity) +
                ")^" + format_number(exponent) + "; reference = minimum positivity in series";
  for (const auto& r : records) {
    out.dates.push_back(r.date);
    out.scaled_confirmed.push_back(r.cumulative_confirmed *
                                   std::pow(*r.positivity_rate / out.reference_positivity, exponent));
  }
  return out;
}

}  // namespace epiguard
