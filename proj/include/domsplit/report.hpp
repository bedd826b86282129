#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace domsplit {

using Json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;

// Sorted keys, two-space indent, doubles as %.17g, non-finite doubles as null, trailing newline.
std::string canonical_json(const Json& value);
// Number or null for non-finite values.
Json number(double v);

struct CurveRow {
  int n = 0;
  double sigma_k_log = 0.0;
  double sigma_k1_log = 0.0;
  double ratio = 0.0;
  double cauchy_dist = 0.0;  // NaN where undefined
};

struct PlotSeries {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  std::string command;
  Json body;
  std::vector<CurveRow> curve;
  std::vector<PlotSeries> plots;
  int exit_code = 0;
};

std::string curve_csv(const std::vector<CurveRow>& rows);
// Whitespace-separated columns with a '#' header line.
std::string plot_data(const PlotSeries& series);

// Writes <command>.json, <command>_curves.csv and <command>_<series>.dat as requested;
// returns the paths written. formats holds "json" and/or "csv"; plot data goes with csv.
std::vector<std::string> emit(const Report& report, const std::string& out_dir, const std::vector<std::string>& formats);

}  // namespace domsplit
