#include "domsplit/report.hpp"

#include "domsplit/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace domsplit {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

void write(std::string& out, const Json& v, int depth) {
  const std::string pad(2 * (depth + 1), ' '), close(2 * depth, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        write(out, it.value(), depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Short numeric vectors and small matrices stay on one line.
      bool flat = v.size() <= 8;
      for (const auto& e : v) {
        bool small = e.is_primitive();
        if (e.is_array() && e.size() <= 4) {
          small = true;
          for (const auto& x : e) small = small && x.is_primitive();
        }
        flat = flat && small;
      }
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          write(out, v[i], depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        write(out, v[i], depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_double(d) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + p.string());
  out << text;
}

}  // namespace

std::string canonical_json(const Json& value) {
  std::string out;
  write(out, value, 0);
  out += "\n";
  return out;
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string curve_csv(const std::vector<CurveRow>& rows) {
  std::string out = "n,sigma_k_log,sigma_k1_log,ratio,cauchy_dist\n";
  for (const CurveRow& r : rows)
    out += std::to_string(r.n) + "," + csv_double(r.sigma_k_log) + "," + csv_double(r.sigma_k1_log) + "," +
           csv_double(r.ratio) + "," + csv_double(r.cauchy_dist) + "\n";
  return out;
}

std::string plot_data(const PlotSeries& series) {
  std::string out = "#";
  for (const auto& c : series.columns) out += " " + c;
  out += "\n";
  for (const auto& row : series.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? " " : "") + csv_double(row[i]);
    out += "\n";
  }
  return out;
}

std::vector<std::string> emit(const Report& report, const std::string& out_dir,
                              const std::vector<std::string>& formats) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  const fs::path dir(out_dir);
  for (const std::string& f : formats) {
    if (f == "json") {
      const fs::path p = dir / (report.command + ".json");
      write_file(p, canonical_json(report.body));
      written.push_back(p.string());
    } else if (f == "csv") {
      if (!report.curve.empty()) {
        const fs::path p = dir / (report.command + "_curves.csv");
        write_file(p, curve_csv(report.curve));
        written.push_back(p.string());
        PlotSeries gap{"gap", {"n", "sigma_k_log", "sigma_k1_log", "ratio", "cauchy_dist"}, {}};
        for (const CurveRow& r : report.curve)
          gap.rows.push_back({double(r.n), r.sigma_k_log, r.sigma_k1_log, r.ratio, r.cauchy_dist});
        const fs::path g = dir / (report.command + "_gap.dat");
        write_file(g, plot_data(gap));
        written.push_back(g.string());
      }
      for (const PlotSeries& s : report.plots) {
        const fs::path p = dir / (report.command + "_" + s.name + ".dat");
        write_file(p, plot_data(s));
        written.push_back(p.string());
      }
    } else {
      throw InvalidArgument("unknown output format '" + f + "'");
    }
  }
  return written;
}

}  // namespace domsplit
