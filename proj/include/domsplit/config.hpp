#pragma once

#include "domsplit/types.hpp"

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace domsplit {

struct IniEntry {
  std::string value;
  int line = 0;
};

// [section] headers, key = value lines, '#' or ';' comments. Duplicate sections and keys are errors.
struct IniFile {
  std::map<std::string, std::map<std::string, IniEntry>> sections;
  std::map<std::string, int> section_lines;

  static IniFile parse(std::istream& in);
  static IniFile load(const std::string& path);
};

struct MapRecipe {
  std::string recipe;  // linear, doubling, fold, fold_fold
  Matrix matrix;
  int dim = 2;
  int y_multiplier = 2;
  std::string phase = "0";  // a number, "cycle", or "fixed:<x>"
  int shear = 0;
  int z_multiplier = 2;
};

struct CocycleRecipe {
  std::string kind;  // example-ex, constant, diagonal, rotation, nondominated-2d, nondominated-3d, nilpotent
  std::ptrdiff_t first = 1;
  std::ptrdiff_t last = 100;
  Matrix matrix;
  Vector diag;
  double theta = 0.0;
  int middle = 20;
};

struct OrbitConfig {
  std::string source = "cycle";  // cycle, forward, lambda
  Point start;
  std::ptrdiff_t first = -40;
  std::ptrdiff_t last = 40;
  int len_fwd = 40;
  int len_bwd = 40;
  double crit_radius = 1e-3;
  int restarts = 32;
};

struct ScanConfig {
  int grid_res = 16;
  int m_max = 4;
  double rank_tol = kDefaultRankTol;
};

struct SplittingConfig {
  std::string source = "return-time";  // return-time, eigen, pushed
  std::optional<int> kappa;
  std::optional<int> m_f;
  Matrix e0;
  Matrix f0;
  std::optional<std::ptrdiff_t> push_from;
  double factor = 0.5;
  int ell_max = 32;
  double alpha = 0.05;
  double defect_tol = 1e-6;
  std::optional<std::ptrdiff_t> curve_index;
  int n_max = 25;
  double conv_tol = 1e-8;
  std::optional<double> eta;  // near-critical report when set
  double theta = 0.2;
  double rho = 0.1;
};

struct ConeConfig {
  int k_max = 10;
  int depth = 10;
  int n_max = 25;
  double tol = 1e-8;
  int samples = 256;
  double distance_tol = 1e-6;
};

struct PerturbConfig {
  std::string mode = "corpus";  // corpus, kernel-raise, full-kernel
  double delta = 0.1;
  double n_bound = 10.0;
  int corpus = 1000;
  int l_max = 256;
  bool control = true;
  std::ptrdiff_t i0 = 0;
  int window = 20;
  double eps0 = 0.2;
  std::ptrdiff_t start = 0;
  int m = 2;
  double radius = 1e-3;
};

struct AnalysisConfig {
  std::string name;
  std::uint64_t seed = 1;
  // Analysis failures and failed certificates exit with code 3 instead of being reported only.
  bool require_certificate = false;
  std::optional<MapRecipe> map;
  std::optional<CocycleRecipe> cocycle;
  OrbitConfig orbit;
  ScanConfig scan;
  SplittingConfig splitting;
  ConeConfig cone;
  PerturbConfig perturb;
  IniFile source;  // echoed in reports

  // Throws ConfigError with line and field on unknown keys, bad values or failed invariants.
  static AnalysisConfig from_ini(const IniFile& ini);
  static AnalysisConfig load(const std::string& path);
};

}  // namespace domsplit
