// One PASS/FAIL line per acceptance criterion; exit status 1 if any criterion fails.

#include "domsplit/cocycle.hpp"
#include "domsplit/config.hpp"
#include "domsplit/geometry.hpp"
#include "domsplit/linalg.hpp"
#include "domsplit/orbit.hpp"
#include "domsplit/pipeline.hpp"
#include "domsplit/splitting.hpp"
#include "domsplit/synthetic.hpp"
#include "domsplit/torus_map.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace domsplit;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

AnalysisConfig preset(const std::string& name) {
  return AnalysisConfig::load(std::string(DOMSPLIT_SOURCE_DIR) + "/configs/" + name + ".ini");
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Matrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

// 1. Example ex reproduction.
void example_ex(Outcome& o) {
  const Report rep = run_splitting(preset("example-ex"), {});
  const Json& res = rep.body.at("result");
  const CocycleSegment ex = synthetic::example_ex(1, 101);
  const SplittingSample s = candidate_splitting(ex, 1, return_times(ex, constant_predicate(true), 1));
  double e_err = 0, f_err = 0, angle_err = 0, e_norm = 0, inv_e = 0, inv_f = 0;
  int checked = 0;
  std::ptrdiff_t lo = 0, hi = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const std::ptrdiff_t n = s.indices[k];
    if (n > 100) continue;
    lo = checked ? lo : n;
    hi = n;
    ++checked;
    e_err = std::max(e_err, grassmann_distance(s.e[k], Subspace::line(vec2(1, 0))));
    f_err = std::max(f_err, grassmann_distance(s.f[k], Subspace::line(vec2(1, 1.0 / n))));
    angle_err = std::max(angle_err, std::abs(angle_between(s.e[k], s.f[k]) - std::atan(1.0 / n)));
    e_norm = std::max(e_norm, norm_restricted(ex.at(n), s.e[k]));
    if (const auto next = s.find(n + 1)) {
      inv_e = std::max(inv_e, containment_angle(image_of(ex.at(n), s.e[k]), s.e[*next]));
      inv_f = std::max(inv_f, grassmann_distance(image_of(ex.at(n), s.f[k]), s.f[*next]));
    }
  }
  const double ratio = check_domination(ex, s, 1).worst_ratio;
  // The reported splitting must match the direct computation.
  double report_angle_err = 0;
  for (const Json& e : res.at("splitting").at("entries")) {
    const double n = e.at("index").get<double>();
    if (n <= 100) report_angle_err = std::max(report_angle_err, std::abs(e.at("angle").get<double>() - std::atan(1 / n)));
  }
  o.detail << "n=" << lo << ".." << hi << " dE=" << e_err << " dF=" << f_err << " inv=(" << inv_e << "," << inv_f
           << ") |A|E|=" << e_norm << " ratio=" << ratio << " angle_err=" << angle_err
           << " not_extendable=" << res.at("certificate").at("not_extendable");
  o.require(checked >= 99, "coverage of n <= 100");
  o.require(e_err <= 1e-12 && f_err <= 1e-12, "E_n, F_n");
  o.require(inv_e <= 1e-12 && inv_f <= 1e-12, "invariance defects <= 1e-12");
  o.require(e_norm == 0.0, "||A_n|E_n|| = 0");
  o.require(ratio == 0.0 && res.at("certificate").at("worst_ratio") == 0.0, "domination ratio 0");
  o.require(angle_err <= 1e-10 && report_angle_err <= 1e-10, "angle = arctan(1/n)");
  o.require(res.at("certificate").at("not_extendable") == true, "not-extendable flag");
}

// 2. Minimax identities with an independent SVD oracle.
void minimax(Outcome& o) {
  std::mt19937_64 rng(20240501);
  std::uniform_int_distribution<int> pick_j(1, 3);
  double id_err = 0, oracle_err = 0, probe_violation = 0;
  long probes = 0;
  for (int t = 0; t < 500; ++t) {
    const int d = 2 + t % 3;
    const Matrix a = random_matrix(rng, d, d);
    const SvdResult s = svd_ascending(a);
    const Eigen::MatrixXd dense = a;
    Eigen::JacobiSVD<Eigen::MatrixXd> ref(dense);
    for (int j = 0; j < d; ++j) oracle_err = std::max(oracle_err, std::abs(s.sigmas(j) - ref.singularValues()(d - 1 - j)));
    for (int j = 1; j < d; ++j) {
      const Subspace low = Subspace::from_orthonormal(s.domain.leftCols(j));
      const Subspace high = Subspace::from_orthonormal(s.domain.rightCols(d - j));
      id_err = std::max(id_err, std::abs(norm_restricted(a, low) - s.sigmas(j - 1)));
      id_err = std::max(id_err, std::abs(conorm_restricted(a, high) - s.sigmas(j)));
    }
    for (int p = 0; p < 500; ++p, ++probes) {
      const int j = 1 + pick_j(rng) % (d - 1);
      const Subspace v = Subspace::span(random_matrix(rng, d, j));
      const Subspace w = Subspace::span(random_matrix(rng, d, d - j));
      probe_violation = std::max(probe_violation, s.sigmas(j - 1) - norm_restricted(a, v));
      probe_violation = std::max(probe_violation, conorm_restricted(a, w) - s.sigmas(j));
    }
  }
  o.detail << "matrices=500 probes=" << probes << " identity_err=" << id_err << " oracle_err=" << oracle_err
           << " worst_probe_violation=" << probe_violation;
  o.require(id_err <= 1e-9, "identity to 1e-9");
  o.require(oracle_err <= 1e-9, "sigma vs oracle");
  o.require(probe_violation <= 1e-9, "min/max bounds");
}

// 3. Exponential gap and Cauchy rate.
void gap_and_cauchy(Outcome& o) {
  const std::vector<std::pair<double, double>> pairs = {{0.5, 2.0}, {0.1, 1.0}, {0.9, 1.1}, {1.0, 3.0}, {2.0, 5.0},
                                                         {0.3, 0.4}, {0.25, 4.0}, {1.5, 1.6}, {0.05, 0.5}, {3.0, 7.0}};
  double rate_err = 0, cauchy_max = 0;
  for (const auto& [a, b] : pairs) {
    const CocycleSegment c = synthetic::diagonal(vec2(a, b), 0, 30);
    const GapReport g = gap_report(c, 0, 25, 1);
    rate_err = std::max(rate_err, std::abs(g.rate - a / b));
    const ELimit lim = e_limit_report(c, 0, 1, 25, 1e-8);
    for (double dist : lim.report.distances) cauchy_max = std::max(cauchy_max, dist);
  }
  AnalysisConfig cfg = preset("fold-doubling-attract");
  const Report rep = run_splitting(cfg, {});
  const Json& cauchy = rep.body.at("result").at("curves").at("cauchy");
  const double rate = cauchy.at("rate").get<double>(), outliers = cauchy.at("outlier_fraction").get<double>();
  o.detail << "max|rate-a/b|=" << rate_err << " max_cauchy_diag=" << cauchy_max << " fold rate=" << rate
           << " outliers=" << outliers << " sub_geometric=" << cauchy.at("sub_geometric");
  o.require(rate_err <= 1e-6, "lambda = a/b within 1e-6");
  o.require(cauchy_max == 0.0, "diagonal Cauchy distances identically 0");
  o.require(cauchy.at("rate_defined") == true && rate < 1.0 && cauchy.at("sub_geometric") == false,
            "geometric fit on the fold orbit");
  o.require(outliers <= 0.05, "<= 5% outliers");
}

// 4. Cone round trip on three dominated presets.
void cone_round_trip(Outcome& o) {
  for (const char* name : {"diagonal", "cat-map", "fold-doubling-cycle"}) {
    const Report rep = run_conecheck(preset(name), {});
    const Json& r = rep.body.at("result");
    const bool has = r.contains("round_trip");
    const double de = has ? r["round_trip"]["e_distance"].get<double>() : 1.0;
    const double df = has ? r["round_trip"]["f_distance"].get<double>() : 1.0;
    const double margin = r.at("cones").at("min_margin").get<double>();
    o.detail << name << ": dE=" << de << " dF=" << df << " margin=" << margin << " common="
             << (has ? r["round_trip"]["common"].get<int>() : 0) << "; ";
    o.require(has && r["round_trip"]["common"].get<int>() > 0, std::string(name) + " recovered splitting");
    o.require(de <= 1e-6 && df <= 1e-6, std::string(name) + " distance <= 1e-6");
    o.require(margin > 0.0, std::string(name) + " positive margin");
  }
}

// 5. Two-sided singular value bounds along catalog orbits.
void singular_bounds(Outcome& o) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix cat(2, 2);
  cat << 2, 1, 1, 1;
  const std::vector<std::pair<TorusMap, int>> maps = {
      {catalog::linear(cat), 1},
      {catalog::doubling(2), 1},
      {catalog::fold(), 1},
      {catalog::fold(2, catalog::fold_fixed_point_phase(0.36), 1), 1},
      {catalog::fold(2, catalog::fold_cycle_phase(), 1), 1},
      {catalog::fold_fold(), 2},
      {catalog::fold_fold(), 1}};
  double worst = std::numeric_limits<double>::infinity(), k1_min = worst, k1_max = 0;
  for (int t = 0; t < 20; ++t) {
    const auto& [map, kappa] = maps[t % maps.size()];
    Point x0(map.dim());
    for (int k = 0; k < map.dim(); ++k) x0(k) = u(rng);
    const CocycleSegment c = CocycleSegment::from_orbit(forward_orbit(map, x0, 24));
    const SingularBounds b = singular_value_bounds(c, 0, kappa, 20);
    worst = std::min(worst, b.min_slack);
    k1_min = std::min(k1_min, b.k1);
    k1_max = std::max(k1_max, b.k1);
  }
  o.detail << "orbits=20 n<=20 min_slack=" << worst << " K1 in [" << k1_min << ", " << k1_max << "]";
  o.require(worst >= -1e-9, "slack >= -1e-9");
}

// 6. Non-domination of the complex-eigenvalue expanding preset.
void non_domination(Outcome& o) {
  const Report rep = run_splitting(preset("complex-expanding"), {});
  const Json& r = rep.body.at("result");
  const bool gap_passes = r.at("curves").at("gap").at("passes").get<bool>();
  const bool has_ell = !r.at("certificate").at("ell").is_null();
  // Same question asked of the library directly, with ell_max = 64.
  Matrix a(2, 2);
  a << 2, -2, 2, 0;
  const CocycleSegment c = synthetic::constant(a, 0, 200);
  const SplittingSample s = pushed_splitting(c, 0, Subspace::line(vec2(1, 0)), Subspace::line(vec2(0, 1)));
  const bool direct = find_domination_time(c, s, 0.5, 64).has_value();
  o.detail << "gap passes=" << gap_passes << " rate=" << r["curves"]["gap"]["rate"].get<double>()
           << " domination time=" << (has_ell ? "found" : "none") << " direct=" << (direct ? "found" : "none");
  o.require(!gap_passes, "gap_report passes = false");
  o.require(!has_ell && !direct, "no domination time up to 64");
}

// 7. Rotation mixing corpus and dominated control.
void mixing(Outcome& o) {
  const Report rep = run_perturb(preset("perturb-corpus"), {});
  const Json& r = rep.body.at("result");
  const Json& corpus = r.at("corpus");
  const Json& control = r.at("control");
  o.detail << std::setprecision(12);
  o.detail << "N=" << corpus.at("n_bound").get<double>() << " delta=" << corpus.at("delta").get<double>()
           << " l=" << r.at("mixing_length").at("l").get<int>() << " success_rate=" << corpus.at("success_rate").get<double>()
           << " max|sin|=" << corpus.at("max_residual_sin").get<double>() << " max_theta=" << corpus.at("max_theta").get<double>()
           << " control_refusal=" << control.at("refusal_rate").get<double>();
  o.require(corpus.at("instances") == 1000, "1000 instances");
  o.require(corpus.at("n_bound").get<double>() == 10.0 && corpus.at("delta").get<double>() == 0.1, "N = 10, delta = 0.1");
  o.require(corpus.at("length") == r.at("mixing_length").at("l"), "length = minimal_mixing_length");
  o.require(corpus.at("success_rate").get<double>() == 1.0, "100% success");
  o.require(corpus.at("max_residual_sin").get<double>() <= 1e-9, "|sin| <= 1e-9");
  o.require(corpus.at("max_theta").get<double>() < 0.1, "theta_i < delta");
  o.require(control.at("refusal_rate").get<double>() == 1.0, "100% refusal on the control corpus");
}

// 8. Kernel raising and the full-kernel demo.
void kernel_raising(Outcome& o) {
  const Report kr = run_perturb(preset("nondominated-2d"), {});
  const Json& k = kr.body.at("result").at("kernel_raise");
  const Report nil = run_perturb(preset("nilpotent"), {});
  const int rank = nil.body.at("result").at("full_kernel").at("rank").get<int>();
  o.detail << "kernel_dim=" << k.at("kernel_dim").get<int>() << " kappa=" << k.at("kappa").get<int>()
           << " budget=" << k.at("budget").get<double>() << " eps0=" << k.at("eps0").get<double>()
           << " nilpotent rank=" << rank;
  o.require(k.at("kernel_dim").get<int>() >= k.at("kappa").get<int>() + 1, "kernel dim >= kappa + 1");
  o.require(k.at("budget").get<double>() < k.at("eps0").get<double>(), "budget < eps0");
  o.require(rank == 0, "nilpotent rank 0");
}

// 9. Candidate splitting certification on the fold x doubling map.
void certification(Outcome& o) {
  const AnalysisConfig cfg = preset("fold-doubling-cycle");
  const Report sp = run_splitting(cfg, {});
  const Json& cert = sp.body.at("result").at("certificate");
  const Report cc = run_conecheck(cfg, {});
  const Json& rt = cc.body.at("result").at("round_trip");
  const bool has_ell = !cert.at("ell").is_null();
  o.detail << "defects=(" << cert.at("invariance_defect_e").get<double>() << ","
           << cert.at("invariance_defect_f").get<double>() << ") min_angle=" << cert.at("alpha").get<double>()
           << " alpha=" << cfg.splitting.alpha << " ell=" << (has_ell ? std::to_string(cert["ell"].get<int>()) : "none")
           << " factor=" << cert.at("factor").get<double>() << " uniqueness=(" << rt.at("e_distance").get<double>()
           << "," << rt.at("f_distance").get<double>() << ") common=" << rt.at("common").get<int>();
  o.require(cert.at("invariance_defect_e").get<double>() <= 1e-6 && cert.at("invariance_defect_f").get<double>() <= 1e-6,
            "invariance defects <= 1e-6");
  o.require(cert.at("alpha").get<double>() >= cert.at("alpha_required").get<double>() &&
                cert.at("alpha_required").get<double>() == cfg.splitting.alpha,
            "min angle >= alpha");
  o.require(has_ell && cert["ell"].get<int>() <= 32 && cert.at("factor").get<double>() == 0.5, "ell <= 32 at factor 1/2");
  o.require(rt.at("common").get<int>() > 0 && rt.at("e_distance").get<double>() <= 1e-6 &&
                rt.at("f_distance").get<double>() <= 1e-6,
            "return-time and cone-limit agree to 1e-6");
}

// 10. Byte-identical reports for every preset.
void determinism(Outcome& o) {
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"example-ex", "splitting"},          {"example-ex", "conecheck"},      {"diagonal", "splitting"},
      {"diagonal", "conecheck"},            {"cat-map", "conecheck"},         {"fold-doubling", "scan"},
      {"fold-doubling", "splitting"},       {"fold-doubling-cycle", "splitting"}, {"fold-doubling-cycle", "conecheck"},
      {"fold-doubling-lambda", "splitting"}, {"fold-doubling-attract", "splitting"}, {"complex-expanding", "splitting"},
      {"isometric", "conecheck"},           {"perturb-corpus", "perturb"},    {"nondominated-2d", "perturb"},
      {"nondominated-3d", "perturb"},       {"nilpotent", "perturb"}};
  int identical = 0;
  for (const auto& [name, command] : runs) {
    const AnalysisConfig cfg = preset(name);
    const std::string a = canonical_json(run_command(command, cfg, {std::nullopt, 1, false}).body);
    const std::string b = canonical_json(run_command(command, cfg, {std::nullopt, 1, false}).body);
    const std::string c = canonical_json(run_command(command, cfg, {std::nullopt, 4, false}).body);
    if (a == b && a == c)
      ++identical;
    else
      o.require(false, name + " " + command);
  }
  o.detail << identical << "/" << runs.size() << " preset runs byte-identical (1 and 4 threads)";
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "Example ex reproduction", 1.0, example_ex},
      {2, "minimax identity suite", 10.0, minimax},
      {3, "exponential gap and Cauchy rate", 30.0, gap_and_cauchy},
      {4, "cone round trip", 60.0, cone_round_trip},
      {5, "singular-value inequalities", 30.0, singular_bounds},
      {6, "non-domination detection", 5.0, non_domination},
      {7, "rotation mixing", 60.0, mixing},
      {8, "kernel raising", 5.0, kernel_raising},
      {9, "candidate-splitting certification", 120.0, certification},
      {10, "determinism", 1e9, determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_seconds < 1e9) o.require(secs < c.limit_seconds, "runtime limit");
    failed += !o.pass;
    std::printf("%s %2d %s (%.3f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.str().c_str());
  }
  return failed ? 1 : 0;
}
