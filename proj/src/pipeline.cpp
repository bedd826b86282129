#include "domsplit/pipeline.hpp"

#include "domsplit/cocycle.hpp"
#include "domsplit/critical.hpp"
#include "domsplit/errors.hpp"
#include "domsplit/geometry.hpp"
#include "domsplit/orbit.hpp"
#include "domsplit/parallel.hpp"
#include "domsplit/perturbation.hpp"
#include "domsplit/splitting.hpp"
#include "domsplit/synthetic.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <memory>

namespace domsplit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Context {
  const AnalysisConfig& cfg;
  std::uint64_t seed;
  int threads;
  Json errors = Json::array();
  Json warnings = Json::array();
  bool failed = false;  // a certificate was demanded and not delivered

  void error(const std::string& stage, const Error& e) {
    errors.push_back({{"stage", stage}, {"kind", e.kind()}, {"message", e.what()}});
    failed = true;
  }
  void warn(const std::string& text) { warnings.push_back(text); }
};

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

// Basis columns with the first non-negligible entry made positive.
Json subspace_json(const Subspace& s) {
  Json out = Json::array();
  for (int k = 0; k < s.dim(); ++k) {
    Vector v = s.basis().col(k);
    for (int i = 0; i < v.size(); ++i) {
      if (std::abs(v(i)) > 1e-12) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
    out.push_back(vector_json(v));
  }
  return out;
}

Json opt_int(const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); }

Json config_echo(const IniFile& ini) {
  Json out = Json::object();
  for (const auto& [section, keys] : ini.sections) {
    Json s = Json::object();
    for (const auto& [key, entry] : keys) s[key] = entry.value;
    out[section] = s;
  }
  return out;
}

double map_phase(const std::string& phase) {
  if (phase == "cycle") return catalog::fold_cycle_phase();
  if (phase.rfind("fixed:", 0) == 0) return catalog::fold_fixed_point_phase(std::stod(phase.substr(6)));
  return std::stod(phase);
}

CocycleSegment build_cocycle(const CocycleRecipe& r, std::vector<std::ptrdiff_t>& hits) {
  const std::ptrdiff_t length = r.last - r.first + 1;
  if (r.kind == "example-ex") return synthetic::example_ex(r.first, r.last);
  if (r.kind == "constant") {
    if (r.matrix.rows() != r.matrix.cols()) throw ConfigError(0, "cocycle.matrix", "must be square");
    return synthetic::constant(r.matrix, r.first, length);
  }
  if (r.kind == "diagonal") return synthetic::diagonal(r.diag, r.first, length);
  if (r.kind == "rotation") return synthetic::rotation(r.theta, r.first, length);
  if (r.kind == "nilpotent") return synthetic::nilpotent();
  const synthetic::CriticalCase cc =
      r.kind == "nondominated-2d" ? synthetic::nondominated_2d(r.middle) : synthetic::nondominated_3d(r.middle);
  hits = cc.hits;
  return cc.cocycle;
}

CriticalPredicate cocycle_kernel_predicate(const CocycleSegment& c, int kappa, int m_f, double tol) {
  auto seg = std::make_shared<const CocycleSegment>(c);
  return [seg, kappa, m_f, tol](std::ptrdiff_t i, const Point*) {
    return kappa > 0 && seg->has_chain(i, m_f) && kernel(svd_of_chain(seg->chain(i, m_f)), tol).dim() == kappa;
  };
}

struct Prepared {
  CocycleSegment c;
  std::optional<TorusMap> map;
  std::optional<CriticalScan> scan;
  CriticalPredicate pred;
  int kappa = 0;  // maximal kernel dimension found by the scan
  int m_f = 1;
  Json scan_json;
  Json orbit_json;
};

Json scan_map_json(const CriticalScan& s) {
  Json samples = Json::array();
  for (std::size_t k = 0; k < s.samples.size() && k < 8; ++k) samples.push_back(vector_json(s.samples[k]));
  return {{"kind", "map"},
          {"kappa", s.kappa},
          {"m_f", s.m_f},
          {"grid_res", s.grid_res},
          {"m_max", s.m_max},
          {"kappa_fraction", number(s.kappa_fraction)},
          {"has_interior", s.has_interior},
          {"sample_count", s.samples.size()},
          {"samples_head", samples},
          {"no_critical_points", s.no_critical_points()}};
}

// Largest kernel dimension of the chains J_i..J_{i+m-1}, m <= m_max, and the first m attaining it.
Json scan_cocycle(const CocycleSegment& c, int m_max, double tol, int& kappa, int& m_f) {
  kappa = 0;
  m_f = 1;
  Json per_m = Json::array();
  for (int m = 1; m <= m_max; ++m) {
    int best = 0, count = 0;
    bool any = false;
    for (std::ptrdiff_t i = c.first; c.has_chain(i, m); ++i) {
      const int k = kernel(svd_of_chain(c.chain(i, m)), tol).dim();
      any = true;
      if (k > best) {
        best = k;
        count = 0;
      }
      if (k == best && k > 0) ++count;
    }
    if (!any) break;
    per_m.push_back({{"m", m}, {"max_kernel_dim", best}, {"indices_at_max", count}});
    if (best > kappa) {
      kappa = best;
      m_f = m;
    }
  }
  return {{"kind", "cocycle"},
          {"kappa", kappa},
          {"m_f", m_f},
          {"m_max", m_max},
          {"kernel_dims", per_m},
          {"no_critical_points", kappa == 0}};
}

Prepared prepare(Context& ctx, bool with_orbit) {
  const AnalysisConfig& cfg = ctx.cfg;
  if (!cfg.map && !cfg.cocycle) throw ConfigError(0, "", "this command needs a [map] or [cocycle] section");
  Prepared p;
  if (cfg.map) {
    p.map = build_map(*cfg.map);
    p.scan = critical_scan(*p.map, cfg.scan.m_max, cfg.scan.grid_res, cfg.scan.rank_tol, ctx.threads);
    p.kappa = p.scan->kappa;
    p.m_f = p.scan->m_f;
    p.scan_json = scan_map_json(*p.scan);
  }
  if (cfg.cocycle) {
    std::vector<std::ptrdiff_t> hits;
    p.c = build_cocycle(*cfg.cocycle, hits);
    p.scan_json = scan_cocycle(p.c, cfg.scan.m_max, cfg.scan.rank_tol, p.kappa, p.m_f);
    p.orbit_json = {{"source", "synthetic"}, {"kind", cfg.cocycle->kind}, {"first", p.c.first}, {"last", p.c.last()}};
  }
  const int kappa = cfg.splitting.kappa.value_or(p.kappa);
  const int m_f = cfg.splitting.m_f.value_or(p.m_f);
  if (cfg.map && with_orbit) {
    const TorusMap& map = *p.map;
    const OrbitConfig& o = cfg.orbit;
    p.pred = kappa > 0 ? kernel_predicate(map, kappa, m_f, cfg.scan.rank_tol) : constant_predicate(false);
    OrbitSegment orbit;
    p.orbit_json = {{"source", o.source}};
    if (o.source == "cycle") {
      orbit = periodic_segment(map, catalog::fold_critical_cycle(cfg.map->shear), o.first, o.last);
    } else if (o.source == "forward") {
      if (o.start.size() != map.dim()) throw ConfigError(0, "orbit.start", "dimension differs from the map");
      orbit = forward_orbit(map, o.start, static_cast<int>(o.last));
    } else {
      LambdaSearch search;
      search.len_fwd = o.len_fwd;
      search.len_bwd = o.len_bwd;
      search.crit_radius = o.crit_radius;
      search.seed = ctx.seed;
      search.restarts = o.restarts;
      search.grid_res = cfg.scan.grid_res;
      const LambdaOrbit lo = lambda_orbit_sample(map, *p.scan, search, p.pred);
      orbit = lo.orbit;
      p.orbit_json["strategy"] = lo.strategy;
      p.orbit_json["restarts_used"] = lo.restarts_used;
      p.orbit_json["hits"] = lo.hits;
    }
    p.orbit_json["first"] = orbit.first;
    p.orbit_json["last"] = orbit.last();
    p.orbit_json["start"] = vector_json(orbit.points.front());
    p.orbit_json["max_residual"] = number(orbit.max_residual(map));
    p.c = CocycleSegment::from_orbit(orbit);
  }
  if (cfg.cocycle) p.pred = cocycle_kernel_predicate(p.c, kappa, m_f, cfg.scan.rank_tol);
  p.kappa = kappa;
  p.m_f = m_f;
  return p;
}

const Matrix& constant_matrix(const Prepared& p) {
  for (std::ptrdiff_t i = p.c.first; i <= p.c.last(); ++i)
    if ((p.c.at(i) - p.c.at(p.c.first)).norm() != 0.0)
      throw PreconditionFailed("eigen splitting needs a constant cocycle");
  return p.c.at(p.c.first);
}

SplittingSample build_splitting(const Context& ctx, Prepared& p, std::optional<ReturnTimes>& times) {
  const SplittingConfig& sc = ctx.cfg.splitting;
  const int d = p.c.dim();
  if (sc.source == "return-time") {
    if (p.kappa < 1) throw NoHits("no critical points: the return-time splitting is undefined");
    times = return_times(p.c, p.pred, p.m_f);
    return candidate_splitting(p.c, p.kappa, *times, ctx.cfg.scan.rank_tol);
  }
  if (sc.source == "eigen") {
    const int kappa = sc.kappa.value_or(1);
    p.kappa = kappa;
    const auto [e, f] = eigen_splitting(constant_matrix(p), kappa);
    SplittingSample s = constant_splitting(p.c, e, f);
    s.provenance = "eigen";
    return s;
  }
  if (sc.e0.rows() != d || sc.f0.rows() != d)
    throw ConfigError(0, "splitting.e0", "e0 and f0 need " + std::to_string(d) + " rows (one column per vector)");
  const Subspace e0 = Subspace::span(sc.e0), f0 = Subspace::span(sc.f0);
  if (e0.dim() + f0.dim() != d) throw ConfigError(0, "splitting.f0", "dim e0 + dim f0 must equal the dimension");
  p.kappa = e0.dim();
  return pushed_splitting(p.c, sc.push_from.value_or(p.c.first), e0, f0);
}

Json splitting_json(const SplittingSample& s) {
  Json entries = Json::array();
  for (std::size_t k = 0; k < s.size(); ++k)
    entries.push_back({{"index", s.indices[k]},
                       {"e", subspace_json(s.e[k])},
                       {"f", subspace_json(s.f[k])},
                       {"angle", number(angle_between(s.e[k], s.f[k]))}});
  return {{"kappa", s.kappa},
          {"provenance", s.provenance},
          {"count", s.size()},
          {"first", s.size() ? Json(s.indices.front()) : Json(nullptr)},
          {"last", s.size() ? Json(s.indices.back()) : Json(nullptr)},
          {"entries", entries}};
}

Json certificate_json(const DominationCertificate& c) {
  return {{"kappa", c.kappa},
          {"ell", opt_int(c.ell)},
          {"alpha", number(c.alpha)},
          {"alpha_required", number(c.alpha_required)},
          {"factor", number(c.factor)},
          {"worst_ratio", number(c.worst_ratio)},
          {"invariance_defect_e", number(c.invariance_defect_e)},
          {"invariance_defect_f", number(c.invariance_defect_f)},
          {"pass", c.pass},
          {"not_extendable", c.not_extendable}};
}

// First splitting index (or segment start) carrying the full n_max chain.
std::optional<std::ptrdiff_t> curve_start(const Context& ctx, const Prepared& p, const SplittingSample* s) {
  const int n_max = ctx.cfg.splitting.n_max;
  if (ctx.cfg.splitting.curve_index) {
    if (!p.c.has_chain(*ctx.cfg.splitting.curve_index, n_max + 1))
      throw ConfigError(0, "splitting.curve_index", "chain of length n_max + 1 leaves the segment");
    return ctx.cfg.splitting.curve_index;
  }
  if (s)
    for (std::ptrdiff_t i : s->indices)
      if (p.c.has_chain(i, n_max + 1)) return i;
  if (p.c.has_chain(p.c.first, n_max + 1)) return p.c.first;
  return std::nullopt;
}

Json curves(Context& ctx, const Prepared& p, std::ptrdiff_t i, std::vector<CurveRow>& rows) {
  const int n_max = ctx.cfg.splitting.n_max;
  const GapReport gap = gap_report(p.c, i, n_max, p.kappa);
  Json out = {{"index", i},
              {"n_max", n_max},
              {"gap", {{"rate_defined", gap.rate_defined},
                       {"rate", number(gap.rate)},
                       {"log_constant", number(gap.log_constant)},
                       {"passes", gap.passes}}}};
  std::map<int, double> cauchy;
  int n0 = 1;
  try {
    const ELimit lim = e_limit_report(p.c, i, p.kappa, n_max, ctx.cfg.splitting.conv_tol);
    n0 = lim.n0;
    for (std::size_t k = 0; k < lim.report.indices.size(); ++k) cauchy[lim.report.indices[k]] = lim.report.distances[k];
    out["cauchy"] = {{"n0", lim.n0},
                     {"converged", lim.report.converged},
                     {"rate_defined", lim.report.rate_defined},
                     {"rate", number(lim.report.rate)},
                     {"final_distance", number(lim.report.final_distance)},
                     {"outlier_fraction", number(lim.report.outlier_fraction)},
                     {"sub_geometric", lim.report.sub_geometric},
                     {"limit", subspace_json(lim.limit)}};
  } catch (const NoGap& e) {
    out["cauchy"] = nullptr;
    ctx.warn(std::string("no singular gap at any n <= n_max: ") + e.what());
  }
  out["n0"] = n0;
  for (const GapEntry& g : gap.entries) {
    if (g.n < n0) continue;
    const auto it = cauchy.find(g.n);
    rows.push_back({g.n, g.log_sigma_k, g.log_sigma_k1, g.ratio, it == cauchy.end() ? kNaN : it->second});
  }
  return out;
}

Json bounds_json(const SingularBounds& b) {
  return {{"k1", number(b.k1)}, {"min_slack", number(b.min_slack)}, {"n_max", b.entries.size()}};
}

Json near_critical_json(Context& ctx, const Prepared& p, const SplittingSample& s) {
  const SplittingConfig& sc = ctx.cfg.splitting;
  CriticalPredicate u = p.pred;
  if (p.scan && !p.scan->samples.empty()) {
    const CriticalPredicate cloud = cloud_predicate(p.scan->samples, ctx.cfg.orbit.crit_radius);
    u = [pred = p.pred, cloud](std::ptrdiff_t i, const Point* x) { return pred(i, x) || cloud(i, x); };
  }
  const NearCriticalReport vw = vw_cone_sandwich(p.c, s, u, *sc.eta, sc.theta);
  const RhoReport rho = near_critical_bounds(p.c, s, u, sc.rho, *sc.eta);
  return {{"eta", number(vw.eta)},
          {"theta", number(vw.theta)},
          {"u_indices", vw.entries.size()},
          {"max_e_defect", number(vw.max_e_defect)},
          {"max_f_defect", number(vw.max_f_defect)},
          {"pass", vw.pass},
          {"rho", number(rho.rho)},
          {"rho_pass", rho.pass},
          {"rho_max", number(rho.rho_max)}};
}

Json status_json(const Context& ctx, int code) {
  return {{"exit_code", code}, {"errors", ctx.errors}, {"warnings", ctx.warnings}};
}

template <class F>
Report run(const std::string& command, const AnalysisConfig& cfg, const RunOptions& opt, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Context ctx{cfg, opt.seed.value_or(cfg.seed), resolve_threads(opt.threads)};
  Report rep;
  rep.command = command;
  Json result = Json::object();
  body(ctx, result, rep);
  rep.exit_code = cfg.require_certificate && ctx.failed ? 3 : 0;
  rep.body = {{"schema_version", kReportSchemaVersion},
              {"tool", {{"name", "analyze"}, {"version", DOMSPLIT_VERSION}}},
              {"command", command},
              {"name", cfg.name},
              {"seed", ctx.seed},
              {"config", config_echo(cfg.source)},
              {"result", result},
              {"status", status_json(ctx, rep.exit_code)}};
  if (opt.timing)
    rep.body["timing"] = {
        {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  return rep;
}

// Runs one stage; analysis errors are recorded and reported as a failed stage.
template <class F>
bool stage(Context& ctx, const std::string& name, F&& f) {
  try {
    f();
    return true;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    ctx.error(name, e);
    return false;
  }
}

}  // namespace

TorusMap build_map(const MapRecipe& r) {
  if (r.recipe == "linear") return catalog::linear(r.matrix);
  if (r.recipe == "doubling") return catalog::doubling(r.dim);
  if (r.recipe == "fold") return catalog::fold(r.y_multiplier, map_phase(r.phase), r.shear);
  if (r.recipe == "fold_fold") return catalog::fold_fold(r.z_multiplier);
  throw ConfigError(0, "map.recipe", "unknown recipe '" + r.recipe + "'");
}

Report run_scan(const AnalysisConfig& cfg, const RunOptions& opt) {
  return run("scan", cfg, opt, [](Context& ctx, Json& result, Report&) {
    stage(ctx, "scan", [&] {
      const Prepared p = prepare(ctx, false);
      result["scan"] = p.scan_json;
      if (p.scan_json["no_critical_points"].get<bool>()) ctx.warn("no critical points");
    });
  });
}

Report run_splitting(const AnalysisConfig& cfg, const RunOptions& opt) {
  return run("splitting", cfg, opt, [](Context& ctx, Json& result, Report& rep) {
    std::optional<Prepared> p;
    if (!stage(ctx, "orbit", [&] { p = prepare(ctx, true); })) return;
    result["scan"] = p->scan_json;
    result["orbit"] = p->orbit_json;
    std::optional<ReturnTimes> times;
    std::optional<SplittingSample> s;
    stage(ctx, "splitting", [&] { s = build_splitting(ctx, *p, times); });
    if (s) {
      result["splitting"] = splitting_json(*s);
      const SplittingConfig& sc = ctx.cfg.splitting;
      stage(ctx, "invariance", [&] {
        const InvarianceReport inv = check_invariance(p->c, *s);
        result["invariance"] = {{"e_defect", number(inv.e_defect)},
                                {"f_defect", number(inv.f_defect)},
                                {"e_argmax", inv.e_argmax},
                                {"f_argmax", inv.f_argmax},
                                {"min_angle", number(inv.min_angle)},
                                {"pairs", inv.pairs}};
      });
      stage(ctx, "certificate", [&] {
        const DominationCertificate cert = certify(p->c, *s, sc.alpha, sc.factor, sc.ell_max, sc.defect_tol);
        Json cj = certificate_json(cert);
        if (cert.ell) {
          const double c0 = estimate_c0(p->c, *s, *cert.ell);
          cj["c0"] = number(c0);
          cj["telescoped_ell"] = telescoped_ell(*cert.ell, c0, sc.factor);
        }
        result["certificate"] = cj;
        if (cert.not_extendable)
          ctx.warn("splitting not extendable to closure: dominated at ell = " + std::to_string(*cert.ell) +
                   " but the angle between E and F degenerates");
        if (!cert.ell) ctx.warn("non-domination: no domination time up to ell_max = " + std::to_string(sc.ell_max));
        if (!cert.pass) ctx.failed = true;
      });
      if (sc.eta) {
        stage(ctx, "near_critical", [&] { result["near_critical"] = near_critical_json(ctx, *p, *s); });
      }
    }
    if (p->kappa >= 1 && p->kappa < p->c.dim()) {
      stage(ctx, "curves", [&] {
        const auto i = curve_start(ctx, *p, s ? &*s : nullptr);
        if (!i) {
          ctx.warn("segment too short for the gap curve");
          return;
        }
        result["curves"] = curves(ctx, *p, *i, rep.curve);
        const int n = std::min(20, ctx.cfg.splitting.n_max);
        result["singular_bounds"] = bounds_json(singular_value_bounds(p->c, *i, p->kappa, n));
      });
    }
  });
}

Report run_conecheck(const AnalysisConfig& cfg, const RunOptions& opt) {
  return run("conecheck", cfg, opt, [](Context& ctx, Json& result, Report& rep) {
    std::optional<Prepared> p;
    if (!stage(ctx, "orbit", [&] { p = prepare(ctx, true); })) return;
    result["orbit"] = p->orbit_json;
    std::optional<ReturnTimes> times;
    std::optional<SplittingSample> s;
    if (!stage(ctx, "splitting", [&] { s = build_splitting(ctx, *p, times); })) return;
    result["splitting"] = {{"kappa", s->kappa}, {"provenance", s->provenance}, {"count", s->size()}};
    const ConeConfig& cc = ctx.cfg.cone;
    std::optional<ConeFieldSample> cones;
    if (!stage(ctx, "cones", [&] { cones = splitting_to_cone(p->c, *s, cc.k_max, cc.samples); })) return;
    Json margins = Json::array();
    PlotSeries mplot{"margins", {"k", "worst_slack"}, {}};
    for (std::size_t k = 0; k < cones->margins.size(); ++k) {
      margins.push_back(number(cones->margins[k]));
      mplot.rows.push_back({double(k + 1), cones->margins[k]});
    }
    rep.plots.push_back(mplot);
    result["cones"] = {{"alpha", number(cones->alpha)},
                       {"invariance_time", opt_int(cones->invariance_time)},
                       {"min_margin", number(cones->min_margin)},
                       {"margins", margins},
                       {"invariant", cones->invariance_time.has_value()}};
    if (!cones->invariance_time) {
      ctx.warn("cone invariance fails: no k <= " + std::to_string(cc.k_max) + " with a positive margin");
      ctx.failed = true;
      return;
    }
    stage(ctx, "round_trip", [&] {
      const ConeLimit lim = cone_criterion_to_splitting(p->c, *cones, s->kappa, {cc.n_max, cc.depth, cc.tol});
      const UniquenessReport u = uniqueness_probe(*s, lim.splitting);
      const bool pass = u.common > 0 && u.e_distance <= cc.distance_tol && u.f_distance <= cc.distance_tol;
      PlotSeries aplot{"angles", {"index", "angle"}, {}};
      for (std::size_t k = 0; k < lim.splitting.size(); ++k)
        aplot.rows.push_back({double(lim.splitting.indices[k]), angle_between(lim.splitting.e[k], lim.splitting.f[k])});
      rep.plots.push_back(aplot);
      Json angles = Json::object();
      if (!aplot.rows.empty()) {
        const AngleCheck a = check_angle(lim.splitting, ctx.cfg.splitting.alpha);
        angles = {{"first", number(aplot.rows.front()[1])},
                  {"last", number(aplot.rows.back()[1])},
                  {"min", number(a.min_angle)},
                  {"argmin", a.argmin},
                  {"degenerates", !a.pass}};
        if (!a.pass) ctx.warn("angle between E and F degenerates along the recovered splitting");
      }
      result["round_trip"] = {{"count", lim.splitting.size()},
                              {"common", u.common},
                              {"e_distance", number(u.e_distance)},
                              {"f_distance", number(u.f_distance)},
                              {"distance_tol", number(cc.distance_tol)},
                              {"kernel_transversal", lim.kernel_transversal},
                              {"angles", angles},
                              {"pass", pass}};
      if (!pass) ctx.failed = true;
    });
  });
}

namespace {

struct InstanceOutcome {
  bool refused = false;
  bool success = false;
  double residual_sin = 0.0;
  double max_theta = 0.0;
  int aligned_at = 0;
};

InstanceOutcome run_instance(const MixInstance& inst, double delta, double n_bound) {
  InstanceOutcome o;
  try {
    const MixResult r = mix_rotations_2d(inst.chain, inst.v, inst.w, delta, n_bound);
    o.success = r.success;
    o.residual_sin = std::abs(std::sin(r.residual_angle));
    for (double t : r.chain.thetas) o.max_theta = std::max(o.max_theta, std::abs(t));
    o.aligned_at = r.aligned_at;
  } catch (const HypothesisViolation&) {
    o.refused = true;
  }
  return o;
}

void perturb_corpus(Context& ctx, Json& result, Report& rep) {
  const PerturbConfig& pc = ctx.cfg.perturb;
  const MixingLength ml = minimal_mixing_length(pc.delta, pc.n_bound, pc.corpus, ctx.seed, pc.l_max, ctx.threads);
  result["mixing_length"] = {{"l", opt_int(ml.l)}, {"instances", ml.instances}, {"worst_instance", ml.worst_instance}};
  if (!ml.l) throw NotFound("no mixing length up to l_max = " + std::to_string(pc.l_max));
  const int l = *ml.l;
  const std::size_t n = static_cast<std::size_t>(pc.corpus);
  std::vector<InstanceOutcome> mix(n), control(n);
  parallel_for(n, ctx.threads, [&](std::size_t k) {
    mix[k] = run_instance(mixing_instance(pc.n_bound, l, ctx.seed, k), pc.delta, pc.n_bound);
    if (pc.control) control[k] = run_instance(dominated_instance(pc.n_bound, l, ctx.seed, k), pc.delta, pc.n_bound);
  });
  int success = 0, refused = 0, control_refused = 0;
  double worst_sin = 0.0, worst_theta = 0.0;
  PlotSeries plot{"mixing", {"instance", "aligned_at", "residual_sin"}, {}};
  for (std::size_t k = 0; k < n; ++k) {
    success += mix[k].success;
    refused += mix[k].refused;
    control_refused += control[k].refused;
    if (mix[k].success) worst_sin = std::max(worst_sin, mix[k].residual_sin);
    worst_theta = std::max(worst_theta, mix[k].max_theta);
    plot.rows.push_back({double(k), double(mix[k].aligned_at), mix[k].residual_sin});
  }
  rep.plots.push_back(plot);
  const bool all = success == pc.corpus && worst_sin <= 1e-9 && worst_theta < pc.delta;
  result["corpus"] = {{"instances", pc.corpus},
                      {"length", l},
                      {"delta", number(pc.delta)},
                      {"n_bound", number(pc.n_bound)},
                      {"successes", success},
                      {"refused", refused},
                      {"success_rate", number(double(success) / pc.corpus)},
                      {"max_residual_sin", number(worst_sin)},
                      {"max_theta", number(worst_theta)},
                      {"pass", all}};
  if (pc.control)
    result["control"] = {{"instances", pc.corpus},
                         {"refused", control_refused},
                         {"refusal_rate", number(double(control_refused) / pc.corpus)},
                         {"pass", control_refused == pc.corpus}};
  if (!all || (pc.control && control_refused != pc.corpus)) ctx.failed = true;
}

void perturb_kernel(Context& ctx, Prepared& p, Json& result) {
  const PerturbConfig& pc = ctx.cfg.perturb;
  std::optional<ReturnTimes> times;
  const SplittingSample s = build_splitting(ctx, p, times);
  if (!times) throw PreconditionFailed("kernel raising needs the return-time splitting");
  const MixingPlan plan = plan_mixing(p.c, s, pc.i0, pc.window, pc.delta);
  result["mixing"] = {{"i0", plan.i0},
                      {"window", plan.n},
                      {"success", plan.mix.success},
                      {"aligned_at", plan.mix.aligned_at},
                      {"residual_angle", number(plan.mix.residual_angle)}};
  const KernelRaiseReport r = build_kernel_raiser(p.c, s, *times, plan, pc.eps0, ctx.cfg.scan.rank_tol);
  result["kernel_raise"] = {{"start", r.start},
                            {"m", r.m},
                            {"kernel_dim", r.kernel_dim},
                            {"kappa", r.kappa},
                            {"log_sigmas", vector_json(r.log_sigmas)},
                            {"budget", number(r.budget)},
                            {"eps0", number(r.eps0)},
                            {"e_annihilation", number(r.e_annihilation)},
                            {"w_annihilation", number(r.w_annihilation)},
                            {"pass", r.kernel_dim >= r.kappa + 1 && r.budget < r.eps0}};
}

void perturb_full_kernel(Context& ctx, const Prepared& p, Json& result) {
  const PerturbConfig& pc = ctx.cfg.perturb;
  const FullKernelReport r = full_kernel_demo(p.c, pc.start, pc.m, pc.radius);
  result["full_kernel"] = {{"start", pc.start},
                           {"m", pc.m},
                           {"rank", r.rank},
                           {"log_sigmas", vector_json(r.log_sigmas)},
                           {"scale", number(r.scale)},
                           {"radius", number(r.radius)},
                           {"image_diameter", number(r.image_diameter)}};
}

}  // namespace

Report run_perturb(const AnalysisConfig& cfg, const RunOptions& opt) {
  return run("perturb", cfg, opt, [](Context& ctx, Json& result, Report& rep) {
    const std::string& mode = ctx.cfg.perturb.mode;
    result["mode"] = mode;
    if (mode == "corpus") {
      stage(ctx, "corpus", [&] { perturb_corpus(ctx, result, rep); });
      return;
    }
    std::optional<Prepared> p;
    if (!stage(ctx, "orbit", [&] { p = prepare(ctx, true); })) return;
    result["orbit"] = p->orbit_json;
    if (mode == "kernel-raise")
      stage(ctx, "kernel_raise", [&] { perturb_kernel(ctx, *p, result); });
    else
      stage(ctx, "full_kernel", [&] { perturb_full_kernel(ctx, *p, result); });
  });
}

Report run_command(const std::string& command, const AnalysisConfig& cfg, const RunOptions& opt) {
  if (command == "scan") return run_scan(cfg, opt);
  if (command == "splitting") return run_splitting(cfg, opt);
  if (command == "conecheck") return run_conecheck(cfg, opt);
  if (command == "perturb") return run_perturb(cfg, opt);
  throw InvalidArgument("unknown command '" + command + "'");
}

}  // namespace domsplit
