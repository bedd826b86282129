#include "domsplit/config.hpp"

#include "domsplit/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace domsplit {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

// Marks every key it reads; leftovers are reported as unknown.
class Reader {
 public:
  explicit Reader(const IniFile& ini) : ini_(ini) {}

  bool has_section(const std::string& s) const { return ini_.sections.count(s) > 0; }

  const IniEntry* find(const std::string& section, const std::string& key) {
    const auto s = ini_.sections.find(section);
    if (s == ini_.sections.end()) return nullptr;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    used_.insert(section + "." + key);
    return &k->second;
  }

  template <class T>
  void get(const std::string& section, const std::string& key, T& out) {
    if (const IniEntry* e = find(section, key)) out = convert<T>(*e, section + "." + key);
  }

  template <class T>
  void get(const std::string& section, const std::string& key, std::optional<T>& out) {
    if (const IniEntry* e = find(section, key)) out = convert<T>(*e, section + "." + key);
  }

  template <class T>
  T require(const std::string& section, const std::string& key) {
    const IniEntry* e = find(section, key);
    if (!e) throw ConfigError(ini_.section_lines.count(section) ? ini_.section_lines.at(section) : 0,
                              section + "." + key, "required key missing");
    return convert<T>(*e, section + "." + key);
  }

  void check_unknown() const {
    static const std::set<std::string> known = {"analysis", "map", "cocycle", "orbit", "scan",
                                                "splitting", "cone", "perturb"};
    for (const auto& [name, keys] : ini_.sections) {
      if (!known.count(name)) throw ConfigError(ini_.section_lines.at(name), "[" + name + "]", "unknown section");
      for (const auto& [key, entry] : keys)
        if (!used_.count(name + "." + key)) throw ConfigError(entry.line, name + "." + key, "unknown key");
    }
  }

  int line_of(const std::string& section, const std::string& key) const {
    const auto s = ini_.sections.find(section);
    if (s != ini_.sections.end()) {
      const auto k = s->second.find(key);
      if (k != s->second.end()) return k->second.line;
    }
    return 0;
  }

 private:
  template <class T>
  static T convert(const IniEntry& e, const std::string& field);

  const IniFile& ini_;
  std::set<std::string> used_;
};

double parse_double(const std::string& text, int line, const std::string& field) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError(line, field, "expected a finite number, got '" + t + "'");
  return v;
}

long long parse_int(const std::string& text, int line, const std::string& field) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size())
    throw ConfigError(line, field, "expected an integer, got '" + t + "'");
  return v;
}

template <>
std::string Reader::convert<std::string>(const IniEntry& e, const std::string&) {
  return e.value;
}

template <>
double Reader::convert<double>(const IniEntry& e, const std::string& field) {
  return parse_double(e.value, e.line, field);
}

template <>
int Reader::convert<int>(const IniEntry& e, const std::string& field) {
  const long long v = parse_int(e.value, e.line, field);
  if (v < -1000000000LL || v > 1000000000LL) throw ConfigError(e.line, field, "integer out of range");
  return static_cast<int>(v);
}

template <>
std::ptrdiff_t Reader::convert<std::ptrdiff_t>(const IniEntry& e, const std::string& field) {
  return static_cast<std::ptrdiff_t>(parse_int(e.value, e.line, field));
}

template <>
std::uint64_t Reader::convert<std::uint64_t>(const IniEntry& e, const std::string& field) {
  const std::string t = trim(e.value);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size())
    throw ConfigError(e.line, field, "expected an unsigned 64-bit integer, got '" + t + "'");
  return v;
}

template <>
bool Reader::convert<bool>(const IniEntry& e, const std::string& field) {
  if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
  if (e.value == "false" || e.value == "no" || e.value == "0") return false;
  throw ConfigError(e.line, field, "expected true or false, got '" + e.value + "'");
}

// Rows separated by ';', entries by whitespace.
template <>
Matrix Reader::convert<Matrix>(const IniEntry& e, const std::string& field) {
  std::vector<std::vector<double>> rows;
  for (const std::string& r : split(e.value, ';')) {
    std::vector<double> row;
    for (const std::string& w : words(r)) row.push_back(parse_double(w, e.line, field));
    rows.push_back(row);
  }
  if (rows.empty() || rows.front().empty()) throw ConfigError(e.line, field, "empty matrix");
  const std::size_t cols = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != cols) throw ConfigError(e.line, field, "ragged matrix rows");
  if (rows.size() > static_cast<std::size_t>(kMaxDim) || cols > static_cast<std::size_t>(kMaxDim))
    throw ConfigError(e.line, field, "matrix larger than " + std::to_string(kMaxDim) + "x" + std::to_string(kMaxDim));
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  return m;
}

template <>
Vector Reader::convert<Vector>(const IniEntry& e, const std::string& field) {
  const std::vector<std::string> w = words(e.value);
  if (w.empty() || w.size() > static_cast<std::size_t>(kMaxDim))
    throw ConfigError(e.line, field, "expected 1 to " + std::to_string(kMaxDim) + " numbers");
  Vector v(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) v(i) = parse_double(w[i], e.line, field);
  return v;
}

void positive(Reader& r, const std::string& section, const std::string& key, double v) {
  if (!(v > 0.0)) throw ConfigError(r.line_of(section, key), section + "." + key, "must be > 0");
}

void one_of(Reader& r, const std::string& section, const std::string& key, const std::string& v,
            std::initializer_list<const char*> allowed) {
  std::string list;
  for (const char* a : allowed) {
    if (v == a) return;
    list += list.empty() ? a : std::string(", ") + a;
  }
  throw ConfigError(r.line_of(section, key), section + "." + key, "expected one of " + list + ", got '" + v + "'");
}

void check_phase(Reader& r, const std::string& phase) {
  if (phase == "cycle") return;
  const int line = r.line_of("map", "phase");
  if (phase.rfind("fixed:", 0) == 0) {
    parse_double(phase.substr(6), line, "map.phase");
    return;
  }
  parse_double(phase, line, "map.phase");
}

}  // namespace

IniFile IniFile::parse(std::istream& in) {
  IniFile ini;
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (!s.empty() && (s.front() == '#' || s.front() == ';')) continue;
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, "", "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw ConfigError(line, "", "empty section name");
      if (ini.sections.count(section)) throw ConfigError(line, "[" + section + "]", "duplicate section");
      ini.sections[section];
      ini.section_lines[section] = line;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "", "expected key = value");
    if (section.empty()) throw ConfigError(line, "", "key outside of any section");
    const std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    // inline comments need a space before '#'; ';' separates matrix rows
    const auto c = value.find(" #");
    if (c != std::string::npos) value = trim(value.substr(0, c));
    if (key.empty()) throw ConfigError(line, "", "empty key");
    if (value.empty()) throw ConfigError(line, section + "." + key, "empty value");
    auto& keys = ini.sections[section];
    if (keys.count(key)) throw ConfigError(line, section + "." + key, "duplicate key");
    keys[key] = IniEntry{value, line};
  }
  return ini;
}

IniFile IniFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot open config file '" + path + "'");
  return parse(in);
}

AnalysisConfig AnalysisConfig::from_ini(const IniFile& ini) {
  Reader r(ini);
  AnalysisConfig cfg;
  cfg.source = ini;
  cfg.name = r.require<std::string>("analysis", "name");
  r.get("analysis", "seed", cfg.seed);
  r.get("analysis", "require_certificate", cfg.require_certificate);

  if (r.has_section("map") && r.has_section("cocycle"))
    throw ConfigError(ini.section_lines.at("cocycle"), "[cocycle]", "[map] and [cocycle] are mutually exclusive");

  if (r.has_section("map")) {
    MapRecipe m;
    m.recipe = r.require<std::string>("map", "recipe");
    one_of(r, "map", "recipe", m.recipe, {"linear", "doubling", "fold", "fold_fold"});
    if (m.recipe == "linear") {
      m.matrix = r.require<Matrix>("map", "matrix");
      if (m.matrix.rows() != m.matrix.cols())
        throw ConfigError(r.line_of("map", "matrix"), "map.matrix", "must be square");
      for (int i = 0; i < m.matrix.rows(); ++i)
        for (int j = 0; j < m.matrix.cols(); ++j)
          if (m.matrix(i, j) != std::round(m.matrix(i, j)))
            throw ConfigError(r.line_of("map", "matrix"), "map.matrix", "entries must be integers");
    }
    if (m.recipe == "doubling") {
      m.dim = r.require<int>("map", "dim");
      if (m.dim < 1 || m.dim > kMaxDim) throw ConfigError(r.line_of("map", "dim"), "map.dim", "must be in 1..4");
    }
    if (m.recipe == "fold") {
      r.get("map", "y_multiplier", m.y_multiplier);
      r.get("map", "phase", m.phase);
      r.get("map", "shear", m.shear);
      check_phase(r, m.phase);
      if (m.shear != 0 && m.shear != 1) throw ConfigError(r.line_of("map", "shear"), "map.shear", "must be 0 or 1");
    }
    if (m.recipe == "fold_fold") r.get("map", "z_multiplier", m.z_multiplier);
    cfg.map = m;
  } else if (r.has_section("cocycle")) {
    CocycleRecipe c;
    c.kind = r.require<std::string>("cocycle", "kind");
    one_of(r, "cocycle", "kind", c.kind,
           {"example-ex", "constant", "diagonal", "rotation", "nondominated-2d", "nondominated-3d", "nilpotent"});
    if (c.kind == "example-ex" || c.kind == "constant" || c.kind == "diagonal" || c.kind == "rotation") {
      r.get("cocycle", "first", c.first);
      r.get("cocycle", "last", c.last);
      if (c.last < c.first) throw ConfigError(r.line_of("cocycle", "last"), "cocycle.last", "must be >= first");
    }
    if (c.kind == "example-ex" && c.first < 1)
      throw ConfigError(r.line_of("cocycle", "first"), "cocycle.first", "must be >= 1 for example-ex");
    if (c.kind == "constant") c.matrix = r.require<Matrix>("cocycle", "matrix");
    if (c.kind == "diagonal") c.diag = r.require<Vector>("cocycle", "diag");
    if (c.kind == "rotation") c.theta = r.require<double>("cocycle", "theta");
    if (c.kind == "nondominated-2d" || c.kind == "nondominated-3d") {
      r.get("cocycle", "middle", c.middle);
      if (c.middle < 2) throw ConfigError(r.line_of("cocycle", "middle"), "cocycle.middle", "must be >= 2");
    }
    cfg.cocycle = c;
  }

  OrbitConfig& o = cfg.orbit;
  r.get("orbit", "source", o.source);
  one_of(r, "orbit", "source", o.source, {"cycle", "forward", "lambda"});
  if (r.has_section("orbit") && cfg.cocycle)
    throw ConfigError(ini.section_lines.at("orbit"), "[orbit]", "synthetic cocycles have no orbit");
  if (cfg.map) {
    if (o.source == "forward") o.start = r.require<Vector>("orbit", "start");
    r.get("orbit", "first", o.first);
    r.get("orbit", "last", o.last);
    r.get("orbit", "len_fwd", o.len_fwd);
    r.get("orbit", "len_bwd", o.len_bwd);
    r.get("orbit", "crit_radius", o.crit_radius);
    r.get("orbit", "restarts", o.restarts);
    positive(r, "orbit", "crit_radius", o.crit_radius);
    if (o.last <= o.first) throw ConfigError(r.line_of("orbit", "last"), "orbit.last", "must be > first");
    if (o.source == "forward" && o.first != 0)
      throw ConfigError(r.line_of("orbit", "first"), "orbit.first", "forward orbits start at 0");
    if (o.source == "cycle" && (cfg.map->recipe != "fold" || cfg.map->phase != "cycle"))
      throw ConfigError(r.line_of("orbit", "source"), "orbit.source", "cycle needs the fold recipe with phase = cycle");
  }

  ScanConfig& s = cfg.scan;
  r.get("scan", "grid_res", s.grid_res);
  r.get("scan", "m_max", s.m_max);
  r.get("scan", "rank_tol", s.rank_tol);
  if (s.grid_res < 16) throw ConfigError(r.line_of("scan", "grid_res"), "scan.grid_res", "must be >= 16");
  if (s.m_max < 1) throw ConfigError(r.line_of("scan", "m_max"), "scan.m_max", "must be >= 1");
  positive(r, "scan", "rank_tol", s.rank_tol);

  SplittingConfig& sp = cfg.splitting;
  r.get("splitting", "source", sp.source);
  one_of(r, "splitting", "source", sp.source, {"return-time", "eigen", "pushed"});
  r.get("splitting", "kappa", sp.kappa);
  r.get("splitting", "m_f", sp.m_f);
  if (sp.source == "pushed") {
    sp.e0 = r.require<Matrix>("splitting", "e0");
    sp.f0 = r.require<Matrix>("splitting", "f0");
    r.get("splitting", "push_from", sp.push_from);
  }
  r.get("splitting", "factor", sp.factor);
  r.get("splitting", "ell_max", sp.ell_max);
  r.get("splitting", "alpha", sp.alpha);
  r.get("splitting", "defect_tol", sp.defect_tol);
  r.get("splitting", "curve_index", sp.curve_index);
  r.get("splitting", "n_max", sp.n_max);
  r.get("splitting", "conv_tol", sp.conv_tol);
  r.get("splitting", "eta", sp.eta);
  r.get("splitting", "theta", sp.theta);
  r.get("splitting", "rho", sp.rho);
  if (!(sp.factor > 0.0 && sp.factor < 1.0))
    throw ConfigError(r.line_of("splitting", "factor"), "splitting.factor", "must lie in (0, 1)");
  if (sp.ell_max < 1) throw ConfigError(r.line_of("splitting", "ell_max"), "splitting.ell_max", "must be >= 1");
  if (sp.n_max < 4) throw ConfigError(r.line_of("splitting", "n_max"), "splitting.n_max", "must be >= 4");
  if (sp.kappa && *sp.kappa < 1) throw ConfigError(r.line_of("splitting", "kappa"), "splitting.kappa", "must be >= 1");
  if (sp.m_f && *sp.m_f < 1) throw ConfigError(r.line_of("splitting", "m_f"), "splitting.m_f", "must be >= 1");
  positive(r, "splitting", "alpha", sp.alpha);
  positive(r, "splitting", "defect_tol", sp.defect_tol);
  positive(r, "splitting", "conv_tol", sp.conv_tol);
  positive(r, "splitting", "theta", sp.theta);
  positive(r, "splitting", "rho", sp.rho);
  if (sp.eta) positive(r, "splitting", "eta", *sp.eta);

  ConeConfig& cc = cfg.cone;
  r.get("cone", "k_max", cc.k_max);
  r.get("cone", "depth", cc.depth);
  r.get("cone", "n_max", cc.n_max);
  r.get("cone", "tol", cc.tol);
  r.get("cone", "samples", cc.samples);
  r.get("cone", "distance_tol", cc.distance_tol);
  if (cc.k_max < 1) throw ConfigError(r.line_of("cone", "k_max"), "cone.k_max", "must be >= 1");
  if (cc.depth < 1) throw ConfigError(r.line_of("cone", "depth"), "cone.depth", "must be >= 1");
  if (cc.n_max < 4) throw ConfigError(r.line_of("cone", "n_max"), "cone.n_max", "must be >= 4");
  if (cc.samples < 100) throw ConfigError(r.line_of("cone", "samples"), "cone.samples", "must be >= 100");
  positive(r, "cone", "tol", cc.tol);
  positive(r, "cone", "distance_tol", cc.distance_tol);

  PerturbConfig& p = cfg.perturb;
  r.get("perturb", "mode", p.mode);
  one_of(r, "perturb", "mode", p.mode, {"corpus", "kernel-raise", "full-kernel"});
  r.get("perturb", "delta", p.delta);
  r.get("perturb", "n_bound", p.n_bound);
  r.get("perturb", "corpus", p.corpus);
  r.get("perturb", "l_max", p.l_max);
  r.get("perturb", "control", p.control);
  r.get("perturb", "i0", p.i0);
  r.get("perturb", "window", p.window);
  r.get("perturb", "eps0", p.eps0);
  r.get("perturb", "start", p.start);
  r.get("perturb", "m", p.m);
  r.get("perturb", "radius", p.radius);
  positive(r, "perturb", "delta", p.delta);
  positive(r, "perturb", "eps0", p.eps0);
  positive(r, "perturb", "radius", p.radius);
  if (p.n_bound < 1.0) throw ConfigError(r.line_of("perturb", "n_bound"), "perturb.n_bound", "must be >= 1");
  if (p.corpus < 1) throw ConfigError(r.line_of("perturb", "corpus"), "perturb.corpus", "must be >= 1");
  if (p.l_max < 1) throw ConfigError(r.line_of("perturb", "l_max"), "perturb.l_max", "must be >= 1");
  if (p.window < 1) throw ConfigError(r.line_of("perturb", "window"), "perturb.window", "must be >= 1");
  if (p.m < 1) throw ConfigError(r.line_of("perturb", "m"), "perturb.m", "must be >= 1");

  r.check_unknown();
  if (!cfg.map && !cfg.cocycle && p.mode != "corpus")
    throw ConfigError(0, "", "a [map] or [cocycle] section is required");
  return cfg;
}

AnalysisConfig AnalysisConfig::load(const std::string& path) { return from_ini(IniFile::load(path)); }

}  // namespace domsplit
