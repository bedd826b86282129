#include "domsplit/orbit.hpp"

#include "domsplit/errors.hpp"
#include "domsplit/linalg.hpp"
#include "domsplit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace domsplit {

const Point& OrbitSegment::point(std::ptrdiff_t i) const {
  if (!contains(i)) throw OutOfRange("orbit index " + std::to_string(i) + " outside the segment");
  return points[static_cast<std::size_t>(i - first)];
}

const Matrix& OrbitSegment::jacobian(std::ptrdiff_t i) const {
  if (!contains(i)) throw OutOfRange("orbit index " + std::to_string(i) + " outside the segment");
  return jacobians[static_cast<std::size_t>(i - first)];
}

double OrbitSegment::max_residual(const TorusMap& map) const {
  double r = 0.0;
  for (std::size_t k = 0; k + 1 < points.size(); ++k)
    r = std::max(r, torus_distance(map.evaluate(points[k]), points[k + 1]));
  return r;
}

OrbitSegment forward_orbit(const TorusMap& map, const Point& x0, int n) {
  if (n < 1) throw InvalidArgument("forward_orbit needs n >= 1");
  OrbitSegment s;
  Point x = wrap(x0);
  for (int i = 0; i <= n; ++i) {
    s.points.push_back(x);
    s.jacobians.push_back(map.jacobian(x));
    x = map.evaluate(x);
  }
  return s;
}

OrbitSegment periodic_segment(const TorusMap& map, const std::vector<Point>& cycle, std::ptrdiff_t first,
                              std::ptrdiff_t last) {
  if (cycle.empty() || last < first) throw InvalidArgument("periodic_segment needs a cycle and a nonempty range");
  const auto p = static_cast<std::ptrdiff_t>(cycle.size());
  for (std::ptrdiff_t k = 0; k < p; ++k)
    if (torus_distance(map.evaluate(cycle[k]), cycle[(k + 1) % p]) > 1e-9)
      throw InvalidArgument("points do not form a cycle of the map");
  OrbitSegment s;
  s.first = first;
  for (std::ptrdiff_t i = first; i <= last; ++i) {
    const Point& x = cycle[((i % p) + p) % p];
    s.points.push_back(x);
    s.jacobians.push_back(map.jacobian(x));
  }
  return s;
}

namespace {

// Damped Newton on wrap_signed(f(x) - y) = 0 from x0.
std::optional<Point> newton_root(const TorusMap& map, Point x, const Point& y, double tol) {
  for (int it = 0; it < 50; ++it) {
    const Point r = wrap_signed(map.lift(x) - y);
    if (r.norm() <= tol) return wrap(x);
    const SvdResult s = svd_ascending(map.jacobian(x));
    const int d = s.dim();
    Vector step = Vector::Zero(d);
    for (int k = 0; k < d; ++k)
      if (s.sigmas(k) > 1e-12 * s.sigmas(d - 1)) step += (s.codomain.col(k).dot(r) / s.sigmas(k)) * s.domain.col(k);
    const double n = step.norm();
    if (n > 0.25) step *= 0.25 / n;
    x -= step;
  }
  const Point r = wrap_signed(map.lift(x) - y);
  if (r.norm() <= tol) return wrap(x);
  return std::nullopt;
}

}  // namespace

PreimageResult preimages(const TorusMap& map, const Point& y, int grid_res, double tol, int threads) {
  if (grid_res < 16) throw InvalidArgument("preimages needs grid_res >= 16");
  const int d = map.dim();
  std::size_t cells = 1;
  for (int i = 0; i < d; ++i) cells *= static_cast<std::size_t>(grid_res);
  std::vector<std::optional<Point>> found(cells);
  parallel_for(cells, threads, [&](std::size_t c) {
    Point x0(d);
    std::size_t rest = c;
    for (int i = 0; i < d; ++i) {
      x0(i) = (static_cast<double>(rest % grid_res) + 0.5) / grid_res;
      rest /= grid_res;
    }
    found[c] = newton_root(map, x0, y, tol);
  });
  PreimageResult out;
  for (const auto& f : found) {
    if (!f) continue;
    bool dup = false;
    for (const Point& r : out.roots)
      if (torus_distance(r, *f) < 1e-6) {
        dup = true;
        break;
      }
    if (!dup) out.roots.push_back(*f);
  }
  std::sort(out.roots.begin(), out.roots.end(), [](const Point& a, const Point& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  for (const Point& r : out.roots) out.conorms.push_back(singular_values(map.jacobian(r))(0));
  out.empty = out.roots.empty();
  return out;
}

OrbitSegment backward_branch(const TorusMap& map, const Point& y0, int m, const BranchSelector& selector,
                             int grid_res, double tol) {
  if (m < 1) throw InvalidArgument("backward_branch needs m >= 1");
  std::mt19937_64 rng(selector.seed.value_or(0));
  std::vector<Point> back{wrap(y0)};
  std::vector<int> choices;
  for (int step = 1; step <= m; ++step) {
    const PreimageResult pre = preimages(map, back.back(), grid_res, tol);
    if (pre.empty) throw BranchUnavailable(-step);
    const int count = static_cast<int>(pre.roots.size());
    int pick;
    if (selector.seed) {
      pick = static_cast<int>(rng() % static_cast<std::uint64_t>(count));
    } else if (selector.indices.empty()) {
      pick = 0;
    } else {
      pick = selector.indices[(step - 1) % selector.indices.size()] % count;
    }
    choices.push_back(pick);
    back.push_back(pre.roots[pick]);
  }
  OrbitSegment s;
  s.first = -m;
  for (auto it = back.rbegin(); it != back.rend(); ++it) {
    s.points.push_back(*it);
    s.jacobians.push_back(map.jacobian(*it));
  }
  s.branch_choices.assign(choices.rbegin(), choices.rend());
  return s;
}

int kernel_dim(const TorusMap& map, const Point& x, int m, double tol) {
  FactoredProduct p(map.dim());
  Point y = x;
  for (int k = 0; k < m; ++k) {
    p.push(map.jacobian(y));
    y = map.evaluate(y);
  }
  return kernel(p.svd(), tol).dim();
}

CriticalScan critical_scan(const TorusMap& map, int m_max, int grid_res, double tol, int threads) {
  if (m_max < 1) throw InvalidArgument("critical_scan needs m_max >= 1");
  if (grid_res < 2) throw InvalidArgument("critical_scan needs grid_res >= 2");
  const int d = map.dim();
  std::size_t cells = 1;
  for (int i = 0; i < d; ++i) cells *= static_cast<std::size_t>(grid_res);
  auto node = [&](std::size_t c) {
    Point x(d);
    for (int i = 0; i < d; ++i) {
      x(i) = static_cast<double>(c % grid_res) / grid_res;
      c /= grid_res;
    }
    return x;
  };
  // dims[c * m_max + (m-1)] = dim ker(Df^m) at node c.
  std::vector<int> dims(cells * m_max);
  parallel_for(cells, threads, [&](std::size_t c) {
    FactoredProduct p(d);
    Point y = node(c);
    for (int m = 1; m <= m_max; ++m) {
      p.push(map.jacobian(y));
      y = map.evaluate(y);
      dims[c * m_max + (m - 1)] = kernel(p.svd(), tol).dim();
    }
  });
  CriticalScan scan;
  scan.grid_res = grid_res;
  scan.m_max = m_max;
  scan.kappa = *std::max_element(dims.begin(), dims.end());
  if (scan.kappa == 0) return scan;
  for (int m = 1; m <= m_max; ++m) {
    bool hit = false;
    for (std::size_t c = 0; c < cells && !hit; ++c) hit = dims[c * m_max + (m - 1)] == scan.kappa;
    if (hit) {
      scan.m_f = m;
      break;
    }
  }
  std::size_t at_kappa = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    const int k = dims[c * m_max + (scan.m_f - 1)];
    if (k != scan.kappa) continue;
    ++at_kappa;
    scan.samples.push_back(node(c));
    scan.sample_dims.push_back(k);
    // Interior: every axis neighbor also attains kappa.
    bool interior = true;
    std::size_t stride = 1;
    for (int i = 0; i < d && interior; ++i) {
      const std::size_t coord = (c / stride) % grid_res;
      for (int delta : {-1, 1}) {
        const std::size_t nc = (coord + grid_res + delta) % grid_res;
        const std::size_t nb = c + (nc - coord) * stride;
        if (dims[nb * m_max + (scan.m_f - 1)] != scan.kappa) interior = false;
      }
      stride *= grid_res;
    }
    if (interior) scan.has_interior = true;
  }
  scan.kappa_fraction = static_cast<double>(at_kappa) / static_cast<double>(cells);
  return scan;
}

CriticalPredicate kernel_predicate(const TorusMap& map, int kappa, int m_f, double tol) {
  return [map, kappa, m_f, tol](std::ptrdiff_t, const Point* x) {
    return x != nullptr && kappa > 0 && kernel_dim(map, *x, m_f, tol) == kappa;
  };
}

double cloud_distance(const std::vector<Point>& cloud, const Point& x) {
  double best = std::numeric_limits<double>::infinity();
  for (const Point& p : cloud) best = std::min(best, torus_distance(p, x));
  return best;
}

CriticalPredicate cloud_predicate(std::vector<Point> cloud, double radius) {
  return [cloud = std::move(cloud), radius](std::ptrdiff_t, const Point* x) {
    return x != nullptr && cloud_distance(cloud, *x) < radius;
  };
}

CriticalPredicate index_predicate(std::vector<std::ptrdiff_t> hits) {
  std::sort(hits.begin(), hits.end());
  return [hits = std::move(hits)](std::ptrdiff_t i, const Point*) {
    return std::binary_search(hits.begin(), hits.end(), i);
  };
}

CriticalPredicate constant_predicate(bool value) {
  return [value](std::ptrdiff_t, const Point*) { return value; };
}

std::vector<bool> hit_mask(const OrbitSegment& orbit, const CriticalPredicate& pred) {
  std::vector<bool> mask(orbit.points.size());
  for (std::size_t k = 0; k < orbit.points.size(); ++k)
    mask[k] = pred(orbit.first + static_cast<std::ptrdiff_t>(k), &orbit.points[k]);
  return mask;
}

LambdaOrbit lambda_orbit_sample(const TorusMap& map, const CriticalScan& scan, const LambdaSearch& search,
                                const CriticalPredicate& pred) {
  if (scan.kappa < 1 || scan.samples.empty()) throw NotFound("no critical set to sample orbits from");
  const int m_f = scan.m_f;
  std::mt19937_64 rng(search.seed);

  // Forward recurrence: the forward orbit of a critical point returns near the critical set.
  // The earlier part of that forward orbit serves as the backward branch.
  for (int r = 0; r < search.restarts; ++r) {
    const Point& start = scan.samples[rng() % scan.samples.size()];
    OrbitSegment seg = forward_orbit(map, start, search.len_bwd + search.len_fwd);
    seg.first = -search.len_bwd;
    const std::vector<bool> mask = hit_mask(seg, pred);
    bool back = false, fwd = false;
    std::vector<std::ptrdiff_t> hits;
    for (std::size_t k = 0; k < mask.size(); ++k) {
      if (!mask[k]) continue;
      const std::ptrdiff_t i = seg.first + static_cast<std::ptrdiff_t>(k);
      hits.push_back(i);
      if (i <= -m_f) back = true;
      if (i >= 0) fwd = true;
    }
    if (back && fwd) return {std::move(seg), std::move(hits), "forward-recurrence", r + 1};
  }

  // Backward search: random preimage branches, biased toward the critical sample cloud.
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int r = 0; r < search.restarts; ++r) {
    const Point start = scan.samples[rng() % scan.samples.size()];
    std::vector<Point> back{start};
    std::vector<int> choices;
    bool ok = true;
    for (int step = 1; step <= search.len_bwd; ++step) {
      const PreimageResult pre = preimages(map, back.back(), search.grid_res);
      if (pre.empty) {
        ok = false;
        break;
      }
      int pick = static_cast<int>(rng() % pre.roots.size());
      if (coin(rng) < 0.5) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < pre.roots.size(); ++k) {
          const double dist = cloud_distance(scan.samples, pre.roots[k]);
          if (dist < best) best = dist, pick = static_cast<int>(k);
        }
      }
      choices.push_back(pick);
      back.push_back(pre.roots[pick]);
    }
    if (!ok) continue;
    OrbitSegment seg;
    seg.first = -search.len_bwd;
    for (auto it = back.rbegin(); it != back.rend(); ++it) {
      seg.points.push_back(*it);
      seg.jacobians.push_back(map.jacobian(*it));
    }
    seg.branch_choices.assign(choices.rbegin(), choices.rend());
    const OrbitSegment fwd = forward_orbit(map, start, search.len_fwd);
    for (std::size_t k = 1; k < fwd.points.size(); ++k) {
      seg.points.push_back(fwd.points[k]);
      seg.jacobians.push_back(fwd.jacobians[k]);
    }
    const std::vector<bool> mask = hit_mask(seg, pred);
    bool has_back = false, has_fwd = false;
    std::vector<std::ptrdiff_t> hits;
    for (std::size_t k = 0; k < mask.size(); ++k) {
      if (!mask[k]) continue;
      const std::ptrdiff_t i = seg.first + static_cast<std::ptrdiff_t>(k);
      hits.push_back(i);
      if (i <= -m_f) has_back = true;
      if (i >= 0) has_fwd = true;
    }
    if (has_back && has_fwd) return {std::move(seg), std::move(hits), "backward-search", search.restarts + r + 1};
  }
  throw NotFound("no orbit segment met the critical set on both sides within the restart budget");
}

}  // namespace domsplit
