#pragma once

// Set-level diagnostics: symmetric differences, Fraenkel asymmetry of
// rasterized sets, and super-level set boundaries as graphs over the circle.

#include <algorithm>
#include <limits>
#include <ostream>
#include <vector>

#include "common.hpp"
#include "fock.hpp"
#include "grid.hpp"

namespace fockconc {

inline double symdiff_measure(const RegionMask& a, const RegionMask& b) {
  require_same_spec(a.spec, b.spec, "symdiff_measure");
  std::size_t c = 0;
  for (std::size_t k = 0; k < a.cells.size(); ++k) c += (a.cells[k] != 0) != (b.cells[k] != 0);
  return c * a.spec.cell_area();
}

/// Number of set cells with at least one 4-neighbour outside the set.
inline std::size_t boundary_cell_count(const RegionMask& m) {
  const unsigned n = m.spec.n;
  std::size_t c = 0;
  for (unsigned i = 0; i < n; ++i)
    for (unsigned j = 0; j < n; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * n + j;
      if (!m.cells[k]) continue;
      const bool edge = i == 0 || j == 0 || i + 1 == n || j + 1 == n || !m.cells[k - 1] || !m.cells[k + 1] ||
                        !m.cells[k - n] || !m.cells[k + n];
      c += edge;
    }
  return c;
}

struct AsymmetryReport {
  double A = 0.0;       ///< |Omega triangle B| / |Omega|, in [0, 2]
  cplx center{};        ///< optimal ball center
  double radius = 0.0;  ///< sqrt(|Omega| / pi)
  double slack = 0.0;   ///< discretization bound: 2 x boundary-cell fraction
};

namespace detail {
struct cell_set {
  std::vector<double> x, y;  // cell centers in cell units, relative to the bounding box corner
  double xmax = 0, ymax = 0;
};

inline cell_set local_cells(const RegionMask& m, unsigned& imin, unsigned& jmin) {
  const unsigned n = m.spec.n;
  imin = n, jmin = n;
  unsigned imax = 0, jmax = 0;
  for (unsigned i = 0; i < n; ++i)
    for (unsigned j = 0; j < n; ++j)
      if (m.cells[static_cast<std::size_t>(i) * n + j]) {
        imin = std::min(imin, i), imax = std::max(imax, i);
        jmin = std::min(jmin, j), jmax = std::max(jmax, j);
      }
  cell_set s;
  for (unsigned i = imin; i <= imax; ++i)
    for (unsigned j = jmin; j <= jmax; ++j)
      if (m.cells[static_cast<std::size_t>(i) * n + j]) {
        s.x.push_back(j - jmin + 0.5);
        s.y.push_back(i - imin + 0.5);
      }
  s.xmax = jmax - jmin + 1.0;
  s.ymax = imax - imin + 1.0;
  return s;
}

// Cells covered by the disc of radius rc (cell units) at (cx, cy); each cell
// contributes its linearized covered fraction clamp(rc - dist + 1/2, 0, 1).
inline double covered_cells(const cell_set& s, double cx, double cy, double rc) {
  compensated_sum<double> acc;
  const double lo = std::max(0.0, rc - 1.0), hi = rc + 1.0;
  for (std::size_t k = 0; k < s.x.size(); ++k) {
    const double dx = s.x[k] - cx, dy = s.y[k] - cy;
    const double d2 = dx * dx + dy * dy;
    if (d2 <= lo * lo) {
      acc.add(1.0);
    } else if (d2 < hi * hi) {
      acc.add(std::clamp(rc - std::sqrt(d2) + 0.5, 0.0, 1.0));
    }
  }
  return acc.value();
}
}  // namespace detail

/// A(Omega) = min over centers of |Omega triangle B(x, r)| / |Omega| with |B| = |Omega|.
/// Coarse center grid over the bounding box, then compass search down to 1e-3 cell sides.
/// Computed in coordinates local to the bounding box, so whole-cell translations of the
/// mask leave A unchanged bit for bit.
inline AsymmetryReport fraenkel_asymmetry(const RegionMask& mask) {
  const std::size_t count = mask.count();
  if (count == 0) throw invalid_input("fraenkel_asymmetry: empty mask");
  unsigned imin = 0, jmin = 0;
  const auto cells = detail::local_cells(mask, imin, jmin);
  const double rc = std::sqrt(static_cast<double>(count) / pi);
  auto objective = [&](double cx, double cy) { return 2.0 * (1.0 - detail::covered_cells(cells, cx, cy, rc) / count); };

  constexpr int coarse = 24;
  std::vector<std::pair<double, std::pair<double, double>>> starts;
  for (int a = 0; a <= coarse; ++a)
    for (int b = 0; b <= coarse; ++b) {
      const double cx = cells.xmax * a / coarse, cy = cells.ymax * b / coarse;
      starts.push_back({objective(cx, cy), {cx, cy}});
    }
  std::stable_sort(starts.begin(), starts.end(), [](auto& p, auto& q) { return p.first < q.first; });
  starts.resize(std::min<std::size_t>(4, starts.size()));

  double best = std::numeric_limits<double>::infinity(), bx = 0, by = 0;
  for (auto [val, c] : starts) {
    auto [cx, cy] = c;
    double step = std::max(cells.xmax, cells.ymax) / coarse;
    while (step > 1e-3) {
      bool improved = false;
      for (auto [dx, dy] : {std::pair{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}) {
        const double v = objective(cx + step * dx, cy + step * dy);
        if (v < val) {
          val = v, cx += step * dx, cy += step * dy;
          improved = true;
          break;
        }
      }
      if (!improved) step *= 0.5;
    }
    if (val < best) best = val, bx = cx, by = cy;
  }
  const double h = mask.spec.cell_side();
  const cplx corner = mask.spec.cell_center(imin, jmin) - cplx(0.5 * h, 0.5 * h);
  AsymmetryReport r;
  r.A = std::clamp(best, 0.0, 2.0);
  r.center = corner + cplx(bx * h, by * h);
  r.radius = rc * h;
  r.slack = 2.0 * static_cast<double>(boundary_cell_count(mask)) / count;
  return r;
}

/// Boundary of a super-level set {u > level} as r(theta) over a center.
struct BoundaryGraph {
  std::vector<double> theta;
  std::vector<double> radius;
  std::vector<bool> multi_crossing;
  cplx center{};
};

/// For each of m rays from `center`, the outermost crossing of u_F = level, by
/// marching on the analytic density and bisecting to 1e-10.
inline BoundaryGraph boundary_graph(const FockFunction& f, double level, cplx center, unsigned m, double r_max) {
  if (m < 3) throw invalid_input("boundary_graph: need at least 3 rays");
  if (!(level > 0.0)) throw invalid_input("boundary_graph: level must be positive");
  if (!(density(f, center) > level))
    throw invalid_input("boundary_graph: center is outside the super-level set (or level is above T)");
  BoundaryGraph g;
  g.center = center;
  g.theta.resize(m);
  g.radius.resize(m);
  g.multi_crossing.assign(m, false);
  std::vector<int> failed(m, 0);
  std::vector<char> multi(m, 0);
  parallel_for(m, [&](std::size_t j) {
    const double th = 2.0 * pi * j / m;
    const cplx dir = std::polar(1.0, th);
    auto phi = [&](double r) { return density(f, center + r * dir) - level; };
    const int steps = 4000;
    const double dr = r_max / steps;
    int crossings = 0;
    double last_in = -1.0;
    double prev = phi(0.0);
    for (int k = 1; k <= steps; ++k) {
      const double cur = phi(k * dr);
      if ((prev > 0.0) != (cur > 0.0)) {
        ++crossings;
        if (prev > 0.0) last_in = (k - 1) * dr;
      }
      prev = cur;
    }
    if (last_in < 0.0 || prev > 0.0) {
      failed[j] = 1;
      return;
    }
    double lo = last_in, hi = last_in + dr;
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      (phi(mid) > 0.0 ? lo : hi) = mid;
    }
    g.theta[j] = th;
    g.radius[j] = 0.5 * (lo + hi);
    multi[j] = crossings > 1;
  });
  for (unsigned j = 0; j < m; ++j) {
    if (failed[j]) throw invalid_input("boundary_graph: ray " + std::to_string(j) + " has no crossing inside r_max");
    g.multi_crossing[j] = multi[j] != 0;
  }
  return g;
}

/// Same, with r_max the distance from center to the edge of the grid window.
inline BoundaryGraph boundary_graph(const DensityGrid& grid, double level, cplx center, unsigned m) {
  if (!grid.source) throw invalid_input("boundary_graph: grid has no source function");
  const double r_max = grid.spec.half_width - std::max(std::abs(center.real() - grid.spec.center.real()),
                                                       std::abs(center.imag() - grid.spec.center.imag()));
  return boundary_graph(*grid.source, level, center, m, r_max);
}

struct ShapeReport {
  bool star_shaped = false;
  bool convex = false;
  double min_turn = 0.0;  ///< min normalized cross product of consecutive polygon edges
};

inline ShapeReport shape_checks(const BoundaryGraph& g) {
  const std::size_t m = g.radius.size();
  if (m < 64) throw invalid_input("shape_checks: need at least 64 rays");
  ShapeReport r;
  r.star_shaped = std::none_of(g.multi_crossing.begin(), g.multi_crossing.end(), [](bool b) { return b; });
  std::vector<cplx> p(m);
  for (std::size_t j = 0; j < m; ++j) p[j] = g.center + std::polar(g.radius[j], g.theta[j]);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t j = 0; j < m; ++j) {
    const cplx e1 = p[(j + 1) % m] - p[j];
    const cplx e2 = p[(j + 2) % m] - p[(j + 1) % m];
    const double cross = (e1.real() * e2.imag() - e1.imag() * e2.real()) / (std::abs(e1) * std::abs(e2));
    lo = std::min(lo, cross);
    hi = std::max(hi, cross);
  }
  r.min_turn = lo;
  r.convex = lo > 0.0 || hi < 0.0;
  return r;
}

/// True when u_F strictly decreases along every one of `rays` rays from `center` on [0, r_max].
inline bool radially_decreasing(const FockFunction& f, cplx center, double r_max, unsigned rays = 32,
                                unsigned samples = 400) {
  for (unsigned j = 0; j < rays; ++j) {
    const cplx dir = std::polar(1.0, 2.0 * pi * j / rays);
    double prev = density(f, center);
    for (unsigned k = 1; k <= samples; ++k) {
      const double cur = density(f, center + (r_max * k / samples) * dir);
      if (!(cur < prev)) return false;
      prev = cur;
    }
  }
  return true;
}

inline void write_boundary_csv(std::ostream& os, const BoundaryGraph& g) {
  os << "theta,r\n";
  for (std::size_t j = 0; j < g.theta.size(); ++j) os << fmt17(g.theta[j]) << ',' << fmt17(g.radius[j]) << '\n';
}

}  // namespace fockconc
