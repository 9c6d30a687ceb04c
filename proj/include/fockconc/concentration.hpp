#pragma once

// Distribution function, decreasing rearrangement and optimal concentration of
// u_F on a rasterized grid, together with deficits against the bound 1 - e^{-s}.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "common.hpp"
#include "fock.hpp"
#include "grid.hpp"

namespace fockconc {

inline constexpr double undefined = std::numeric_limits<double>::quiet_NaN();

/// 1 - e^{-area}: the largest fraction of ||F||^2 that u_F can place on a set of that measure.
inline double fk_bound(double area) {
  if (area < 0.0) throw invalid_input("fk_bound: area must be nonnegative");
  return -std::expm1(-area);
}

/// Location and value of max u_F.
struct PeakInfo {
  double value = 0.0;       ///< T
  cplx location{};          ///< argmax
  double grid_value = 0.0;  ///< largest cell value
  bool refined = false;     ///< false when the analytic ascent failed and the grid max is used
};

namespace detail {
// log u and its gradient/Hessian; g = 2 Re log F - pi |z|^2.
struct log_density_jet {
  double value;
  double gx, gy;
  double hxx, hxy, hyy;
  bool ok;
};

inline log_density_jet log_density(std::span<const cplx> coeffs, cplx z) {
  const auto [f0, f1, f2] = evaluate_derivatives(coeffs, z);
  if (std::abs(f0) == 0.0) return {-std::numeric_limits<double>::infinity(), 0, 0, 0, 0, 0, false};
  const cplx w = f1 / f0;
  const cplx wp = (f2 * f0 - f1 * f1) / (f0 * f0);
  log_density_jet j{};
  j.value = 2.0 * std::log(std::abs(f0)) - pi * std::norm(z);
  j.gx = 2.0 * w.real() - 2.0 * pi * z.real();
  j.gy = -2.0 * w.imag() - 2.0 * pi * z.imag();
  j.hxx = 2.0 * wp.real() - 2.0 * pi;
  j.hxy = -2.0 * wp.imag();
  j.hyy = -2.0 * wp.real() - 2.0 * pi;
  j.ok = std::isfinite(j.value) && std::isfinite(j.gx) && std::isfinite(j.gy);
  return j;
}

// Damped Newton ascent on log u; falls back to gradient steps where the Hessian is not negative definite.
inline std::optional<cplx> ascend(std::span<const cplx> coeffs, cplx z, double grad_tol = 1e-12) {
  auto j = log_density(coeffs, z);
  if (!j.ok) return std::nullopt;
  for (int it = 0; it < 200; ++it) {
    const double gnorm = std::hypot(j.gx, j.gy);
    if (gnorm < grad_tol) return z;
    double dx, dy;
    const double det = j.hxx * j.hyy - j.hxy * j.hxy;
    if (j.hxx < 0.0 && det > 0.0) {
      dx = -(j.hyy * j.gx - j.hxy * j.gy) / det;
      dy = -(-j.hxy * j.gx + j.hxx * j.gy) / det;
    } else {
      const double step = 0.1 / std::max(1.0, gnorm);
      dx = step * j.gx;
      dy = step * j.gy;
    }
    double lambda = 1.0;
    bool moved = false;
    for (int k = 0; k < 60; ++k) {
      const cplx cand = z + lambda * cplx(dx, dy);
      const auto jc = log_density(coeffs, cand);
      if (jc.ok && jc.value >= j.value - 1e-15 * std::abs(j.value)) {
        z = cand;
        j = jc;
        moved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!moved) return std::hypot(j.gx, j.gy) < 1e-8 ? std::optional<cplx>(z) : std::nullopt;
  }
  return std::hypot(j.gx, j.gy) < 1e-9 ? std::optional<cplx>(z) : std::nullopt;
}
}  // namespace detail

/// T = max u_F: multi-start (up to five best local maxima of the grid) damped Newton on grad u_F = 0.
inline PeakInfo global_max(const DensityGrid& g) {
  PeakInfo p;
  const unsigned n = g.spec.n;
  std::size_t best = 0;
  for (std::size_t k = 1; k < g.values.size(); ++k)
    if (g.values[k] > g.values[best]) best = k;
  p.grid_value = g.values[best];
  p.value = p.grid_value;
  p.location = g.spec.cell_center(best);
  if (!g.source || g.source->dim() != 1) return p;

  // Local maxima of the grid, best first.
  std::vector<std::pair<double, std::size_t>> peaks;
  for (unsigned i = 1; i + 1 < n; ++i)
    for (unsigned j = 1; j + 1 < n; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * n + j;
      const double v = g.values[k];
      if (v < 1e-3 * p.grid_value) continue;
      bool is_max = true;
      for (int di = -1; di <= 1 && is_max; ++di)
        for (int dj = -1; dj <= 1 && is_max; ++dj)
          if ((di || dj) && g.values[k + di * static_cast<long>(n) + dj] > v) is_max = false;
      if (is_max) peaks.emplace_back(v, k);
    }
  std::sort(peaks.begin(), peaks.end(), [](auto& a, auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  if (peaks.empty()) peaks.emplace_back(p.grid_value, best);
  if (peaks.size() > 5) peaks.resize(5);

  const auto coeffs = g.source->coefficients();
  for (const auto& [v, k] : peaks) {
    const auto z = detail::ascend(coeffs, g.spec.cell_center(k));
    if (!z) continue;
    const double u = density(*g.source, *z);
    if (!p.refined || u > p.value) {
      if (u >= p.grid_value * (1.0 - 1e-12)) {
        p.value = u;
        p.location = *z;
        p.refined = true;
      }
    }
  }
  return p;
}

inline PeakInfo global_max(const FockFunction& f, const GridSpec& g) { return global_max(sample_density(f, g)); }

/// Rearrangement calculus of a rasterized density: sorted cell values
/// v_0 >= v_1 >= ... with cell area a give
///   mu(t) = a #{v_j > t},  u*(s) = v_floor(s/a),  I(s) = int_0^s u*.
class ConcentrationProfile {
 public:
  ConcentrationProfile(std::vector<double> sorted_desc, double cell_area, double norm_sq, PeakInfo peak,
                       std::size_t grid_cells_per_side)
      : v_(std::move(sorted_desc)), a_(cell_area), norm_sq_(norm_sq), peak_(peak), side_(grid_cells_per_side) {
    prefix_.resize(v_.size() + 1);
    compensated_sum<double> acc;
    prefix_[0] = 0.0;
    for (std::size_t k = 0; k < v_.size(); ++k) {
      acc.add(v_[k]);
      prefix_[k + 1] = acc.value();
    }
    compute_crossing();
  }

  double cell_area() const { return a_; }
  double norm_sq() const { return norm_sq_; }
  /// Total rasterized measure covered by the tabulation.
  double covered_measure() const { return a_ * v_.size(); }
  const std::vector<double>& sorted_values() const { return v_; }
  std::size_t cells_per_side() const { return side_; }

  double T() const { return peak_.value; }
  /// max u_F / ||F||^2.
  double T_normalized() const { return peak_.value / norm_sq_; }
  const PeakInfo& peak() const { return peak_; }
  bool degenerate() const { return T_normalized() >= 1.0 - 1e-6; }

  /// s* with u*(s*) = e^{-s*} ||F||^2; NaN in the equality case T = ||F||^2.
  double s_star() const { return s_star_; }
  double t_star() const { return std::isnan(s_star_) ? undefined : std::exp(-s_star_); }

  double mu(double t) const {
    // number of v_j > t in a descending array
    auto it = std::partition_point(v_.begin(), v_.end(), [t](double v) { return v > t; });
    return a_ * static_cast<double>(it - v_.begin());
  }

  double u_star(double s) const {
    if (s < 0.0) throw invalid_input("u_star: s must be nonnegative");
    const auto k = static_cast<std::size_t>(std::floor(s / a_));
    return k < v_.size() ? v_[k] : 0.0;
  }

  double I(double s) const {
    if (s <= 0.0) return 0.0;
    const double q = s / a_;
    const auto k = static_cast<std::size_t>(std::floor(q));
    if (k >= v_.size()) return a_ * prefix_.back();
    return a_ * (prefix_[k] + (q - k) * v_[k]);
  }

  std::vector<double> tabulate_mu(const std::vector<double>& ts) const { return map(ts, [this](double t) { return mu(t); }); }
  std::vector<double> tabulate_u_star(const std::vector<double>& ss) const { return map(ss, [this](double s) { return u_star(s); }); }
  std::vector<double> tabulate_I(const std::vector<double>& ss) const { return map(ss, [this](double s) { return I(s); }); }

  /// Number of cells along the boundary of the rasterized super-level set of measure s,
  /// estimated from the equal-area disc: 2 sqrt(pi s) / h cells, plus one.
  /// Times the cell area, this is the measure of a one-cell-thick boundary layer.
  double boundary_layer(double s) const {
    const double h = std::sqrt(a_);
    return (2.0 * std::sqrt(pi * std::max(s, 0.0)) / h + 1.0) * a_;
  }

 private:
  template <class Fn>
  static std::vector<double> map(const std::vector<double>& xs, Fn fn) {
    std::vector<double> out(xs.size());
    std::transform(xs.begin(), xs.end(), out.begin(), fn);
    return out;
  }

  void compute_crossing() {
    s_star_ = undefined;
    if (degenerate() || v_.empty()) return;
    auto f = [this](double s) { return std::exp(s) * u_star(s) / norm_sq_ - 1.0; };
    if (f(0.0) >= 0.0) return;
    double lo = 0.0, hi = 0.5;
    while (f(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > covered_measure()) return;
    }
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) < 0.0 ? lo : hi) = mid;
    }
    s_star_ = 0.5 * (lo + hi);
  }

  std::vector<double> v_;
  std::vector<double> prefix_;
  double a_;
  double norm_sq_;
  PeakInfo peak_;
  std::size_t side_;
  double s_star_ = undefined;
};

inline ConcentrationProfile profile(const DensityGrid& g) {
  std::vector<double> v = g.values;
  std::sort(v.begin(), v.end(), std::greater<>());
  return ConcentrationProfile(std::move(v), g.spec.cell_area(), g.norm_sq, global_max(g), g.spec.n);
}

struct DeficitReport {
  double concentration = 0.0;       ///< int_Omega u
  double fk_bound = 0.0;            ///< 1 - e^{-|Omega|}
  double deficit = 0.0;             ///< delta(F; Omega)
  double superlevel_deficit = 0.0;  ///< delta_{s0} at s0 = |Omega|
  double area = 0.0;                ///< |Omega|
  double norm_sq = 0.0;             ///< ||F||^2
  double quad_err = 0.0;            ///< error estimate for `deficit`
  bool violation = false;           ///< deficit < -quad_err
};

namespace detail {
// Sum of the m largest values (ties do not matter for the sum).
inline double top_sum(std::vector<double> v, std::size_t m) {
  m = std::min(m, v.size());
  if (m == 0) return 0.0;
  std::nth_element(v.begin(), v.begin() + (m - 1), v.end(), std::greater<>());
  compensated_sum<double> s;
  for (std::size_t k = 0; k < m; ++k) s.add(v[k]);
  return s.value();
}

// I(s) from unsorted cell values, with the same fractional-cell convention as the profile.
inline double superlevel_mass(const std::vector<double>& values, double a, double s) {
  const double q = s / a;
  const auto m = static_cast<std::size_t>(std::floor(q));
  if (m >= values.size()) return a * top_sum(values, values.size());
  std::vector<double> v = values;
  std::nth_element(v.begin(), v.begin() + m, v.end(), std::greater<>());
  const double next = v[m];
  compensated_sum<double> acc;
  for (std::size_t k = 0; k < m; ++k) acc.add(v[k]);
  return a * (acc.value() + (q - m) * next);
}

// Midpoint-rule error bound over the masked cells: twice sum |h^2/24 Lap u| a.
inline double midpoint_error(const DensityGrid& g, const RegionMask* mask) {
  const unsigned n = g.spec.n;
  compensated_sum<double> s;
  for (unsigned i = 0; i < n; ++i)
    for (unsigned j = 0; j < n; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * n + j;
      if (mask && !mask->cells[k]) continue;
      const double c = g.values[k];
      const double up = i + 1 < n ? g.values[k + n] : 0.0;
      const double dn = i > 0 ? g.values[k - n] : 0.0;
      const double rt = j + 1 < n ? g.values[k + 1] : 0.0;
      const double lt = j > 0 ? g.values[k - 1] : 0.0;
      s.add(std::abs(up + dn + rt + lt - 4.0 * c) / 24.0);
    }
  return 2.0 * s.value() * g.spec.cell_area();
}
}  // namespace detail

/// delta_{s0} = 1 - I(s0) / ((1 - e^{-s0}) ||F||^2) for the rasterized density.
inline double superlevel_deficit(const DensityGrid& g, double s0) {
  if (!(s0 > 0.0)) throw invalid_input("superlevel_deficit: s0 must be positive");
  return 1.0 - detail::superlevel_mass(g.values, g.spec.cell_area(), s0) / (fk_bound(s0) * g.norm_sq);
}

inline DeficitReport deficit(const DensityGrid& g, const RegionMask& mask) {
  require_same_spec(g.spec, mask.spec, "deficit");
  if (!(g.norm_sq > 0.0)) throw invalid_input("deficit: zero function");
  const std::size_t cnt = mask.count();
  if (cnt == 0) throw invalid_input("deficit: empty mask");
  DeficitReport r;
  r.area = cnt * g.spec.cell_area();
  compensated_sum<double> acc;
  for (std::size_t k = 0; k < g.values.size(); ++k)
    if (mask.cells[k]) acc.add(g.values[k]);
  r.concentration = acc.value() * g.spec.cell_area();
  r.fk_bound = fk_bound(r.area);
  r.norm_sq = g.norm_sq;
  r.deficit = 1.0 - r.concentration / (r.fk_bound * r.norm_sq);
  r.superlevel_deficit = superlevel_deficit(g, r.area);
  const double conc_err = detail::midpoint_error(g, &mask) + 1e-13 * r.concentration;
  r.quad_err = conc_err / (r.fk_bound * r.norm_sq) + 1e-12;
  r.violation = r.deficit < -r.quad_err;
  return r;
}

inline DeficitReport deficit(const FockFunction& f, const RegionMask& mask) {
  return deficit(sample_density(f, mask.spec), mask);
}

/// Mask of the super-level set of measure ~ s0 (top round(s0/a) cells; ties by
/// value then lexicographic cell order) and its deficit delta_{s0}.
inline std::pair<RegionMask, double> superlevel_mask(const DensityGrid& g, double s0) {
  if (!(s0 > 0.0)) throw invalid_input("superlevel_mask: s0 must be positive");
  if (s0 > 0.9 * g.spec.window_area()) throw invalid_input("superlevel_mask: s0 exceeds 0.9 x window area");
  const auto m = static_cast<std::size_t>(std::llround(s0 / g.spec.cell_area()));
  std::vector<std::uint32_t> idx(g.values.size());
  std::iota(idx.begin(), idx.end(), 0u);
  auto cmp = [&](std::uint32_t x, std::uint32_t y) {
    return g.values[x] > g.values[y] || (g.values[x] == g.values[y] && x < y);
  };
  if (m > 0 && m < idx.size()) std::nth_element(idx.begin(), idx.begin() + (m - 1), idx.end(), cmp);
  RegionMask mask{g.spec, std::vector<std::uint8_t>(g.values.size(), 0)};
  for (std::size_t k = 0; k < m; ++k) mask.cells[idx[k]] = 1;
  return {std::move(mask), superlevel_deficit(g, s0)};
}

struct ConvexityReport {
  double min_second_difference = 0.0;  ///< min over the sigma tabulation of G(s-1) - 2G(s) + G(s+1)
  double max_excess = 0.0;             ///< max over s of I(s) - ||F||^2 (1 - e^{-s})
  std::size_t samples = 0;
};

/// G(sigma) = I(-log sigma) on sigma_j = j/M, j = 1..M.
inline ConvexityReport convexity_G(const ConcentrationProfile& p, std::size_t M = 100) {
  ConvexityReport r;
  r.samples = M;
  std::vector<double> G(M + 1);
  r.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j <= M; ++j) {
    const double sigma = static_cast<double>(j) / M;
    const double s = -std::log(sigma);
    G[j] = p.I(s);
    r.max_excess = std::max(r.max_excess, G[j] - p.norm_sq() * (1.0 - sigma));
  }
  G[0] = p.norm_sq();
  r.min_second_difference = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < M; ++j) r.min_second_difference = std::min(r.min_second_difference, G[j - 1] - 2.0 * G[j] + G[j + 1]);
  return r;
}

struct LemmaBounds {
  double lhs = 0.0;               ///< (1 - T)^2 / 2
  double mid = 0.0;               ///< int_0^{s*} (e^{-s} - u*(s)) ds
  double rhs = 0.0;               ///< delta_{s0} e^{s0}
  double reinforced_ratio = 0.0;  ///< (1 - T) / mid
  bool degenerate = false;        ///< T = 1 (equality case); s* undefined
};

/// Lower/upper sandwich for the area between e^{-s} and u*(s) up to the crossing s*.
/// Uses the normalized density u / ||F||^2.
inline LemmaBounds lemma_bounds(const ConcentrationProfile& p, double s0) {
  if (!(s0 > 0.0)) throw invalid_input("lemma_bounds: s0 must be positive");
  LemmaBounds b;
  const double T = std::min(1.0, p.T_normalized());
  b.lhs = 0.5 * (1.0 - T) * (1.0 - T);
  const double delta_s0 = 1.0 - p.I(s0) / (fk_bound(s0) * p.norm_sq());
  b.rhs = delta_s0 * std::exp(s0);
  if (p.degenerate() || std::isnan(p.s_star())) {
    b.degenerate = true;
    b.mid = 0.0;
    b.reinforced_ratio = undefined;
    return b;
  }
  const double ss = p.s_star();
  b.mid = fk_bound(ss) - p.I(ss) / p.norm_sq();
  b.reinforced_ratio = (1.0 - T) / b.mid;
  return b;
}

}  // namespace fockconc
