#pragma once

// Closeness to the Gaussian class: distance to {c F_{z0}}, stability ratios,
// second-variation coefficients V_k(s), the F_eps = 1 + eps z^2 sharpness
// family, and the top eigenpair of the localization operator.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <vector>

#include "common.hpp"
#include "concentration.hpp"
#include "fock.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "special.hpp"

namespace fockconc {

struct GaussianDistance {
  double closed = 0.0;  ///< 2(1 - sqrt(T)) for F / ||F||
  double direct = 0.0;  ///< min over z0, |c| = 1 of ||F/||F|| - c F_{z0}||^2
  double T = 0.0;       ///< max u of F / ||F||
  cplx argmax{};        ///< location of T
  cplx z0{};            ///< minimizer of the direct search
  bool converged = true;
};

namespace detail {
// ||f - c F_{z0}||^2 in coefficient space with c = F(z0)/|F(z0)|; F_{z0} is
// truncated where its tail is below 1e-17 and the remaining tail is added.
inline double kernel_residual(std::span<const cplx> a, cplx z0) {
  const ComplexPoint p(z0);
  unsigned m = static_cast<unsigned>(a.size()) - 1;
  while (kernel_tail_mass(p, m) > 1e-17) m += 4;
  std::vector<cplx> b;
  basis_values(std::conj(z0), m, b, std::exp(-0.5 * pi * std::norm(z0)));
  const cplx fz = evaluate_dense(a, z0);
  const cplx c = std::abs(fz) > 0.0 ? fz / std::abs(fz) : cplx(1.0);
  compensated_sum<double> s;
  for (unsigned k = 0; k <= m; ++k) s.add(std::norm((k < a.size() ? a[k] : cplx{}) - c * b[k]));
  s.add(kernel_tail_mass(p, m));
  return s.value();
}
}  // namespace detail

/// Both routes to the distance from F/||F|| to the extremizer class.
/// The direct route is a compass search over z0 seeded at the grid argmax.
inline GaussianDistance gaussian_distance(const FockFunction& f, unsigned grid_n = 256) {
  if (f.dim() != 1) throw invalid_input("gaussian_distance: d must be 1");
  if (!(f.norm_sq() > 0.0)) throw invalid_input("gaussian_distance: zero function");
  const FockFunction fn = f.normalized();
  const GridSpec g(default_radius(fn.degree(), 0.0), grid_n);
  const auto grid = sample_density(fn, g);
  const PeakInfo peak = global_max(grid);

  GaussianDistance r;
  r.T = std::min(1.0, peak.value);
  r.argmax = peak.location;
  r.closed = 2.0 * (1.0 - std::sqrt(r.T));
  r.converged = peak.refined;

  const auto a = fn.coefficients();
  std::size_t seed = 0;
  for (std::size_t k = 1; k < grid.values.size(); ++k)
    if (grid.values[k] > grid.values[seed]) seed = k;
  cplx z = g.cell_center(seed);
  double val = detail::kernel_residual(a, z);
  double step = g.cell_side();
  int evals = 0;
  while (step > 1e-10 && evals < 20000) {
    bool moved = false;
    for (cplx dir : {cplx(1, 0), cplx(-1, 0), cplx(0, 1), cplx(0, -1)}) {
      const double v = detail::kernel_residual(a, z + step * dir);
      ++evals;
      if (v < val) {
        val = v, z += step * dir;
        moved = true;
        break;
      }
    }
    if (!moved) step *= 0.5;
  }
  if (step > 1e-10) r.converged = false;
  r.direct = std::max(0.0, val);
  r.z0 = z;
  return r;
}

struct StabilityReport {
  double T = 0.0;
  double distance_sq_closed = 0.0;
  double distance_sq_direct = 0.0;
  double deficit = 0.0;
  double quad_err = 0.0;
  double area = 0.0;
  double ratio = undefined;  ///< distance / sqrt(e^{|Omega|} delta)
  double asymmetry = 0.0;
  double asymmetry_slack = 0.0;
  double asymmetry_ratio = undefined;  ///< A / sqrt(delta)
};

inline StabilityReport stability_report(const FockFunction& f, const RegionMask& mask) {
  const auto dist = gaussian_distance(f);
  const auto grid = sample_density(f, mask.spec);
  const auto def = deficit(grid, mask);
  const auto asym = fraenkel_asymmetry(mask);
  StabilityReport r;
  r.T = dist.T;
  r.distance_sq_closed = dist.closed;
  r.distance_sq_direct = dist.direct;
  r.deficit = def.deficit;
  r.quad_err = def.quad_err;
  r.area = def.area;
  r.asymmetry = asym.A;
  r.asymmetry_slack = asym.slack;
  if (def.deficit > def.quad_err) {
    r.ratio = std::sqrt(dist.closed) / std::sqrt(std::exp(def.area) * def.deficit);
    r.asymmetry_ratio = asym.A / std::sqrt(def.deficit);
  }
  return r;
}

/// V_k(s) = -(sum_{j=1}^{k-1} s^j / j!) e^{-s}.
inline double v_coefficient(unsigned k, double s) {
  if (k < 2) throw invalid_input("v_coefficient: k must be >= 2");
  if (!(s > 0.0)) throw invalid_input("v_coefficient: s must be positive");
  compensated_sum<double> acc;
  double term = 1.0;
  for (unsigned j = 1; j < k; ++j) {
    term *= s / j;
    acc.add(term);
  }
  return -acc.value() * std::exp(-s);
}

/// V_k(s) from its defining three terms
///   (pi^k/k!) int_{|z|<rho} |z|^{2k} e^{-pi|z|^2} - int_{|z|<rho} e^{-pi|z|^2} + s^k e^{-s}/k!,
/// with pi rho^2 = s, each disc integral done by radial Gauss-Legendre quadrature.
inline double v_coefficient_oracle(unsigned k, double s) {
  if (k < 2) throw invalid_input("v_coefficient_oracle: k must be >= 2");
  if (!(s > 0.0)) throw invalid_input("v_coefficient_oracle: s must be positive");
  const double rho = std::sqrt(s / pi);
  const double lf = log_factorial(k);
  const double t1 = special::integrate_gl(
      [&](double r) {
        if (r == 0.0) return 0.0;
        return 2.0 * pi * std::exp(k * std::log(pi) - lf + (2.0 * k + 1.0) * std::log(r) - pi * r * r);
      },
      0.0, rho);
  const double t2 = special::integrate_gl([](double r) { return 2.0 * pi * r * std::exp(-pi * r * r); }, 0.0, rho);
  const double t3 = std::exp(k * std::log(s) - s - lf);
  compensated_sum<double> acc;
  acc.add(t1);
  acc.add(-t2);
  acc.add(t3);
  return acc.value();
}

/// Sum_{k>=2} |a_k|^2 V_k(s) for G orthogonal to e_0 and e_1. `v` defaults to v_coefficient.
inline double second_variation(const FockFunction& g, double s,
                               const std::function<double(unsigned, double)>& v = v_coefficient) {
  if (g.dim() != 1) throw invalid_input("second_variation: d must be 1");
  if (std::abs(g.coefficient(0)) > 1e-12 || std::abs(g.coefficient(1)) > 1e-12)
    throw invalid_input("second_variation: G must have a_0 = a_1 = 0");
  const auto c = g.coefficients();
  compensated_sum<double> acc;
  for (unsigned k = 2; k < c.size(); ++k)
    if (c[k] != cplx{}) acc.add(std::norm(c[k]) * v(k, s));
  return acc.value();
}

/// (1 + eps z^2) / ||.||, using z^2 = (sqrt 2 / pi) e_2.
inline FockFunction perturbed_gaussian(double eps) {
  return make_fock({1.0, 0.0, eps * std::sqrt(2.0) / pi}).normalized();
}

struct SharpnessRow {
  double eps = 0.0;
  double s = 0.0;
  double deficit = 0.0;         ///< delta of the normalized F_eps on its super-level set of measure s
  double distance = 0.0;        ///< sqrt(2(1 - sqrt(T)))
  double ratio_deficit = 0.0;   ///< delta / eps^2
  double ratio_distance = 0.0;  ///< distance / eps
  bool flagged = false;         ///< deficit within the grid noise floor; excluded from the fit
};

struct SharpnessSweep {
  std::vector<SharpnessRow> rows;
  double baseline = 0.0;      ///< |delta| of the Gaussian on the same grid
  double limit = undefined;   ///< extrapolated delta (1 - e^{-s}) / eps^2
  double target = 0.0;        ///< 2 s e^{-s} / pi^2
  double distance_limit = undefined;  ///< extrapolated distance / eps
  double slope = undefined;   ///< least-squares slope of log distance against log delta
};

struct SweepGrid {
  unsigned n = 2048;
  double half_width = 0.0;  ///< 0 selects default_radius(2, s)
};

namespace detail {
// Least-squares fit q = L + b x over the given points; returns L.
inline double fit_intercept(const std::vector<double>& x, const std::vector<double>& q) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double mq = std::accumulate(q.begin(), q.end(), 0.0) / n;
  double sxx = 0.0, sxq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxq += (x[i] - mx) * (q[i] - mq);
  }
  if (sxx == 0.0) return mq;
  return mq - (sxq / sxx) * mx;
}

inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxx > 0.0 ? sxy / sxx : undefined;
}
}  // namespace detail

/// Deficit and distance of F_eps on its own super-level set of measure s, for each eps,
/// then q(eps) = delta (1 - e^{-s}) / eps^2 extrapolated to eps -> 0 by a least-squares
/// fit q = L + b eps^2 over the unflagged rows (one Richardson elimination step when
/// there are two rows).
inline SharpnessSweep sharpness_sweep(double s, const std::vector<double>& eps_list, SweepGrid grid = {}) {
  if (eps_list.empty()) throw invalid_input("sharpness_sweep: empty eps list");
  if (!(s > 0.0) || s > 3.0) throw invalid_input("sharpness_sweep: s must lie in (0, 3]");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0) || eps_list[i] > 0.1) throw invalid_input("sharpness_sweep: eps must lie in (0, 0.1]");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw invalid_input("sharpness_sweep: eps list must be decreasing");
  }
  const double R = grid.half_width > 0.0 ? grid.half_width : default_radius(2, s);
  const GridSpec spec(R, grid.n);

  SharpnessSweep out;
  out.target = 2.0 * s * std::exp(-s) / (pi * pi);
  out.baseline = std::abs(superlevel_deficit(sample_density(constant_one(), spec), s));
  out.rows.resize(eps_list.size());
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    const double eps = eps_list[i];
    const auto f = perturbed_gaussian(eps);
    const auto g = sample_density(f, spec);
    const PeakInfo peak = global_max(g);
    SharpnessRow& row = out.rows[i];
    row.eps = eps;
    row.s = s;
    row.deficit = superlevel_deficit(g, s);
    row.distance = std::sqrt(2.0 * (1.0 - std::sqrt(std::min(1.0, peak.value))));
    row.ratio_deficit = row.deficit / (eps * eps);
    row.ratio_distance = row.distance / eps;
    row.flagged = !(row.deficit > 20.0 * out.baseline) || !peak.refined;
  }

  std::vector<double> x, q, qd, ld, lr;
  for (const auto& r : out.rows) {
    if (r.flagged) continue;
    x.push_back(r.eps * r.eps);
    q.push_back(r.ratio_deficit * fk_bound(s));
    qd.push_back(r.ratio_distance);
    ld.push_back(std::log(r.deficit));
    lr.push_back(std::log(r.distance));
  }
  if (x.size() >= 2) {
    out.limit = detail::fit_intercept(x, q);
    out.distance_limit = detail::fit_intercept(x, qd);
    out.slope = detail::fit_slope(ld, lr);
  } else if (x.size() == 1) {
    out.limit = q[0];
    out.distance_limit = qd[0];
  }
  return out;
}

inline void write_sweep_csv(std::ostream& os, const SharpnessSweep& sw) {
  os << "eps,s,deficit,distance,ratio_deficit,ratio_distance\n";
  for (const auto& r : sw.rows)
    os << fmt17(r.eps) << ',' << fmt17(r.s) << ',' << fmt17(r.deficit) << ',' << fmt17(r.distance) << ','
       << fmt17(r.ratio_deficit) << ',' << fmt17(r.ratio_distance) << '\n';
  // Extrapolation row: eps = 0, ratios are the eps -> 0 limits of delta/eps^2 and distance/eps.
  if (!sw.rows.empty()) {
    const double s = sw.rows.front().s;
    os << fmt17(0.0) << ',' << fmt17(s) << ',' << fmt17(0.0) << ',' << fmt17(0.0) << ','
       << fmt17(sw.limit / fk_bound(s)) << ',' << fmt17(sw.distance_limit) << '\n';
  }
}

struct AreaScanRow {
  double area = 0.0;
  double deficit = 0.0;
  double quad_err = 0.0;
  double distance = 0.0;
  double ratio = undefined;            ///< distance / sqrt(e^{area} delta)
  double asymmetry = 0.0;
  double asymmetry_ratio = undefined;  ///< A / sqrt(delta)
};

/// Stability ratios of one function on its super-level sets of the given measures.
inline std::vector<AreaScanRow> area_scan(const FockFunction& f, const std::vector<double>& areas, const GridSpec& spec) {
  if (areas.empty()) throw invalid_input("area_scan: empty area list");
  const auto g = sample_density(f, spec);
  const auto dist = gaussian_distance(f);
  std::vector<AreaScanRow> rows(areas.size());
  for (std::size_t i = 0; i < areas.size(); ++i) {
    auto [mask, dsl] = superlevel_mask(g, areas[i]);
    const auto rep = deficit(g, mask);
    AreaScanRow& r = rows[i];
    r.area = rep.area;
    r.deficit = rep.deficit;
    r.quad_err = rep.quad_err;
    r.distance = std::sqrt(dist.closed);
    r.asymmetry = fraenkel_asymmetry(mask).A;
    if (rep.deficit > rep.quad_err) {
      r.ratio = r.distance / std::sqrt(std::exp(r.area) * r.deficit);
      r.asymmetry_ratio = r.asymmetry / std::sqrt(r.deficit);
    }
  }
  return rows;
}

inline void write_area_scan_csv(std::ostream& os, const std::vector<AreaScanRow>& rows) {
  os << "area,deficit,quad_err,distance,ratio,asymmetry,asymmetry_ratio\n";
  for (const auto& r : rows)
    os << fmt17(r.area) << ',' << fmt17(r.deficit) << ',' << fmt17(r.quad_err) << ',' << fmt17(r.distance) << ','
       << fmt17(r.ratio) << ',' << fmt17(r.asymmetry) << ',' << fmt17(r.asymmetry_ratio) << '\n';
}

/// Dense Hermitian matrix, row-major.
struct HermitianMatrix {
  std::size_t n = 0;
  std::vector<cplx> data;
  cplx operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
  cplx& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
};

/// M_jk = int_Omega e_j conj(e_k) e^{-pi|z|^2} by the midpoint rule on the mask cells.
inline HermitianMatrix localization_matrix(const RegionMask& mask, unsigned N) {
  if (N > 64) throw invalid_input("localization_matrix: N must be <= 64");
  std::vector<std::size_t> cells;
  for (std::size_t k = 0; k < mask.cells.size(); ++k)
    if (mask.cells[k]) cells.push_back(k);
  if (cells.empty()) throw invalid_input("localization_matrix: empty mask");
  const std::size_t dim = N + 1;
  // b_k(z) = e_k(z) e^{-pi|z|^2/2} at every cell
  std::vector<cplx> b(cells.size() * dim);
  parallel_for(cells.size(), [&](std::size_t c) {
    const cplx z = mask.spec.cell_center(cells[c]);
    std::vector<cplx> row;
    detail::basis_values(z, N, row, std::exp(-0.5 * pi * std::norm(z)));
    std::copy(row.begin(), row.end(), b.begin() + c * dim);
  });
  HermitianMatrix M{dim, std::vector<cplx>(dim * dim)};
  const double a = mask.spec.cell_area();
  parallel_for(dim, [&](std::size_t j) {
    for (std::size_t k = j; k < dim; ++k) {
      compensated_sum<cplx> acc;
      for (std::size_t c = 0; c < cells.size(); ++c) acc.add(b[c * dim + j] * std::conj(b[c * dim + k]));
      M(j, k) = a * acc.value();
    }
  });
  for (std::size_t j = 0; j < dim; ++j) {
    M(j, j) = cplx(M(j, j).real(), 0.0);
    for (std::size_t k = j + 1; k < dim; ++k) M(k, j) = std::conj(M(j, k));
  }
  return M;
}

struct Eigenpair {
  double lambda = 0.0;
  FockFunction f;                 ///< normalized top eigenfunction, largest coefficient real positive
  std::size_t iterations = 0;
  bool stagnated = false;         ///< residual did not reach the tolerance
  std::size_t subspace_dim = 1;   ///< eigenvalues within the stagnation gap of lambda
};

namespace detail {
inline std::vector<cplx> matvec(const HermitianMatrix& M, const std::vector<cplx>& v) {
  std::vector<cplx> w(M.n);
  for (std::size_t i = 0; i < M.n; ++i) {
    cplx s{};
    for (std::size_t j = 0; j < M.n; ++j) s += M(i, j) * v[j];
    w[i] = s;
  }
  return w;
}

inline double vnorm(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

struct power_result {
  double lambda;
  std::vector<cplx> v;
  std::size_t iterations;
  bool converged;
};

// Power iteration on M - sum_i l_i P_i (deflation by the given orthonormal vectors).
inline power_result power_iterate(const HermitianMatrix& M, const std::vector<std::vector<cplx>>& deflate,
                                  const std::vector<double>& shifts, double tol, std::size_t max_iter) {
  std::mt19937_64 rng(0x5eedULL + deflate.size());
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::vector<cplx> v(M.n);
  for (auto& x : v) x = u(rng);
  auto apply = [&](const std::vector<cplx>& x) {
    auto w = matvec(M, x);
    for (std::size_t d = 0; d < deflate.size(); ++d) {
      cplx p{};
      for (std::size_t i = 0; i < M.n; ++i) p += std::conj(deflate[d][i]) * x[i];
      for (std::size_t i = 0; i < M.n; ++i) w[i] -= shifts[d] * p * deflate[d][i];
    }
    return w;
  };
  double nv = vnorm(v);
  for (auto& x : v) x /= nv;
  double lambda = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    auto w = apply(v);
    cplx rq{};
    for (std::size_t i = 0; i < M.n; ++i) rq += std::conj(v[i]) * w[i];
    lambda = rq.real();
    double res = 0.0;
    for (std::size_t i = 0; i < M.n; ++i) res += std::norm(w[i] - lambda * v[i]);
    const double nw = vnorm(w);
    if (nw == 0.0) return {0.0, v, it, true};
    for (std::size_t i = 0; i < M.n; ++i) v[i] = w[i] / nw;
    if (std::sqrt(res) <= tol) {
      auto w2 = apply(v);
      cplx rq2{};
      for (std::size_t i = 0; i < M.n; ++i) rq2 += std::conj(v[i]) * w2[i];
      return {rq2.real(), v, it, true};
    }
  }
  return {lambda, v, max_iter, false};
}
}  // namespace detail

/// lambda_1 and f_Omega by power iteration to residual `tol`. On stagnation the
/// dimension of the near-degenerate top eigenspace is estimated by deflation.
inline Eigenpair top_eigenpair(const HermitianMatrix& M, double tol = 1e-10, std::size_t max_iter = 200000) {
  if (M.n == 0) throw invalid_input("top_eigenpair: empty matrix");
  auto r = detail::power_iterate(M, {}, {}, tol, max_iter);
  Eigenpair e;
  e.lambda = r.lambda;
  e.iterations = r.iterations;
  e.stagnated = !r.converged;
  if (e.stagnated) {
    std::vector<std::vector<cplx>> basis{r.v};
    std::vector<double> shifts{r.lambda};
    while (basis.size() < std::min<std::size_t>(M.n, 8)) {
      auto next = detail::power_iterate(M, basis, shifts, 1e-8, 5000);
      if (std::abs(next.lambda - r.lambda) > 1e-6 * std::abs(r.lambda)) break;
      basis.push_back(next.v);
      shifts.push_back(next.lambda);
    }
    e.subspace_dim = basis.size();
  }
  // Fix the phase: largest coefficient real and positive.
  std::size_t big = 0;
  for (std::size_t i = 1; i < M.n; ++i)
    if (std::abs(r.v[i]) > std::abs(r.v[big])) big = i;
  const cplx ph = std::abs(r.v[big]) > 0.0 ? std::conj(r.v[big]) / std::abs(r.v[big]) : cplx(1.0);
  for (auto& x : r.v) x = std::conj(x * ph);
  // v^* M v = int_Omega |sum conj(v_k) e_k|^2 e^{-pi|z|^2}, so f_Omega has coefficients conj(v).
  e.f = make_fock(r.v).normalized();
  return e;
}

}  // namespace fockconc
