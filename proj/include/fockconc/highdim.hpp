#pragma once

// Concentration in C^d for d = 2, 3: the profile e*(s), the d-dimensional
// bound, Monte Carlo deficits on balls and products of discs, and the
// monotonicity of u*(s) / e*(s) from Monte Carlo quantiles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "common.hpp"
#include "fock.hpp"
#include "special.hpp"

namespace fockconc {

/// e*(s) = exp(-(d! s)^{1/d}).
inline double e_star(double s, unsigned d) {
  if (s < 0.0) throw invalid_input("e_star: s must be nonnegative");
  if (d < 1) throw invalid_input("e_star: d must be positive");
  return std::exp(-std::pow(std::exp(log_factorial(d)) * s, 1.0 / d));
}

/// int_0^area e*(s) ds = P(d, (d! area)^{1/d}).
inline double fk_bound_d(double area, unsigned d) {
  if (area < 0.0) throw invalid_input("fk_bound_d: area must be nonnegative");
  if (d < 1) throw invalid_input("fk_bound_d: d must be positive");
  if (d == 1) return -std::expm1(-area);
  return special::gamma_p(d, std::pow(std::exp(log_factorial(d)) * area, 1.0 / d));
}

/// Same integral by adaptive quadrature in tau = (d! s)^{1/d}: ds = tau^{d-1} / (d-1)! dtau.
inline double fk_bound_d_quadrature(double area, unsigned d) {
  if (area < 0.0) throw invalid_input("fk_bound_d_quadrature: area must be nonnegative");
  const double top = std::pow(std::exp(log_factorial(d)) * area, 1.0 / d);
  const double lf = log_factorial(d - 1);
  return special::integrate_adaptive(
      [&](double t) { return t <= 0.0 ? (d == 1 ? 1.0 : 0.0) : std::exp((d - 1.0) * std::log(t) - t - lf); }, 0.0, top,
      1e-14);
}

struct MCSpec {
  std::uint64_t samples = 1000000;
  std::uint64_t seed = 1;
  unsigned streams = 16;  ///< independent generators; results depend on (seed, streams), not on workers
  bool control_variate = false;

  void validate() const {
    if (samples < 10000) throw invalid_input("MCSpec: sample count must be >= 1e4");
    if (streams < 1) throw invalid_input("MCSpec: need at least one stream");
  }
};

/// A region of C^d = R^{2d} with coordinates (Re z_1, Im z_1, ..., Re z_d, Im z_d).
struct Region {
  enum class Kind { ball, product };
  Kind kind = Kind::ball;
  std::vector<cplx> center;    ///< d complex coordinates
  double radius = 0.0;         ///< ball radius in R^{2d}
  std::vector<double> radii;   ///< disc radii of a product

  unsigned dim() const { return static_cast<unsigned>(center.size()); }

  void validate() const {
    if (center.empty()) throw invalid_input("Region: empty center");
    if (kind == Kind::ball) {
      if (!(radius > 0.0)) throw invalid_input("Region: ball radius must be positive");
    } else {
      if (radii.size() != center.size()) throw invalid_input("Region: product needs one radius per coordinate");
      for (double r : radii)
        if (!(r > 0.0)) throw invalid_input("Region: product radii must be positive");
    }
  }

  double measure() const {
    const unsigned d = dim();
    if (kind == Kind::ball) return std::exp(d * std::log(pi) + 2.0 * d * std::log(radius) - log_factorial(d));
    double m = 1.0;
    for (double r : radii) m *= pi * r * r;
    return m;
  }

  bool contains(const std::vector<cplx>& z) const {
    if (kind == Kind::ball) {
      double s = 0.0;
      for (unsigned i = 0; i < z.size(); ++i) s += std::norm(z[i] - center[i]);
      return s < radius * radius;
    }
    for (unsigned i = 0; i < z.size(); ++i)
      if (std::norm(z[i] - center[i]) >= radii[i] * radii[i]) return false;
    return true;
  }
};

/// Ball about the origin with the given measure.
inline Region centered_ball(unsigned d, double measure) {
  Region r;
  r.kind = Region::Kind::ball;
  r.center.assign(d, cplx{});
  r.radius = std::exp((std::log(measure) + log_factorial(d) - d * std::log(pi)) / (2.0 * d));
  return r;
}

struct MCDeficit {
  double deficit = 0.0;
  double stderr_ = 0.0;       ///< one standard error of the deficit
  double concentration = 0.0;  ///< estimate of int_Omega u
  double fk_bound = 0.0;
  double area = 0.0;
  double norm_sq = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  unsigned streams = 0;
  bool control_variate = false;
  double three_sigma() const { return 3.0 * stderr_; }
};

namespace detail {
inline std::mt19937_64 stream_rng(std::uint64_t seed, unsigned stream) {
  std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(sq);
}

inline std::uint64_t stream_share(const MCSpec& mc, unsigned s) {
  return mc.samples / mc.streams + (s < mc.samples % mc.streams ? 1 : 0);
}

inline void require_highdim(const FockFunction& f, const char* what) {
  if (f.dim() == 1) throw invalid_input(std::string(what) + ": d = 1 is handled on grids; use deficit() with a mask");
  if (f.dim() > 3) throw invalid_input(std::string(what) + ": d must be 2 or 3");
}
}  // namespace detail

/// delta = 1 - int_Omega u / (||F||^2 fk_bound_d(|Omega|)), with the integral
/// estimated from Z ~ e^{-pi|z|^2} dz (each real coordinate N(0, 1/(2 pi))):
/// int_Omega u = E[|F(Z)|^2 1_Omega(Z)]. With control_variate, 1_B(Z) for the
/// centered ball B of the same measure (known mean fk_bound_d) is used.
inline MCDeficit deficit_d(const FockFunction& f, const Region& region, const MCSpec& mc) {
  detail::require_highdim(f, "deficit_d");
  region.validate();
  mc.validate();
  if (region.dim() != f.dim()) throw invalid_input("deficit_d: region and function dimensions differ");
  const unsigned d = f.dim();
  const double area = region.measure();
  const double fk = fk_bound_d(area, d);
  const Region ball = centered_ball(d, area);

  struct moments {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    std::uint64_t n = 0;
  };
  std::vector<moments> parts(mc.streams);
  const double sd = std::sqrt(1.0 / (2.0 * pi));
  parallel_for(mc.streams, [&](std::size_t s) {
    auto rng = detail::stream_rng(mc.seed, static_cast<unsigned>(s));
    std::normal_distribution<double> nd(0.0, sd);
    moments m;
    std::vector<cplx> z(d);
    const std::uint64_t count = detail::stream_share(mc, static_cast<unsigned>(s));
    for (std::uint64_t i = 0; i < count; ++i) {
      for (unsigned k = 0; k < d; ++k) {
        const double re = nd(rng);
        z[k] = cplx(re, nd(rng));
      }
      const double x = region.contains(z) ? std::norm(evaluate(f, ComplexPoint(z))) : 0.0;
      const double y = ball.contains(z) ? 1.0 : 0.0;
      m.sx += x, m.sy += y, m.sxx += x * x, m.syy += y * y, m.sxy += x * y;
    }
    m.n = count;
    parts[s] = m;
  });
  moments t;
  for (const auto& m : parts) {
    t.sx += m.sx, t.sy += m.sy, t.sxx += m.sxx, t.syy += m.syy, t.sxy += m.sxy;
    t.n += m.n;
  }
  const double n = static_cast<double>(t.n);
  const double mx = t.sx / n, my = t.sy / n;
  const double vx = std::max(0.0, t.sxx / n - mx * mx);
  double est = mx, var = vx;
  if (mc.control_variate) {
    const double vy = std::max(0.0, t.syy / n - my * my);
    const double cxy = t.sxy / n - mx * my;
    const double beta = vy > 0.0 ? cxy / vy : 0.0;
    est = mx - beta * (my - fk);
    var = std::max(0.0, vx - 2.0 * beta * cxy + beta * beta * vy);
  }
  MCDeficit r;
  r.norm_sq = f.norm_sq();
  r.area = area;
  r.fk_bound = fk;
  r.concentration = est;
  r.deficit = 1.0 - est / (r.norm_sq * fk);
  r.stderr_ = std::sqrt(var / (n - 1.0)) / (r.norm_sq * fk);
  r.samples = t.n;
  r.seed = mc.seed;
  r.streams = mc.streams;
  r.control_variate = mc.control_variate;
  return r;
}

struct RearrangementCheck {
  std::vector<double> s;
  std::vector<double> ratio;   ///< u*(s_j) / e*(s_j), normalized by ||F||^2
  std::vector<double> slack;   ///< statistical slack of each consecutive pair
  double worst_margin = 0.0;   ///< min_j (r_{j+1} - r_j)
  double worst_slackened = 0.0;  ///< min_j (r_{j+1} - r_j + slack_j); >= 0 means the check passes
  double bounding_radius = 0.0;
  bool passed = false;
};

/// u*(s) from Monte Carlo quantiles of u / ||F||^2 under the uniform measure on a
/// ball B of R^{2d} about the origin: u*(s) is the (s / |B|) upper quantile.
/// The slack of a pair is the spread of the quantile estimates over +-3 binomial
/// standard deviations of the rank at each end.
inline RearrangementCheck rearrangement_check_d(const FockFunction& f, const std::vector<double>& s_grid, const MCSpec& mc) {
  detail::require_highdim(f, "rearrangement_check_d");
  mc.validate();
  if (s_grid.size() < 2) throw invalid_input("rearrangement_check_d: need at least two s values");
  for (std::size_t j = 0; j < s_grid.size(); ++j) {
    if (!(s_grid[j] > 0.0)) throw invalid_input("rearrangement_check_d: s values must be positive");
    if (j > 0 && !(s_grid[j] > s_grid[j - 1])) throw invalid_input("rearrangement_check_d: s grid must increase");
  }
  const unsigned d = f.dim();
  const double nrm = f.norm_sq();
  if (!(nrm > 0.0)) throw invalid_input("rearrangement_check_d: zero function");
  const double smax = s_grid.back();
  // Level sets of measure <= smax stay inside B when pi R^2 exceeds the Gaussian
  // radius at smax by a margin growing with the degree; checked after sampling.
  const double tau = std::pow(std::exp(log_factorial(d)) * smax, 1.0 / d);
  const double R = std::sqrt((tau + 2.0 * f.degree() + 4.0) / pi);
  const double volB = std::exp(d * std::log(pi) + 2.0 * d * std::log(R) - log_factorial(d));

  std::vector<std::vector<double>> parts(mc.streams);
  std::vector<double> outer_max(mc.streams, 0.0);
  parallel_for(mc.streams, [&](std::size_t s) {
    auto rng = detail::stream_rng(mc.seed, static_cast<unsigned>(s));
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const std::uint64_t count = detail::stream_share(mc, static_cast<unsigned>(s));
    auto& out = parts[s];
    out.reserve(count);
    std::vector<double> x(2 * d);
    std::vector<cplx> z(d);
    for (std::uint64_t i = 0; i < count; ++i) {
      double n2 = 0.0;
      for (auto& v : x) {
        v = nd(rng);
        n2 += v * v;
      }
      const double rad = R * std::pow(ud(rng), 1.0 / (2.0 * d)) / std::sqrt(n2);
      for (unsigned k = 0; k < d; ++k) z[k] = cplx(rad * x[2 * k], rad * x[2 * k + 1]);
      const ComplexPoint p(z);
      const double u = density(f, p) / nrm;
      out.push_back(u);
      if (std::sqrt(p.norm_sq()) > 0.95 * R) outer_max[s] = std::max(outer_max[s], u);
    }
  });
  std::vector<double> u;
  u.reserve(mc.samples);
  for (auto& p : parts) u.insert(u.end(), p.begin(), p.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  const double n = static_cast<double>(u.size());
  auto quantile = [&](double s) {
    const double idx = std::clamp(s / volB * n, 0.0, n - 1.0);
    return u[static_cast<std::size_t>(idx)];
  };

  RearrangementCheck r;
  r.bounding_radius = R;
  r.s = s_grid;
  const std::size_t m = s_grid.size();
  std::vector<double> lo, hi;
  for (std::size_t j = 0; j < m; ++j) {
    const double p = s_grid[j] / volB;
    const double ds = 3.0 * volB * std::sqrt(p * (1.0 - p) / n);
    const double gap = std::min(j > 0 ? s_grid[j] - s_grid[j - 1] : s_grid[j], j + 1 < m ? s_grid[j + 1] - s_grid[j] : s_grid[j]);
    if (ds > 0.5 * gap)
      throw invalid_input("rearrangement_check_d: Monte Carlo spread in s (" + fmt17(ds) +
                          ") exceeds half the grid spacing; increase the sample count");
    const double es = e_star(s_grid[j], d);
    r.ratio.push_back(quantile(s_grid[j]) / es);
    hi.push_back(quantile(std::max(0.0, s_grid[j] - ds)) / es);
    lo.push_back(quantile(s_grid[j] + ds) / es);
  }
  const double level_max = quantile(smax);
  if (*std::max_element(outer_max.begin(), outer_max.end()) >= level_max)
    throw numerical_failure("rearrangement_check_d: super-level set reaches the bounding ball");
  r.worst_margin = r.worst_slackened = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double margin = r.ratio[j + 1] - r.ratio[j];
    const double sl = (r.ratio[j] - lo[j]) + (hi[j + 1] - r.ratio[j + 1]);
    r.slack.push_back(sl);
    r.worst_margin = std::min(r.worst_margin, margin);
    r.worst_slackened = std::min(r.worst_slackened, margin + sl);
  }
  r.passed = r.worst_slackened >= 0.0;
  return r;
}

}  // namespace fockconc
