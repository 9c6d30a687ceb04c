#pragma once

// Random test batteries and the inequality margins checked on them. Every
// margin is reported together with the discretization slack it is held to.
//
// Slack conventions on a grid with cell area a and peak density T:
//   integrated quantities (I, G) may be off by one cell of mass, a T;
//   second differences of G by four cells of mass, 4 a T;
//   measure quantities (mu, u*) by a one-cell boundary layer of the level set,
//   ConcentrationProfile::boundary_layer(s).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "common.hpp"
#include "concentration.hpp"
#include "fock.hpp"
#include "grid.hpp"
#include "stability.hpp"
#include "transforms.hpp"

namespace fockconc {

/// Unit-norm polynomial of random degree in [0, max_degree] with complex Gaussian coefficients.
inline FockFunction random_polynomial(std::mt19937_64& rng, unsigned max_degree) {
  std::uniform_int_distribution<unsigned> deg(0, max_degree);
  std::normal_distribution<double> nd(0.0, 1.0);
  const unsigned N = deg(rng);
  std::vector<cplx> c(N + 1);
  for (auto& x : c) x = cplx(nd(rng), nd(rng));
  return make_fock(std::move(c)).normalized();
}

/// Small random perturbation of a Gaussian: (1 + eps G) / ||.||, G unit-norm of degree 2..max_degree.
inline FockFunction random_perturbation(std::mt19937_64& rng, unsigned max_degree, double eps_max) {
  std::uniform_real_distribution<double> ue(0.2 * eps_max, eps_max);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_int_distribution<unsigned> deg(2, max_degree);
  const unsigned N = deg(rng);
  std::vector<cplx> c(N + 1);
  for (unsigned k = 2; k <= N; ++k) c[k] = cplx(nd(rng), nd(rng));
  const double eps = ue(rng) / std::sqrt(std::accumulate(c.begin(), c.end(), 0.0, [](double s, cplx x) { return s + std::norm(x); }));
  for (auto& x : c) x *= eps;
  c[0] = 1.0;
  return make_fock(std::move(c)).normalized();
}

/// Union of one to three random discs, ellipses and rectangles near the origin.
inline RegionMask random_mask(std::mt19937_64& rng, const GridSpec& g) {
  std::uniform_int_distribution<int> count(1, 3), kind(0, 2);
  std::uniform_real_distribution<double> pos(-1.5, 1.5), size(0.3, 1.0), ang(0.0, pi), aspect(0.5, 2.0);
  for (;;) {
    RegionMask m{g, std::vector<std::uint8_t>(g.cell_count(), 0)};
    const int pieces = count(rng);
    for (int p = 0; p < pieces; ++p) {
      const cplx c(pos(rng), pos(rng));
      const double r = size(rng), q = aspect(rng), th = ang(rng);
      RegionMask piece;
      switch (kind(rng)) {
        case 0: piece = disc_mask(g, c, pi * r * r); break;
        case 1: piece = ellipse_mask(g, c, r * std::sqrt(q), r / std::sqrt(q), th); break;
        default: piece = rectangle_mask(g, c, 1.6 * r * std::sqrt(q), 1.6 * r / std::sqrt(q)); break;
      }
      for (std::size_t k = 0; k < m.cells.size(); ++k) m.cells[k] |= piece.cells[k];
    }
    if (m.count() > 0) return m;
  }
}

/// The function battery shared by the profile and distance checks: the Gaussian,
/// kernel elements, the F_eps family, small perturbations and random polynomials.
inline std::vector<FockFunction> function_battery(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::vector<FockFunction> out;
  out.push_back(constant_one());
  out.push_back(kernel_function(cplx(0.3, 0.4), 40));
  for (double eps : {0.05, 0.02, 0.1}) out.push_back(perturbed_gaussian(eps));
  while (out.size() < count) {
    if (out.size() % 2 == 0)
      out.push_back(random_perturbation(rng, 6, 0.3));
    else
      out.push_back(random_polynomial(rng, 8));
  }
  out.resize(count);
  return out;
}

/// Signals h_0..h_6 and two random mixtures of h_0..h_8, sampled on the default Gauss-Hermite nodes.
inline std::vector<SampledSignal> hermite_battery(std::uint64_t seed) {
  std::vector<SampledSignal> out;
  for (unsigned k = 0; k <= 6; ++k) out.push_back(sample_gauss_hermite([k](double t) { return cplx(hermite_function(k, t)); }));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int m = 0; m < 2; ++m) {
    std::vector<cplx> c(9);
    for (auto& x : c) x = cplx(nd(rng), nd(rng));
    out.push_back(sample_gauss_hermite([c](double t) {
      std::vector<double> h;
      hermite_values(t, 8, h);
      cplx v{};
      for (unsigned k = 0; k <= 8; ++k) v += c[k] * h[k];
      return v;
    }));
  }
  return out;
}

/// The 5 x 5 grid of (x, w) in [-1.5, 1.5]^2.
inline std::vector<std::pair<double, double>> identity_points() {
  std::vector<std::pair<double, double>> p;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) p.emplace_back(-1.5 + 0.75 * i, -1.5 + 0.75 * j);
  return p;
}

struct RearrangementMargins {
  double ratio_worst = 0.0;        ///< min_j of r_{j+1} / (r_j e^{-2 layer}) - 1 for r = e^s u*(s); >= 0 passes
  double convexity_worst = 0.0;    ///< min G second difference + 4 a T; >= 0 passes
  double excess_worst = 0.0;       ///< a T - max (I(s) - ||F||^2 (1 - e^{-s})); >= 0 passes
  int sign_changes = 0;            ///< of u*(s) - ||F||^2 e^{-s}, outside the boundary-layer band
  bool degenerate = false;         ///< T = ||F||^2 (no crossing expected)
  bool passed = false;
};

/// Checks on (0, s_max] with spacing ds.
inline RearrangementMargins rearrangement_margins(const ConcentrationProfile& p, double s_max = 4.0, double ds = 0.02) {
  RearrangementMargins m;
  const double a = p.cell_area(), T = p.T(), nrm = p.norm_sq();
  const auto steps = static_cast<std::size_t>(std::llround(s_max / ds));
  m.ratio_worst = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < steps; ++j) {
    const double s0 = j * ds, s1 = (j + 1) * ds;
    const double r0 = std::exp(s0) * p.u_star(s0), r1 = std::exp(s1) * p.u_star(s1);
    const double layer = std::max(p.boundary_layer(s0), p.boundary_layer(s1));
    m.ratio_worst = std::min(m.ratio_worst, r1 / (r0 * std::exp(-2.0 * layer)) - 1.0);
  }
  const auto cv = convexity_G(p);
  m.convexity_worst = cv.min_second_difference + 4.0 * a * T;
  m.excess_worst = a * T - cv.max_excess;

  m.degenerate = p.degenerate();
  int last = 0;
  for (std::size_t j = 1; j <= steps; ++j) {
    const double s = j * ds;
    const double us = p.u_star(s), e = nrm * std::exp(-s);
    const double band = us * (std::exp(2.0 * p.boundary_layer(s)) - 1.0);
    const int sign = us - e > band ? 1 : (e - us > band ? -1 : 0);
    if (sign != 0) {
      if (last != 0 && sign != last) ++m.sign_changes;
      last = sign;
    }
  }
  m.passed = m.ratio_worst >= 0.0 && m.convexity_worst >= 0.0 && m.excess_worst >= 0.0 &&
             (m.degenerate || m.sign_changes <= 1);
  return m;
}

struct SandwichMargins {
  LemmaBounds bounds;
  double lower_margin = 0.0;  ///< mid - lhs + slack; >= 0 passes
  double upper_margin = 0.0;  ///< rhs - mid + slack; >= 0 passes
  double slack = 0.0;         ///< one cell of normalized mass, a T / ||F||^2
  bool passed = false;
};

inline SandwichMargins sandwich_margins(const ConcentrationProfile& p, double s0) {
  SandwichMargins m;
  m.bounds = lemma_bounds(p, s0);
  m.slack = p.cell_area() * p.T_normalized();
  if (m.bounds.degenerate) {
    m.lower_margin = m.bounds.mid - m.bounds.lhs + m.slack;
    m.upper_margin = m.bounds.rhs + m.slack * std::exp(s0) / fk_bound(s0);
  } else {
    m.lower_margin = m.bounds.mid - m.bounds.lhs + m.slack;
    m.upper_margin = m.bounds.rhs - m.bounds.mid + m.slack * (1.0 + std::exp(s0) / fk_bound(s0));
  }
  m.passed = m.lower_margin >= 0.0 && m.upper_margin >= 0.0;
  return m;
}

}  // namespace fockconc
