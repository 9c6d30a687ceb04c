#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fockconc/transforms.hpp"

using namespace fockconc;

namespace {
// h_k(t) = (2 pi)^{1/4} psi_k(sqrt(2 pi) t) with H_k from its explicit sum.
double hermite_oracle(unsigned k, double t) {
  const double x = std::sqrt(2.0 * pi) * t;
  double H = 0.0;
  for (unsigned m = 0; 2 * m <= k; ++m)
    H += (m % 2 ? -1.0 : 1.0) * std::tgamma(k + 1.0) / (std::tgamma(m + 1.0) * std::tgamma(k - 2.0 * m + 1.0)) *
         std::pow(2.0 * x, static_cast<double>(k - 2 * m));
  const double psi = H * std::exp(-0.5 * x * x) / std::sqrt(std::pow(2.0, k) * std::tgamma(k + 1.0) * std::sqrt(pi));
  return std::pow(2.0 * pi, 0.25) * psi;
}

template <class Fn>
cplx trapezoid(Fn&& g, double a, double b, int n) {
  const double h = (b - a) / n;
  cplx s = 0.5 * (g(a) + g(b));
  for (int i = 1; i < n; ++i) s += g(a + i * h);
  return s * h;
}

std::vector<std::pair<double, double>> grid5() {
  std::vector<std::pair<double, double>> p;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) p.emplace_back(-1.5 + 0.75 * i, -1.5 + 0.75 * j);
  return p;
}
}  // namespace

TEST(Hermite, ValuesMatchExplicitPolynomials) {
  for (unsigned k = 0; k <= 8; ++k)
    for (double t : {-1.3, -0.4, 0.0, 0.25, 0.9}) EXPECT_NEAR(hermite_function(k, t), hermite_oracle(k, t), 1e-12) << k;
}

TEST(Hermite, OrthonormalUnderDenseQuadrature) {
  for (unsigned j : {0u, 2u, 5u})
    for (unsigned k : {0u, 2u, 5u}) {
      const cplx v = trapezoid([&](double t) { return cplx(hermite_oracle(j, t) * hermite_oracle(k, t)); }, -6, 6, 20000);
      EXPECT_NEAR(v.real(), j == k ? 1.0 : 0.0, 1e-10);
    }
}

TEST(HermiteExpand, BasisElementsAndMixtures) {
  const auto h0 = sample_gauss_hermite([](double t) { return cplx(hermite_function(0, t)); });
  const auto e0 = hermite_expand(h0, 24);
  EXPECT_NEAR(std::abs(e0.coeffs[0] - 1.0), 0.0, 1e-13);
  for (unsigned k = 1; k <= 24; ++k) EXPECT_NEAR(std::abs(e0.coeffs[k]), 0.0, 1e-13);

  const auto mix = sample_gauss_hermite(
      [](double t) { return cplx((hermite_function(0, t) + hermite_function(1, t)) / std::sqrt(2.0)); });
  const auto em = hermite_expand(mix, 24);
  EXPECT_NEAR(em.coeffs[0].real(), 1.0 / std::sqrt(2.0), 1e-13);
  EXPECT_NEAR(em.coeffs[1].real(), 1.0 / std::sqrt(2.0), 1e-13);
  EXPECT_NEAR(std::abs(em.coeffs[2]), 0.0, 1e-13);
  EXPECT_LT(em.tail_ratio, 1e-20);
}

TEST(HermiteExpand, IndicatorAgainstTrapezoidOracle) {
  // normalized indicator of [-1, 1], represented by uniform Simpson samples on its support
  const double a = 1.0 / std::sqrt(2.0);
  const auto f = sample_uniform([&](double) { return cplx(a); }, -1.0, 1.0, 4001, QuadratureRule::simpson);
  const auto e = hermite_expand(f, 12);
  for (unsigned k = 0; k <= 12; ++k) {
    const cplx ref = trapezoid([&](double t) { return cplx(a * hermite_oracle(k, t)); }, -1.0, 1.0, 100000);
    EXPECT_NEAR(std::abs(e.coeffs[k] - ref), 0.0, 1e-6) << k;
  }
}

TEST(HermiteExpand, Errors) {
  const auto f = sample_gauss_hermite([](double t) { return cplx(hermite_function(0, t)); }, 9);
  EXPECT_THROW(hermite_expand(f, 5), invalid_input);
  EXPECT_NO_THROW(hermite_expand(f, 4));
  EXPECT_THROW(SampledSignal({0, 1, 2}, {1, 1, 1}, QuadratureRule::trapezoid), invalid_input);
  std::vector<double> t{0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<cplx> v(8, 1.0);
  v[3] = cplx(NAN, 0);
  EXPECT_THROW(SampledSignal(t, v, QuadratureRule::trapezoid), invalid_input);
  EXPECT_THROW(SampledSignal(t, std::vector<cplx>(8, 1.0), QuadratureRule::gauss_hermite), invalid_input);
}

TEST(Bargmann, BasisCorrespondence) {
  const auto h0 = sample_gauss_hermite([](double t) { return cplx(hermite_function(0, t)); });
  const auto F0 = bargmann(hermite_expand(h0, 24));
  for (double x : {0.0, 0.5, -1.2}) EXPECT_NEAR(std::abs(evaluate(F0, cplx(x, 0.3)) - 1.0), 0.0, 1e-12);
  const auto h1 = sample_gauss_hermite([](double t) { return cplx(hermite_function(1, t)); });
  const auto F1 = bargmann(hermite_expand(h1, 24));
  const cplx z(0.3, -0.7);
  EXPECT_NEAR(std::abs(evaluate(F1, z) - std::sqrt(pi) * z), 0.0, 1e-12);
}

TEST(Bargmann, Unitarity) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 20; ++i) {
    HermiteExpansion e;
    e.coeffs.resize(30);
    for (auto& c : e.coeffs) c = cplx(nd(rng), nd(rng));
    EXPECT_NEAR(norm(bargmann(e)), std::sqrt(e.norm_sq()), 1e-14 * std::sqrt(e.norm_sq()));
  }
}

TEST(Stft, GaussianWindowExamples) {
  const auto phi = sample_gauss_hermite([](double t) { return cplx(gaussian_window(t)); });
  EXPECT_NEAR(std::abs(stft_gaussian(phi, 0.0, 0.0)), 1.0, 1e-13);
  const cplx ref = trapezoid([](double t) { return cplx(gaussian_window(t) * gaussian_window(1.0 - t)); }, -8, 8, 100000);
  EXPECT_NEAR(std::abs(stft_gaussian(phi, 1.0, 0.0)), std::abs(ref), 1e-12);
  EXPECT_NEAR(std::abs(ref), std::exp(-pi / 2.0), 1e-12);

  double lo = 1e300, hi = -1e300;
  for (int r = 0; r < 4; ++r) {
    const cplx p = std::polar(1.0, r * pi / 2.0) * cplx(0.5, 0.5);
    const double v = std::abs(stft_gaussian(phi, p.real(), p.imag()));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_LE(hi - lo, 1e-8);
}

TEST(Stft, RejectsSlowDecay) {
  const auto f = sample_uniform([](double) { return cplx(1.0); }, -1.0, 1.0, 101, QuadratureRule::simpson);
  EXPECT_THROW(stft_gaussian(f, 0.0, 0.0), invalid_input);
}

TEST(BargmannIdentity, StandardBattery) {
  const auto pts = grid5();
  for (unsigned k = 0; k <= 6; ++k) {
    const auto f = sample_gauss_hermite([&](double t) { return cplx(hermite_function(k, t)); });
    EXPECT_LE(bargmann_identity_residual(f, pts), 1e-6) << k;
  }
  const auto mix = sample_gauss_hermite(
      [](double t) { return (hermite_function(0, t) + cplx(0, 1) * hermite_function(2, t)) / std::sqrt(2.0); });
  EXPECT_LE(bargmann_identity_residual(mix, pts), 1e-6);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (int r = 0; r < 2; ++r) {
    std::vector<cplx> c(9);
    for (auto& x : c) x = cplx(nd(rng), nd(rng));
    const auto f = sample_gauss_hermite([&](double t) {
      cplx s{};
      for (unsigned k = 0; k < 9; ++k) s += c[k] * hermite_function(k, t);
      return s;
    });
    EXPECT_LE(bargmann_identity_residual(f, pts), 1e-6);
  }
}

TEST(BargmannIdentity, RejectsUnresolvedTail) {
  const auto f = sample_gauss_hermite([](double t) { return cplx(hermite_function(24, t)); });
  EXPECT_THROW(bargmann_identity_residual(f, grid5(), 24), invalid_input);
}

TEST(SignalCsv, RoundTripKeepsRule) {
  const auto f = sample_gauss_hermite([](double t) { return cplx(hermite_function(2, t), 0.5 * t); }, 33);
  std::stringstream ss;
  write_signal_csv(ss, f);
  const auto g = read_signal_csv(ss);
  EXPECT_EQ(g.rule(), QuadratureRule::gauss_hermite);
  ASSERT_EQ(g.size(), f.size());
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(g.values()[i], f.values()[i]);
  std::stringstream bad("t,re,im\n0,1\n");
  EXPECT_THROW(read_signal_csv(bad), parse_error);
}
