#pragma once

// Signal-side entry points (d = 1): Hermite expansion on sampled signals,
// the Bargmann transform as a coefficient map, and the Gaussian-window STFT.

#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "fock.hpp"
#include "special.hpp"

namespace fockconc {

enum class QuadratureRule { gauss_hermite, trapezoid, simpson };

inline std::string to_string(QuadratureRule r) {
  switch (r) {
    case QuadratureRule::gauss_hermite: return "gauss_hermite";
    case QuadratureRule::trapezoid: return "trapezoid";
    case QuadratureRule::simpson: return "simpson";
  }
  return "?";
}

inline QuadratureRule rule_from_string(const std::string& s) {
  if (s == "gauss_hermite") return QuadratureRule::gauss_hermite;
  if (s == "trapezoid") return QuadratureRule::trapezoid;
  if (s == "simpson") return QuadratureRule::simpson;
  throw invalid_input("unknown quadrature rule '" + s + "'");
}

/// Gauss-Hermite nodes/weights for integrals in t against the weight e^{-2 pi t^2}.
/// `scaled` weights integrate any g(t) directly: int g dt ~ sum scaled_i g(t_i).
inline special::hermite_rule gauss_hermite_t(unsigned n) {
  auto r = special::gauss_hermite(n);
  const double s = std::sqrt(2.0 * pi);
  for (unsigned i = 0; i < n; ++i) {
    r.nodes[i] /= s;
    r.weights[i] /= s;
    r.scaled[i] /= s;
  }
  return r;
}

/// A signal f in L^2(R) known at quadrature nodes.
class SampledSignal {
 public:
  SampledSignal(std::vector<double> nodes, std::vector<cplx> values, QuadratureRule rule)
      : nodes_(std::move(nodes)), values_(std::move(values)), rule_(rule) {
    if (nodes_.size() != values_.size()) throw invalid_input("SampledSignal: node/value count mismatch");
    if (nodes_.size() < 8) throw invalid_input("SampledSignal: at least 8 nodes required");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!std::isfinite(nodes_[i]) || !std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag()))
        throw invalid_input("SampledSignal: non-finite sample at index " + std::to_string(i));
      if (i > 0 && !(nodes_[i] > nodes_[i - 1])) throw invalid_input("SampledSignal: nodes must be strictly increasing");
    }
    if (rule_ == QuadratureRule::gauss_hermite) {
      const auto gh = gauss_hermite_t(static_cast<unsigned>(nodes_.size()));
      for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (std::abs(nodes_[i] - gh.nodes[i]) > 1e-9 * std::max(1.0, std::abs(gh.nodes[i])))
          throw invalid_input("SampledSignal: nodes are not the symmetric Gauss-Hermite nodes of this size");
      weights_ = gh.scaled;
    } else {
      const std::size_t n = nodes_.size();
      const double h = (nodes_.back() - nodes_.front()) / (n - 1);
      for (std::size_t i = 1; i < n; ++i)
        if (std::abs(nodes_[i] - nodes_[i - 1] - h) > 1e-9 * std::max(1.0, h))
          throw invalid_input("SampledSignal: trapezoid/simpson rules need uniform nodes");
      weights_.assign(n, h);
      if (rule_ == QuadratureRule::trapezoid) {
        weights_.front() = weights_.back() = 0.5 * h;
      } else {
        if (n % 2 == 0) throw invalid_input("SampledSignal: simpson rule needs an odd node count");
        for (std::size_t i = 0; i < n; ++i) weights_[i] = h / 3.0 * ((i == 0 || i + 1 == n) ? 1.0 : (i % 2 ? 4.0 : 2.0));
      }
    }
  }

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<cplx>& values() const { return values_; }
  const std::vector<double>& weights() const { return weights_; }
  QuadratureRule rule() const { return rule_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<double> nodes_;
  std::vector<cplx> values_;
  QuadratureRule rule_;
  std::vector<double> weights_;
};

/// Samples fn at the n Gauss-Hermite nodes (weight e^{-2 pi t^2}).
template <class Fn>
SampledSignal sample_gauss_hermite(Fn&& fn, unsigned n = 129) {
  auto gh = gauss_hermite_t(n);
  std::vector<cplx> v(n);
  for (unsigned i = 0; i < n; ++i) v[i] = fn(gh.nodes[i]);
  return SampledSignal(gh.nodes, std::move(v), QuadratureRule::gauss_hermite);
}

/// Samples fn on n uniform nodes spanning [a, b].
template <class Fn>
SampledSignal sample_uniform(Fn&& fn, double a, double b, unsigned n, QuadratureRule rule) {
  std::vector<double> t(n);
  std::vector<cplx> v(n);
  for (unsigned i = 0; i < n; ++i) {
    t[i] = a + (b - a) * i / (n - 1);
    v[i] = fn(t[i]);
  }
  return SampledSignal(std::move(t), std::move(v), rule);
}

/// L^2-normalized Hermite functions h_0..h_n at t, in the normalization for which
/// the Bargmann transform sends h_k to e_k: h_k(t) = (2 pi)^{1/4} psi_k(sqrt(2 pi) t).
inline void hermite_values(double t, unsigned n, std::vector<double>& out) {
  special::hermite_functions(std::sqrt(2.0 * pi) * t, n + 1, out);
  const double s = std::pow(2.0 * pi, 0.25);
  for (double& v : out) v *= s;
}

inline double hermite_function(unsigned k, double t) {
  std::vector<double> v;
  hermite_values(t, k, v);
  return v[k];
}

/// The Gaussian window 2^{1/4} e^{-pi x^2}.
inline double gaussian_window(double x) { return std::pow(2.0, 0.25) * std::exp(-pi * x * x); }

struct HermiteExpansion {
  std::vector<cplx> coeffs;
  double tail_ratio = 0.0;  ///< |c_N|^2 / sum |c_k|^2

  double norm_sq() const {
    compensated_sum<double> s;
    for (const cplx& c : coeffs) s.add(std::norm(c));
    return s.value();
  }
};

/// c_k = <f, h_k> by the signal's quadrature rule, k = 0..max_degree.
inline HermiteExpansion hermite_expand(const SampledSignal& f, unsigned max_degree) {
  if (f.size() < 2 * static_cast<std::size_t>(max_degree) + 1)
    throw invalid_input("hermite_expand: need at least 2N+1 nodes for N = " + std::to_string(max_degree));
  std::vector<compensated_sum<cplx>> acc(max_degree + 1);
  std::vector<double> h;
  for (std::size_t i = 0; i < f.size(); ++i) {
    hermite_values(f.nodes()[i], max_degree, h);
    for (unsigned k = 0; k <= max_degree; ++k) {
      if (!std::isfinite(h[k]))
        throw numerical_failure("hermite_expand: Hermite recurrence overflow at k = " + std::to_string(k));
      acc[k].add(f.weights()[i] * h[k] * f.values()[i]);
    }
  }
  HermiteExpansion e;
  e.coeffs.resize(max_degree + 1);
  for (unsigned k = 0; k <= max_degree; ++k) e.coeffs[k] = acc[k].value();
  const double total = e.norm_sq();
  e.tail_ratio = total > 0.0 ? std::norm(e.coeffs.back()) / total : 0.0;
  return e;
}

/// Bargmann transform on coefficients: h_k -> e_k. Unitary by construction.
inline FockFunction bargmann(const HermiteExpansion& e) { return make_fock(e.coeffs); }

namespace detail {
inline void require_decay(const SampledSignal& f) {
  double peak = 0.0;
  for (const cplx& v : f.values()) peak = std::max(peak, std::abs(v));
  const double edge = std::max(std::abs(f.values().front()), std::abs(f.values().back()));
  if (edge > 1e-12 * std::max(peak, 1e-300))
    throw invalid_input("stft_gaussian: signal does not decay below 1e-12 at the node extremes; widen the node window");
}
}  // namespace detail

/// V f(x, w) = int e^{-2 pi i t w} f(t) phi(x - t) dt with the Gaussian window phi.
inline cplx stft_gaussian(const SampledSignal& f, double x, double omega) {
  detail::require_decay(f);
  compensated_sum<cplx> acc;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double t = f.nodes()[i];
    acc.add(f.weights()[i] * std::polar(1.0, -2.0 * pi * t * omega) * f.values()[i] * gaussian_window(x - t));
  }
  return acc.value();
}

/// max over points of | |V f(x,-w)| - |B f(x+iw)| e^{-pi(x^2+w^2)/2} |.
inline double bargmann_identity_residual(const SampledSignal& f, const std::vector<std::pair<double, double>>& points,
                                         unsigned max_degree = 24) {
  detail::require_decay(f);
  const HermiteExpansion e = hermite_expand(f, max_degree);
  if (e.tail_ratio > 1e-10)
    throw invalid_input("bargmann_identity_residual: Hermite tail " + fmt17(e.tail_ratio) + " exceeds 1e-10");
  const FockFunction F = bargmann(e);
  double worst = 0.0;
  for (const auto& [x, w] : points) {
    const double lhs = std::abs(stft_gaussian(f, x, -w));
    const double rhs = std::abs(evaluate(F, cplx(x, w))) * std::exp(-0.5 * pi * (x * x + w * w));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

// ---- CSV: optional "# rule=<tag>" line, optional "t,re,im" header, then rows ----

inline void write_signal_csv(std::ostream& os, const SampledSignal& f) {
  os << "# rule=" << to_string(f.rule()) << "\n" << "t,re,im\n";
  for (std::size_t i = 0; i < f.size(); ++i)
    os << fmt17(f.nodes()[i]) << ',' << fmt17(f.values()[i].real()) << ',' << fmt17(f.values()[i].imag()) << '\n';
}

inline SampledSignal read_signal_csv(std::istream& is) {
  std::vector<double> t;
  std::vector<cplx> v;
  std::string line, rule_tag;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("rule=");
      if (pos != std::string::npos) rule_tag = line.substr(pos + 5);
      continue;
    }
    if (line.rfind("t,", 0) == 0) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
      throw parse_error("signal csv: expected 't,re,im' on line " + std::to_string(lineno));
    try {
      t.push_back(std::stod(a));
      v.emplace_back(std::stod(b), std::stod(c));
    } catch (const std::exception&) {
      throw parse_error("signal csv: unreadable number on line " + std::to_string(lineno));
    }
  }
  if (t.size() < 8) throw parse_error("signal csv: fewer than 8 samples");
  QuadratureRule rule;
  if (!rule_tag.empty()) {
    rule = rule_from_string(rule_tag);
  } else {
    const auto gh = gauss_hermite_t(static_cast<unsigned>(t.size()));
    bool is_gh = true;
    for (std::size_t i = 0; i < t.size() && is_gh; ++i) is_gh = std::abs(t[i] - gh.nodes[i]) < 1e-9;
    rule = is_gh ? QuadratureRule::gauss_hermite
                 : (t.size() % 2 ? QuadratureRule::simpson : QuadratureRule::trapezoid);
  }
  return SampledSignal(std::move(t), std::move(v), rule);
}

}  // namespace fockconc
