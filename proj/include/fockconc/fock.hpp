#pragma once

// Truncated functions of the Bargmann-Fock space F^2(C^d), expanded in the
// orthonormal monomial basis e_a(z) = (pi^|a| / a!)^{1/2} z^a.

#include <array>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "special.hpp"

namespace fockconc {

using MultiIndex = std::vector<unsigned>;

inline unsigned total_degree(const MultiIndex& a) {
  unsigned s = 0;
  for (unsigned v : a) s += v;
  return s;
}

/// A point of C^d.
struct ComplexPoint {
  std::vector<cplx> coords;

  ComplexPoint() = default;
  ComplexPoint(cplx z) : coords{z} {}  // NOLINT: implicit for the d = 1 case
  explicit ComplexPoint(std::vector<cplx> c) : coords(std::move(c)) {}

  unsigned dim() const { return static_cast<unsigned>(coords.size()); }
  double norm_sq() const {
    double s = 0.0;
    for (const cplx& c : coords) s += std::norm(c);
    return s;
  }
};

/// Truncated expansion sum_a c_a e_a. Immutable once built.
/// Storage is dense for d = 1 and a sparse map for d >= 2.
class FockFunction {
 public:
  FockFunction() : dim_(1), degree_(0), dense_{cplx{0.0}} {}

  unsigned dim() const { return dim_; }
  unsigned degree() const { return degree_; }

  /// Dense coefficients, d = 1 only.
  std::span<const cplx> coefficients() const {
    if (dim_ != 1) throw invalid_input("coefficients(): dense view only exists for d = 1");
    return dense_;
  }

  cplx coefficient(unsigned k) const { return k < dense_.size() && dim_ == 1 ? dense_[k] : cplx{}; }

  cplx coefficient(const MultiIndex& a) const {
    if (a.size() != dim_) throw invalid_input("coefficient(): multi-index has wrong dimension");
    if (dim_ == 1) return coefficient(a[0]);
    auto it = sparse_.find(a);
    return it == sparse_.end() ? cplx{} : it->second;
  }

  /// Calls fn(alpha, c_alpha) for every stored coefficient, in ascending total degree.
  template <class Fn>
  void for_each_term(Fn&& fn) const {
    if (dim_ == 1) {
      for (unsigned k = 0; k < dense_.size(); ++k) fn(MultiIndex{k}, dense_[k]);
      return;
    }
    for (const auto& [a, c] : ordered_) fn(a, c);
  }

  double norm_sq() const {
    compensated_sum<double> s;
    for_each_term([&](const MultiIndex&, cplx c) { s.add(std::norm(c)); });
    return s.value();
  }

  FockFunction scaled(cplx factor) const {
    FockFunction out = *this;
    for (cplx& c : out.dense_) c *= factor;
    for (auto& [a, c] : out.sparse_) c *= factor;
    for (auto& [a, c] : out.ordered_) c *= factor;
    return out;
  }

  /// F / ||F||; throws on the zero function.
  FockFunction normalized() const {
    const double n = std::sqrt(norm_sq());
    if (!(n > 0.0)) throw invalid_input("normalized(): zero function");
    return scaled(1.0 / n);
  }

  /// Complex derivative, d = 1: e_k' = sqrt(pi k) e_{k-1}.
  FockFunction derivative() const {
    if (dim_ != 1) throw invalid_input("derivative(): d = 1 only");
    FockFunction out;
    out.dense_.assign(std::max<std::size_t>(1, dense_.size() - 1), cplx{});
    for (unsigned k = 1; k < dense_.size(); ++k) out.dense_[k - 1] = dense_[k] * std::sqrt(pi * k);
    out.degree_ = static_cast<unsigned>(out.dense_.size() - 1);
    return out;
  }

  friend FockFunction make_fock(std::vector<cplx> coeffs);
  friend FockFunction make_fock(unsigned dim, const std::vector<std::pair<MultiIndex, cplx>>& coeffs);

 private:
  unsigned dim_;
  unsigned degree_;
  std::vector<cplx> dense_;
  std::map<MultiIndex, cplx> sparse_;
  std::vector<std::pair<MultiIndex, cplx>> ordered_;  // sparse_ in ascending total degree
};

/// d = 1 constructor: coeffs[k] multiplies e_k.
inline FockFunction make_fock(std::vector<cplx> coeffs) {
  if (coeffs.empty()) throw invalid_input("make_fock: empty coefficient list");
  for (std::size_t k = 0; k < coeffs.size(); ++k)
    if (!std::isfinite(coeffs[k].real()) || !std::isfinite(coeffs[k].imag()))
      throw invalid_input("make_fock: non-finite coefficient at index " + std::to_string(k));
  FockFunction f;
  f.dim_ = 1;
  f.degree_ = static_cast<unsigned>(coeffs.size() - 1);
  f.dense_ = std::move(coeffs);
  return f;
}

inline FockFunction make_fock(unsigned dim, const std::vector<std::pair<MultiIndex, cplx>>& coeffs) {
  if (dim < 1) throw invalid_input("make_fock: dimension must be >= 1");
  unsigned deg = 0;
  for (const auto& [a, c] : coeffs) {
    if (a.size() != dim) throw invalid_input("make_fock: multi-index length differs from dimension");
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      std::string loc;
      for (unsigned v : a) loc += (loc.empty() ? "" : ",") + std::to_string(v);
      throw invalid_input("make_fock: non-finite coefficient at index (" + loc + ")");
    }
    deg = std::max(deg, total_degree(a));
  }
  if (dim == 1) {
    std::vector<cplx> dense(deg + 1);
    for (const auto& [a, c] : coeffs) dense[a[0]] += c;
    return make_fock(std::move(dense));
  }
  FockFunction f;
  f.dim_ = dim;
  f.degree_ = deg;
  f.dense_.clear();
  for (const auto& [a, c] : coeffs) f.sparse_[a] += c;
  f.ordered_.assign(f.sparse_.begin(), f.sparse_.end());
  std::stable_sort(f.ordered_.begin(), f.ordered_.end(),
                   [](const auto& x, const auto& y) { return total_degree(x.first) < total_degree(y.first); });
  return f;
}

inline FockFunction constant_one(unsigned dim = 1) {
  return make_fock(dim, {{MultiIndex(dim, 0u), cplx{1.0}}});
}

/// The basis element e_k (d = 1).
inline FockFunction basis(unsigned k) {
  std::vector<cplx> c(k + 1);
  c[k] = 1.0;
  return make_fock(std::move(c));
}

namespace detail {
// e_0(z)..e_n(z) for a single coordinate, optionally multiplied by a common factor.
inline void basis_values(cplx z, unsigned n, std::vector<cplx>& out, double scale = 1.0) {
  out.resize(n + 1);
  out[0] = scale;
  for (unsigned k = 0; k < n; ++k) out[k + 1] = out[k] * (std::sqrt(pi / (k + 1)) * z);
}
}  // namespace detail

namespace detail {
// sum_k c_k e_k(z) with e_{k+1}(z) = e_k(z) sqrt(pi/(k+1)) z, accumulated in ascending degree.
inline cplx evaluate_dense(std::span<const cplx> c, cplx z) {
  cplx b = 1.0;
  compensated_sum<cplx> acc;
  for (unsigned k = 0; k < c.size(); ++k) {
    acc.add(c[k] * b);
    b *= std::sqrt(pi / (k + 1)) * z;
  }
  return acc.value();
}
}  // namespace detail

inline cplx evaluate(const FockFunction& f, const ComplexPoint& z) {
  if (z.dim() != f.dim()) throw invalid_input("evaluate: point dimension differs from function dimension");
  if (f.dim() == 1) return detail::evaluate_dense(f.coefficients(), z.coords[0]);
  thread_local std::vector<std::vector<cplx>> tables;
  tables.resize(f.dim());
  for (unsigned i = 0; i < f.dim(); ++i) detail::basis_values(z.coords[i], f.degree(), tables[i]);
  compensated_sum<cplx> acc;
  f.for_each_term([&](const MultiIndex& a, cplx c) {
    cplx b = c;
    for (unsigned i = 0; i < a.size(); ++i) b *= tables[i][a[i]];
    acc.add(b);
  });
  return acc.value();
}

inline cplx evaluate(const FockFunction& f, cplx z) {
  if (f.dim() != 1) throw invalid_input("evaluate: point dimension differs from function dimension");
  return detail::evaluate_dense(f.coefficients(), z);
}

/// u_F(z) = |F(z)|^2 e^{-pi |z|^2}.
inline double density(const FockFunction& f, const ComplexPoint& z) {
  return std::norm(evaluate(f, z)) * std::exp(-pi * z.norm_sq());
}

inline double density(const FockFunction& f, cplx z) { return std::norm(evaluate(f, z)) * std::exp(-pi * std::norm(z)); }

/// F, F', F'' at z (d = 1).
inline std::array<cplx, 3> evaluate_derivatives(std::span<const cplx> coeffs, cplx z) {
  const unsigned n = coeffs.empty() ? 0 : static_cast<unsigned>(coeffs.size() - 1);
  thread_local std::vector<cplx> b;
  detail::basis_values(z, n, b);
  compensated_sum<cplx> f0, f1, f2;
  for (unsigned k = 0; k <= n; ++k) {
    f0.add(coeffs[k] * b[k]);
    if (k >= 1) f1.add(coeffs[k] * std::sqrt(pi * k) * b[k - 1]);
    if (k >= 2) f2.add(coeffs[k] * std::sqrt(pi * k) * std::sqrt(pi * (k - 1)) * b[k - 2]);
  }
  return {f0.value(), f1.value(), f2.value()};
}

inline cplx inner(const FockFunction& f, const FockFunction& g) {
  if (f.dim() != g.dim()) throw invalid_input("inner: dimension mismatch");
  compensated_sum<cplx> acc;
  f.for_each_term([&](const MultiIndex& a, cplx c) { acc.add(c * std::conj(g.coefficient(a))); });
  return acc.value();
}

inline double norm(const FockFunction& f) { return std::sqrt(f.norm_sq()); }

namespace detail {
inline void enumerate_indices(unsigned dim, unsigned max_deg, MultiIndex& cur, unsigned pos, unsigned used,
                              std::vector<MultiIndex>& out) {
  if (pos + 1 == dim) {
    for (unsigned v = 0; v + used <= max_deg; ++v) {
      cur[pos] = v;
      out.push_back(cur);
    }
    return;
  }
  for (unsigned v = 0; v + used <= max_deg; ++v) {
    cur[pos] = v;
    enumerate_indices(dim, max_deg, cur, pos + 1, used + v, out);
  }
}
}  // namespace detail

/// All multi-indices of length dim with total degree <= max_deg.
inline std::vector<MultiIndex> multi_indices(unsigned dim, unsigned max_deg) {
  std::vector<MultiIndex> out;
  MultiIndex cur(dim, 0);
  detail::enumerate_indices(dim, max_deg, cur, 0, 0, out);
  return out;
}

/// Truncation of F_{z0}(z) = e^{-pi|z0|^2/2} e^{pi z . conj(z0)} without tail checks.
inline FockFunction kernel_coefficients(const ComplexPoint& z0, unsigned max_degree) {
  const unsigned d = z0.dim();
  const double g = std::exp(-0.5 * pi * z0.norm_sq());
  if (d == 1) {
    std::vector<cplx> c;
    detail::basis_values(std::conj(z0.coords[0]), max_degree, c, g);
    return make_fock(std::move(c));
  }
  std::vector<std::vector<cplx>> tables(d);
  for (unsigned i = 0; i < d; ++i) detail::basis_values(std::conj(z0.coords[i]), max_degree, tables[i]);
  std::vector<std::pair<MultiIndex, cplx>> terms;
  for (auto& a : multi_indices(d, max_degree)) {
    cplx c = g;
    for (unsigned i = 0; i < d; ++i) c *= tables[i][a[i]];
    terms.emplace_back(std::move(a), c);
  }
  return make_fock(d, terms);
}

/// Mass of F_{z0} beyond total degree max_degree: P(N+1, pi|z0|^2).
inline double kernel_tail_mass(const ComplexPoint& z0, unsigned max_degree) {
  return special::gamma_p(max_degree + 1, pi * z0.norm_sq());
}

/// Normalized reproducing-kernel element F_{z0}, truncated at max_degree.
inline FockFunction kernel_function(const ComplexPoint& z0, unsigned max_degree) {
  if (z0.dim() < 1) throw invalid_input("kernel_function: empty point");
  const double tail = kernel_tail_mass(z0, max_degree);
  if (tail > 1e-12) {
    unsigned need = max_degree;
    while (kernel_tail_mass(z0, need) > 1e-12) need += 4;
    throw invalid_input("kernel_function: truncated tail mass " + fmt17(tail) + " exceeds 1e-12; use max_degree >= " +
                        std::to_string(need));
  }
  return kernel_coefficients(z0, max_degree);
}

/// Smallest degree at which kernel_function(z0, .) is accepted.
inline unsigned kernel_degree_for(const ComplexPoint& z0) {
  unsigned n = 0;
  while (kernel_tail_mass(z0, n) > 1e-12) ++n;
  return n;
}

// ---- text format: "fock v1 d N" then "a_1 ... a_d re im" lines ----

inline void write_fock(std::ostream& os, const FockFunction& f) {
  os << "fock v1 " << f.dim() << ' ' << f.degree() << '\n';
  f.for_each_term([&](const MultiIndex& a, cplx c) {
    for (unsigned v : a) os << v << ' ';
    os << fmt17(c.real()) << ' ' << fmt17(c.imag()) << '\n';
  });
}

inline FockFunction read_fock(std::istream& is) {
  std::string magic, version;
  unsigned d = 0, n = 0;
  if (!(is >> magic >> version >> d >> n) || magic != "fock" || version != "v1")
    throw parse_error("fock file: expected header 'fock v1 d N'");
  if (d < 1) throw parse_error("fock file: dimension must be >= 1");
  std::vector<std::pair<MultiIndex, cplx>> terms;
  std::string line;
  std::getline(is, line);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    MultiIndex a(d);
    for (unsigned i = 0; i < d; ++i)
      if (!(ls >> a[i])) throw parse_error("fock file: bad multi-index on line " + std::to_string(lineno));
    std::string re_s, im_s;
    if (!(ls >> re_s >> im_s)) throw parse_error("fock file: missing coefficient on line " + std::to_string(lineno));
    double re = 0, im = 0;
    try {
      re = std::stod(re_s);
      im = std::stod(im_s);
    } catch (const std::exception&) {
      throw parse_error("fock file: unreadable coefficient on line " + std::to_string(lineno));
    }
    if (total_degree(a) > n) throw parse_error("fock file: index above declared degree on line " + std::to_string(lineno));
    terms.emplace_back(std::move(a), cplx(re, im));
  }
  if (terms.empty()) throw parse_error("fock file: no coefficients");
  if (d == 1) {
    std::vector<cplx> dense(n + 1);
    for (const auto& [a, c] : terms) dense[a[0]] += c;
    return make_fock(std::move(dense));
  }
  return make_fock(d, terms);
}

}  // namespace fockconc
