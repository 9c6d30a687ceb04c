#pragma once

// Rasterized geometry in the plane: square grids of cells, sampled densities
// and region masks. The rasterized measure (cell count x cell area) is treated
// as exact throughout.

#include <bit>
#include <cstdint>
#include <cstring>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "common.hpp"
#include "fock.hpp"
#include "special.hpp"

namespace fockconc {

/// Square window [cx-R, cx+R] x [cy-R, cy+R] split into n x n cells.
/// Cell (i, j) is row i (y ascending), column j (x ascending); flat index i*n + j.
struct GridSpec {
  double half_width = 4.0;
  unsigned n = 1024;
  cplx center{0.0, 0.0};

  GridSpec() = default;
  GridSpec(double r, unsigned cells, cplx c = {}) : half_width(r), n(cells), center(c) { validate(); }

  void validate() const {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw invalid_input("GridSpec: half-width must be positive");
    if (n < 64) throw invalid_input("GridSpec: resolution must be >= 64");
    if (!std::isfinite(center.real()) || !std::isfinite(center.imag())) throw invalid_input("GridSpec: bad center");
  }

  double cell_side() const { return 2.0 * half_width / n; }
  double cell_area() const { return cell_side() * cell_side(); }
  double window_area() const { return 4.0 * half_width * half_width; }
  std::size_t cell_count() const { return static_cast<std::size_t>(n) * n; }

  cplx cell_center(unsigned i, unsigned j) const {
    const double h = cell_side();
    return {center.real() - half_width + (j + 0.5) * h, center.imag() - half_width + (i + 0.5) * h};
  }
  cplx cell_center(std::size_t flat) const { return cell_center(static_cast<unsigned>(flat / n), static_cast<unsigned>(flat % n)); }

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.n == b.n && a.half_width == b.half_width && a.center == b.center;
  }
};

/// Default window half-width for a degree-N function and largest requested measure s_max.
inline double default_radius(unsigned degree, double s_max) {
  return std::ceil(std::sqrt((degree + s_max + 30.0) / pi));
}

/// Mass of u_F outside the disc of radius r about the origin (exact, by
/// orthogonality of monomials on annuli): sum_k |a_k|^2 Q(k+1, pi r^2).
inline double outside_disc_mass(const FockFunction& f, double r) {
  if (r <= 0.0) return f.norm_sq();
  compensated_sum<double> s;
  const auto c = f.coefficients();
  for (unsigned k = 0; k < c.size(); ++k)
    if (c[k] != cplx{}) s.add(std::norm(c[k]) * special::gamma_q(k + 1, pi * r * r));
  return s.value();
}

struct DensityGrid {
  GridSpec spec;
  std::vector<double> values;       ///< u_F at cell centers, row-major
  double tail_mass = 0.0;           ///< upper bound of the mass outside the window
  double norm_sq = 0.0;             ///< ||F||^2 of the source
  std::optional<FockFunction> source;

  double at(unsigned i, unsigned j) const { return values[static_cast<std::size_t>(i) * spec.n + j]; }

  double total_mass() const {
    compensated_sum<double> s;
    for (double v : values) s.add(v);
    return s.value() * spec.cell_area();
  }
};

/// Samples u_F at cell centers. Fails if the analytic tail bound exceeds 1e-6 ||F||^2.
inline DensityGrid sample_density(const FockFunction& f, const GridSpec& g) {
  g.validate();
  if (f.dim() != 1) throw invalid_input("sample_density: grids are two-dimensional, d must be 1");
  DensityGrid out;
  out.spec = g;
  out.norm_sq = f.norm_sq();
  out.source = f;
  out.tail_mass = outside_disc_mass(f, g.half_width - std::abs(g.center));
  if (out.tail_mass > 1e-6 * out.norm_sq) {
    double r = g.half_width;
    while (outside_disc_mass(f, r - std::abs(g.center)) > 1e-6 * out.norm_sq) r += 0.25;
    throw invalid_input("sample_density: tail mass " + fmt17(out.tail_mass) + " too heavy for R = " +
                        fmt17(g.half_width) + "; use R >= " + fmt17(r));
  }
  out.values.assign(g.cell_count(), 0.0);
  parallel_for(g.n, [&](std::size_t i) {
    for (unsigned j = 0; j < g.n; ++j) out.values[i * g.n + j] = density(f, g.cell_center(static_cast<unsigned>(i), j));
  });
  return out;
}

/// A rasterized set: a cell belongs to the set iff its center does.
struct RegionMask {
  GridSpec spec;
  std::vector<std::uint8_t> cells;

  std::size_t count() const {
    std::size_t c = 0;
    for (auto v : cells) c += v;
    return c;
  }
  double measure() const { return count() * spec.cell_area(); }
  bool contains(std::size_t flat) const { return cells[flat] != 0; }
};

inline RegionMask mask_from_predicate(const GridSpec& g, const std::function<bool(cplx)>& inside) {
  g.validate();
  RegionMask m{g, std::vector<std::uint8_t>(g.cell_count(), 0)};
  parallel_for(g.n, [&](std::size_t i) {
    for (unsigned j = 0; j < g.n; ++j) m.cells[i * g.n + j] = inside(g.cell_center(static_cast<unsigned>(i), j)) ? 1 : 0;
  });
  return m;
}

inline RegionMask disc_mask(const GridSpec& g, cplx center, double area) {
  const double r2 = area / pi;
  return mask_from_predicate(g, [=](cplx z) { return std::norm(z - center) < r2; });
}

/// Ellipse with semi-axes a (rotated by `angle` from the x-axis) and b.
inline RegionMask ellipse_mask(const GridSpec& g, cplx center, double a, double b, double angle = 0.0) {
  const cplx rot = std::polar(1.0, -angle);
  return mask_from_predicate(g, [=](cplx z) {
    const cplx w = (z - center) * rot;
    return (w.real() * w.real()) / (a * a) + (w.imag() * w.imag()) / (b * b) < 1.0;
  });
}

inline RegionMask rectangle_mask(const GridSpec& g, cplx center, double width, double height) {
  return mask_from_predicate(g, [=](cplx z) {
    return std::abs(z.real() - center.real()) < 0.5 * width && std::abs(z.imag() - center.imag()) < 0.5 * height;
  });
}

inline void require_same_spec(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw invalid_input(std::string(what) + ": grid specifications differ");
}

// ---- binary grid file: "grid v1 n R cx cy\n" then n^2 little-endian float64 ----

namespace detail {
inline std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
    return r;
  }
  return v;
}

inline GridSpec read_spec_header(std::istream& is, const std::string& magic) {
  std::string m, ver, line;
  if (!std::getline(is, line)) throw parse_error(magic + " file: missing header");
  std::istringstream hs(line);
  unsigned n = 0;
  double r = 0, cx = 0, cy = 0;
  if (!(hs >> m >> ver >> n >> r >> cx >> cy) || m != magic || ver != "v1")
    throw parse_error(magic + " file: expected header '" + magic + " v1 n R cx cy'");
  try {
    return GridSpec(r, n, {cx, cy});
  } catch (const invalid_input& e) {
    throw parse_error(magic + " file: " + e.what());
  }
}

inline void write_spec_header(std::ostream& os, const std::string& magic, const GridSpec& g) {
  os << magic << " v1 " << g.n << ' ' << fmt17(g.half_width) << ' ' << fmt17(g.center.real()) << ' '
     << fmt17(g.center.imag()) << '\n';
}
}  // namespace detail

inline void write_grid(std::ostream& os, const DensityGrid& g) {
  detail::write_spec_header(os, "grid", g.spec);
  for (double v : g.values) {
    const std::uint64_t bits = detail::to_le(std::bit_cast<std::uint64_t>(v));
    char buf[8];
    std::memcpy(buf, &bits, 8);
    os.write(buf, 8);
  }
}

/// Reads a grid file. The result carries no source function, so analytic
/// refinements downstream fall back to grid values.
inline DensityGrid read_grid(std::istream& is) {
  DensityGrid g;
  g.spec = detail::read_spec_header(is, "grid");
  g.values.resize(g.spec.cell_count());
  for (double& v : g.values) {
    char buf[8];
    if (!is.read(buf, 8)) throw parse_error("grid file: truncated payload");
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    v = std::bit_cast<double>(detail::to_le(bits));
    if (!(v >= 0.0) || !std::isfinite(v)) throw parse_error("grid file: negative or non-finite density value");
  }
  g.norm_sq = g.total_mass();
  return g;
}

// ---- mask text file: "mask v1 n R cx cy" then n rows of '0'/'1' ----

inline void write_mask(std::ostream& os, const RegionMask& m) {
  detail::write_spec_header(os, "mask", m.spec);
  std::string row(m.spec.n, '0');
  for (unsigned i = 0; i < m.spec.n; ++i) {
    for (unsigned j = 0; j < m.spec.n; ++j) row[j] = m.cells[static_cast<std::size_t>(i) * m.spec.n + j] ? '1' : '0';
    os << row << '\n';
  }
}

inline RegionMask read_mask(std::istream& is) {
  RegionMask m;
  m.spec = detail::read_spec_header(is, "mask");
  m.cells.assign(m.spec.cell_count(), 0);
  std::string row;
  for (unsigned i = 0; i < m.spec.n; ++i) {
    if (!std::getline(is, row)) throw parse_error("mask file: expected " + std::to_string(m.spec.n) + " rows");
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.size() != m.spec.n) throw parse_error("mask file: row " + std::to_string(i) + " has wrong length");
    for (unsigned j = 0; j < m.spec.n; ++j) {
      if (row[j] != '0' && row[j] != '1') throw parse_error("mask file: row " + std::to_string(i) + " has a non 0/1 character");
      m.cells[static_cast<std::size_t>(i) * m.spec.n + j] = row[j] == '1';
    }
  }
  return m;
}

}  // namespace fockconc
