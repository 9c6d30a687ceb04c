#pragma once

// Property suites run by `fockconc verify`. Each check names the property it
// guards; counts scale with VerifyOptions::scale.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "concentration.hpp"
#include "fock.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "highdim.hpp"
#include "properties.hpp"
#include "report.hpp"
#include "stability.hpp"
#include "transforms.hpp"

namespace fockconc {

struct VerifyOptions {
  std::uint64_t seed = 1;
  double scale = 1.0;
  std::set<std::string> only;  ///< suite or check names; empty runs everything
  std::map<std::string, double> tol;
  std::function<double(unsigned, double)> v_coefficient = fockconc::v_coefficient;  ///< replaceable for fault injection
};

struct CheckResult {
  std::string suite;
  std::string name;
  std::string property;
  bool passed = false;
  double value = 0.0;  ///< the worst observed margin or statistic
  std::string detail;
  double seconds = 0.0;
};

/// Default tolerances, overridable by name.
inline std::map<std::string, double> default_tolerances() {
  return {{"equality", 2e-3},   {"kern", 1e-4},      {"bargmann", 1e-6}, {"vk", 1e-10},
          {"negdef", 1e-12},    {"lambda_disc", 1e-3}, {"lambda_mass", 1e-4}, {"sharpness", 0.1},
          {"slope", 0.05},      {"fk_d", 1e-10},     {"horner", 1e-12}};
}

inline std::vector<std::string> verify_suites() {
  return {"fock_core", "transforms", "concentration", "geometry", "stability", "highdim"};
}

namespace detail {
struct verify_ctx {
  const VerifyOptions& opt;
  std::map<std::string, double> tol;
  std::vector<CheckResult> out;

  std::size_t count(double base) const { return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(base * opt.scale))); }

  bool wanted(const std::string& suite, const std::string& name) const {
    return opt.only.empty() || opt.only.count(suite) || opt.only.count(name);
  }

  // fn fills passed/value/detail
  void run(const std::string& suite, const std::string& name, const std::string& property,
           const std::function<void(CheckResult&)>& fn) {
    if (!wanted(suite, name)) return;
    CheckResult r;
    r.suite = suite;
    r.name = name;
    r.property = property;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(r);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(r));
  }
};

inline void suite_fock_core(verify_ctx& c) {
  c.run("fock_core", "horner", "monomial evaluation against the explicit power series", [&](CheckResult& r) {
    std::mt19937_64 rng(c.opt.seed);
    std::uniform_real_distribution<double> uz(-2.0, 2.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < c.count(20); ++i) {
      const auto f = random_polynomial(rng, 12);
      const cplx z(uz(rng), uz(rng));
      cplx ref{};
      for (unsigned k = 0; k <= f.degree(); ++k)
        ref += f.coefficient(k) * std::sqrt(std::pow(pi, k) / std::tgamma(k + 1.0)) * std::pow(z, static_cast<int>(k));
      worst = std::max(worst, std::abs(evaluate(f, z) - ref) / std::max(1.0, std::abs(ref)));
    }
    r.value = worst;
    r.passed = worst <= c.tol.at("horner");
  });
  c.run("fock_core", "reproducing_kernel", "F(z0) e^{-pi|z0|^2/2} = <F, F_z0>", [&](CheckResult& r) {
    std::mt19937_64 rng(c.opt.seed + 1);
    std::uniform_real_distribution<double> uz(-1.5, 1.5);
    double worst = 0.0;
    for (std::size_t i = 0; i < c.count(20); ++i) {
      const auto f = random_polynomial(rng, 8);
      const cplx z0(uz(rng), uz(rng));
      const auto k = kernel_function(z0, kernel_degree_for(z0));
      const cplx lhs = evaluate(f, z0) * std::exp(-0.5 * pi * std::norm(z0));
      worst = std::max(worst, std::abs(lhs - inner(f, k)));
    }
    r.value = worst;
    r.passed = worst <= 1e-10;
  });
  c.run("fock_core", "io_roundtrip", "fock v1 text format round trip is exact", [&](CheckResult& r) {
    std::mt19937_64 rng(c.opt.seed + 2);
    bool ok = true;
    for (std::size_t i = 0; i < c.count(10); ++i) {
      const auto f = random_polynomial(rng, 8);
      std::stringstream ss;
      write_fock(ss, f);
      const auto g = read_fock(ss);
      for (unsigned k = 0; k <= f.degree(); ++k) ok = ok && g.coefficient(k) == f.coefficient(k);
    }
    r.value = ok ? 0.0 : 1.0;
    r.passed = ok;
  });
}

inline void suite_transforms(verify_ctx& c) {
  c.run("transforms", "bargmann_identity", "|V f(x,-w)| = |B f(x+iw)| e^{-pi|z|^2/2} on the Hermite battery",
        [&](CheckResult& r) {
          double worst = 0.0;
          for (const auto& f : hermite_battery(c.opt.seed)) worst = std::max(worst, bargmann_identity_residual(f, identity_points()));
          r.value = worst;
          r.passed = worst <= c.tol.at("bargmann");
        });
  c.run("transforms", "unitarity", "Bargmann transform preserves the norm of Hermite expansions", [&](CheckResult& r) {
    double worst = 0.0;
    for (const auto& f : hermite_battery(c.opt.seed)) {
      const auto e = hermite_expand(f, 24);
      worst = std::max(worst, std::abs(bargmann(e).norm_sq() - e.norm_sq()));
    }
    r.value = worst;
    r.passed = worst <= 1e-14;
  });
}

inline void suite_concentration(verify_ctx& c) {
  c.run("concentration", "equality_case", "the Gaussian on a centered disc has zero deficit", [&](CheckResult& r) {
    const GridSpec g(4.0, 1024);
    const auto grid = sample_density(constant_one(), g);
    double worst = 0.0;
    for (double s : {0.5, 1.0, 2.0}) worst = std::max(worst, std::abs(deficit(grid, disc_mask(g, 0.0, s)).deficit));
    r.value = worst;
    r.passed = worst <= c.tol.at("equality");
  });
  c.run("concentration", "fk_inequality", "int_Omega u <= (1 - e^{-|Omega|}) ||F||^2", [&](CheckResult& r) {
    std::mt19937_64 rng(c.opt.seed + 10);
    const GridSpec g(4.0, 256);
    double worst = std::numeric_limits<double>::infinity();
    std::size_t bad = 0;
    for (std::size_t i = 0; i < c.count(200); ++i) {
      const auto f = random_polynomial(rng, 8);
      const auto m = random_mask(rng, g);
      const auto rep = deficit(f, m);
      worst = std::min(worst, rep.deficit + rep.quad_err);
      bad += rep.violation;
    }
    r.value = worst;
    r.passed = bad == 0;
    r.detail = std::to_string(bad) + " violations";
  });
  std::vector<ConcentrationProfile> profiles;
  auto ensure_profiles = [&] {
    if (!profiles.empty()) return;
    for (const auto& f : function_battery(c.opt.seed + 20, c.count(20)))
      profiles.push_back(profile(sample_density(f, GridSpec(default_radius(f.degree(), 4.0), 512))));
  };
  c.run("concentration", "rearrangement",
        "e^s u*(s) nondecreasing, G(sigma) convex, I(s) <= ||F||^2 (1 - e^{-s}), one crossing of u* and e^{-s}",
        [&](CheckResult& r) {
          ensure_profiles();
          double worst = std::numeric_limits<double>::infinity();
          std::size_t bad = 0;
          for (const auto& p : profiles) {
            const auto m = rearrangement_margins(p);
            worst = std::min({worst, m.ratio_worst, m.convexity_worst, m.excess_worst});
            bad += !m.passed;
          }
          r.value = worst;
          r.passed = bad == 0;
          r.detail = std::to_string(bad) + " failing functions";
        });
  c.run("concentration", "sandwich", "(1-T)^2/2 <= int_0^{s*} (e^{-s} - u*) <= delta_{s0} e^{s0}", [&](CheckResult& r) {
    ensure_profiles();
    double worst = std::numeric_limits<double>::infinity(), ratio = 0.0;
    std::size_t bad = 0;
    for (const auto& p : profiles)
      for (double s0 : {0.5, 1.0, 2.0}) {
        const auto m = sandwich_margins(p, s0);
        worst = std::min({worst, m.lower_margin, m.upper_margin});
        if (!m.bounds.degenerate) ratio = std::max(ratio, m.bounds.reinforced_ratio);
        bad += !m.passed;
      }
    r.value = worst;
    r.passed = bad == 0 && std::isfinite(ratio);
    r.detail = "max reinforced ratio " + fmt17(ratio);
  });
}

inline void suite_geometry(verify_ctx& c) {
  c.run("geometry", "disc_asymmetry", "A(disc) = 0 up to the boundary-cell slack", [&](CheckResult& r) {
    const GridSpec g(4.0, 512);
    double worst = -std::numeric_limits<double>::infinity();
    for (double s : {0.5, 1.0, 2.0}) {
      const auto a = fraenkel_asymmetry(disc_mask(g, cplx(0.3, -0.2), s));
      worst = std::max(worst, a.A - a.slack);
    }
    r.value = worst;
    r.passed = worst <= 0.0;
  });
  c.run("geometry", "far_discs", "two far-apart equal discs have A = 1", [&](CheckResult& r) {
    const GridSpec g(6.0, 1024);
    auto m = disc_mask(g, cplx(-5.0, 0.0), 0.5);
    const auto b = disc_mask(g, cplx(5.0, 0.0), 0.5);
    for (std::size_t k = 0; k < m.cells.size(); ++k) m.cells[k] |= b.cells[k];
    const auto a = fraenkel_asymmetry(m);
    r.value = std::abs(a.A - 1.0);
    r.passed = r.value <= a.slack;
  });
  c.run("geometry", "level_set_shape", "super-level sets of F_eps are star-shaped and convex", [&](CheckResult& r) {
    double worst = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (double eps : {0.01, 0.02, 0.05}) {
      const auto f = perturbed_gaussian(eps);
      const auto g = sample_density(f, GridSpec(4.0, 256));
      const auto peak = global_max(g);
      // levels in [0.8 T, 0.99 T] plus the levels enclosing measure 0.5, 1, 2
      std::vector<double> levels{0.8 * peak.value, 0.9 * peak.value, 0.99 * peak.value};
      const auto p = profile(g);
      for (double s : {0.5, 1.0, 2.0}) levels.push_back(p.u_star(s));
      for (double level : levels) {
        const auto bg = boundary_graph(f, level, peak.location, 128, 3.5);
        const auto sh = shape_checks(bg);
        ok = ok && sh.star_shaped && sh.convex;
        worst = std::min(worst, sh.min_turn);
      }
    }
    r.value = worst;
    r.passed = ok;
  });
  c.run("geometry", "radial_monotonicity", "u decreases along rays from the peak for F_eps", [&](CheckResult& r) {
    bool ok = true;
    for (double eps : {0.005, 0.01, 0.02}) {
      const auto f = perturbed_gaussian(eps);
      const auto peak = global_max(f, GridSpec(4.0, 256));
      ok = ok && radially_decreasing(f, peak.location, 0.2 * std::sqrt(std::log(1.0 / eps)));
    }
    r.value = ok ? 0.0 : 1.0;
    r.passed = ok;
  });
}

inline void suite_stability(verify_ctx& c) {
  c.run("stability", "kern", "min ||F - c F_z0||^2 = 2(1 - sqrt T)", [&](CheckResult& r) {
    double worst = 0.0;
    for (const auto& f : function_battery(c.opt.seed + 20, c.count(20))) {
      const auto d = gaussian_distance(f);
      worst = std::max(worst, std::abs(d.closed - d.direct) / std::max(d.closed, 1e-6));
    }
    r.value = worst;
    r.passed = worst <= c.tol.at("kern");
  });
  c.run("stability", "vk_oracle", "closed-form V_k(s) equals its defining integrals", [&](CheckResult& r) {
    double worst = 0.0;
    for (unsigned k = 2; k <= 12; ++k)
      for (double s : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        const double a = c.opt.v_coefficient(k, s), b = v_coefficient_oracle(k, s);
        worst = std::max(worst, std::abs(a - b) / std::abs(b));
      }
    r.value = worst;
    r.passed = worst <= c.tol.at("vk");
  });
  c.run("stability", "negdef", "second variation <= -s e^{-s} ||G||^2, equality only on e_2", [&](CheckResult& r) {
    std::mt19937_64 rng(c.opt.seed + 30);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> us(0.05, 5.0);
    double worst = -std::numeric_limits<double>::infinity();
    bool strict = true;
    for (std::size_t i = 0; i < c.count(200); ++i) {
      std::vector<cplx> a(11);
      for (unsigned k = 2; k <= 10; ++k) a[k] = cplx(nd(rng), nd(rng));
      const auto G = make_fock(a).normalized();
      const double s = us(rng);
      const double m = second_variation(G, s, c.opt.v_coefficient) + s * std::exp(-s) * G.norm_sq();
      worst = std::max(worst, m);
      strict = strict && m < 0.0;
    }
    for (double s : {0.5, 1.0, 2.0}) {
      const double eq = second_variation(basis(2), s, c.opt.v_coefficient) + s * std::exp(-s);
      worst = std::max(worst, std::abs(eq));
    }
    r.value = worst;
    r.passed = worst <= c.tol.at("negdef") && strict;
  });
  c.run("stability", "function_stability", "distance <= C sqrt(e^{|Omega|} delta) with one finite C", [&](CheckResult& r) {
    std::mt19937_64 rng(c.opt.seed + 40);
    const GridSpec g(4.0, 512);
    double cmax = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < c.count(10); ++i) {
      const auto f = random_perturbation(rng, 6, 0.2);
      const auto grid = sample_density(f, g);
      auto [mask, d] = superlevel_mask(grid, 1.0);
      const auto rep = stability_report(f, mask);
      if (rep.deficit > 10.0 * rep.quad_err) {
        cmax = std::max(cmax, rep.ratio);
        ++used;
      }
    }
    r.value = cmax;
    r.passed = used > 0 && std::isfinite(cmax);
    r.detail = "empirical C over " + std::to_string(used) + " instances";
  });
  c.run("stability", "sharpness", "delta (1 - e^{-s}) / eps^2 -> 2 s e^{-s} / pi^2 and distance ~ delta^{1/2}",
        [&](CheckResult& r) {
          const auto sw = sharpness_sweep(1.0, {0.05, 0.035, 0.025, 0.0175});
          const double rel = std::abs(sw.limit - sw.target) / sw.target;
          r.value = rel;
          r.passed = rel <= c.tol.at("sharpness") && std::abs(sw.slope - 0.5) <= c.tol.at("slope");
          r.detail = "limit " + fmt17(sw.limit) + ", slope " + fmt17(sw.slope);
        });
  c.run("stability", "lambda_bound", "lambda_1(Omega) <= 1 - e^{-|Omega|}", [&](CheckResult& r) {
    std::mt19937_64 rng(c.opt.seed + 50);
    const GridSpec g(4.0, 256);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.count(20); ++i) {
      const auto m = random_mask(rng, g);
      const auto e = top_eigenpair(localization_matrix(m, 24));
      const double bound = fk_bound(m.measure());
      const double err = deficit(e.f, m).quad_err * bound;
      worst = std::min(worst, bound + err - e.lambda);
    }
    r.value = worst;
    r.passed = worst >= 0.0;
  });
  c.run("stability", "lambda_disc", "the centered disc has lambda_1 = 1 - e^{-1} with Gaussian eigenfunction",
        [&](CheckResult& r) {
          const GridSpec g(4.0, 1024);
          const auto e = top_eigenpair(localization_matrix(disc_mask(g, 0.0, 1.0), 24));
          const double err = std::abs(e.lambda - fk_bound(1.0));
          const double outside = 1.0 - std::norm(e.f.coefficient(0));
          r.value = err;
          r.passed = err <= c.tol.at("lambda_disc") && outside <= c.tol.at("lambda_mass");
          r.detail = "mass outside e_0: " + fmt17(outside);
        });
}

inline void suite_highdim(verify_ctx& c) {
  c.run("highdim", "fk_bound_d", "closed-form d-dimensional bound equals its integral; d = 1 reduces",
        [&](CheckResult& r) {
          double worst = 0.0;
          for (unsigned d = 1; d <= 3; ++d)
            for (double a : {0.1, 0.5, 1.0, 2.0, 5.0}) worst = std::max(worst, std::abs(fk_bound_d(a, d) - fk_bound_d_quadrature(a, d)));
          for (double a : {0.1, 1.0, 3.0}) worst = std::max(worst, std::abs(fk_bound_d(a, 1) - fk_bound(a)));
          r.value = worst;
          r.passed = worst <= c.tol.at("fk_d");
        });
  c.run("highdim", "e_star_shape", "e*(s) decreasing and convex", [&](CheckResult& r) {
    bool ok = true;
    for (unsigned d = 1; d <= 3; ++d)
      for (int j = 1; j < 400; ++j) {
        const double h = 0.01, s = j * h;
        const double a = e_star(s - h, d), b = e_star(s, d), e = e_star(s + h, d);
        ok = ok && b < a && a - 2.0 * b + e >= -1e-15;
      }
    r.value = ok ? 0.0 : 1.0;
    r.passed = ok;
  });
  c.run("highdim", "gaussian_ball", "Gaussian on a centered ball has zero deficit (d = 2, 3)", [&](CheckResult& r) {
    double worst = 0.0;
    bool ok = true;
    for (unsigned d = 2; d <= 3; ++d) {
      MCSpec mc;
      mc.samples = c.count(200000);
      mc.seed = c.opt.seed;
      const auto rep = deficit_d(constant_one(d), centered_ball(d, 2.0), mc);
      worst = std::max(worst, std::abs(rep.deficit) / rep.stderr_);
      ok = ok && std::abs(rep.deficit) <= rep.three_sigma();
    }
    r.value = worst;
    r.passed = ok;
    r.detail = "worst |delta| in standard errors";
  });
  c.run("highdim", "fk_d", "int_Omega u <= ||F||^2 fk_bound_d(|Omega|) within 3 sigma", [&](CheckResult& r) {
    std::mt19937_64 rng(c.opt.seed + 60);
    std::normal_distribution<double> nd(0.0, 1.0);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.count(4); ++i) {
      const unsigned d = 2 + static_cast<unsigned>(i % 2);
      std::vector<std::pair<MultiIndex, cplx>> terms{{MultiIndex(d, 0), 1.0}};
      for (const auto& a : multi_indices(d, 2))
        if (total_degree(a) > 0) terms.emplace_back(a, 0.1 * cplx(nd(rng), nd(rng)));
      const auto f = make_fock(d, terms);
      Region reg = centered_ball(d, 1.0 + i % 3);
      reg.center[0] = cplx(0.2 * nd(rng), 0.2 * nd(rng));
      MCSpec mc;
      mc.samples = c.count(100000);
      mc.seed = c.opt.seed + i;
      mc.control_variate = true;
      const auto rep = deficit_d(f, reg, mc);
      worst = std::min(worst, rep.deficit + rep.three_sigma());
    }
    r.value = worst;
    r.passed = worst >= 0.0;
  });
  c.run("highdim", "rearrangement_d", "u*(s) / e*(s) nondecreasing in d = 2, 3", [&](CheckResult& r) {
    std::vector<double> grid;
    for (int j = 1; j <= 15; ++j) grid.push_back(0.2 * j);
    MCSpec mc;
    mc.samples = c.count(1000000);
    mc.seed = c.opt.seed;
    double worst = std::numeric_limits<double>::infinity();
    bool ok = true;
    const auto pert = make_fock(2, {{{0, 0}, 1.0}, {{2, 0}, 0.1 * std::sqrt(2.0) / pi}}).normalized();
    for (const auto& f : {constant_one(2), pert, constant_one(3)}) {
      const auto chk = rearrangement_check_d(f, grid, mc);
      worst = std::min(worst, chk.worst_slackened);
      ok = ok && chk.passed;
    }
    r.value = worst;
    r.passed = ok;
  });
}
}  // namespace detail

inline std::vector<CheckResult> run_verify(const VerifyOptions& opt) {
  auto tol = default_tolerances();
  for (const auto& [k, v] : opt.tol) {
    if (!tol.count(k)) throw invalid_input("verify: unknown tolerance '" + k + "'");
    if (!(v > 0.0)) throw invalid_input("verify: tolerance '" + k + "' must be positive");
    tol[k] = v;
  }
  if (!(opt.scale > 0.0)) throw invalid_input("verify: scale must be positive");
  detail::verify_ctx c{opt, tol, {}};
  detail::suite_fock_core(c);
  detail::suite_transforms(c);
  detail::suite_concentration(c);
  detail::suite_geometry(c);
  detail::suite_stability(c);
  detail::suite_highdim(c);
  if (!opt.only.empty() && c.out.empty()) throw invalid_input("verify: --only matched no suite or check");
  return c.out;
}

/// Timings are left out so that the document depends only on the options.
inline json verify_json(const std::vector<CheckResult>& results) {
  json checks = json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    checks.push_back(json{{"suite", r.suite},
                          {"name", r.name},
                          {"property", r.property},
                          {"passed", r.passed},
                          {"value", r.value},
                          {"detail", r.detail}});
  }
  return json{{"passed", all}, {"checks", checks}};
}

}  // namespace fockconc
