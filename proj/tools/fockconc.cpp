// fockconc: batch front end for the concentration library.
// Exit codes: 0 success, 1 usage or I/O failure, 2 inequality violated beyond its error bar.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fockconc.hpp"

namespace fs = std::filesystem;
using namespace fockconc;

namespace {

struct RunConfig {
  std::string fock, mask, signal, region, grid, out;
  unsigned degree = 24;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::vector<std::string> only, tol;
};

struct GridArg {
  unsigned n = 1024;
  double R = 0.0;  // 0: choose from the input
};

GridArg parse_grid(const std::string& s) {
  GridArg g;
  if (s.empty()) return g;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw invalid_input("--grid: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    try {
      if (key == "n")
        g.n = static_cast<unsigned>(std::stoul(val));
      else if (key == "R")
        g.R = std::stod(val);
      else
        throw invalid_input("--grid: unknown key '" + key + "' (use n and R)");
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const invalid_input*>(&e)) throw;
      throw invalid_input("--grid: unreadable value '" + val + "'");
    }
  }
  return g;
}

std::map<std::string, double> parse_tolerances(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& it : items) {
    const auto eq = it.find('=');
    if (eq == std::string::npos) throw invalid_input("--tol: expected name=value, got '" + it + "'");
    try {
      out[it.substr(0, eq)] = std::stod(it.substr(eq + 1));
    } catch (const std::logic_error&) {
      throw invalid_input("--tol: unreadable value in '" + it + "'");
    }
  }
  return out;
}

std::ifstream open_in(const std::string& path, const char* what) {
  if (path.empty()) throw invalid_input(std::string("missing --") + what);
  std::ifstream is(path, std::ios::binary);
  if (!is) throw invalid_input(std::string("cannot read ") + what + " file '" + path + "'");
  return is;
}

FockFunction load_fock(const std::string& path) {
  auto is = open_in(path, "fock");
  return read_fock(is);
}

RegionMask load_mask(const std::string& path) {
  auto is = open_in(path, "mask");
  return read_mask(is);
}

// Writes `content` to <out>/<name>, or to stdout when no output directory is set.
void emit(const RunConfig& cfg, const std::string& name, const std::string& content) {
  if (cfg.out.empty()) {
    std::cout << content;
    return;
  }
  fs::create_directories(cfg.out);
  const fs::path p = fs::path(cfg.out) / name;
  std::ofstream os(p, std::ios::binary);
  if (!os) throw invalid_input("cannot write '" + p.string() + "'");
  os << content;
  if (!os) throw invalid_input("write failed for '" + p.string() + "'");
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      v.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw invalid_input(std::string(what) + ": unreadable number '" + item + "'");
    }
  }
  return v;
}

int cmd_deficit(const RunConfig& cfg) {
  const auto f = load_fock(cfg.fock);
  const auto mask = load_mask(cfg.mask);
  const auto rep = deficit(f, mask);
  emit(cfg, "deficit.json", dump_json(to_json(rep)) + "\n");
  return rep.violation ? 2 : 0;
}

int cmd_verify(const RunConfig& cfg, double scale, bool inject) {
  VerifyOptions opt;
  opt.seed = cfg.seed;
  opt.scale = scale;
  for (const auto& o : cfg.only) {
    std::stringstream ss(o);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) opt.only.insert(item);
  }
  opt.tol = parse_tolerances(cfg.tol);
  if (inject) opt.v_coefficient = [](unsigned k, double s) { return -v_coefficient(k, s); };
  const auto results = run_verify(opt);
  std::size_t failed = 0;
  for (const auto& r : results) {
    std::cerr << (r.passed ? "PASS " : "FAIL ") << r.suite << '/' << r.name << "  value=" << fmt17(r.value);
    if (!r.detail.empty()) std::cerr << "  " << r.detail;
    if (!r.passed) std::cerr << "  [" << r.property << "]";
    std::cerr << '\n';
    failed += !r.passed;
  }
  std::cerr << results.size() - failed << '/' << results.size() << " checks passed\n";
  emit(cfg, "verify.json", dump_json(verify_json(results)) + "\n");
  return failed == 0 ? 0 : 1;
}

int cmd_sweep(const RunConfig& cfg, const std::string& kind, double s, const std::string& eps, const std::string& areas) {
  const GridArg ga = parse_grid(cfg.grid);
  if (kind == "sharpness") {
    const auto eps_list = parse_list(eps, "--eps");
    if (eps_list.empty()) throw invalid_input("sweep: empty --eps list");
    SweepGrid g;
    if (!cfg.grid.empty()) g.n = ga.n;
    g.half_width = ga.R;
    const auto sw = sharpness_sweep(s, eps_list, g);
    std::ostringstream os;
    write_sweep_csv(os, sw);
    emit(cfg, "sweep.csv", os.str());
    return 0;
  }
  if (kind == "area") {
    const auto list = parse_list(areas, "--areas");
    if (list.empty()) throw invalid_input("sweep: empty --areas list");
    const FockFunction f = cfg.fock.empty() ? perturbed_gaussian(0.05) : load_fock(cfg.fock);
    double smax = 0.0;
    for (double a : list) smax = std::max(smax, a);
    const GridSpec g(ga.R > 0.0 ? ga.R : default_radius(f.degree(), smax), cfg.grid.empty() ? 1024 : ga.n);
    std::ostringstream os;
    write_area_scan_csv(os, area_scan(f, list, g));
    emit(cfg, "area_scan.csv", os.str());
    return 0;
  }
  throw invalid_input("sweep: --kind must be sharpness or area");
}

int cmd_profile(const RunConfig& cfg, double smax, double ds) {
  const auto f = load_fock(cfg.fock);
  const GridArg ga = parse_grid(cfg.grid);
  const GridSpec g(ga.R > 0.0 ? ga.R : default_radius(f.degree(), smax), ga.n);
  const auto p = profile(sample_density(f, g));
  if (!(ds > 0.0) || !(smax > 0.0)) throw invalid_input("profile: --smax and --ds must be positive");
  std::ostringstream os;
  os << "s,u_star,I,e_minus_s\n";
  const auto steps = static_cast<std::size_t>(std::llround(smax / ds));
  for (std::size_t j = 0; j <= steps; ++j) {
    const double s = j * ds;
    os << fmt17(s) << ',' << fmt17(p.u_star(s)) << ',' << fmt17(p.I(s)) << ',' << fmt17(p.norm_sq() * std::exp(-s)) << '\n';
  }
  emit(cfg, "profile.csv", os.str());
  const json summary{{"T", p.T()},
                     {"T_normalized", p.T_normalized()},
                     {"argmax_re", p.peak().location.real()},
                     {"argmax_im", p.peak().location.imag()},
                     {"s_star", p.s_star()},
                     {"norm_sq", p.norm_sq()}};
  emit(cfg, "profile.json", dump_json(summary) + "\n");
  return 0;
}

int cmd_stability(const RunConfig& cfg) {
  const auto f = load_fock(cfg.fock);
  const auto mask = load_mask(cfg.mask);
  emit(cfg, "stability.json", dump_json(to_json(stability_report(f, mask))) + "\n");
  return 0;
}

int cmd_asymmetry(const RunConfig& cfg) {
  const auto mask = load_mask(cfg.mask);
  emit(cfg, "asymmetry.json", dump_json(to_json(fraenkel_asymmetry(mask))) + "\n");
  return 0;
}

int cmd_eigen(const RunConfig& cfg) {
  const auto mask = load_mask(cfg.mask);
  const auto e = top_eigenpair(localization_matrix(mask, cfg.degree));
  json j = to_json(e);
  j["fk_bound"] = fk_bound(mask.measure());
  j["area"] = mask.measure();
  emit(cfg, "eigen.json", dump_json(j) + "\n");
  std::ostringstream os;
  write_fock(os, e.f);
  emit(cfg, "eigenfunction.fock", os.str());
  return 0;
}

int cmd_bargmann(const RunConfig& cfg) {
  auto is = open_in(cfg.signal, "signal");
  const auto sig = read_signal_csv(is);
  const auto e = hermite_expand(sig, cfg.degree);
  std::cerr << "hermite tail ratio " << fmt17(e.tail_ratio) << '\n';
  std::ostringstream os;
  write_fock(os, bargmann(e));
  emit(cfg, "bargmann.fock", os.str());
  return 0;
}

int cmd_highdim(const RunConfig& cfg, std::uint64_t samples, unsigned streams, bool cv) {
  const auto f = load_fock(cfg.fock);
  auto is = open_in(cfg.region, "region");
  json rj;
  try {
    rj = json::parse(is);
  } catch (const json::exception& e) {
    throw parse_error(std::string("region: ") + e.what());
  }
  MCSpec mc;
  mc.samples = samples;
  mc.seed = cfg.seed;
  mc.streams = streams;
  mc.control_variate = cv;
  const auto rep = deficit_d(f, region_from_json(rj), mc);
  emit(cfg, "deficit_d.json", dump_json(to_json(rep)) + "\n");
  return rep.deficit < -rep.three_sigma() ? 2 : 0;
}

int cmd_make_fock(const RunConfig& cfg, const std::string& kind, double eps, const std::string& z0) {
  FockFunction f;
  if (kind == "gaussian") {
    f = constant_one();
  } else if (kind == "kernel") {
    const auto c = parse_list(z0, "--z0");
    if (c.size() != 2) throw invalid_input("--z0 must be x,y");
    const ComplexPoint p(cplx(c[0], c[1]));
    f = kernel_function(p, std::max(cfg.degree, kernel_degree_for(p)));
  } else if (kind == "perturbed") {
    f = perturbed_gaussian(eps);
  } else if (kind == "random") {
    std::mt19937_64 rng(cfg.seed);
    f = random_polynomial(rng, std::min(cfg.degree, 8u));
  } else {
    throw invalid_input("make-fock: --kind must be gaussian, kernel, perturbed or random");
  }
  std::ostringstream os;
  write_fock(os, f);
  emit(cfg, "function.fock", os.str());
  return 0;
}

int cmd_make_mask(const RunConfig& cfg, const std::string& shape, double area, const std::string& center, double aspect) {
  const GridArg ga = parse_grid(cfg.grid);
  const GridSpec g(ga.R > 0.0 ? ga.R : 4.0, ga.n);
  const auto c = parse_list(center, "--center");
  if (c.size() != 2) throw invalid_input("--center must be x,y");
  const cplx z(c[0], c[1]);
  if (!(area > 0.0) || !(aspect > 0.0)) throw invalid_input("make-mask: --area and --aspect must be positive");
  RegionMask m;
  if (shape == "disc") {
    m = disc_mask(g, z, area);
  } else if (shape == "ellipse") {
    const double a = std::sqrt(area / pi);
    m = ellipse_mask(g, z, a * aspect, a / aspect);
  } else if (shape == "rect") {
    const double side = std::sqrt(area);
    m = rectangle_mask(g, z, side * aspect, side / aspect);
  } else if (shape == "random") {
    std::mt19937_64 rng(cfg.seed);
    m = random_mask(rng, g);
  } else {
    throw invalid_input("make-mask: --shape must be disc, ellipse, rect or random");
  }
  std::ostringstream os;
  write_mask(os, m);
  emit(cfg, "region.mask", os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concentration of the Gaussian-window STFT in the Fock model"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI file of key=value defaults; flags take precedence");
  app.config_formatter(std::make_shared<CLI::ConfigINI>());

  RunConfig cfg;
  app.add_option("--fock", cfg.fock, "Fock function (fock v1 text)");
  app.add_option("--mask", cfg.mask, "region mask (mask v1 text)");
  app.add_option("--signal", cfg.signal, "sampled signal CSV");
  app.add_option("--region", cfg.region, "region JSON for d >= 2");
  app.add_option("--grid", cfg.grid, "grid as n=<int>,R=<float>");
  app.add_option("--degree", cfg.degree, "truncation degree N")->check(CLI::Range(0u, 64u));
  app.add_option("--seed", cfg.seed, "random seed")->envname("FOCKCONC_SEED");
  app.add_option("--workers", cfg.workers, "worker threads (0: machine parallelism)");
  app.add_option("--out", cfg.out, "output directory (default: stdout)");
  app.add_option("--only", cfg.only, "restrict verify to suites or checks")->delimiter(',');
  app.add_option("--tol", cfg.tol, "tolerance override name=value");

  auto* deficit_cmd = app.add_subcommand("deficit", "deficit of a function on a mask");
  auto* verify_cmd = app.add_subcommand("verify", "run the property suites");
  double scale = 1.0;
  bool inject = false;
  verify_cmd->add_option("--scale", scale, "multiplier for ensemble sizes");
  verify_cmd->add_flag("--inject-sign-flip", inject, "replace V_k by -V_k (mutation check)");

  auto* sweep_cmd = app.add_subcommand("sweep", "sharpness sweep or measure scan");
  std::string kind = "sharpness", eps = "0.05,0.035,0.025,0.0175", areas = "0.5,1,2,3,4";
  double s = 1.0;
  sweep_cmd->add_option("--kind", kind, "sharpness or area");
  sweep_cmd->add_option("--s", s, "measure of the super-level sets");
  sweep_cmd->add_option("--eps", eps, "decreasing eps values, comma separated");
  sweep_cmd->add_option("--areas", areas, "measures for the area scan, comma separated");

  auto* profile_cmd = app.add_subcommand("profile", "tabulate u*(s) and I(s)");
  double smax = 4.0, ds = 0.01;
  profile_cmd->add_option("--smax", smax, "largest s");
  profile_cmd->add_option("--ds", ds, "spacing in s");

  auto* stability_cmd = app.add_subcommand("stability", "distance, deficit and stability ratios");
  auto* asym_cmd = app.add_subcommand("asymmetry", "Fraenkel asymmetry of a mask");
  auto* eigen_cmd = app.add_subcommand("eigen", "top eigenpair of the localization operator");
  auto* bargmann_cmd = app.add_subcommand("bargmann", "Hermite expansion and Bargmann transform of a signal");
  auto* highdim_cmd = app.add_subcommand("highdim", "Monte Carlo deficit in dimension 2 or 3");
  std::uint64_t samples = 1000000;
  unsigned streams = 16;
  bool cv = false;
  highdim_cmd->add_option("--samples", samples, "Monte Carlo samples");
  highdim_cmd->add_option("--streams", streams, "independent random streams");
  highdim_cmd->add_flag("--control-variate", cv, "use the centered-ball control variate");

  auto* make_fock_cmd = app.add_subcommand("make-fock", "write a standard Fock function");
  std::string fkind = "gaussian", z0 = "0,0";
  double feps = 0.05;
  make_fock_cmd->add_option("--kind", fkind, "gaussian, kernel, perturbed or random");
  make_fock_cmd->add_option("--eps", feps, "eps of (1 + eps z^2) / ||.||");
  make_fock_cmd->add_option("--z0", z0, "kernel center x,y");

  auto* make_mask_cmd = app.add_subcommand("make-mask", "write a standard region mask");
  std::string shape = "disc", center = "0,0";
  double area = 1.0, aspect = 1.0;
  make_mask_cmd->add_option("--shape", shape, "disc, ellipse, rect or random");
  make_mask_cmd->add_option("--area", area, "measure of the shape");
  make_mask_cmd->add_option("--center", center, "center x,y");
  make_mask_cmd->add_option("--aspect", aspect, "axis ratio factor for ellipse and rect");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    set_workers(cfg.workers);
    if (*deficit_cmd) return cmd_deficit(cfg);
    if (*verify_cmd) return cmd_verify(cfg, scale, inject);
    if (*sweep_cmd) return cmd_sweep(cfg, kind, s, eps, areas);
    if (*profile_cmd) return cmd_profile(cfg, smax, ds);
    if (*stability_cmd) return cmd_stability(cfg);
    if (*asym_cmd) return cmd_asymmetry(cfg);
    if (*eigen_cmd) return cmd_eigen(cfg);
    if (*bargmann_cmd) return cmd_bargmann(cfg);
    if (*highdim_cmd) return cmd_highdim(cfg, samples, streams, cv);
    if (*make_fock_cmd) return cmd_make_fock(cfg, fkind, feps, z0);
    if (*make_mask_cmd) return cmd_make_mask(cfg, shape, area, center, aspect);
  } catch (const std::exception& e) {
    std::cerr << "fockconc: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
