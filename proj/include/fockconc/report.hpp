#pragma once

// JSON and CSV emission of reports. Numbers are written with 17 significant
// digits; NaN and infinities (undefined ratios) become null.

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "common.hpp"
#include "concentration.hpp"
#include "geometry.hpp"
#include "highdim.hpp"
#include "stability.hpp"

namespace fockconc {

using json = nlohmann::ordered_json;

namespace detail {
inline void write_json(std::ostream& os, const json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << json(it.key()).dump() << (indent > 0 ? ": " : ":");
        write_json(os, it.value(), indent, depth + 1);
      }
      os << nl << close << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << '[' << nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ',' << nl;
        os << pad;
        write_json(os, j[i], indent, depth + 1);
      }
      os << nl << close << ']';
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      os << (std::isfinite(x) ? fmt17(x) : std::string("null"));
      return;
    }
    default:
      os << j.dump();
  }
}
}  // namespace detail

inline std::string dump_json(const json& j, int indent = 2) {
  std::ostringstream os;
  detail::write_json(os, j, indent, 0);
  return os.str();
}

inline json to_json(const DeficitReport& r) {
  return json{{"concentration", r.concentration},
              {"fk_bound", r.fk_bound},
              {"deficit", r.deficit},
              {"superlevel_deficit", r.superlevel_deficit},
              {"area", r.area},
              {"norm_sq", r.norm_sq},
              {"quad_err", r.quad_err},
              {"violation", r.violation}};
}

inline json to_json(const AsymmetryReport& r) {
  return json{{"A", r.A}, {"cx", r.center.real()}, {"cy", r.center.imag()}, {"r", r.radius}, {"slack", r.slack}};
}

inline json to_json(const StabilityReport& r) {
  return json{{"T", r.T},
              {"distance_sq_closed", r.distance_sq_closed},
              {"distance_sq_direct", r.distance_sq_direct},
              {"deficit", r.deficit},
              {"quad_err", r.quad_err},
              {"area", r.area},
              {"ratio", r.ratio},
              {"asymmetry", r.asymmetry},
              {"asymmetry_slack", r.asymmetry_slack},
              {"asymmetry_ratio", r.asymmetry_ratio}};
}

inline json to_json(const MCDeficit& r) {
  return json{{"deficit", r.deficit},
              {"stderr", r.stderr_},
              {"three_sigma", r.three_sigma()},
              {"concentration", r.concentration},
              {"fk_bound", r.fk_bound},
              {"area", r.area},
              {"norm_sq", r.norm_sq},
              {"samples", r.samples},
              {"seed", r.seed},
              {"streams", r.streams},
              {"control_variate", r.control_variate}};
}

inline json to_json(const Eigenpair& e) {
  return json{{"lambda", e.lambda},
              {"iterations", e.iterations},
              {"stagnated", e.stagnated},
              {"subspace_dim", e.subspace_dim}};
}

/// {"kind": "ball", "center": [re1, im1, ...], "radius": r} or
/// {"kind": "product", "center": [...], "radii": [r1, ...]}.
inline Region region_from_json(const json& j) {
  try {
    Region r;
    const std::string kind = j.at("kind").get<std::string>();
    const auto c = j.at("center").get<std::vector<double>>();
    if (c.empty() || c.size() % 2 != 0) throw parse_error("region: center needs 2d real coordinates");
    for (std::size_t i = 0; i < c.size(); i += 2) r.center.emplace_back(c[i], c[i + 1]);
    if (kind == "ball") {
      r.kind = Region::Kind::ball;
      r.radius = j.at("radius").get<double>();
    } else if (kind == "product") {
      r.kind = Region::Kind::product;
      r.radii = j.at("radii").get<std::vector<double>>();
    } else {
      throw invalid_input("region: unsupported kind '" + kind + "' (ball or product)");
    }
    r.validate();
    return r;
  } catch (const json::exception& e) {
    throw parse_error(std::string("region: ") + e.what());
  }
}

inline json to_json(const Region& r) {
  std::vector<double> c;
  for (const auto& z : r.center) c.push_back(z.real()), c.push_back(z.imag());
  if (r.kind == Region::Kind::ball) return json{{"kind", "ball"}, {"center", c}, {"radius", r.radius}};
  return json{{"kind", "product"}, {"center", c}, {"radii", r.radii}};
}

}  // namespace fockconc
