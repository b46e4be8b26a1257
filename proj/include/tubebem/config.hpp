#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tubebem/common.hpp"
#include "tubebem/geometry.hpp"
#include "tubebem/solve.hpp"

namespace tubebem {

/// Parsed run configuration. The file format is plain-text sections of
/// key = value lines; '#' starts a comment. See the README for the schema.
struct RunConfig {
  // [geometry]
  TubeFamily kind = TubeFamily::stationary_circle;
  std::map<std::string, double> geometry_params;
  double horizon = 1.0;

  // [mesh]
  int num_slabs = 16;
  int num_panels = 16;
  int time_order = 6;
  int space_order = 6;

  // [problem]
  Problem problem = Problem::dirichlet;
  Variant variant = Variant::i;
  std::string data = "manufactured";  // manufactured | expression
  std::string expression = "one";     // catalog name when data = expression
  Vec2 source{-2.5, 0.0};             // manufactured source position

  // [verify]
  std::set<std::string> checks{"jumps", "calderon", "coercivity",
                               "bilinear", "green"};
  double jump_tol = 5e-2;
  double projector_tol = 1e-1;
  double green_tol = 1e-5;
  double antisym_tol = 1e-6;
  int resolution = 32;
  int random_pairs = 100;
  std::uint64_t seed = 42;

  // [output]
  std::string out_dir = "out";
  std::string formats = "csv";

  TubeGeometry geometry() const {
    TubeGeometry g{kind, geometry_params, horizon};
    validate_geometry(g);
    return g;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

inline double parse_real(const std::string& value, int line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw config_error("line " + std::to_string(line) +
                       ": expected a number, got '" + value + "'");
  }
  if (pos != value.size())
    throw config_error("line " + std::to_string(line) +
                       ": trailing characters in number '" + value + "'");
  return v;
}

inline int parse_int(const std::string& value, int line) {
  const double v = parse_real(value, line);
  const int i = int(v);
  if (double(i) != v)
    throw config_error("line " + std::to_string(line) +
                       ": expected an integer, got '" + value + "'");
  return i;
}

}  // namespace detail

inline RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  cfg.geometry_params.clear();
  bool checks_assigned = false;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("line " + std::to_string(lineno) +
                           ": unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "geometry" && section != "mesh" && section != "problem" &&
          section != "verify" && section != "output")
        throw config_error("line " + std::to_string(lineno) +
                           ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(lineno) +
                         ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty())
      throw config_error("line " + std::to_string(lineno) +
                         ": key outside of any section");
    if (key.empty() || value.empty())
      throw config_error("line " + std::to_string(lineno) +
                         ": empty key or value");

    if (section == "geometry") {
      if (key == "kind") {
        try {
          cfg.kind = family_from_name(value);
        } catch (const config_error& e) {
          throw config_error("line " + std::to_string(lineno) + ": " +
                             e.what());
        }
      } else if (key == "T") {
        cfg.horizon = detail::parse_real(value, lineno);
      } else if (key == "R0" || key == "a" || key == "k" || key == "omega" ||
                 key == "cx" || key == "cy") {
        cfg.geometry_params[key] = detail::parse_real(value, lineno);
      } else {
        throw config_error("line " + std::to_string(lineno) +
                           ": unknown geometry key '" + key + "'");
      }
    } else if (section == "mesh") {
      if (key == "M") cfg.num_slabs = detail::parse_int(value, lineno);
      else if (key == "N") cfg.num_panels = detail::parse_int(value, lineno);
      else if (key == "qt") cfg.time_order = detail::parse_int(value, lineno);
      else if (key == "qs") cfg.space_order = detail::parse_int(value, lineno);
      else
        throw config_error("line " + std::to_string(lineno) +
                           ": unknown mesh key '" + key + "'");
    } else if (section == "problem") {
      if (key == "type") {
        if (value == "dirichlet") cfg.problem = Problem::dirichlet;
        else if (value == "neumann") cfg.problem = Problem::neumann;
        else
          throw config_error("line " + std::to_string(lineno) +
                             ": problem type must be dirichlet or neumann");
      } else if (key == "variant") {
        try {
          cfg.variant = variant_from_name(value);
        } catch (const config_error& e) {
          throw config_error("line " + std::to_string(lineno) + ": " +
                             e.what());
        }
      } else if (key == "data") {
        if (value != "manufactured" && value != "expression")
          throw config_error("line " + std::to_string(lineno) +
                             ": data must be manufactured or expression");
        cfg.data = value;
      } else if (key == "expression") {
        cfg.expression = value;
      } else if (key == "source_x") {
        cfg.source.x() = detail::parse_real(value, lineno);
      } else if (key == "source_y") {
        cfg.source.y() = detail::parse_real(value, lineno);
      } else {
        throw config_error("line " + std::to_string(lineno) +
                           ": unknown problem key '" + key + "'");
      }
    } else if (section == "verify") {
      if (key == "checks") {
        if (!checks_assigned) {
          cfg.checks.clear();
          checks_assigned = true;
        }
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
          item = detail::trim(item);
          if (item != "jumps" && item != "calderon" && item != "coercivity" &&
              item != "bilinear" && item != "green")
            throw config_error("line " + std::to_string(lineno) +
                               ": unknown check '" + item + "'");
          cfg.checks.insert(item);
        }
      } else if (key == "jump_tol") {
        cfg.jump_tol = detail::parse_real(value, lineno);
      } else if (key == "projector_tol") {
        cfg.projector_tol = detail::parse_real(value, lineno);
      } else if (key == "green_tol") {
        cfg.green_tol = detail::parse_real(value, lineno);
      } else if (key == "antisym_tol") {
        cfg.antisym_tol = detail::parse_real(value, lineno);
      } else if (key == "resolution") {
        cfg.resolution = detail::parse_int(value, lineno);
      } else if (key == "random_pairs") {
        cfg.random_pairs = detail::parse_int(value, lineno);
      } else if (key == "seed") {
        cfg.seed = std::uint64_t(detail::parse_real(value, lineno));
      } else {
        throw config_error("line " + std::to_string(lineno) +
                           ": unknown verify key '" + key + "'");
      }
    } else {  // output
      if (key == "dir") cfg.out_dir = value;
      else if (key == "formats") cfg.formats = value;
      else
        throw config_error("line " + std::to_string(lineno) +
                           ": unknown output key '" + key + "'");
    }
  }
  if (cfg.jump_tol <= 0.0 || cfg.projector_tol <= 0.0 ||
      cfg.green_tol <= 0.0 || cfg.antisym_tol <= 0.0)
    throw config_error("verify tolerances must be positive");
  return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  return parse_config(in);
}

/// Catalog of named boundary data for data = expression runs.
inline double expression_datum(const std::string& name,
                               const BoundarySample& s, double horizon) {
  if (name == "zero") return 0.0;
  if (name == "one") return 1.0;
  if (name == "cos_theta_t") return std::cos(s.theta) * s.t / horizon;
  if (name == "ramp_bump")
    return (s.t / horizon) * (1.0 + 0.5 * std::sin(2.0 * s.theta));
  throw config_error("unknown expression '" + name + "'");
}

}  // namespace tubebem
