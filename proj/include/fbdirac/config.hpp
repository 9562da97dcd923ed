#pragma once

#include "fbdirac/basis.hpp"
#include "fbdirac/precision.hpp"
#include "fbdirac/twophoton.hpp"

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fbdirac::config {

//! Physical constants used throughout. CODATA 2006, contemporary with the
//! reference data this project reproduces.
inline const char *kLightSpeed = "137.035999679";

enum class OutputFormat { Table, Csv, Json };

//! One run's worth of settings; parseable from a key=value file and
//! overridable by flags. Unknown keys are rejected.
struct RunConfig {
  std::vector<double> z_list;       // empty -> preset {1, 40, 92}
  std::string basis = "bpoly";      // bpoly | bspline
  unsigned order = 0;               // 0 -> per-Z preset / derived
  unsigned count = 0;               // 0 -> per-Z preset
  double radius = 0;                // 0 -> per-Z preset
  unsigned digits = 34;
  std::vector<std::string> channels = {"2E1", "E1M2", "2M1",
                                       "2E2", "2M2", "E2M1"};
  unsigned quad_points = 15;
  std::string nuclear = "point";    // point | uniform:<r_N>
  std::string restriction = "all";  // all | pos | neg
  OutputFormat format = OutputFormat::Table;
  std::string out_path;             // empty -> stdout
  std::string cache_dir;            // empty -> cache disabled
  bool strict = false;
  int kappa = -1;                   // spectrum report symmetry
  unsigned levels = 4;              // spectrum report depth
  std::vector<unsigned> nbp_list;   // scan: basis-size sweep
  std::vector<double> r_list;       // scan: cavity sweep
  double bspline_stretch = 7.0;

  //! Paper-reproduction presets: optimal (n_BP, R) per Z.
  static std::pair<unsigned, double> optimal_bpoly(double z) {
    if (z < 20)
      return {48, 50.0};
    if (z < 70)
      return {52, 1.0};
    return {52, 0.25};
  }

  unsigned effective_count(double z) const {
    if (count)
      return count;
    if (basis == "bspline")
      return 60;
    return optimal_bpoly(z).first;
  }
  unsigned effective_order(double z) const {
    if (order)
      return order;
    if (basis == "bspline")
      return 9;
    return effective_count(z) - 1;
  }
  double effective_radius(double z) const {
    if (radius > 0)
      return radius;
    if (basis == "bspline")
      return 60.0;
    return optimal_bpoly(z).second;
  }

  basis::BasisSpec make_basis(const PrecisionCtx &ctx, double z) const {
    ScopedPrecision guard(ctx);
    const BigReal r(effective_radius(z));
    if (basis == "bspline")
      return basis::BasisSpec::bspline_exponential(
          ctx, effective_order(z), effective_count(z), r, bspline_stretch);
    if (basis == "bpoly")
      return basis::BasisSpec::bpolynomial(effective_count(z), r);
    throw ConfigError("unknown basis kind '" + basis + "'");
  }

  basis::NuclearModel make_nuclear(const PrecisionCtx &ctx, double z) const {
    ScopedPrecision guard(ctx);
    if (nuclear == "point")
      return basis::NuclearModel::point(BigReal(z));
    if (nuclear.rfind("uniform:", 0) == 0)
      return basis::NuclearModel::uniform_sphere(
          BigReal(z), BigReal(nuclear.substr(8)));
    throw ConfigError("unknown nuclear model '" + nuclear +
                      "' (expected point or uniform:<r_N>)");
  }

  twophoton::Restriction make_restriction() const {
    if (restriction == "all")
      return twophoton::Restriction::All;
    if (restriction == "pos")
      return twophoton::Restriction::PositiveOnly;
    if (restriction == "neg")
      return twophoton::Restriction::NegativeOnly;
    throw ConfigError("unknown restriction '" + restriction + "'");
  }

  std::vector<double> effective_z() const {
    if (!z_list.empty())
      return z_list;
    return {1.0, 40.0, 92.0};
  }
};

namespace detail {

inline std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      if (!cur.empty())
        out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur += ch;
    }
  }
  if (!cur.empty())
    out.push_back(cur);
  return out;
}

inline std::string trim(const std::string &s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos)
    return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

} // namespace detail

//! Apply one key=value setting; throws ConfigError on unknown keys.
inline void apply_setting(RunConfig &cfg, const std::string &key,
                          const std::string &value) {
  auto bad_value = [&]() -> void {
    throw ConfigError("invalid value '" + value + "' for key '" + key + "'");
  };
  try {
    if (key == "z") {
      cfg.z_list.clear();
      for (const auto &tok : detail::split(value, ','))
        cfg.z_list.push_back(std::stod(tok));
    } else if (key == "basis")
      cfg.basis = value;
    else if (key == "order")
      cfg.order = static_cast<unsigned>(std::stoul(value));
    else if (key == "count")
      cfg.count = static_cast<unsigned>(std::stoul(value));
    else if (key == "radius")
      cfg.radius = std::stod(value);
    else if (key == "digits")
      cfg.digits = static_cast<unsigned>(std::stoul(value));
    else if (key == "channels")
      cfg.channels = detail::split(value, ',');
    else if (key == "quad_points")
      cfg.quad_points = static_cast<unsigned>(std::stoul(value));
    else if (key == "nuclear")
      cfg.nuclear = value;
    else if (key == "restriction")
      cfg.restriction = value;
    else if (key == "format") {
      if (value == "table")
        cfg.format = OutputFormat::Table;
      else if (value == "csv")
        cfg.format = OutputFormat::Csv;
      else if (value == "json")
        cfg.format = OutputFormat::Json;
      else
        bad_value();
    } else if (key == "out")
      cfg.out_path = value;
    else if (key == "cache_dir")
      cfg.cache_dir = value;
    else if (key == "strict")
      cfg.strict = (value == "1" || value == "true" || value == "yes");
    else if (key == "kappa")
      cfg.kappa = std::stoi(value);
    else if (key == "levels")
      cfg.levels = static_cast<unsigned>(std::stoul(value));
    else if (key == "nbp_list") {
      cfg.nbp_list.clear();
      for (const auto &tok : detail::split(value, ','))
        cfg.nbp_list.push_back(static_cast<unsigned>(std::stoul(tok)));
    } else if (key == "r_list") {
      cfg.r_list.clear();
      for (const auto &tok : detail::split(value, ','))
        cfg.r_list.push_back(std::stod(tok));
    } else if (key == "bspline_stretch")
      cfg.bspline_stretch = std::stod(value);
    else
      throw ConfigError("unknown configuration key '" + key + "'");
  } catch (const std::invalid_argument &) {
    bad_value();
  } catch (const std::out_of_range &) {
    bad_value();
  }
}

//! Parse a plain-text key = value file ('#' starts a comment).
inline RunConfig parse_file_text(const std::string &text,
                                 RunConfig base = {}) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    apply_setting(base, detail::trim(line.substr(0, eq)),
                  detail::trim(line.substr(eq + 1)));
  }
  return base;
}

//! Canonical key = value rendering; parsing it back reproduces the config.
inline std::string emit(const RunConfig &cfg) {
  std::ostringstream os;
  os << "z = ";
  if (cfg.z_list.empty())
    os << "1,40,92";
  else
    for (std::size_t i = 0; i < cfg.z_list.size(); ++i)
      os << (i ? "," : "") << cfg.z_list[i];
  os << "\n";
  os << "basis = " << cfg.basis << "\n";
  os << "order = " << cfg.order << "\n";
  os << "count = " << cfg.count << "\n";
  os << "radius = " << cfg.radius << "\n";
  os << "digits = " << cfg.digits << "\n";
  os << "channels = ";
  for (std::size_t i = 0; i < cfg.channels.size(); ++i)
    os << (i ? "," : "") << cfg.channels[i];
  os << "\n";
  os << "quad_points = " << cfg.quad_points << "\n";
  os << "nuclear = " << cfg.nuclear << "\n";
  os << "restriction = " << cfg.restriction << "\n";
  os << "format = "
     << (cfg.format == OutputFormat::Table
             ? "table"
             : cfg.format == OutputFormat::Csv ? "csv" : "json")
     << "\n";
  if (!cfg.out_path.empty())
    os << "out = " << cfg.out_path << "\n";
  if (!cfg.cache_dir.empty())
    os << "cache_dir = " << cfg.cache_dir << "\n";
  os << "strict = " << (cfg.strict ? "true" : "false") << "\n";
  os << "kappa = " << cfg.kappa << "\n";
  os << "levels = " << cfg.levels << "\n";
  if (!cfg.nbp_list.empty()) {
    os << "nbp_list = ";
    for (std::size_t i = 0; i < cfg.nbp_list.size(); ++i)
      os << (i ? "," : "") << cfg.nbp_list[i];
    os << "\n";
  }
  if (!cfg.r_list.empty()) {
    os << "r_list = ";
    for (std::size_t i = 0; i < cfg.r_list.size(); ++i)
      os << (i ? "," : "") << cfg.r_list[i];
    os << "\n";
  }
  os << "bspline_stretch = " << cfg.bspline_stretch << "\n";
  return os.str();
}

} // namespace fbdirac::config
