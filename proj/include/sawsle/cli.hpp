#ifndef SAWSLE_CLI_HPP
#define SAWSLE_CLI_HPP

// Command implementations behind the sawsle tool. Each returns an exit code:
// 0 success, 1 configuration error, 2 runtime failure.

#include "sawsle/run.hpp"
#include "sawsle/unfold.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace sawsle::cli {

inline constexpr int kOk = 0;
inline constexpr int kConfigError = 1;
inline constexpr int kRuntimeError = 2;

/// Number with an optional "pi" factor: "0.3", "pi", "pi/2", "3pi/4", "0.25pi".
inline double parse_angle_number(const std::string& raw) {
  const std::string s = detail::trim(raw);
  const auto pos = s.find("pi");
  if (pos == std::string::npos) return detail::parse_double("grid", s);
  std::string coef = s.substr(0, pos);
  if (!coef.empty() && coef.back() == '*') coef.pop_back();
  std::string rest = s.substr(pos + 2);
  double v = std::numbers::pi * (coef.empty() ? 1.0 : detail::parse_double("grid", coef));
  if (!rest.empty()) {
    if (rest[0] != '/') throw ConfigError("grid: cannot parse '" + s + "'");
    v /= detail::parse_double("grid", rest.substr(1));
  }
  return v;
}

inline std::vector<double> parse_grid(const std::string& list) {
  std::vector<double> out;
  for (const auto& tok : detail::split(list, ',')) {
    if (!tok.empty()) out.push_back(parse_angle_number(tok));
  }
  if (out.empty()) throw ConfigError("grid: no points");
  return out;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t points) {
  if (points < 2) throw ConfigError("grid: need at least 2 points");
  std::vector<double> out(points);
  for (std::size_t k = 0; k < points; ++k) {
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  out.back() = hi;
  return out;
}

/// Exact (or reference) curve values. pass_right takes angles in radians.
inline std::vector<double> exact_values(ObservableKind kind, double d, const std::vector<double>& grid) {
  if (d != 0.0 && !is_theta(kind)) throw ConfigError("exact: d only applies to theta kinds");
  std::vector<double> out;
  for (double t : grid) {
    try {
      if (kind == ObservableKind::PassRight) out.push_back(sle::pass_right_prob(t));
      else out.push_back(exact_for(kind, d)(t));
    } catch (const std::domain_error& e) {
      throw ConfigError(std::string("exact: ") + e.what());
    }
  }
  return out;
}

inline void write_exact_csv(std::ostream& os, ObservableKind kind, double d, const std::vector<double>& grid,
                            const std::vector<double>& values) {
  os << "# kind: " << to_string(kind) << '\n';
  if (is_theta(kind)) os << "# d: " << format_number(d) << '\n';
  os << "# curve: " << exact_label(kind) << '\n';
  if (kind == ObservableKind::PassRight) os << "# t_unit: radians\n";
  os << "t,F\n";
  char buf[80];
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", grid[k], values[k]);
    os << buf;
  }
}

inline int cmd_simulate(const std::string& config_file, const std::vector<std::string>& overrides,
                        std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    std::ifstream is;
    std::istringstream empty;
    if (!config_file.empty()) {
      is.open(config_file);
      if (!is) {
        err << "error: cannot read config file '" << config_file << "'\n";
        return kConfigError;
      }
    }
    cfg = config_file.empty() ? parse_config(empty, overrides) : parse_config(is, overrides);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    const auto res = simulate(cfg);
    write_outputs(cfg, res);
    for (const auto& w : res.warnings) err << "warning: " << w << '\n';
    if (!res.complete) {
      out << "halted after " << cfg.halt_after << " steps per chain; checkpoints in " << cfg.output << '\n';
      return kOk;
    }
    out << "acceptance rate " << format_number(res.acceptance_rate()) << ", wall time "
        << format_number(res.wall_seconds) << " s\n";
    for (const auto& c : res.curves) {
      out << c.meta("observable") << ": samples=" << c.samples << " censored=" << c.censored
          << " max|diff|=" << format_number(c.ks) << '\n';
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

inline int cmd_exact(const std::string& kind_name, double d, const std::string& grid_spec, std::ostream& out,
                     std::ostream& err) {
  try {
    const auto kind = parse_observable_kind(kind_name);
    if (!kind) throw ConfigError("exact: unknown kind '" + kind_name + "'");
    std::vector<double> grid;
    if (grid_spec.empty()) {
      if (*kind == ObservableKind::PassRight) {
        for (double u : grids::pass_right_grid()) grid.push_back(u * std::numbers::pi);
      } else {
        grid = grids::for_kind(*kind);
      }
    } else {
      grid = parse_grid(grid_spec);
    }
    write_exact_csv(out, *kind, d, grid, exact_values(*kind, d, grid));
    return kOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

/// Re-diffs an empirical CSV against its exact curve, or compares two
/// empirical CSVs using their combined standard errors.
inline int cmd_compare(const std::string& input, const std::string& against, double lo_fraction,
                       double hi_fraction, std::ostream& out, std::ostream& err) {
  auto load = [](const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read '" + path + "'");
    return read_csv(is);
  };
  try {
    ComparisonCurve a = load(input);
    if (against.empty()) {
      const auto kind = parse_observable_kind(a.meta("kind"));
      if (!kind) throw ConfigError("compare: '" + input + "' has no usable kind metadata");
      const double d = detail::parse_double("d", a.meta("d", "0"));
      rediff(a, exact_for(*kind, d));
      for (auto& [k, v] : a.metadata) {
        if (k == "ks") v = format_number(a.ks);
      }
      write_csv(out, a);
      err << "max |diff| = " << format_number(a.ks) << '\n';
      return kOk;
    }
    const ComparisonCurve b = load(against);
    if (a.grid != b.grid) throw ConfigError("compare: the two curves use different grids");
    const auto cmp = compare_empirical(a, b, lo_fraction, hi_fraction);
    out << "# max_abs_diff: " << format_number(cmp.max_abs_diff) << '\n'
        << "# max_z: " << format_number(cmp.max_z) << '\n'
        << "t,diff,sigma\n";
    char buf[80];
    for (std::size_t k = 0; k < cmp.grid.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", cmp.grid[k], cmp.diff[k], cmp.sigma[k]);
      out << buf;
    }
    err << "max |diff| = " << format_number(cmp.max_abs_diff) << ", max z = " << format_number(cmp.max_z)
        << '\n';
    return kOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

inline constexpr std::int64_t kMaxUnfoldLength = 14;

inline int cmd_unfold_check(std::int64_t max_length, const std::string& domain_name, std::ostream& out,
                            std::ostream& err) {
  const auto domain = parse_domain(domain_name);
  if (!domain) {
    err << "error: unknown domain '" << domain_name << "'\n";
    return kConfigError;
  }
  if (max_length < 1) {
    err << "error: max length must be >= 1\n";
    return kConfigError;
  }
  if (max_length > kMaxUnfoldLength) {
    err << "error: max length " << max_length << " exceeds the enumeration guard of " << kMaxUnfoldLength << '\n';
    return kConfigError;
  }
  std::int64_t violations = 0;
  out << "length,walks,max_moves,total_moves,violations\n";
  for (std::int64_t n = 1; n <= max_length; ++n) {
    const auto r = check_unfolding(n, *domain);
    out << n << ',' << r.walks << ',' << r.max_moves << ',' << r.total_moves << ',' << r.violations << '\n';
    if (r.violations && !violations) err << "first violation at length " << n << ": " << r.first_violation << '\n';
    violations += r.violations;
  }
  if (violations) {
    err << "unfold-check: " << violations << " violations\n";
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace sawsle::cli

#endif  // SAWSLE_CLI_HPP
