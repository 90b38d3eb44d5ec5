#ifndef SAWSLE_RUN_HPP
#define SAWSLE_RUN_HPP

// Run configuration, per-chain workers with checkpoint/resume, and the merged
// comparison output of a simulation.

#include "sawsle/lattice.hpp"
#include "sawsle/observables.hpp"
#include "sawsle/pivot.hpp"
#include "sawsle/sle.hpp"
#include "sawsle/stats.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace sawsle {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Domain domain = Domain::HalfPlane;
  std::int64_t n = 1000;
  std::uint64_t iterations = 1'000'000;
  std::uint64_t burn_in = 0;
  std::vector<std::uint64_t> seeds{1};
  SiteProfile profile = SiteProfile::Piecewise;
  std::size_t flush_threshold = 32;
  std::vector<ObservableSpec> observables;
  std::vector<std::string> observable_lines;  // as given, for the report
  std::uint64_t stride = 1;
  std::uint64_t checkpoint_interval = 0;  // steps; 0 disables checkpoints
  std::string output = "sawsle-out";
  std::size_t batches = 100;
  std::size_t threads = 0;  // 0: one per chain, capped by hardware
  std::uint64_t halt_after = 0;  // stop after this many steps per chain (checkpoint testing); 0: never
  bool resume = true;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(a, b - a + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + ": not a number: '" + v + "'");
  }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  // Accepts plain integers and exact forms like 1e7.
  const double d = parse_double(key, v);
  if (!(d >= 0.0) || d != std::floor(d) || d > 9.0e18) {
    throw ConfigError("config: " + key + ": not a non-negative integer: '" + v + "'");
  }
  if (v.find_first_of(".eE") == std::string::npos) {
    try {
      return std::stoull(v);
    } catch (const std::exception&) {
      throw ConfigError("config: " + key + ": out of range: '" + v + "'");
    }
  }
  return static_cast<std::uint64_t>(d);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: " + key + ": not a boolean: '" + v + "'");
}

inline std::string join_numbers(const std::vector<std::uint64_t>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
  return s;
}

}  // namespace detail

/// Parses "<kind> l=<v>[,<v>...] [d=<v>[,...]] [grid=<u>,<u>,...]" into one
/// spec per (l, d) pair. Pass-right grids are given as fractions of the
/// angular range (pi in the half-plane, 2 pi in the cut-plane).
inline std::vector<ObservableSpec> parse_observable_line(const std::string& line, Domain domain) {
  const auto toks = detail::split_ws(line);
  if (toks.empty()) throw ConfigError("config: empty observable line");
  const auto kind = parse_observable_kind(toks[0]);
  if (!kind) throw ConfigError("config: unknown observable kind '" + toks[0] + "'");
  std::vector<double> ls, ds{0.0};
  std::vector<double> grid;
  for (std::size_t k = 1; k < toks.size(); ++k) {
    const auto eq = toks[k].find('=');
    if (eq == std::string::npos) throw ConfigError("config: observable option without '=': " + toks[k]);
    const std::string key = toks[k].substr(0, eq);
    std::vector<double> vals;
    for (const auto& s : detail::split(toks[k].substr(eq + 1), ',')) vals.push_back(detail::parse_double(key, s));
    if (key == "l") ls = vals;
    else if (key == "d") ds = vals;
    else if (key == "grid") grid = vals;
    else throw ConfigError("config: unknown observable option '" + key + "'");
  }
  if (ls.empty()) throw ConfigError("config: observable '" + line + "' needs l=");
  std::vector<ObservableSpec> out;
  const double range = domain == Domain::HalfPlane ? std::numbers::pi : 2.0 * std::numbers::pi;
  for (double l : ls) {
    for (double d : ds) {
      ObservableSpec spec{*kind, domain, l, d, {}};
      if (*kind == ObservableKind::PassRight) {
        const auto u = grid.empty() ? grids::pass_right_grid() : grid;
        for (double x : u) spec.theta_grid.push_back(x * range);
      } else if (!grid.empty()) {
        throw ConfigError("config: grid= only applies to pass_right");
      }
      try {
        spec.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
      out.push_back(std::move(spec));
    }
  }
  return out;
}

/// Grid recorded for an observable: normalized angles for pass_right.
inline std::vector<double> grid_for(const ObservableSpec& spec) {
  if (spec.kind != ObservableKind::PassRight) return grids::for_kind(spec.kind);
  const double range = spec.geometry == Domain::HalfPlane ? std::numbers::pi : 2.0 * std::numbers::pi;
  std::vector<double> u;
  for (double th : spec.theta_grid) u.push_back(th / range);
  return u;
}

/// Exact SLE curve for the extremal kinds and pass_right, the fitted
/// reference curve for the first-hit kinds.
inline std::function<double(double)> exact_for(ObservableKind kind, double d = 0.0) {
  switch (kind) {
    case ObservableKind::Xe: return [](double t) { return sle::cdf_xe(t); };
    case ObservableKind::Xf: return [](double t) { return sle::ref_x(t); };
    case ObservableKind::Ye: return [](double t) { return sle::cdf_ye(t); };
    case ObservableKind::Yf: return [](double t) { return sle::ref_y(t); };
    case ObservableKind::ThetaE: return [d](double t) { return sle::cdf_theta_e(t, d); };
    case ObservableKind::ThetaF: return [](double t) { return sle::ref_theta(t); };
    case ObservableKind::PassRight: return [](double u) { return sle::pass_right_prob_normalized(u); };
  }
  return {};
}

inline std::string exact_label(ObservableKind kind) {
  switch (kind) {
    case ObservableKind::Xf: return "reference tanh fit";
    case ObservableKind::Yf: return "reference (1+t^2)^(-5/16) fit";
    case ObservableKind::ThetaF: return "reference sine fit";
    default: return "SLE(8/3) exact";
  }
}

inline void apply_setting(RunConfig& cfg, const std::string& key_in, const std::string& value_in,
                          bool& observables_from_override) {
  const std::string key = detail::trim(key_in);
  const std::string v = detail::trim(value_in);
  if (key == "domain") {
    const auto d = parse_domain(v);
    if (!d) throw ConfigError("config: unknown domain '" + v + "'");
    cfg.domain = *d;
  } else if (key == "N") {
    const auto n = detail::parse_uint(key, v);
    if (n > static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max())) throw ConfigError("config: N too large");
    cfg.n = static_cast<std::int64_t>(n);
  } else if (key == "iterations") {
    cfg.iterations = detail::parse_uint(key, v);
  } else if (key == "burn_in") {
    cfg.burn_in = detail::parse_uint(key, v);
  } else if (key == "seeds") {
    cfg.seeds.clear();
    for (const auto& s : detail::split(v, ',')) cfg.seeds.push_back(detail::parse_uint(key, s));
  } else if (key == "profile") {
    if (v == "piecewise") cfg.profile = SiteProfile::Piecewise;
    else if (v == "uniform") cfg.profile = SiteProfile::Uniform;
    else throw ConfigError("config: unknown profile '" + v + "'");
  } else if (key == "flush_threshold") {
    cfg.flush_threshold = detail::parse_uint(key, v);
  } else if (key == "observable") {
    if (observables_from_override) {
      cfg.observable_lines.clear();
      observables_from_override = false;
    }
    cfg.observable_lines.push_back(v);
  } else if (key == "stride") {
    cfg.stride = detail::parse_uint(key, v);
  } else if (key == "checkpoint_interval") {
    cfg.checkpoint_interval = detail::parse_uint(key, v);
  } else if (key == "output") {
    cfg.output = v;
  } else if (key == "batches") {
    cfg.batches = detail::parse_uint(key, v);
  } else if (key == "threads") {
    cfg.threads = detail::parse_uint(key, v);
  } else if (key == "halt_after") {
    cfg.halt_after = detail::parse_uint(key, v);
  } else if (key == "resume") {
    cfg.resume = detail::parse_bool(key, v);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

/// Re-derives observables from the stored lines and checks the invariants.
inline void finalize_config(RunConfig& cfg) {
  cfg.observables.clear();
  for (const auto& line : cfg.observable_lines) {
    for (auto& s : parse_observable_line(line, cfg.domain)) cfg.observables.push_back(std::move(s));
  }
  if (cfg.n < 2) throw ConfigError("config: N must be >= 2");
  if (cfg.observables.empty()) throw ConfigError("config: at least one observable is required");
  if (cfg.seeds.empty()) throw ConfigError("config: at least one seed is required");
  if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() != cfg.seeds.size()) {
    throw ConfigError("config: seeds must be distinct");
  }
  if (cfg.flush_threshold < 1) throw ConfigError("config: flush_threshold must be >= 1");
  if (cfg.stride < 1) throw ConfigError("config: stride must be >= 1");
  if (cfg.batches < 2) throw ConfigError("config: batches must be >= 2");
  std::set<std::string> ids;
  for (const auto& s : cfg.observables) {
    if (!ids.insert(s.id()).second) throw ConfigError("config: duplicate observable " + s.id());
  }
}

/// Key = value lines; '#' starts a comment. `overrides` are "key=value"
/// strings applied afterwards; an overriding observable list replaces the
/// file's list.
inline RunConfig parse_config(std::istream& is, const std::vector<std::string>& overrides = {}) {
  RunConfig cfg;
  bool from_override = false;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1), from_override);
  }
  from_override = true;
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "': expected key=value");
    apply_setting(cfg, o.substr(0, eq), o.substr(eq + 1), from_override);
  }
  finalize_config(cfg);
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text, const std::vector<std::string>& overrides = {}) {
  std::istringstream is(text);
  return parse_config(is, overrides);
}

/// Complete configuration, defaults included, in parseable form.
inline std::string describe(const RunConfig& cfg) {
  std::ostringstream os;
  os << "domain = " << to_string(cfg.domain) << '\n'
     << "N = " << cfg.n << '\n'
     << "iterations = " << cfg.iterations << '\n'
     << "burn_in = " << cfg.burn_in << '\n'
     << "seeds = " << detail::join_numbers(cfg.seeds) << '\n'
     << "profile = " << to_string(cfg.profile) << '\n'
     << "flush_threshold = " << cfg.flush_threshold << '\n';
  for (const auto& l : cfg.observable_lines) os << "observable = " << l << '\n';
  os << "stride = " << cfg.stride << '\n'
     << "checkpoint_interval = " << cfg.checkpoint_interval << '\n'
     << "output = " << cfg.output << '\n'
     << "batches = " << cfg.batches << '\n'
     << "threads = " << cfg.threads << '\n'
     << "halt_after = " << cfg.halt_after << '\n'
     << "resume = " << (cfg.resume ? "true" : "false") << '\n';
  return os.str();
}

/// Settings that determine the statistics; checkpoints carry their hash.
inline std::string fingerprint(const RunConfig& cfg) {
  std::ostringstream os;
  os << to_string(cfg.domain) << '|' << cfg.n << '|' << cfg.iterations << '|' << cfg.burn_in << '|'
     << to_string(cfg.profile) << '|' << cfg.stride << '|' << cfg.batches;
  for (const auto& s : cfg.observables) {
    os << '|' << s.id();
    for (double th : s.theta_grid) os << ',' << format_number(th);
  }
  std::uint64_t h = 14695981039346656037ull;  // FNV-1a
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Measured iterations per batch so that one chain fills `batches` batches.
inline std::uint64_t batch_size_for(const RunConfig& cfg) {
  const std::uint64_t measured = cfg.iterations / cfg.stride;
  return std::max<std::uint64_t>(1, (measured + cfg.batches - 1) / cfg.batches);
}

// ---------------------------------------------------------------------------
// One chain.

struct ChainReport {
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;  // burn-in included
  std::uint64_t iterations = 0;
  std::uint64_t accepted = 0;
  bool complete = false;
  bool resumed = false;
};

struct ChainOutput {
  ChainReport report;
  std::vector<CdfAccumulator> accumulators;
};

inline std::filesystem::path checkpoint_path(const RunConfig& cfg, std::uint64_t seed) {
  return std::filesystem::path(cfg.output) / ("checkpoint_" + std::to_string(seed) + ".txt");
}

/// Writes to a temporary file and renames it over the target.
inline void write_atomically(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
    os.flush();
    if (!os) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

class ChainWorker {
 public:
  ChainWorker(const RunConfig& cfg, std::uint64_t seed)
      : cfg_(cfg),
        seed_(seed),
        chain_(cfg.domain, cfg.n, seed, ChainOptions{cfg.profile, cfg.flush_threshold}) {
    const auto bs = batch_size_for(cfg);
    for (const auto& spec : cfg.observables) {
      const auto mode = spec.kind == ObservableKind::PassRight ? CdfAccumulator::Mode::Profile
                                                               : CdfAccumulator::Mode::Cdf;
      accs_.emplace_back(spec.id(), grid_for(spec), bs, mode);
    }
  }

  /// Loads a checkpoint if present; throws ConfigError when it belongs to a
  /// different configuration.
  bool try_resume() {
    const auto path = checkpoint_path(cfg_, seed_);
    if (!std::filesystem::exists(path)) return false;
    std::ifstream is(path);
    std::string tag, fp;
    std::uint64_t seed = 0;
    int version = 0;
    if (!(is >> tag >> version) || tag != "sawsle-checkpoint" || version != 1) {
      throw std::runtime_error("bad checkpoint " + path.string());
    }
    if (!(is >> tag >> fp) || tag != "fingerprint") throw std::runtime_error("bad checkpoint " + path.string());
    if (fp != fingerprint(cfg_)) {
      throw ConfigError("checkpoint " + path.string() + " was written with a different configuration");
    }
    if (!(is >> tag >> seed) || tag != "seed" || seed != seed_) {
      throw ConfigError("checkpoint " + path.string() + " belongs to another seed");
    }
    if (!(is >> tag >> steps_) || tag != "steps") throw std::runtime_error("bad checkpoint " + path.string());
    chain_ = PivotChain::load(is, ChainOptions{cfg_.profile, cfg_.flush_threshold});
    for (auto& acc : accs_) {
      auto loaded = CdfAccumulator::load(is);
      if (!compatible(loaded, acc)) throw ConfigError("checkpoint accumulator mismatch in " + path.string());
      acc = std::move(loaded);
    }
    resumed_ = true;
    return true;
  }

  ChainOutput run() {
    const std::uint64_t total = cfg_.burn_in + cfg_.iterations;
    while (steps_ < total) {
      const bool accepted = chain_.step();
      ++steps_;
      if (accepted) dirty_ = true;
      if (steps_ > cfg_.burn_in && (steps_ - cfg_.burn_in) % cfg_.stride == 0) {
        if (dirty_) {
          flush_pending();
          remeasure();
        }
        ++pending_weight_;
      }
      if (cfg_.checkpoint_interval > 0 && steps_ % cfg_.checkpoint_interval == 0) checkpoint();
      if (cfg_.halt_after > 0 && steps_ >= cfg_.halt_after && steps_ < total) {
        flush_pending();
        if (cfg_.checkpoint_interval > 0) checkpoint();
        return output(false);
      }
    }
    flush_pending();
    if (cfg_.checkpoint_interval > 0) checkpoint();
    return output(true);
  }

 private:
  void remeasure() {
    values_.clear();
    passes_.clear();
    for (const auto& spec : cfg_.observables) {
      if (spec.kind == ObservableKind::PassRight) {
        passes_.push_back(pass_right(chain_, spec.scale(cfg_.n), spec.theta_grid));
        values_.push_back({});
      } else {
        values_.push_back(measure(chain_, spec));
        passes_.push_back({});
      }
    }
    dirty_ = false;
  }

  void flush_pending() {
    if (pending_weight_ == 0) return;
    for (std::size_t k = 0; k < accs_.size(); ++k) {
      if (cfg_.observables[k].kind == ObservableKind::PassRight) {
        accs_[k].record_profile(passes_[k], pending_weight_);
      } else {
        accs_[k].record(values_[k], pending_weight_);
      }
    }
    pending_weight_ = 0;
  }

  void checkpoint() {
    flush_pending();
    std::ostringstream os;
    os << "sawsle-checkpoint 1\n"
       << "fingerprint " << fingerprint(cfg_) << '\n'
       << "seed " << seed_ << '\n'
       << "steps " << steps_ << '\n';
    chain_.save(os);
    for (const auto& acc : accs_) acc.save(os);
    write_atomically(checkpoint_path(cfg_, seed_), os.str());
  }

  ChainOutput output(bool complete) const {
    ChainOutput out;
    out.report.seed = seed_;
    out.report.steps = steps_;
    out.report.iterations = chain_.iterations();
    out.report.accepted = chain_.accepted();
    out.report.complete = complete;
    out.report.resumed = resumed_;
    out.accumulators = accs_;
    return out;
  }

  const RunConfig& cfg_;
  std::uint64_t seed_;
  PivotChain chain_;
  std::vector<CdfAccumulator> accs_;
  std::vector<Measurement> values_;
  std::vector<PassResult> passes_;
  std::uint64_t steps_ = 0;
  std::uint64_t pending_weight_ = 0;
  bool dirty_ = true;
  bool resumed_ = false;
};

// ---------------------------------------------------------------------------
// Whole run.

struct RunResult {
  bool complete = false;
  std::vector<ChainReport> chains;
  std::vector<CdfAccumulator> merged;  // one per observable, seeds in config order
  std::vector<ComparisonCurve> curves;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;

  double acceptance_rate() const {
    std::uint64_t it = 0, acc = 0;
    for (const auto& c : chains) {
      it += c.iterations;
      acc += c.accepted;
    }
    return it ? static_cast<double>(acc) / static_cast<double>(it) : std::numeric_limits<double>::quiet_NaN();
  }
};

inline ComparisonCurve empty_curve(const CdfAccumulator& acc, const std::function<double(double)>& exact) {
  ComparisonCurve c;
  c.grid = acc.grid();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double t : c.grid) {
    c.empirical.push_back(nan);
    c.exact.push_back(exact(t));
    c.diff.push_back(nan);
    c.stderr_.push_back(nan);
  }
  c.ks = nan;
  c.samples = acc.samples();
  c.censored = acc.censored();
  return c;
}

inline std::vector<ChainOutput> run_chains(const RunConfig& cfg) {
  const std::size_t nchains = cfg.seeds.size();
  std::size_t nthreads = cfg.threads;
  if (nthreads == 0) nthreads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  nthreads = std::min(nthreads, nchains);

  std::vector<std::optional<ChainOutput>> results(nchains);
  std::vector<std::exception_ptr> errors(nchains);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < nchains; k = next++) {
      try {
        ChainWorker worker(cfg, cfg.seeds[k]);
        if (cfg.resume) worker.try_resume();
        results[k] = worker.run();
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<ChainOutput> out;
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

inline void add_metadata(ComparisonCurve& c, const RunConfig& cfg, const ObservableSpec& spec,
                         const CdfAccumulator& acc, double acceptance) {
  c.metadata = {
      {"observable", spec.id()},
      {"kind", std::string(to_string(spec.kind))},
      {"domain", std::string(to_string(cfg.domain))},
      {"N", std::to_string(cfg.n)},
      {"l", format_number(spec.l)},
      {"d", format_number(spec.d)},
      {"c", format_number(spec.scale(cfg.n))},
      {"iterations", std::to_string(cfg.iterations)},
      {"burn_in", std::to_string(cfg.burn_in)},
      {"stride", std::to_string(cfg.stride)},
      {"chains", std::to_string(cfg.seeds.size())},
      {"seed", detail::join_numbers(cfg.seeds)},
      {"profile", std::string(to_string(cfg.profile))},
      {"acceptance_rate", format_number(acceptance)},
      {"samples", std::to_string(acc.samples())},
      {"censored", std::to_string(acc.censored())},
      {"censored_never_reached", std::to_string(acc.never_reached())},
      {"censored_ends_inside", std::to_string(acc.ends_inside())},
      {"compared_against", exact_label(spec.kind)},
      {"ks", format_number(c.ks)},
      {"error_method", "batch means over " + std::to_string(acc.batches().size()) + " batches of " +
                           std::to_string(acc.batch_size()) + " iterations"},
  };
  if (spec.kind == ObservableKind::PassRight) {
    c.metadata.emplace_back("t_unit", cfg.domain == Domain::HalfPlane ? "theta/pi" : "theta/(2 pi)");
    c.metadata.emplace_back("point_on_walk", std::to_string(acc.through()));
    c.metadata.emplace_back("point_on_walk_rule", "counted half right, half left");
  }
}

/// Runs (or resumes) all chains and merges them. Files are written by
/// write_outputs.
inline RunResult simulate(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  std::filesystem::create_directories(cfg.output, ec);
  if (ec || !std::filesystem::is_directory(cfg.output)) {
    throw ConfigError("cannot create output directory '" + cfg.output + "'");
  }
  RunResult res;
  auto outputs = run_chains(cfg);
  res.complete = true;
  for (const auto& o : outputs) {
    res.chains.push_back(o.report);
    res.complete = res.complete && o.report.complete;
  }
  for (std::size_t k = 0; k < cfg.observables.size(); ++k) {
    CdfAccumulator acc = outputs.front().accumulators[k];
    for (std::size_t c = 1; c < outputs.size(); ++c) acc = merge(acc, outputs[c].accumulators[k]);
    res.merged.push_back(std::move(acc));
  }
  if (res.complete) {
    if (cfg.iterations == 0) res.warnings.push_back("zero iterations requested; curves are empty");
    const double rate = res.acceptance_rate();
    for (std::size_t k = 0; k < cfg.observables.size(); ++k) {
      const auto& spec = cfg.observables[k];
      const auto exact = exact_for(spec.kind, spec.d);
      ComparisonCurve curve;
      try {
        curve = finalize(res.merged[k], exact);
      } catch (const InsufficientSamples& e) {
        if (cfg.iterations > 0) res.warnings.push_back(e.what());
        curve = empty_curve(res.merged[k], exact);
      }
      add_metadata(curve, cfg, spec, res.merged[k], rate);
      res.curves.push_back(std::move(curve));
    }
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

inline std::string report_text(const RunConfig& cfg, const RunResult& res) {
  std::ostringstream os;
  os << "# sawsle run report\n\n[config]\n" << describe(cfg) << "\n[status]\n"
     << "complete = " << (res.complete ? "true" : "false") << '\n'
     << "wall_seconds = " << format_number(res.wall_seconds) << '\n'
     << "acceptance_rate = " << format_number(res.acceptance_rate()) << '\n';
  for (const auto& c : res.chains) {
    os << "chain seed=" << c.seed << " steps=" << c.steps << " accepted=" << c.accepted
       << " rate=" << format_number(c.iterations ? double(c.accepted) / double(c.iterations) : 0.0)
       << (c.resumed ? " resumed" : "") << (c.complete ? "" : " incomplete") << '\n';
  }
  os << "\n[observables]\n";
  for (std::size_t k = 0; k < res.merged.size(); ++k) {
    const auto& a = res.merged[k];
    const std::uint64_t tot = a.samples() + a.censored();
    os << a.id() << ": samples=" << a.samples() << " censored=" << a.censored()
       << " (never_reached=" << a.never_reached() << ", ends_inside=" << a.ends_inside() << ")"
       << " censor_fraction=" << format_number(tot ? double(a.censored()) / double(tot) : 0.0);
    if (a.mode() == CdfAccumulator::Mode::Profile) os << " point_on_walk=" << a.through();
    if (k < res.curves.size()) os << " max_abs_diff=" << format_number(res.curves[k].ks);
    os << '\n';
  }
  if (!res.warnings.empty()) {
    os << "\n[warnings]\n";
    for (const auto& w : res.warnings) os << w << '\n';
  }
  return os.str();
}

inline std::filesystem::path csv_path(const RunConfig& cfg, const std::string& id) {
  return std::filesystem::path(cfg.output) / (id + ".csv");
}

inline void write_outputs(const RunConfig& cfg, const RunResult& res) {
  for (std::size_t k = 0; k < res.curves.size(); ++k) {
    std::ostringstream os;
    write_csv(os, res.curves[k]);
    write_atomically(csv_path(cfg, cfg.observables[k].id()), os.str());
  }
  write_atomically(std::filesystem::path(cfg.output) / "report.txt", report_text(cfg, res));
}

}  // namespace sawsle

#endif  // SAWSLE_RUN_HPP
