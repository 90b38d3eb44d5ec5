#ifndef SAWSLE_STATS_HPP
#define SAWSLE_STATS_HPP

// Empirical CDFs on a fixed grid with batch-means error bars, and their
// comparison against an exact or reference curve.

#include "sawsle/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sawsle {

class InsufficientSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace grids {

inline std::vector<double> sinh_spaced(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  const double ulo = std::asinh(lo), uhi = std::asinh(hi);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = std::sinh(ulo + (uhi - ulo) * static_cast<double>(k) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

/// [-20, 4], 200 points, densest around 0.
inline std::vector<double> x_grid() { return sinh_spaced(-20.0, 4.0, 200); }

/// [0, 20], 200 points, densest near 0.
inline std::vector<double> y_grid() { return sinh_spaced(0.0, 20.0, 200); }

/// 0.01, 0.02, ..., 1.00
inline std::vector<double> theta_grid() {
  std::vector<double> out(100);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = static_cast<double>(k + 1) / 100.0;
  return out;
}

/// Normalized angles 0.01, ..., 0.99 (angle / pi in the half-plane, angle /
/// 2 pi in the cut-plane).
inline std::vector<double> pass_right_grid() {
  std::vector<double> out(99);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = static_cast<double>(k + 1) / 100.0;
  return out;
}

inline std::vector<double> for_kind(ObservableKind kind) {
  switch (kind) {
    case ObservableKind::Xe:
    case ObservableKind::Xf: return x_grid();
    case ObservableKind::Ye:
    case ObservableKind::Yf: return y_grid();
    case ObservableKind::ThetaE:
    case ObservableKind::ThetaF: return theta_grid();
    case ObservableKind::PassRight: return pass_right_grid();
  }
  return {};
}

}  // namespace grids

/// Per-grid-point tallies split into consecutive batches of `batch_size`
/// iterations.
///
/// In Cdf mode each recorded value v contributes to every grid point
/// t_k >= v; internally only the bin of v is counted and the tallies are
/// prefix sums. In Profile mode every grid point gets its own outcome
/// (passing-right indicators), tallied in half units: Right counts 2,
/// Through 1, Left 0.
class CdfAccumulator {
 public:
  enum class Mode { Cdf, Profile };

  struct Batch {
    std::vector<std::uint64_t> bins;  // Cdf: grid.size() + 1 bins; Profile: grid.size()
    std::uint64_t samples = 0;
    std::uint64_t censored = 0;
    std::uint64_t iterations = 0;

    friend bool operator==(const Batch&, const Batch&) = default;
  };

  CdfAccumulator() = default;

  CdfAccumulator(std::string id, std::vector<double> grid, std::uint64_t batch_size,
                 Mode mode = Mode::Cdf)
      : id_(std::move(id)), grid_(std::move(grid)), batch_size_(batch_size), mode_(mode) {
    if (grid_.empty()) throw std::invalid_argument("CdfAccumulator: empty grid");
    if (!std::is_sorted(grid_.begin(), grid_.end()) ||
        std::adjacent_find(grid_.begin(), grid_.end()) != grid_.end()) {
      throw std::invalid_argument("CdfAccumulator: grid must be strictly increasing");
    }
    if (batch_size_ < 1) throw std::invalid_argument("CdfAccumulator: batch size must be >= 1");
  }

  const std::string& id() const { return id_; }
  const std::vector<double>& grid() const { return grid_; }
  Mode mode() const { return mode_; }
  std::uint64_t batch_size() const { return batch_size_; }
  const std::vector<Batch>& batches() const { return batches_; }

  std::uint64_t samples() const { return sum(&Batch::samples); }
  std::uint64_t censored() const { return sum(&Batch::censored); }
  std::uint64_t iterations() const { return sum(&Batch::iterations); }
  std::uint64_t never_reached() const { return never_reached_; }
  std::uint64_t ends_inside() const { return ends_inside_; }
  /// Profile mode: samples in which some point lay on the walk.
  std::uint64_t through() const { return through_; }
  /// Tally units per sample: 2 in Profile mode, 1 otherwise.
  std::uint64_t units() const { return mode_ == Mode::Profile ? 2 : 1; }

  /// Records the same measurement for `weight` consecutive iterations.
  void record(const Measurement& m, std::uint64_t weight = 1) {
    if (mode_ != Mode::Cdf) throw std::logic_error("CdfAccumulator: record() on a profile accumulator");
    std::size_t bin = 0;
    if (!m.censored()) {
      bin = static_cast<std::size_t>(std::lower_bound(grid_.begin(), grid_.end(), m.value) - grid_.begin());
    }
    count_censor(m.censor, weight);
    spread(weight, [&](Batch& b, std::uint64_t w) {
      if (m.censored()) {
        b.censored += w;
      } else {
        b.bins[bin] += w;
        b.samples += w;
      }
    });
  }

  /// Records one 0/1 outcome per grid point for `weight` iterations.
  void record_profile(const PassResult& r, std::uint64_t weight = 1) {
    if (mode_ != Mode::Profile) throw std::logic_error("CdfAccumulator: record_profile() on a CDF accumulator");
    const bool censored = r.censor != Censor::None;
    if (!censored && r.sides.size() != grid_.size()) {
      throw std::invalid_argument("CdfAccumulator: outcome count does not match grid");
    }
    count_censor(r.censor, weight);
    if (!censored && std::find(r.sides.begin(), r.sides.end(), Side::Through) != r.sides.end()) {
      through_ += weight;
    }
    spread(weight, [&](Batch& b, std::uint64_t w) {
      if (censored) {
        b.censored += w;
        return;
      }
      for (std::size_t k = 0; k < grid_.size(); ++k) {
        if (r.sides[k] == Side::Right) b.bins[k] += 2 * w;
        if (r.sides[k] == Side::Through) b.bins[k] += w;
      }
      b.samples += w;
    });
  }

  /// Tally of samples <= t_k (Cdf) or of passing-right half units (Profile),
  /// summed over batches.
  std::vector<std::uint64_t> tallies() const {
    std::vector<std::uint64_t> out(grid_.size(), 0);
    for (const auto& b : batches_) {
      const auto t = batch_tallies(b);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += t[k];
    }
    return out;
  }

  std::vector<std::uint64_t> batch_tallies(const Batch& b) const {
    std::vector<std::uint64_t> out(grid_.size(), 0);
    if (mode_ == Mode::Profile) {
      std::copy(b.bins.begin(), b.bins.end(), out.begin());
      return out;
    }
    std::uint64_t run = 0;
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      run += b.bins[k];
      out[k] = run;
    }
    return out;
  }

  friend bool compatible(const CdfAccumulator& a, const CdfAccumulator& b) {
    return a.id_ == b.id_ && a.grid_ == b.grid_ && a.batch_size_ == b.batch_size_ && a.mode_ == b.mode_;
  }

  /// Batches of b appended after those of a.
  friend CdfAccumulator merge(const CdfAccumulator& a, const CdfAccumulator& b) {
    if (!compatible(a, b)) throw std::invalid_argument("merge: accumulators differ in id, grid or batching");
    CdfAccumulator out = a;
    out.batches_.insert(out.batches_.end(), b.batches_.begin(), b.batches_.end());
    out.never_reached_ += b.never_reached_;
    out.ends_inside_ += b.ends_inside_;
    out.through_ += b.through_;
    return out;
  }

  void save(std::ostream& os) const {
    os << "accumulator " << id_ << ' ' << (mode_ == Mode::Cdf ? "cdf" : "profile") << ' ' << batch_size_
       << ' ' << grid_.size() << ' ' << batches_.size() << ' ' << never_reached_ << ' ' << ends_inside_
       << ' ' << through_ << '\n';
    char buf[40];
    for (double t : grid_) {
      std::snprintf(buf, sizeof buf, "%a ", t);
      os << buf;
    }
    os << '\n';
    for (const auto& b : batches_) {
      os << b.samples << ' ' << b.censored << ' ' << b.iterations;
      for (auto v : b.bins) os << ' ' << v;
      os << '\n';
    }
  }

  static CdfAccumulator load(std::istream& is) {
    std::string tag, id, mode;
    std::uint64_t batch_size = 0, grid_size = 0, nbatches = 0;
    CdfAccumulator acc;
    if (!(is >> tag >> id >> mode >> batch_size >> grid_size >> nbatches >> acc.never_reached_ >>
          acc.ends_inside_ >> acc.through_) ||
        tag != "accumulator") {
      throw std::runtime_error("CdfAccumulator::load: bad header");
    }
    std::vector<double> grid(grid_size);
    for (auto& t : grid) {
      std::string tok;
      if (!(is >> tok)) throw std::runtime_error("CdfAccumulator::load: truncated grid");
      t = std::strtod(tok.c_str(), nullptr);
    }
    CdfAccumulator out(id, std::move(grid), batch_size, mode == "cdf" ? Mode::Cdf : Mode::Profile);
    out.never_reached_ = acc.never_reached_;
    out.ends_inside_ = acc.ends_inside_;
    out.through_ = acc.through_;
    const std::size_t nbins = out.bins_per_batch();
    for (std::uint64_t k = 0; k < nbatches; ++k) {
      Batch b;
      b.bins.resize(nbins);
      if (!(is >> b.samples >> b.censored >> b.iterations)) {
        throw std::runtime_error("CdfAccumulator::load: truncated batch");
      }
      for (auto& v : b.bins) {
        if (!(is >> v)) throw std::runtime_error("CdfAccumulator::load: truncated batch");
      }
      out.batches_.push_back(std::move(b));
    }
    return out;
  }

  friend bool operator==(const CdfAccumulator&, const CdfAccumulator&) = default;

 private:
  std::size_t bins_per_batch() const { return mode_ == Mode::Cdf ? grid_.size() + 1 : grid_.size(); }

  std::uint64_t sum(std::uint64_t Batch::*field) const {
    std::uint64_t s = 0;
    for (const auto& b : batches_) s += b.*field;
    return s;
  }

  void count_censor(Censor c, std::uint64_t w) {
    if (c == Censor::NeverReached) never_reached_ += w;
    if (c == Censor::EndsInside) ends_inside_ += w;
  }

  template <class Fn>
  void spread(std::uint64_t weight, Fn&& add) {
    while (weight > 0) {
      if (batches_.empty() || batches_.back().iterations >= batch_size_) {
        batches_.push_back(Batch{std::vector<std::uint64_t>(bins_per_batch(), 0), 0, 0, 0});
      }
      Batch& b = batches_.back();
      const std::uint64_t take = std::min(weight, batch_size_ - b.iterations);
      add(b, take);
      b.iterations += take;
      weight -= take;
    }
  }

  std::string id_;
  std::vector<double> grid_;
  std::uint64_t batch_size_ = 1;
  Mode mode_ = Mode::Cdf;
  std::vector<Batch> batches_;
  std::uint64_t never_reached_ = 0;
  std::uint64_t ends_inside_ = 0;
  std::uint64_t through_ = 0;
};

struct ComparisonCurve {
  std::vector<double> grid;
  std::vector<double> empirical;
  std::vector<double> exact;
  std::vector<double> diff;
  std::vector<double> stderr_;
  double ks = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t censored = 0;
  std::size_t batches_used = 0;
  std::vector<std::pair<std::string, std::string>> metadata;

  std::string meta(const std::string& key, const std::string& fallback = "") const {
    for (const auto& [k, v] : metadata) {
      if (k == key) return v;
    }
    return fallback;
  }
};

/// Empirical curve against `exact`, with batch-means standard errors:
/// sd over batches of the per-batch curve, divided by sqrt(#batches).
inline ComparisonCurve finalize(const CdfAccumulator& acc, const std::function<double(double)>& exact) {
  std::vector<std::vector<double>> batch_curves;
  for (const auto& b : acc.batches()) {
    if (b.samples == 0) continue;
    const auto t = acc.batch_tallies(b);
    std::vector<double> f(t.size());
    const double denom = static_cast<double>(b.samples * acc.units());
    for (std::size_t k = 0; k < t.size(); ++k) f[k] = static_cast<double>(t[k]) / denom;
    batch_curves.push_back(std::move(f));
  }
  const std::uint64_t total = acc.samples();
  if (batch_curves.size() < 2 || total < batch_curves.size()) {
    throw InsufficientSamples("finalize: " + acc.id() + " has too few samples for batch means (" +
                              std::to_string(total) + " samples in " + std::to_string(batch_curves.size()) +
                              " non-empty batches)");
  }

  ComparisonCurve out;
  out.grid = acc.grid();
  out.samples = total;
  out.censored = acc.censored();
  out.batches_used = batch_curves.size();
  const auto tallies = acc.tallies();
  const std::size_t m = out.grid.size();
  const double nb = static_cast<double>(batch_curves.size());
  out.empirical.resize(m);
  out.exact.resize(m);
  out.diff.resize(m);
  out.stderr_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    out.empirical[k] = static_cast<double>(tallies[k]) / static_cast<double>(total * acc.units());
    out.exact[k] = exact(out.grid[k]);
    out.diff[k] = out.empirical[k] - out.exact[k];
    double mean = 0.0;
    for (const auto& f : batch_curves) mean += f[k];
    mean /= nb;
    double ss = 0.0;
    for (const auto& f : batch_curves) ss += (f[k] - mean) * (f[k] - mean);
    out.stderr_[k] = std::sqrt(ss / (nb - 1.0)) / std::sqrt(nb);
    out.ks = std::max(out.ks, std::abs(out.diff[k]));
  }
  return out;
}

// CSV: comment-prefixed "# key: value" lines, then t,empirical,exact,diff,stderr.

inline void write_csv(std::ostream& os, const ComparisonCurve& c) {
  for (const auto& [k, v] : c.metadata) os << "# " << k << ": " << v << '\n';
  os << "t,empirical,exact,diff,stderr\n";
  char buf[160];
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", c.grid[k], c.empirical[k], c.exact[k],
                  c.diff[k], c.stderr_[k]);
    os << buf;
  }
}

inline ComparisonCurve read_csv(std::istream& is) {
  ComparisonCurve c;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto colon = line.find(": ");
      if (colon != std::string::npos) c.metadata.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
      continue;
    }
    if (!header_seen) {
      if (line != "t,empirical,exact,diff,stderr") throw std::runtime_error("read_csv: unexpected column header");
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    double v[5];
    for (int k = 0; k < 5; ++k) {
      std::string tok;
      if (!std::getline(row, tok, ',')) throw std::runtime_error("read_csv: short row");
      v[k] = std::strtod(tok.c_str(), nullptr);
    }
    c.grid.push_back(v[0]);
    c.empirical.push_back(v[1]);
    c.exact.push_back(v[2]);
    c.diff.push_back(v[3]);
    c.stderr_.push_back(v[4]);
  }
  if (!header_seen) throw std::runtime_error("read_csv: no column header");
  for (double d : c.diff) {
    if (std::isfinite(d)) c.ks = std::max(c.ks, std::abs(d));
  }
  return c;
}

/// Recomputes the exact column and differences of an existing curve.
inline void rediff(ComparisonCurve& c, const std::function<double(double)>& exact) {
  c.ks = 0.0;
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    c.exact[k] = exact(c.grid[k]);
    c.diff[k] = c.empirical[k] - c.exact[k];
    if (std::isfinite(c.diff[k])) c.ks = std::max(c.ks, std::abs(c.diff[k]));
  }
}

/// Two empirical curves on the same grid: difference and combined standard error.
struct TwoSampleComparison {
  std::vector<double> grid;
  std::vector<double> diff;
  std::vector<double> sigma;
  double max_abs_diff = 0.0;
  double max_z = 0.0;
};

inline TwoSampleComparison compare_empirical(const ComparisonCurve& a, const ComparisonCurve& b,
                                             double lo_fraction = 0.0, double hi_fraction = 1.0) {
  if (a.grid != b.grid) throw std::invalid_argument("compare_empirical: grids differ");
  TwoSampleComparison out;
  const std::size_t m = a.grid.size();
  const auto first = static_cast<std::size_t>(std::floor(lo_fraction * static_cast<double>(m)));
  const auto last = static_cast<std::size_t>(std::ceil(hi_fraction * static_cast<double>(m)));
  for (std::size_t k = first; k < std::min(last, m); ++k) {
    out.grid.push_back(a.grid[k]);
    const double d = a.empirical[k] - b.empirical[k];
    const double s = std::hypot(a.stderr_[k], b.stderr_[k]);
    out.diff.push_back(d);
    out.sigma.push_back(s);
    out.max_abs_diff = std::max(out.max_abs_diff, std::abs(d));
    if (s > 0.0) out.max_z = std::max(out.max_z, std::abs(d) / s);
    else if (d != 0.0) out.max_z = std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace sawsle

#endif  // SAWSLE_STATS_HPP
