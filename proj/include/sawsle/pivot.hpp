#ifndef SAWSLE_PIVOT_HPP
#define SAWSLE_PIVOT_HPP

// The pivot Markov chain on fixed-length self-avoiding walks in the half-plane
// or cut-plane.
//
// Accepted pivots are not carried out immediately. They are queued as affine
// maps and only materialized when the queue reaches the flush threshold;
// site(i) evaluates the walk through the queue. The acceptance test never
// walks the whole new configuration pair by pair: two sites whose lattice
// L1 distance is d > 0 rule out any coincidence between sites whose indices
// differ from theirs by fewer than d steps in total, so blocks of index pairs
// are certified at once and only subdivided when the bound is too weak.

#include "sawsle/lattice.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sawsle {

enum class SiteProfile { Uniform, Piecewise };

inline std::string_view to_string(SiteProfile p) {
  return p == SiteProfile::Uniform ? "uniform" : "piecewise";
}

/// Distribution of the pivot index over [0, N).
///
/// Piecewise: weight 8 on [0, N/5), 4 on [N/5, 2N/5), 2 on [2N/5, 3N/5) and
/// 1 on [3N/5, N). The weights are normalized by their exact total, which is
/// 16N/5 when 5 divides N.
class SiteDistribution {
 public:
  SiteDistribution(std::int64_t n, SiteProfile profile) : n_(n), profile_(profile) {
    if (n < 1) throw std::invalid_argument("SiteDistribution: N must be positive");
    if (profile == SiteProfile::Uniform) {
      blocks_.push_back({0, n, 1});
    } else {
      constexpr std::array<std::uint64_t, 4> weights = {8, 4, 2, 1};
      const auto fifth = [n](std::int64_t k) { return (k * n + 4) / 5; };  // ceil(kN/5)
      const std::array<std::int64_t, 5> bounds = {0, fifth(1), fifth(2), fifth(3), n};
      for (std::size_t b = 0; b < 4; ++b) {
        if (bounds[b + 1] > bounds[b]) blocks_.push_back({bounds[b], bounds[b + 1], weights[b]});
      }
    }
    std::uint64_t cum = 0;
    for (auto& blk : blocks_) {
      blk.cum_start = cum;
      cum += blk.weight * static_cast<std::uint64_t>(blk.end - blk.start);
    }
    total_weight_ = cum;
  }

  std::int64_t size() const { return n_; }
  SiteProfile profile() const { return profile_; }

  /// Unit weight c; p(i) is c times the block weight.
  double unit() const { return 1.0 / static_cast<double>(total_weight_); }

  std::uint64_t weight(std::int64_t i) const {
    for (const auto& blk : blocks_) {
      if (i >= blk.start && i < blk.end) return blk.weight;
    }
    throw std::out_of_range("SiteDistribution: index out of range");
  }

  double probability(std::int64_t i) const {
    return static_cast<double>(weight(i)) / static_cast<double>(total_weight_);
  }

  template <class Rng>
  std::int64_t sample(Rng& rng) const {
    std::uniform_int_distribution<std::uint64_t> draw(0, total_weight_ - 1);
    const std::uint64_t r = draw(rng);
    for (const auto& blk : blocks_) {
      const std::uint64_t span = blk.weight * static_cast<std::uint64_t>(blk.end - blk.start);
      if (r < blk.cum_start + span) {
        return blk.start + static_cast<std::int64_t>((r - blk.cum_start) / blk.weight);
      }
    }
    return n_ - 1;
  }

 private:
  struct Block {
    std::int64_t start;
    std::int64_t end;
    std::uint64_t weight;
    std::uint64_t cum_start = 0;
  };

  std::int64_t n_;
  SiteProfile profile_;
  std::vector<Block> blocks_;
  std::uint64_t total_weight_ = 0;
};

struct PivotProposal {
  std::int64_t site = 0;
  Symmetry g;

  friend bool operator==(const PivotProposal&, const PivotProposal&) = default;
};

/// The seven non-identity group elements; proposals draw uniformly from them.
inline constexpr std::array<Symmetry, 7> proposal_symmetries() {
  const auto all = Symmetry::all();
  return {all[1], all[2], all[3], all[4], all[5], all[6], all[7]};
}

struct ChainOptions {
  SiteProfile profile = SiteProfile::Piecewise;
  std::size_t flush_threshold = 32;
};

/// p -> m p + t
struct Affine {
  Symmetry m;
  Point t;

  constexpr Point operator()(Point p) const { return m.linear(p) + t; }

  /// (*this) after `inner`
  constexpr Affine after(const Affine& inner) const { return {m * inner.m, m.linear(inner.t) + t}; }

  static constexpr Affine pivot_map(const Symmetry& g, Point pivot) {
    return {g, pivot - g.linear(pivot)};
  }
};

class PivotChain {
 public:
  using Engine = std::mt19937_64;

  PivotChain(Domain domain, std::int64_t length, std::uint64_t seed, ChainOptions options = {})
      : PivotChain(domain, Walk::straight(length), seed, options) {}

  PivotChain(Domain domain, Walk start, std::uint64_t seed, ChainOptions options = {})
      : domain_(domain),
        walk_(std::move(start)),
        sites_dist_(walk_.length(), options.profile),
        options_(options),
        rng_(seed) {
    if (walk_.length() < 1) throw std::invalid_argument("PivotChain: walk length must be >= 1");
    if (options_.flush_threshold < 1) {
      throw std::invalid_argument("PivotChain: flush threshold must be >= 1");
    }
    if (auto err = validate(walk_, domain_)) {
      throw std::invalid_argument("PivotChain: invalid start walk: " + *err);
    }
    pending_.reserve(options_.flush_threshold);
  }

  Domain domain() const { return domain_; }
  std::int64_t length() const { return walk_.length(); }
  const ChainOptions& options() const { return options_; }
  const SiteDistribution& site_distribution() const { return sites_dist_; }

  std::uint64_t iterations() const { return iterations_; }
  std::uint64_t accepted() const { return accepted_; }
  std::size_t pending_count() const { return pending_.size(); }

  /// i-th site with every pending pivot applied.
  Point site(std::int64_t i) const {
    if (i < 0 || i > length()) throw std::out_of_range("PivotChain::site: index out of range");
    return site_unchecked(i);
  }

  PivotProposal propose() {
    static constexpr auto kSymmetries = proposal_symmetries();
    const std::int64_t i = sites_dist_.sample(rng_);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(kSymmetries.size()) - 1);
    return {i, kSymmetries[static_cast<std::size_t>(pick(rng_))]};
  }

  /// True iff pivoting sites prop.site+1..N about site prop.site gives a
  /// self-avoiding walk inside the domain.
  bool accept_test(const PivotProposal& prop) const {
    if (prop.site < 0 || prop.site >= length()) {
      throw std::out_of_range("PivotChain::accept_test: pivot index out of range");
    }
    const MovedView view{*this, prop.site, Affine::pivot_map(prop.g, site_unchecked(prop.site))};
    return moved_part_in_domain(view) && parts_disjoint(view);
  }

  /// One Metropolis step. Rejected proposals leave the walk untouched.
  bool step() {
    ++iterations_;
    const PivotProposal prop = propose();
    if (!accept_test(prop)) return false;
    push_pending(prop);
    ++accepted_;
    return true;
  }

  /// Queues a pivot already known to be valid.
  void apply(const PivotProposal& prop) {
    if (prop.site < 0 || prop.site >= length()) {
      throw std::out_of_range("PivotChain::apply: pivot index out of range");
    }
    push_pending(prop);
  }

  /// Index of the smallest site affected by the most recent pivot.
  std::int64_t last_pivot_site() const { return last_pivot_site_; }

  void flush() {
    if (pending_.empty()) return;
    auto& sites = walk_.sites();
    for (std::size_t s = 0; s < segment_starts_.size(); ++s) {
      const std::int64_t lo = segment_starts_[s] + 1;
      const std::int64_t hi = s + 1 < segment_starts_.size() ? segment_starts_[s + 1] : length();
      const Affine& map = segment_maps_[s];
      for (std::int64_t j = lo; j <= hi; ++j) sites[static_cast<std::size_t>(j)] = map(sites[static_cast<std::size_t>(j)]);
    }
    pending_.clear();
    segment_starts_.clear();
    segment_maps_.clear();
  }

  /// Materialized copy of the current walk.
  Walk walk() const {
    Walk out = walk_;
    for (std::int64_t j = 0; j <= length(); ++j) out[static_cast<std::size_t>(j)] = site_unchecked(j);
    return out;
  }

  /// Stored walk; equals walk() only after flush().
  const Walk& stored_walk() const { return walk_; }

  Engine& engine() { return rng_; }

  /// Chain state as text: domain, N, counters, engine state and flushed walk.
  void save(std::ostream& os) {
    flush();
    os << "chain " << to_string(domain_) << ' ' << length() << '\n';
    os << "iterations " << iterations_ << '\n';
    os << "accepted " << accepted_ << '\n';
    os << "rng " << rng_ << '\n';
    write_walk(os, walk_, domain_);
  }

  static PivotChain load(std::istream& is, ChainOptions options) {
    std::string tag, domain_name, rng_tag;
    std::int64_t n = 0;
    std::uint64_t iters = 0, acc = 0;
    if (!(is >> tag >> domain_name >> n) || tag != "chain") {
      throw std::runtime_error("PivotChain::load: missing chain header");
    }
    if (!(is >> tag >> iters) || tag != "iterations" || !(is >> tag >> acc) || tag != "accepted") {
      throw std::runtime_error("PivotChain::load: missing counters");
    }
    Engine engine;
    if (!(is >> rng_tag >> engine) || rng_tag != "rng") {
      throw std::runtime_error("PivotChain::load: bad engine state");
    }
    auto [walk, domain] = read_walk(is);
    if (to_string(domain) != domain_name || walk.length() != n) {
      throw std::runtime_error("PivotChain::load: walk does not match chain header");
    }
    PivotChain chain(domain, std::move(walk), 0, options);
    chain.rng_ = engine;
    chain.iterations_ = iters;
    chain.accepted_ = acc;
    return chain;
  }

 private:
  struct MovedView {
    const PivotChain& chain;
    std::int64_t pivot;
    Affine map;

    Point fixed(std::int64_t a) const { return chain.site_unchecked(pivot - a); }
    Point moved(std::int64_t b) const { return map(chain.site_unchecked(pivot + b)); }
  };

  struct Range {
    std::int64_t lo, hi;
  };

  struct Rect {
    std::int64_t a_lo, a_hi, b_lo, b_hi;
  };

  Point site_unchecked(std::int64_t i) const {
    if (segment_starts_.empty() || i <= segment_starts_.front()) {
      return walk_[static_cast<std::size_t>(i)];
    }
    // Segment s covers indices (segment_starts_[s], segment_starts_[s+1]].
    const auto it = std::lower_bound(segment_starts_.begin(), segment_starts_.end(), i);
    const auto s = static_cast<std::size_t>(it - segment_starts_.begin()) - 1;
    return segment_maps_[s](walk_[static_cast<std::size_t>(i)]);
  }

  void push_pending(const PivotProposal& prop) {
    if (pending_.size() >= options_.flush_threshold) flush();
    const Affine map = Affine::pivot_map(prop.g, site_unchecked(prop.site));
    pending_.push_back({prop.site, map});
    last_pivot_site_ = prop.site;
    rebuild_segments();
  }

  void rebuild_segments() {
    segment_starts_.clear();
    for (const auto& p : pending_) segment_starts_.push_back(p.site);
    std::sort(segment_starts_.begin(), segment_starts_.end());
    segment_starts_.erase(std::unique(segment_starts_.begin(), segment_starts_.end()),
                          segment_starts_.end());
    segment_maps_.assign(segment_starts_.size(), Affine{Symmetry::identity(), Point{0, 0}});
    for (std::size_t s = 0; s < segment_starts_.size(); ++s) {
      // Maps queued for sites below this segment act on it, in queue order.
      Affine acc{Symmetry::identity(), Point{0, 0}};
      for (const auto& p : pending_) {
        if (p.site <= segment_starts_[s]) acc = p.map.after(acc);
      }
      segment_maps_[s] = acc;
    }
  }

  bool moved_part_in_domain(const MovedView& view) const {
    const std::int64_t count = length() - view.pivot;
    std::array<Range, 160> stack;
    std::size_t top = 0;
    stack[top++] = {1, count};
    while (top > 0) {
      const Range r = stack[--top];
      const std::int64_t mid = r.lo + (r.hi - r.lo) / 2;
      const std::int64_t margin = steps_to_boundary(domain_, view.moved(mid));
      if (margin == 0) return false;
      if (std::max(mid - r.lo, r.hi - mid) < margin) continue;
      if (mid + 1 <= r.hi) stack[top++] = {mid + 1, r.hi};
      if (r.lo <= mid - 1) stack[top++] = {r.lo, mid - 1};
    }
    return true;
  }

  bool parts_disjoint(const MovedView& view) const {
    std::array<Rect, 160> stack;
    std::size_t top = 0;
    stack[top++] = {0, view.pivot, 1, length() - view.pivot};
    while (top > 0) {
      const Rect r = stack[--top];
      const std::int64_t a = r.a_lo + (r.a_hi - r.a_lo) / 2;
      const std::int64_t b = r.b_lo + (r.b_hi - r.b_lo) / 2;
      const std::int64_t d = l1_distance(view.fixed(a), view.moved(b));
      if (d == 0) return false;
      const std::int64_t reach = std::max(a - r.a_lo, r.a_hi - a) + std::max(b - r.b_lo, r.b_hi - b);
      if (reach < d) continue;
      // Split the longer side; the half nearer the pivot is examined first.
      if (r.a_hi - r.a_lo >= r.b_hi - r.b_lo) {
        stack[top++] = {a + 1, r.a_hi, r.b_lo, r.b_hi};
        stack[top++] = {r.a_lo, a, r.b_lo, r.b_hi};
      } else {
        stack[top++] = {r.a_lo, r.a_hi, b + 1, r.b_hi};
        stack[top++] = {r.a_lo, r.a_hi, r.b_lo, b};
      }
    }
    return true;
  }

  struct Pending {
    std::int64_t site;
    Affine map;
  };

  Domain domain_;
  Walk walk_;
  SiteDistribution sites_dist_;
  ChainOptions options_;
  Engine rng_;
  std::vector<Pending> pending_;
  std::vector<std::int64_t> segment_starts_;
  std::vector<Affine> segment_maps_;
  std::uint64_t iterations_ = 0;
  std::uint64_t accepted_ = 0;
  std::int64_t last_pivot_site_ = 0;
};

}  // namespace sawsle

#endif  // SAWSLE_PIVOT_HPP
