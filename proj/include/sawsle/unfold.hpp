#ifndef SAWSLE_UNFOLD_HPP
#define SAWSLE_UNFOLD_HPP

// Exhaustive enumeration of short walks and the constructive unfolding of any
// walk into the straight vertical walk by domain-preserving pivots. Together
// with reversibility of pivots this shows every pair of walks is connected.

#include "sawsle/lattice.hpp"
#include "sawsle/pivot.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace sawsle {

/// Calls visit(walk) for every self-avoiding walk of exactly `length` steps
/// that stays in the domain.
inline void enumerate_walks(std::int64_t length, Domain domain,
                            const std::function<void(const Walk&)>& visit) {
  if (length < 0) throw std::invalid_argument("enumerate_walks: negative length");
  constexpr std::array<Point, 4> steps = {Point{0, 1}, Point{1, 0}, Point{0, -1}, Point{-1, 0}};
  std::vector<Point> sites(static_cast<std::size_t>(length) + 1);
  std::unordered_set<Point, PointHash> occupied{Point{0, 0}};

  std::function<void(std::int64_t)> extend = [&](std::int64_t k) {
    if (k == length) {
      visit(Walk(sites));
      return;
    }
    for (const Point s : steps) {
      const Point next = sites[static_cast<std::size_t>(k)] + s;
      if (!domain_contains(domain, next, k + 1) || occupied.count(next)) continue;
      sites[static_cast<std::size_t>(k) + 1] = next;
      occupied.insert(next);
      extend(k + 1);
      occupied.erase(next);
    }
  };
  extend(0);
}

inline std::vector<Walk> all_walks(std::int64_t length, Domain domain) {
  std::vector<Walk> out;
  enumerate_walks(length, domain, [&](const Walk& w) { out.push_back(w); });
  return out;
}

inline std::int64_t count_turns(const Walk& w) {
  std::int64_t turns = 0;
  for (std::size_t i = 1; i + 1 < w.size(); ++i) {
    if (w[i] - w[i - 1] != w[i + 1] - w[i]) ++turns;
  }
  return turns;
}

namespace detail {

inline bool is_straight(const Walk& w) { return count_turns(w) == 0; }

// Largest index whose site maximizes key(site).
template <class Key>
std::size_t last_argmax(const Walk& w, Key key) {
  std::size_t best = 0;
  auto best_val = key(w[0]);
  for (std::size_t i = 1; i < w.size(); ++i) {
    const auto v = key(w[i]);
    if (v >= best_val) {
      best_val = v;
      best = i;
    }
  }
  return best;
}

// One unfolding move for a walk that is not straight up.
inline PivotProposal unfold_move(const Walk& w, Domain domain) {
  const std::size_t n = w.size() - 1;

  if (is_straight(w)) {
    // Straight walk pointing left or down (cut-plane only): turn it upward.
    const Point dir = w[1] - w[0];
    for (const Symmetry& g : Symmetry::all()) {
      if (g.linear(dir) == Point{0, 1} && (g == Symmetry::rot90() || g == Symmetry::rot180() ||
                                           g == Symmetry::rot270())) {
        return {0, g};
      }
    }
    throw std::logic_error("unfold: straight walk with unexpected direction");
  }

  const Point last = w[n] - w[n - 1];

  if (last == Point{1, 0}) {
    // Reflect the tail in the extremal line y - x = l.
    const auto i = last_argmax(w, [](Point p) { return std::int64_t{p.y} - p.x; });
    return {static_cast<std::int64_t>(i), Symmetry::reflect_diag()};
  }

  if (last == Point{-1, 0}) {
    if (domain == Domain::HalfPlane) {
      const auto i = last_argmax(w, [](Point p) { return std::int64_t{p.y} + p.x; });
      return {static_cast<std::int64_t>(i), Symmetry::reflect_antidiag()};
    }
    // Extremal corner (l, 0) of the wedge x + |y| <= l; reflect in whichever
    // of x - y = l, x + y = l passes through the pivot.
    const auto i = last_argmax(w, [](Point p) {
      return std::int64_t{p.x} + (p.y < 0 ? -std::int64_t{p.y} : std::int64_t{p.y});
    });
    const Symmetry g = w[i].y > 0 ? Symmetry::reflect_antidiag() : Symmetry::reflect_diag();
    return {static_cast<std::int64_t>(i), g};
  }

  // Vertical last step.
  const std::int32_t x0 = w[n].x;
  std::int32_t min_x = std::numeric_limits<std::int32_t>::max();
  std::int32_t max_x = std::numeric_limits<std::int32_t>::min();
  for (const Point p : w.sites()) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
  }
  const bool up = last == Point{0, 1};

  if (min_x < x0 && max_x > x0) {
    // Sites on both sides: widen the walk by reflecting in the leftmost
    // vertical line x = min_x.
    std::size_t i = 0;
    for (std::size_t k = 0; k <= n; ++k) {
      if (w[k].x == min_x) i = k;
    }
    return {static_cast<std::int64_t>(i), Symmetry::reflect_x()};
  }

  // One side only: rotate the final straight run about the last turn so that
  // it points away from the rest of the walk.
  std::size_t turn = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (w[k] - w[k - 1] != w[k + 1] - w[k]) turn = k;
  }
  const bool walk_on_right = min_x >= x0;
  const bool counterclockwise = walk_on_right == up;
  return {static_cast<std::int64_t>(turn), counterclockwise ? Symmetry::rot90() : Symmetry::rot270()};
}

}  // namespace detail

/// Pivot moves that carry w to the straight vertical walk, each intermediate
/// walk staying self-avoiding and inside the domain.
inline std::vector<PivotProposal> unfold(Walk w, Domain domain) {
  if (auto err = validate(w, domain)) throw std::invalid_argument("unfold: invalid walk: " + *err);
  std::vector<PivotProposal> moves;
  if (w.length() == 0) return moves;
  const std::int64_t n = w.length();
  const std::int64_t cap = 4 * n * n + 16;
  while (!is_straight_up(w)) {
    if (static_cast<std::int64_t>(moves.size()) >= cap) {
      throw std::logic_error("unfold: did not terminate");
    }
    const PivotProposal move = detail::unfold_move(w, domain);
    w.pivot(static_cast<std::size_t>(move.site), move.g);
    moves.push_back(move);
  }
  return moves;
}

struct UnfoldCheck {
  std::int64_t length = 0;
  std::int64_t walks = 0;
  std::int64_t total_moves = 0;
  std::int64_t max_moves = 0;
  std::int64_t violations = 0;
  std::int64_t turn_increases = 0;  // horizontal-last-step moves that added turns
  std::string first_violation;
};

/// Unfolds every walk of the given length and validates each intermediate walk.
inline UnfoldCheck check_unfolding(std::int64_t length, Domain domain) {
  UnfoldCheck report;
  report.length = length;
  enumerate_walks(length, domain, [&](const Walk& start) {
    ++report.walks;
    std::vector<PivotProposal> moves;
    try {
      moves = unfold(start, domain);
    } catch (const std::exception& e) {
      if (report.violations++ == 0) report.first_violation = e.what();
      return;
    }
    Walk w = start;
    for (const auto& m : moves) {
      const bool horizontal_last = w.length() > 0 && (w[w.size() - 1] - w[w.size() - 2]).y == 0;
      const auto turns_before = count_turns(w);
      w.pivot(static_cast<std::size_t>(m.site), m.g);
      if (horizontal_last && count_turns(w) > turns_before) ++report.turn_increases;
      if (auto err = validate(w, domain)) {
        if (report.violations++ == 0) report.first_violation = *err;
        return;
      }
    }
    if (!is_straight_up(w)) {
      if (report.violations++ == 0) report.first_violation = "unfolding did not reach the straight walk";
      return;
    }
    report.total_moves += static_cast<std::int64_t>(moves.size());
    report.max_moves = std::max(report.max_moves, static_cast<std::int64_t>(moves.size()));
  });
  return report;
}

}  // namespace sawsle

#endif  // SAWSLE_UNFOLD_HPP
