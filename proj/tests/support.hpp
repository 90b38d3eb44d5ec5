#ifndef SAWSLE_TEST_SUPPORT_HPP
#define SAWSLE_TEST_SUPPORT_HPP

// Independent oracles and fixtures shared by the unit and acceptance tests.

#include "sawsle/lattice.hpp"
#include "sawsle/observables.hpp"
#include "sawsle/pivot.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace sawsle::oracle {

/// Applies the pivot to a copy, then checks every pair of sites and every
/// site's domain membership directly.
inline bool naive_accept(const Walk& w, Domain d, const PivotProposal& prop) {
  std::vector<Point> s = w.sites();
  const Point pivot = s[static_cast<std::size_t>(prop.site)];
  for (std::size_t j = static_cast<std::size_t>(prop.site) + 1; j < s.size(); ++j) {
    const Point r = s[j] - pivot;
    s[j] = Point{pivot.x + prop.g.xx() * r.x + prop.g.xy() * r.y, pivot.y + prop.g.yx() * r.x + prop.g.yy() * r.y};
  }
  for (std::size_t j = 0; j < s.size(); ++j) {
    const bool inside = j == 0 ? (s[j].x == 0 && s[j].y == 0)
                        : d == Domain::HalfPlane ? s[j].y > 0
                                                 : !(s[j].y == 0 && s[j].x >= 0);
    if (!inside) return false;
  }
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = a + 1; b < s.size(); ++b) {
      if (s[a].x == s[b].x && s[a].y == s[b].y) return false;
    }
  }
  return true;
}

/// Roughly independent valid walks: snapshots of a pivot chain `gap` steps apart.
inline std::vector<Walk> sample_walks(Domain d, std::int64_t n, std::size_t count, std::uint64_t seed,
                                      std::uint64_t gap = 50) {
  PivotChain chain(d, n, seed, ChainOptions{SiteProfile::Uniform, 8});
  for (int k = 0; k < 2000; ++k) chain.step();
  std::vector<Walk> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    for (std::uint64_t s = 0; s < gap; ++s) chain.step();
    out.push_back(chain.walk());
  }
  return out;
}

/// Brute-force side decision by winding number. The walk is cut at its first
/// site P beyond 3c and closed into a loop: P radially out to radius R, the
/// circle of radius R clockwise down to angle 0, then the positive real axis
/// back to the origin. The loop encloses exactly the points lying to the
/// right of the walk, which the walk therefore passes on its left.
inline std::optional<Side> raycast_side(const Walk& w, double c, double theta) {
  double ux = std::cos(theta), uy = std::sin(theta);
  if (std::abs(ux) < 1e-12) ux = 0.0, uy = uy > 0 ? 1.0 : -1.0;
  if (std::abs(uy) < 1e-12) uy = 0.0, ux = ux > 0 ? 1.0 : -1.0;
  const double zx = c * ux, zy = c * uy;
  std::size_t cut = w.size();
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (std::hypot(double(w[j].x), double(w[j].y)) > 3.0 * c) {
      cut = j;
      break;
    }
  }
  if (cut == w.size()) return std::nullopt;
  const Point end = w[w.size() - 1];
  if (std::hypot(double(end.x), double(end.y)) < c) return std::nullopt;
  for (std::size_t j = 0; j < cut; ++j) {
    const Point p = w[j], q = w[j + 1];
    if (std::min(p.x, q.x) <= zx && zx <= std::max(p.x, q.x) && std::min(p.y, q.y) <= zy &&
        zy <= std::max(p.y, q.y)) {
      return Side::Through;
    }
  }
  std::vector<std::pair<double, double>> loop;
  for (std::size_t j = 0; j <= cut; ++j) loop.emplace_back(w[j].x, w[j].y);
  const double big = 1e6 * c;
  double phi = std::atan2(double(w[cut].y), double(w[cut].x));
  if (phi <= 0.0) phi += 2.0 * std::numbers::pi;  // angle in (0, 2 pi]
  for (int k = 0; k <= 4096; ++k) {
    const double a = phi * (1.0 - k / 4096.0);
    loop.emplace_back(big * std::cos(a), big * std::sin(a));
  }
  loop.emplace_back(0.0, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < loop.size(); ++k) {
    const double a0 = std::atan2(loop[k].second - zy, loop[k].first - zx);
    const double a1 = std::atan2(loop[k + 1].second - zy, loop[k + 1].first - zx);
    double da = a1 - a0;
    while (da > std::numbers::pi) da -= 2.0 * std::numbers::pi;
    while (da < -std::numbers::pi) da += 2.0 * std::numbers::pi;
    total += da;
  }
  const long winding = std::lround(total / (2.0 * std::numbers::pi));
  return winding != 0 ? Side::Left : Side::Right;
}

}  // namespace sawsle::oracle

#endif  // SAWSLE_TEST_SUPPORT_HPP
