#ifndef SAWSLE_OBSERVABLES_HPP
#define SAWSLE_OBSERVABLES_HPP

// Hitting-point observables of a walk: where the walk (as a polygonal curve
// through its sites) first meets, or extremally meets, a line, a circle or a
// parabola at scale c = l N^{3/4}; and on which side of a point the walk
// passes.
//
// Crossings are searched with skip-ahead: from a site at lattice distance D
// from the curve the walk needs at least D more steps to reach it, so the
// segments in between are never examined.

#include "sawsle/lattice.hpp"
#include "sawsle/pivot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sawsle {

enum class CurveKind {
  HorizontalLine,    // y = c
  VerticalRay,       // x = c, y > 0
  Circle,            // |z - center_x| = c
  RightParabola,     // x = c(t^2 - 1), y = 2ct
  LeftHalfParabola,  // x = c(1 - t^2), y = 2ct, t > 0
};

/// Crossing parameters: x for the horizontal line, y for the vertical ray,
/// polar angle about the centre in [0, 2pi) for the circle, t for parabolas.
struct CurveDescriptor {
  CurveKind kind = CurveKind::HorizontalLine;
  double c = 1.0;
  double center_x = 0.0;
};

struct Crossing {
  std::int64_t step = 0;  // segment omega(step) -> omega(step + 1)
  double param = 0.0;

  friend bool operator==(const Crossing&, const Crossing&) = default;
};

namespace detail {

inline double curve_value(const CurveDescriptor& cv, double x, double y) {
  switch (cv.kind) {
    case CurveKind::HorizontalLine: return y - cv.c;
    case CurveKind::VerticalRay: return x - cv.c;
    case CurveKind::Circle: {
      const double dx = x - cv.center_x;
      return dx * dx + y * y - cv.c * cv.c;
    }
    case CurveKind::RightParabola: return x + cv.c - y * y / (4.0 * cv.c);
    case CurveKind::LeftHalfParabola: return x - cv.c + y * y / (4.0 * cv.c);
  }
  return 0.0;
}

inline bool param_admissible(const CurveDescriptor& cv, double y) {
  if (cv.kind == CurveKind::VerticalRay || cv.kind == CurveKind::LeftHalfParabola) return y > 0.0;
  return true;
}

inline double crossing_param(const CurveDescriptor& cv, double x, double y) {
  switch (cv.kind) {
    case CurveKind::HorizontalLine: return x;
    case CurveKind::VerticalRay: return y;
    case CurveKind::Circle: {
      double a = std::atan2(y, x - cv.center_x);
      if (a < 0.0) a += 2.0 * std::numbers::pi;
      return a;
    }
    case CurveKind::RightParabola:
    case CurveKind::LeftHalfParabola: return y / (2.0 * cv.c);
  }
  return 0.0;
}

// Coefficients of F(p + s (q - p)) = A s^2 + B s + C for a unit lattice step.
inline void segment_poly(const CurveDescriptor& cv, Point p, Point q, double& a, double& b,
                         double& c0) {
  const double x = p.x, y = p.y;
  const double dx = q.x - p.x, dy = q.y - p.y;
  c0 = curve_value(cv, x, y);
  switch (cv.kind) {
    case CurveKind::HorizontalLine: a = 0.0; b = dy; break;
    case CurveKind::VerticalRay: a = 0.0; b = dx; break;
    case CurveKind::Circle: a = dx * dx + dy * dy; b = 2.0 * ((x - cv.center_x) * dx + y * dy); break;
    case CurveKind::RightParabola:
      a = -dy * dy / (4.0 * cv.c);
      b = dx - 2.0 * y * dy / (4.0 * cv.c);
      break;
    case CurveKind::LeftHalfParabola:
      a = dy * dy / (4.0 * cv.c);
      b = dx + 2.0 * y * dy / (4.0 * cv.c);
      break;
  }
}

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace detail

/// Appends the crossings of the unit segment p -> q with the curve, ordered
/// along the segment. A sign change of the curve's defining function inside
/// the segment is a crossing; so is the end point q lying exactly on the
/// curve. Touching without a sign change is not.
inline void segment_crossings(const CurveDescriptor& cv, Point p, Point q, std::int64_t step,
                              std::vector<Crossing>& out) {
  double a = 0, b = 0, c0 = 0;
  detail::segment_poly(cv, p, q, a, b, c0);
  const double f1 = detail::curve_value(cv, q.x, q.y);
  const int s0 = detail::sign_of(c0);
  const int s1 = detail::sign_of(f1);

  double roots[2];
  int nroots = 0;
  if (a == 0.0) {
    if (b != 0.0) roots[nroots++] = -c0 / b;
  } else {
    const double disc = b * b - 4.0 * a * c0;
    if (disc > 0.0) {
      const double sq = std::sqrt(disc);
      const double qq = -0.5 * (b + (b >= 0.0 ? sq : -sq));
      double r1 = qq / a;
      double r2 = qq != 0.0 ? c0 / qq : r1;
      if (r1 > r2) std::swap(r1, r2);
      roots[nroots++] = r1;
      roots[nroots++] = r2;
    }
  }

  // Interior roots, reconciled with the end-point signs.
  constexpr double kEdge = 1e-12;
  double interior[2];
  int ninterior = 0;
  for (int k = 0; k < nroots; ++k) {
    const double s = roots[k];
    if (s0 == 0 && s <= kEdge) continue;
    if (s1 == 0 && s >= 1.0 - kEdge) continue;
    if (s > 0.0 && s < 1.0) interior[ninterior++] = s;
  }
  if (s0 != 0 && s1 != 0) {
    const bool odd = s0 != s1;
    if (odd && ninterior != 1) {
      // Rounding pushed the single root out of (0, 1): take the nearest one.
      double best = 0.5, best_dist = std::numeric_limits<double>::infinity();
      for (int k = 0; k < nroots; ++k) {
        const double clamped = std::clamp(roots[k], 0.0, 1.0);
        const double dist = std::abs(roots[k] - clamped);
        if (dist < best_dist) {
          best_dist = dist;
          best = clamped;
        }
      }
      interior[0] = best;
      ninterior = 1;
    } else if (!odd && ninterior == 1) {
      ninterior = 0;  // numerically a tangency
    }
  }

  const double dx = q.x - p.x, dy = q.y - p.y;
  for (int k = 0; k < ninterior; ++k) {
    const double x = p.x + interior[k] * dx;
    const double y = p.y + interior[k] * dy;
    if (detail::param_admissible(cv, y)) out.push_back({step, detail::crossing_param(cv, x, y)});
  }
  if (s1 == 0 && detail::param_admissible(cv, q.y)) {
    out.push_back({step, detail::crossing_param(cv, q.x, q.y)});
  }
}

/// Largest k such that the k segments starting at p provably miss the curve.
inline std::int64_t skippable_steps(const CurveDescriptor& cv, Point p) {
  double dist = 0.0;
  switch (cv.kind) {
    case CurveKind::HorizontalLine: dist = std::abs(p.y - cv.c); break;
    case CurveKind::VerticalRay: dist = std::abs(p.x - cv.c); break;
    case CurveKind::Circle: dist = std::abs(std::hypot(p.x - cv.center_x, double(p.y)) - cv.c); break;
    case CurveKind::RightParabola:
    case CurveKind::LeftHalfParabola: {
      // One step changes F by at most max(1, (2|y| + 1) / 4c), with |y|
      // growing by at most one per step.
      const double f = std::abs(detail::curve_value(cv, p.x, p.y));
      const double ay = std::abs(double(p.y));
      const double by_x = std::ceil(f) - 1.0;
      const double root =
          (-(2.0 * ay + 1.0) + std::sqrt((2.0 * ay + 1.0) * (2.0 * ay + 1.0) + 32.0 * cv.c * f)) / 4.0;
      const double by_y = std::ceil(root) - 1.0;
      const double k = std::min(by_x, by_y) - 1.0;
      return k > 0.0 ? static_cast<std::int64_t>(k) : 0;
    }
  }
  // Points within k steps lie within Euclidean distance k; keep one step of
  // slack for rounding.
  const double k = std::ceil(dist) - 2.0;
  return k > 0.0 ? static_cast<std::int64_t>(k) : 0;
}

/// Every crossing of the walk with the curve, in traversal order. `site(i)`
/// returns omega(i) for 0 <= i <= n. With first_only the search stops at the
/// first segment that crosses.
template <class SiteFn>
std::vector<Crossing> intersections(const CurveDescriptor& cv, std::int64_t n, SiteFn&& site,
                                    bool first_only = false) {
  std::vector<Crossing> out;
  std::int64_t j = 0;
  Point p = site(0);
  while (j < n) {
    const std::int64_t skip = skippable_steps(cv, p);
    if (skip > 0) {
      j = std::min(j + skip, n);
      p = site(j);
      continue;
    }
    const Point q = site(j + 1);
    segment_crossings(cv, p, q, j, out);
    if (first_only && !out.empty()) break;
    ++j;
    p = q;
  }
  return out;
}

/// Step-by-step scan with no skipping.
template <class SiteFn>
std::vector<Crossing> intersections_naive(const CurveDescriptor& cv, std::int64_t n, SiteFn&& site) {
  std::vector<Crossing> out;
  for (std::int64_t j = 0; j < n; ++j) segment_crossings(cv, site(j), site(j + 1), j, out);
  return out;
}

inline std::vector<Crossing> intersections(const PivotChain& chain, const CurveDescriptor& cv) {
  return intersections(cv, chain.length(), [&](std::int64_t i) { return chain.site(i); });
}

inline std::vector<Crossing> intersections(const Walk& w, const CurveDescriptor& cv) {
  return intersections(cv, w.length(), [&](std::int64_t i) { return w[static_cast<std::size_t>(i)]; });
}

// ---------------------------------------------------------------------------

enum class ObservableKind { Xe, Xf, Ye, Yf, ThetaE, ThetaF, PassRight };

inline std::string_view to_string(ObservableKind k) {
  switch (k) {
    case ObservableKind::Xe: return "xe";
    case ObservableKind::Xf: return "xf";
    case ObservableKind::Ye: return "ye";
    case ObservableKind::Yf: return "yf";
    case ObservableKind::ThetaE: return "theta_e";
    case ObservableKind::ThetaF: return "theta_f";
    case ObservableKind::PassRight: return "pass_right";
  }
  return "?";
}

inline std::optional<ObservableKind> parse_observable_kind(std::string_view s) {
  for (auto k : {ObservableKind::Xe, ObservableKind::Xf, ObservableKind::Ye, ObservableKind::Yf,
                 ObservableKind::ThetaE, ObservableKind::ThetaF, ObservableKind::PassRight}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

inline bool is_extremal(ObservableKind k) {
  return k == ObservableKind::Xe || k == ObservableKind::Ye || k == ObservableKind::ThetaE;
}

inline bool is_theta(ObservableKind k) {
  return k == ObservableKind::ThetaE || k == ObservableKind::ThetaF;
}

struct ObservableSpec {
  ObservableKind kind = ObservableKind::Xe;
  Domain geometry = Domain::HalfPlane;
  double l = 0.05;
  double d = 0.0;
  std::vector<double> theta_grid;  // pass_right only; radians

  /// Throws std::invalid_argument when the combination is not supported.
  void validate() const {
    if (!(l > 0.0) || !std::isfinite(l)) throw std::invalid_argument("observable: l must be positive");
    if (!(std::abs(d) < 1.0)) throw std::invalid_argument("observable: |d| must be < 1");
    if (d != 0.0 && !is_theta(kind)) {
      throw std::invalid_argument("observable: offset d only applies to theta observables");
    }
    if (d != 0.0 && geometry == Domain::CutPlane) {
      throw std::invalid_argument("observable: cut-plane theta observables need d = 0");
    }
    if (kind == ObservableKind::PassRight) {
      const double top = geometry == Domain::HalfPlane ? std::numbers::pi : 2.0 * std::numbers::pi;
      if (theta_grid.empty()) throw std::invalid_argument("observable: pass_right needs angles");
      for (double th : theta_grid) {
        if (!(th > 0.0 && th < top)) throw std::invalid_argument("observable: angle out of range");
      }
    }
  }

  double scale(std::int64_t n) const { return l * std::pow(static_cast<double>(n), 0.75); }

  std::string id() const;
};

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string ObservableSpec::id() const {
  std::string s = std::string(to_string(kind)) + "_" + std::string(to_string(geometry)) + "_l" +
                  format_number(l);
  if (is_theta(kind)) s += "_d" + format_number(d);
  return s;
}

inline CurveDescriptor curve_for(const ObservableSpec& spec, std::int64_t n) {
  const double c = spec.scale(n);
  const bool half = spec.geometry == Domain::HalfPlane;
  switch (spec.kind) {
    case ObservableKind::Xe:
    case ObservableKind::Xf:
      return {half ? CurveKind::HorizontalLine : CurveKind::RightParabola, c, 0.0};
    case ObservableKind::Ye:
    case ObservableKind::Yf:
      return {half ? CurveKind::VerticalRay : CurveKind::LeftHalfParabola, c, 0.0};
    case ObservableKind::ThetaE:
    case ObservableKind::ThetaF:
    case ObservableKind::PassRight: return {CurveKind::Circle, c, half ? c * spec.d : 0.0};
  }
  return {};
}

enum class Censor { None, NeverReached, EndsInside };

inline std::string_view to_string(Censor c) {
  switch (c) {
    case Censor::None: return "none";
    case Censor::NeverReached: return "never-reached";
    case Censor::EndsInside: return "ends-inside";
  }
  return "?";
}

struct Measurement {
  double value = 0.0;
  Censor censor = Censor::None;

  bool censored() const { return censor != Censor::None; }
  static Measurement of(double v) { return {v, Censor::None}; }
  static Measurement censored_by(Censor c) { return {std::numeric_limits<double>::quiet_NaN(), c}; }

  friend bool operator==(const Measurement& a, const Measurement& b) {
    if (a.censor != b.censor) return false;
    return a.censored() || a.value == b.value;
  }
};

/// Converts the crossings of curve_for(spec) into the observable's value.
inline Measurement measurement_from_crossings(const ObservableSpec& spec, const CurveDescriptor& cv,
                                              const std::vector<Crossing>& crossings, Point last) {
  if (crossings.empty()) return Measurement::censored_by(Censor::NeverReached);
  if (spec.kind == ObservableKind::ThetaE) {
    const double dx = last.x - cv.center_x;
    if (dx * dx + double(last.y) * last.y < cv.c * cv.c) return Measurement::censored_by(Censor::EndsInside);
  }
  double raw = crossings.front().param;
  if (is_extremal(spec.kind)) {
    for (const auto& cr : crossings) raw = std::min(raw, cr.param);
  }
  const bool half = spec.geometry == Domain::HalfPlane;
  switch (spec.kind) {
    case ObservableKind::Xe:
    case ObservableKind::Xf:
    case ObservableKind::Ye:
    case ObservableKind::Yf: return Measurement::of(half ? raw / cv.c : raw);
    case ObservableKind::ThetaE:
    case ObservableKind::ThetaF:
      return Measurement::of(raw / (half ? std::numbers::pi : 2.0 * std::numbers::pi));
    case ObservableKind::PassRight: break;
  }
  throw std::invalid_argument("measure: pass_right is measured with pass_right()");
}

/// Value of a scalar observable on the walk given by site(0..n).
template <class SiteFn>
Measurement measure(const ObservableSpec& spec, std::int64_t n, SiteFn&& site) {
  if (spec.kind == ObservableKind::PassRight) {
    throw std::invalid_argument("measure: pass_right is measured with pass_right()");
  }
  const CurveDescriptor cv = curve_for(spec, n);
  const auto crossings = intersections(cv, n, site, !is_extremal(spec.kind));
  return measurement_from_crossings(spec, cv, crossings, site(n));
}

inline Measurement measure(const PivotChain& chain, const ObservableSpec& spec) {
  if (spec.geometry != chain.domain()) throw std::invalid_argument("measure: geometry does not match chain");
  return measure(spec, chain.length(), [&](std::int64_t i) { return chain.site(i); });
}

inline Measurement measure(const Walk& w, Domain domain, const ObservableSpec& spec) {
  if (spec.geometry != domain) throw std::invalid_argument("measure: geometry does not match walk");
  return measure(spec, w.length(), [&](std::int64_t i) { return w[static_cast<std::size_t>(i)]; });
}

// ---------------------------------------------------------------------------
// Passing right of a point.

enum class Side : std::uint8_t { Left = 0, Right = 1, Through = 2 };

/// Side decisions for a set of points c e^{i theta_k}. Side::Right means the
/// walk passes to the right of the point; Side::Through that the point lies on
/// the walk (possible when it sits on a lattice line), which has no side.
struct PassResult {
  Censor censor = Censor::None;
  std::vector<Side> sides;

  friend bool operator==(const PassResult&, const PassResult&) = default;
};

namespace detail {

struct RayTarget {
  double x;
  double y;
  std::size_t index;  // position in the caller's angle list
};

// cos and sin, exact at multiples of pi/2 so axis points land on lattice lines.
inline std::pair<double, double> unit_direction(double theta) {
  const double quarters = 2.0 * theta / std::numbers::pi;
  const double q = std::round(quarters);
  if (std::abs(quarters - q) < 1e-12) {
    switch (((static_cast<long long>(q) % 4) + 4) % 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  return {std::cos(theta), std::sin(theta)};
}

inline std::vector<RayTarget> ray_targets(double c, const std::vector<double>& thetas) {
  std::vector<RayTarget> out;
  out.reserve(thetas.size());
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    const auto [ux, uy] = unit_direction(thetas[k]);
    out.push_back({c * ux, c * uy, k});
  }
  std::sort(out.begin(), out.end(), [](const RayTarget& a, const RayTarget& b) {
    return a.y < b.y || (a.y == b.y && a.index < b.index);
  });
  return out;
}

// Odd parity means the point is cut off from the boundary piece that lies to
// the right of the walk. Below the real axis (cut-plane only) the path from
// the point reaches the other side of the cut, so the roles swap.
inline Side side_from_parity(bool odd, double point_y) {
  const bool right = point_y >= 0.0 ? odd : !odd;
  return right ? Side::Right : Side::Left;
}

// Whether the radial ray from the exit site P to infinity meets the path used
// for a target. Points on the path line count as below (y <= y_k) or, for the
// vertical path, as left (x <= x_k), matching the half-open segment rule.
inline bool closure_crosses(Point exit, const RayTarget& t) {
  const double px = exit.x, py = exit.y;
  if (t.y > 0.0) return px > 0.0 && py > 0.0 && py <= t.y;
  if (t.y < 0.0) return px > 0.0 && py < 0.0 && py > t.y;
  return py > 0.0 && px > t.x;
}

}  // namespace detail

/// Decides on which side of each point z = c e^{i theta} the walk passes.
///
/// The walk is cut at its first site P outside radius 3c and closed by the
/// radial ray from P to infinity; censored if there is no such site or if the
/// walk ends within radius c. The side is the crossing parity of the closed
/// curve with a path from z to the boundary: the horizontal ray from z in the
/// +x direction (half-open in y), or for a point on the real axis the vertical
/// ray upwards (half-open in x). A point lying on the kept part of the walk
/// gets Side::Through.
template <class SiteFn>
PassResult pass_right(Domain /*geometry*/, double c, const std::vector<double>& thetas, std::int64_t n,
                      SiteFn&& site) {
  PassResult result;
  const double outer = 3.0 * c;
  const Point end = site(n);
  const auto targets = detail::ray_targets(c, thetas);
  std::vector<int> heights;  // floor(y_k), sorted
  heights.reserve(targets.size());
  for (const auto& t : targets) heights.push_back(static_cast<int>(std::floor(t.y)));
  std::vector<double> axis_x;  // x_k of targets on the real axis
  for (const auto& t : targets) {
    if (t.y == 0.0) axis_x.push_back(t.x);
  }

  std::vector<std::uint8_t> parity(targets.size(), 0);
  std::vector<std::uint8_t> through(targets.size(), 0);
  std::int64_t j = 0;
  Point p = site(0);
  bool exited = false;
  while (j < n) {
    const double r = std::hypot(double(p.x), double(p.y));
    if (r > outer) {
      exited = true;
      break;
    }
    // Steps before the walk can leave the disk of radius 3c.
    std::int64_t skip = static_cast<std::int64_t>(std::max(0.0, std::ceil(outer - r) - 2.0));
    // Steps before a segment can touch one of the target heights: such a
    // segment starts at height h - 1, h or h + 1 with h = floor(y_k).
    if (skip > 0 && !heights.empty()) {
      const auto it = std::lower_bound(heights.begin(), heights.end(), p.y);
      std::int64_t near = std::numeric_limits<std::int64_t>::max();
      const auto dist = [&](std::int64_t h) {
        return std::max<std::int64_t>(0, std::abs(std::int64_t{p.y} - h) - 1);
      };
      if (it != heights.end()) near = std::min(near, dist(*it));
      if (it != heights.begin()) near = std::min(near, dist(*(it - 1)));
      skip = std::min(skip, near);
    }
    // Same in x for the vertical paths.
    for (double x : axis_x) {
      const auto dx = static_cast<std::int64_t>(std::floor(std::abs(double(p.x) - x)));
      skip = std::min(skip, std::max<std::int64_t>(0, dx - 1));
    }
    if (skip > 0) {
      j = std::min(j + skip, n);
      p = site(j);
      continue;
    }
    const Point q = site(j + 1);
    const int lo = std::min(p.y, q.y);
    const int hi = std::max(p.y, q.y);
    const double xlo = std::min(p.x, q.x);
    const double xhi = std::max(p.x, q.x);
    auto k = static_cast<std::size_t>(std::lower_bound(heights.begin(), heights.end(), lo) - heights.begin());
    for (; k < targets.size() && heights[k] <= hi; ++k) {
      const auto& t = targets[k];
      if (t.y >= lo && t.y <= hi && t.x >= xlo && t.x <= xhi) through[k] = 1;
      // Half-open in y: lo <= y_k < lo + 1.
      if (t.y != 0.0 && p.x == q.x && heights[k] == lo && p.x > t.x) parity[k] ^= 1;
    }
    if (p.y == q.y && p.y > 0 && !axis_x.empty()) {
      // Half-open in x: xlo <= x_k < xlo + 1.
      for (std::size_t m = 0; m < targets.size(); ++m) {
        const auto& t = targets[m];
        if (t.y == 0.0 && xlo <= t.x && t.x < xlo + 1.0) parity[m] ^= 1;
      }
    }
    ++j;
    p = q;
  }
  if (!exited && j >= n) {
    exited = std::hypot(double(p.x), double(p.y)) > outer;
  }
  if (!exited) {
    result.censor = Censor::NeverReached;
    return result;
  }
  if (std::hypot(double(end.x), double(end.y)) < c) {
    result.censor = Censor::EndsInside;
    return result;
  }
  result.sides.assign(thetas.size(), Side::Left);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const bool odd = (parity[k] != 0) != detail::closure_crosses(p, targets[k]);
    result.sides[targets[k].index] = through[k] ? Side::Through : detail::side_from_parity(odd, targets[k].y);
  }
  return result;
}

inline PassResult pass_right(const PivotChain& chain, double c, const std::vector<double>& thetas) {
  return pass_right(chain.domain(), c, thetas, chain.length(), [&](std::int64_t i) { return chain.site(i); });
}

inline PassResult pass_right(const Walk& w, Domain domain, double c, const std::vector<double>& thetas) {
  return pass_right(domain, c, thetas, w.length(),
                    [&](std::int64_t i) { return w[static_cast<std::size_t>(i)]; });
}

inline std::optional<Side> pass_right(const Walk& w, Domain domain, double c, double theta) {
  const auto r = pass_right(w, domain, c, std::vector<double>{theta});
  if (r.censor != Censor::None) return std::nullopt;
  return r.sides.front();
}

}  // namespace sawsle

#endif  // SAWSLE_OBSERVABLES_HPP
