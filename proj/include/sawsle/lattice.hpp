#ifndef SAWSLE_LATTICE_HPP
#define SAWSLE_LATTICE_HPP

// Square-lattice geometry: points, the 8-element point group, walks and the
// two domains (half-plane, cut-plane) the walks are confined to.

#include <array>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace sawsle {

struct Point {
  std::int32_t x = 0;
  std::int32_t y = 0;

  friend constexpr bool operator==(Point, Point) = default;
  friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
};

constexpr std::int64_t l1_distance(Point a, Point b) {
  const std::int64_t dx = std::int64_t{a.x} - b.x;
  const std::int64_t dy = std::int64_t{a.y} - b.y;
  return (dx < 0 ? -dx : dx) + (dy < 0 ? -dy : dy);
}

inline std::ostream& operator<<(std::ostream& os, Point p) {
  return os << '(' << p.x << ',' << p.y << ')';
}

struct PointHash {
  std::size_t operator()(Point p) const noexcept {
    const auto key = (std::uint64_t{static_cast<std::uint32_t>(p.x)} << 32) |
                     static_cast<std::uint32_t>(p.y);
    // splitmix64 finalizer
    std::uint64_t z = key + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<std::size_t>(z ^ (z >> 31));
  }
};

/// Element of the dihedral group of the square lattice, stored as the integer
/// matrix [[xx, xy], [yx, yy]] acting on column vectors.
///
/// reflect_x negates the x coordinate (mirror in a vertical line), reflect_y
/// negates y (mirror in a horizontal line). reflect_diag swaps x and y
/// (mirror in y = x) and reflect_antidiag maps (x, y) to (-y, -x).
class Symmetry {
 public:
  constexpr Symmetry() = default;
  constexpr Symmetry(int xx, int xy, int yx, int yy) : m_{xx, xy, yx, yy} {
    if (!valid_entries()) {
      throw std::invalid_argument("Symmetry: matrix is not a lattice symmetry");
    }
  }

  static constexpr Symmetry identity() { return {1, 0, 0, 1}; }
  static constexpr Symmetry rot90() { return {0, -1, 1, 0}; }
  static constexpr Symmetry rot180() { return {-1, 0, 0, -1}; }
  static constexpr Symmetry rot270() { return {0, 1, -1, 0}; }
  static constexpr Symmetry reflect_x() { return {-1, 0, 0, 1}; }
  static constexpr Symmetry reflect_y() { return {1, 0, 0, -1}; }
  static constexpr Symmetry reflect_diag() { return {0, 1, 1, 0}; }
  static constexpr Symmetry reflect_antidiag() { return {0, -1, -1, 0}; }

  /// All eight group elements; index 0 is the identity.
  static constexpr std::array<Symmetry, 8> all() {
    return {identity(),  rot90(),     rot180(),       rot270(),
            reflect_x(), reflect_y(), reflect_diag(), reflect_antidiag()};
  }

  constexpr int xx() const { return m_[0]; }
  constexpr int xy() const { return m_[1]; }
  constexpr int yx() const { return m_[2]; }
  constexpr int yy() const { return m_[3]; }

  constexpr int determinant() const { return m_[0] * m_[3] - m_[1] * m_[2]; }

  constexpr Point linear(Point v) const {
    return {m_[0] * v.x + m_[1] * v.y, m_[2] * v.x + m_[3] * v.y};
  }

  /// pivot + M (p - pivot)
  constexpr Point apply(Point pivot, Point p) const { return pivot + linear(p - pivot); }

  /// Composition: (g * h) applies h first, then g.
  friend constexpr Symmetry operator*(const Symmetry& g, const Symmetry& h) {
    return {g.m_[0] * h.m_[0] + g.m_[1] * h.m_[2], g.m_[0] * h.m_[1] + g.m_[1] * h.m_[3],
            g.m_[2] * h.m_[0] + g.m_[3] * h.m_[2], g.m_[2] * h.m_[1] + g.m_[3] * h.m_[3]};
  }

  // Orthogonal, so the inverse is the transpose.
  constexpr Symmetry inverse() const { return {m_[0], m_[2], m_[1], m_[3]}; }

  friend constexpr bool operator==(const Symmetry&, const Symmetry&) = default;

  std::string_view name() const {
    constexpr std::array<std::string_view, 8> names = {
        "identity", "rot90", "rot180", "rot270", "reflect_x", "reflect_y", "reflect_diag",
        "reflect_antidiag"};
    const auto group = all();
    for (std::size_t k = 0; k < group.size(); ++k) {
      if (group[k] == *this) return names[k];
    }
    return "invalid";
  }

 private:
  constexpr bool valid_entries() const {
    // Rows must be distinct signed unit vectors along different axes.
    const bool row0 = (m_[0] == 0) != (m_[1] == 0) && std::abs(m_[0] + m_[1]) == 1;
    const bool row1 = (m_[2] == 0) != (m_[3] == 0) && std::abs(m_[2] + m_[3]) == 1;
    return row0 && row1 && (m_[0] == 0) != (m_[2] == 0);
  }

  std::array<int, 4> m_{1, 0, 0, 1};
};

inline Symmetry compose(const Symmetry& g, const Symmetry& h) { return g * h; }
inline Symmetry invert(const Symmetry& g) { return g.inverse(); }

inline std::ostream& operator<<(std::ostream& os, const Symmetry& g) { return os << g.name(); }

enum class Domain { HalfPlane, CutPlane };

inline std::string_view to_string(Domain d) {
  return d == Domain::HalfPlane ? "half-plane" : "cut-plane";
}

inline std::optional<Domain> parse_domain(std::string_view s) {
  if (s == "half-plane" || s == "half" || s == "halfplane") return Domain::HalfPlane;
  if (s == "cut-plane" || s == "cut" || s == "cutplane") return Domain::CutPlane;
  return std::nullopt;
}

/// Whether site p may sit at position `index` of a walk confined to d.
constexpr bool domain_contains(Domain d, Point p, std::int64_t index) {
  if (index == 0) return p == Point{0, 0};
  if (d == Domain::HalfPlane) return p.y > 0;
  return !(p.y == 0 && p.x >= 0);
}

/// Lower bound on the number of nearest-neighbour steps from p to a forbidden
/// site of the domain. Zero means p itself is forbidden (for index >= 1).
constexpr std::int64_t steps_to_boundary(Domain d, Point p) {
  if (d == Domain::HalfPlane) return p.y > 0 ? p.y : 0;
  const std::int64_t ay = p.y < 0 ? -std::int64_t{p.y} : p.y;
  return ay + (p.x < 0 ? -std::int64_t{p.x} : 0);
}

/// A nearest-neighbour path omega(0..N) starting at the origin.
class Walk {
 public:
  Walk() : sites_{Point{0, 0}} {}
  explicit Walk(std::vector<Point> sites) : sites_(std::move(sites)) {
    if (sites_.empty()) throw std::invalid_argument("Walk: needs at least one site");
  }

  static Walk straight(std::int64_t length, Point direction = {0, 1}) {
    std::vector<Point> sites(static_cast<std::size_t>(length) + 1);
    for (std::size_t i = 1; i < sites.size(); ++i) sites[i] = sites[i - 1] + direction;
    return Walk(std::move(sites));
  }

  std::int64_t length() const { return static_cast<std::int64_t>(sites_.size()) - 1; }
  std::size_t size() const { return sites_.size(); }
  Point operator[](std::size_t i) const { return sites_[i]; }
  Point& operator[](std::size_t i) { return sites_[i]; }
  const std::vector<Point>& sites() const { return sites_; }
  std::vector<Point>& sites() { return sites_; }

  /// Applies a pivot move in place: sites after `index` are transformed about
  /// site `index`.
  void pivot(std::size_t index, const Symmetry& g) {
    const Point p0 = sites_[index];
    for (std::size_t j = index + 1; j < sites_.size(); ++j) sites_[j] = g.apply(p0, sites_[j]);
  }

  friend bool operator==(const Walk&, const Walk&) = default;

 private:
  std::vector<Point> sites_;
};

/// Full validity check (hash based). Returns a description of the first
/// violation, or nullopt when the walk is a valid SAW in the domain.
inline std::optional<std::string> validate(const Walk& w, Domain d) {
  if (w[0] != Point{0, 0}) return "walk does not start at the origin";
  std::unordered_set<Point, PointHash> seen;
  seen.reserve(w.size() * 2);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i > 0 && l1_distance(w[i], w[i - 1]) != 1) {
      return "step " + std::to_string(i) + " is not a nearest-neighbour step";
    }
    if (!domain_contains(d, w[i], static_cast<std::int64_t>(i))) {
      return "site " + std::to_string(i) + " lies outside the " + std::string(to_string(d));
    }
    if (!seen.insert(w[i]).second) return "site " + std::to_string(i) + " is revisited";
  }
  return std::nullopt;
}

inline bool is_valid(const Walk& w, Domain d) { return !validate(w, d).has_value(); }

inline bool is_straight_up(const Walk& w) { return w == Walk::straight(w.length()); }

/// Text form: "N <length> <domain>" followed by one "x y" line per site.
inline void write_walk(std::ostream& os, const Walk& w, Domain d) {
  os << "N " << w.length() << ' ' << to_string(d) << '\n';
  for (const Point p : w.sites()) os << p.x << ' ' << p.y << '\n';
}

struct DomainWalk {
  Walk walk;
  Domain domain;
};

inline DomainWalk read_walk(std::istream& is) {
  std::string tag, domain_name;
  std::int64_t n = -1;
  if (!(is >> tag >> n >> domain_name) || tag != "N" || n < 0) {
    throw std::runtime_error("read_walk: malformed header");
  }
  const auto domain = parse_domain(domain_name);
  if (!domain) throw std::runtime_error("read_walk: unknown domain '" + domain_name + "'");
  std::vector<Point> sites(static_cast<std::size_t>(n) + 1);
  for (auto& p : sites) {
    if (!(is >> p.x >> p.y)) throw std::runtime_error("read_walk: truncated site list");
  }
  return {Walk(std::move(sites)), *domain};
}

inline std::string to_text(const Walk& w, Domain d) {
  std::ostringstream os;
  write_walk(os, w, d);
  return os.str();
}

}  // namespace sawsle

#endif  // SAWSLE_LATTICE_HPP
