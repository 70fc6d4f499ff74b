#pragma once

// QTSP instances: benchmark cost functions, tours and the cycle cost.
//
// Costs are held in a dense n*n*n tensor of doubles; entries with repeated
// indices are never read. Geometry is evaluated in long double and then
// rounded half-to-even at the 12th decimal through an exact decimal
// expansion, so that the stored double is the one nearest to the 12-digit
// decimal text written to instance files.

#include <qtsp/errors.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace qtsp {

inline constexpr int kGridMax = 500;
inline constexpr double kDefaultRho = 40.0;
inline constexpr int kCostDecimals = 12;
/// Absolute tolerance used for every cost comparison.
inline constexpr double kCostTolerance = 1e-9;

struct Point {
  int x = 0;
  int y = 0;

  friend constexpr auto operator<=>(const Point&, const Point&) = default;
};

enum class CostKind { angle, angle_distance, explicit_costs };

inline std::string_view to_string(CostKind kind) {
  switch (kind) {
    case CostKind::angle: return "angle";
    case CostKind::angle_distance: return "angledistance";
    case CostKind::explicit_costs: return "explicit";
  }
  return "?";
}

inline std::optional<CostKind> parse_cost_kind(std::string_view text) {
  if (text == "angle") return CostKind::angle;
  if (text == "angledistance") return CostKind::angle_distance;
  if (text == "explicit") return CostKind::explicit_costs;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Decimal rounding

/// Rounds `value` half-to-even at `places` decimals and returns the double
/// nearest to the rounded decimal.
inline double round_decimal(long double value, int places = kCostDecimals) {
  if (!std::isfinite(value)) throw InvalidArgument("round_decimal: non-finite value");
  // Long double values of the magnitudes used here have at most ~70
  // fractional binary digits, so 90 decimals is an exact expansion.
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, 90);
  if (res.ec != std::errc{}) throw InvalidArgument("round_decimal: value too large");
  std::string text(buf, res.ptr);

  bool negative = !text.empty() && text.front() == '-';
  if (negative) text.erase(0, 1);
  auto dot = text.find('.');
  std::string kept = text.substr(0, dot) + text.substr(dot + 1, static_cast<std::size_t>(places));
  std::string_view rest = std::string_view(text).substr(dot + 1 + static_cast<std::size_t>(places));

  bool round_up = false;
  if (!rest.empty()) {
    if (rest.front() > '5') {
      round_up = true;
    } else if (rest.front() == '5') {
      bool above_half = rest.find_first_not_of('0', 1) != std::string_view::npos;
      bool last_odd = ((kept.back() - '0') % 2) != 0;
      round_up = above_half || last_odd;
    }
  }
  if (round_up) {
    std::size_t pos = kept.size();
    while (pos > 0) {
      --pos;
      if (kept[pos] == '9') {
        kept[pos] = '0';
      } else {
        ++kept[pos];
        break;
      }
      if (pos == 0) kept.insert(kept.begin(), '1');
    }
  }
  std::string out = kept.substr(0, kept.size() - static_cast<std::size_t>(places)) + "." +
                    kept.substr(kept.size() - static_cast<std::size_t>(places));
  double result = 0.0;
  std::from_chars(out.data(), out.data() + out.size(), result);
  return negative ? -result : result;
}

/// Fixed-point text with exactly `places` fractional digits.
inline std::string format_fixed(double value, int places = kCostDecimals) {
  char buf[400];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, places);
  return std::string(buf, res.ptr);
}

/// Shortest text that reads back to the same double.
inline std::string format_shortest(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Cost tensor

class CostTensor {
 public:
  CostTensor() = default;
  explicit CostTensor(std::size_t n, double fill = 0.0) : n_(n), data_(n * n * n, fill) {}

  std::size_t size() const noexcept { return n_; }

  double operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return data_[(i * n_ + j) * n_ + k];
  }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) noexcept {
    return data_[(i * n_ + j) * n_ + k];
  }

  /// Compares only the n(n-1)(n-2) entries that are ever read.
  friend bool operator==(const CostTensor& a, const CostTensor& b) {
    if (a.n_ != b.n_) return false;
    for (std::size_t i = 0; i < a.n_; ++i)
      for (std::size_t j = 0; j < a.n_; ++j)
        for (std::size_t k = 0; k < a.n_; ++k)
          if (i != j && j != k && i != k && a(i, j, k) != b(i, j, k)) return false;
    return true;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Point generation

/// Uniform integer in [0, bound) by rejection on a 64-bit draw.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t bound) {
  // 2^64 mod bound; draws below it are rejected so the rest split evenly.
  const std::uint64_t threshold = (std::uint64_t{0} - bound) % bound;
  for (;;) {
    std::uint64_t r = gen();
    if (r >= threshold) return r % bound;
  }
}

/// Draws n distinct points uniformly from {0..500}^2.
///
/// The generator is std::mt19937_64 seeded with `seed`, whose output sequence
/// is fixed by the C++ standard. Each point consumes one accepted draw for x,
/// then one for y (see uniform_below). A point equal to an earlier one is
/// discarded and drawn again.
inline std::vector<Point> generate_points(std::size_t n, std::uint64_t seed) {
  if (n < 3) throw InvalidArgument("generate_points: n must be at least 3");
  std::mt19937_64 gen(seed);
  std::vector<Point> points;
  points.reserve(n);
  std::vector<Point> sorted;
  while (points.size() < n) {
    Point p;
    p.x = static_cast<int>(uniform_below(gen, kGridMax + 1));
    p.y = static_cast<int>(uniform_below(gen, kGridMax + 1));
    auto it = std::lower_bound(sorted.begin(), sorted.end(), p);
    if (it != sorted.end() && *it == p) continue;
    sorted.insert(it, p);
    points.push_back(p);
  }
  return points;
}

// ---------------------------------------------------------------------------
// Geometry

namespace detail {

inline long double turning_angle_ld(const Point& a, const Point& b, const Point& c) {
  const long double ux = b.x - a.x, uy = b.y - a.y;
  const long double vx = c.x - b.x, vy = c.y - b.y;
  if ((ux == 0 && uy == 0) || (vx == 0 && vy == 0))
    throw DegenerateGeometry("turning angle undefined for coincident consecutive points");
  // Integer coordinates make dot and cross exact; atan2 of them equals
  // arccos(dot / (|u||v|)) and stays accurate near 0 and pi.
  const long double dot = ux * vx + uy * vy;
  const long double cross = ux * vy - uy * vx;
  return std::atan2(std::fabs(cross), dot);
}

inline long double distance_ld(const Point& a, const Point& b) {
  const long double dx = b.x - a.x, dy = b.y - a.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline void require_distinct(std::span<const Point> points) {
  std::vector<Point> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw DegenerateGeometry("duplicate points make turning angles undefined");
}

template <typename Fn>
CostTensor build_symmetric(std::span<const Point> points, Fn&& triple_cost) {
  require_distinct(points);
  const std::size_t n = points.size();
  CostTensor costs(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      for (std::size_t k = i + 1; k < n; ++k) {
        if (k == j) continue;
        double v = triple_cost(points[i], points[j], points[k]);
        costs(i, j, k) = v;
        costs(k, j, i) = v;
      }
    }
  return costs;
}

}  // namespace detail

/// Angle in radians, in [0, pi], between b-a and c-b.
inline double turning_angle(const Point& a, const Point& b, const Point& c) {
  return static_cast<double>(detail::turning_angle_ld(a, b, c));
}

/// AngleTSP costs: 1000 * turning angle, rounded to 12 decimals.
inline CostTensor build_angle_costs(std::span<const Point> points) {
  return detail::build_symmetric(points, [](const Point& a, const Point& b, const Point& c) {
    return round_decimal(1000.0L * detail::turning_angle_ld(a, b, c));
  });
}

/// AngleDistanceTSP costs: 100 * (rho * angle + (d_ab + d_bc) / 2), with the
/// angle in radians, rounded to 12 decimals.
inline CostTensor build_angle_distance_costs(std::span<const Point> points, double rho = kDefaultRho) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw InvalidArgument("rho must be a finite value >= 0");
  const long double weight = rho;
  return detail::build_symmetric(points, [weight](const Point& a, const Point& b, const Point& c) {
    long double angle = detail::turning_angle_ld(a, b, c);
    long double travel = (detail::distance_ld(a, b) + detail::distance_ld(b, c)) / 2.0L;
    return round_decimal(100.0L * (weight * angle + travel));
  });
}

// ---------------------------------------------------------------------------
// Instance

struct Instance {
  std::size_t n = 0;
  CostKind kind = CostKind::explicit_costs;
  std::optional<double> rho;         // set iff kind == angle_distance
  std::vector<Point> points;         // empty iff kind == explicit_costs
  CostTensor costs;
  std::optional<std::uint64_t> seed;
  /// False when a read instance has coordinates outside the benchmark grid.
  bool within_grid = true;

  double cost(std::size_t i, std::size_t j, std::size_t k) const noexcept { return costs(i, j, k); }

  friend bool operator==(const Instance&, const Instance&) = default;
};

inline bool points_within_grid(std::span<const Point> points) {
  return std::all_of(points.begin(), points.end(), [](const Point& p) {
    return p.x >= 0 && p.x <= kGridMax && p.y >= 0 && p.y <= kGridMax;
  });
}

inline Instance make_point_instance(CostKind kind, std::vector<Point> points, double rho = kDefaultRho,
                                    std::optional<std::uint64_t> seed = std::nullopt) {
  if (points.size() < 3) throw InvalidArgument("an instance needs at least 3 customers");
  Instance inst;
  inst.n = points.size();
  inst.kind = kind;
  inst.seed = seed;
  inst.within_grid = points_within_grid(points);
  switch (kind) {
    case CostKind::angle:
      inst.costs = build_angle_costs(points);
      break;
    case CostKind::angle_distance:
      inst.costs = build_angle_distance_costs(points, rho);
      inst.rho = rho;
      break;
    case CostKind::explicit_costs:
      throw InvalidArgument("explicit instances are built from a cost tensor");
  }
  inst.points = std::move(points);
  return inst;
}

inline Instance make_explicit_instance(CostTensor costs) {
  const std::size_t n = costs.size();
  if (n < 3) throw InvalidArgument("an instance needs at least 3 customers");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (i != j && j != k && i != k && !(costs(i, j, k) >= 0.0))
          throw InvalidArgument("cost entries must be nonnegative");
  Instance inst;
  inst.n = n;
  inst.kind = CostKind::explicit_costs;
  inst.costs = std::move(costs);
  return inst;
}

/// Every triple costs `value`.
inline Instance make_constant_instance(std::size_t n, double value) {
  return make_explicit_instance(CostTensor(n, value));
}

inline Instance generate_instance(std::size_t n, std::uint64_t seed, CostKind kind, double rho = kDefaultRho) {
  return make_point_instance(kind, generate_points(n, seed), rho, seed);
}

// ---------------------------------------------------------------------------
// Tours

struct Tour {
  std::vector<int> order;

  friend bool operator==(const Tour&, const Tour&) = default;
};

enum class TourViolationKind { wrong_length, wrong_start, out_of_range, duplicate, missing };

inline std::string_view to_string(TourViolationKind kind) {
  switch (kind) {
    case TourViolationKind::wrong_length: return "wrong-length";
    case TourViolationKind::wrong_start: return "wrong-start";
    case TourViolationKind::out_of_range: return "out-of-range";
    case TourViolationKind::duplicate: return "duplicate";
    case TourViolationKind::missing: return "missing";
  }
  return "?";
}

struct TourViolation {
  TourViolationKind kind;
  long long value = 0;  // offending customer, length, or first element

  friend bool operator==(const TourViolation&, const TourViolation&) = default;
};

struct TourReport {
  std::vector<TourViolation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(TourViolationKind kind) const {
    return std::any_of(violations.begin(), violations.end(),
                       [kind](const TourViolation& v) { return v.kind == kind; });
  }
  std::string describe() const {
    std::string out;
    for (const auto& v : violations) {
      if (!out.empty()) out += "; ";
      out += std::string(to_string(v.kind)) + " " + std::to_string(v.value);
    }
    return out;
  }
};

inline TourReport validate_tour(std::size_t n, const Tour& tour) {
  TourReport report;
  const auto& order = tour.order;
  if (order.size() != n)
    report.violations.push_back({TourViolationKind::wrong_length, static_cast<long long>(order.size())});
  if (!order.empty() && order.front() != 0)
    report.violations.push_back({TourViolationKind::wrong_start, order.front()});
  std::vector<int> seen(n, 0);
  for (int c : order) {
    if (c < 0 || static_cast<std::size_t>(c) >= n) {
      report.violations.push_back({TourViolationKind::out_of_range, c});
      continue;
    }
    if (++seen[static_cast<std::size_t>(c)] == 2) report.violations.push_back({TourViolationKind::duplicate, c});
  }
  for (std::size_t c = 0; c < n; ++c)
    if (seen[c] == 0) report.violations.push_back({TourViolationKind::missing, static_cast<long long>(c)});
  return report;
}

inline TourReport validate_tour(const Instance& inst, const Tour& tour) { return validate_tour(inst.n, tour); }

using Triple = std::array<int, 3>;

/// Sums the costs of `triples` in ascending (i, j, k) order.
///
/// Every objective evaluator in the library goes through this, so tour cost
/// and the model objectives agree to the last bit.
inline double sum_triples(const Instance& inst, std::vector<Triple> triples) {
  std::sort(triples.begin(), triples.end());
  double total = 0.0;
  for (const auto& t : triples)
    total += inst.cost(static_cast<std::size_t>(t[0]), static_cast<std::size_t>(t[1]),
                       static_cast<std::size_t>(t[2]));
  return total;
}

/// The n consecutive triples of a cyclic sequence, in sequence order.
inline std::vector<Triple> cycle_triples(std::span<const int> cycle) {
  const std::size_t n = cycle.size();
  std::vector<Triple> triples;
  triples.reserve(n);
  for (std::size_t p = 0; p < n; ++p)
    triples.push_back({cycle[(p + n - 1) % n], cycle[p], cycle[(p + 1) % n]});
  return triples;
}

/// Cycle cost of any rotation of a tour (no start-at-0 requirement).
inline double cycle_cost(const Instance& inst, std::span<const int> cycle) {
  return sum_triples(inst, cycle_triples(cycle));
}

inline double tour_cost(const Instance& inst, const Tour& tour) {
  auto report = validate_tour(inst, tour);
  if (!report.ok()) throw InvalidTour("invalid tour: " + report.describe());
  return cycle_cost(inst, tour.order);
}

/// Rotates a cyclic sequence so that customer 0 comes first.
inline Tour canonical_tour(std::vector<int> cycle) {
  auto zero = std::find(cycle.begin(), cycle.end(), 0);
  if (zero != cycle.end()) std::rotate(cycle.begin(), zero, cycle.end());
  return Tour{std::move(cycle)};
}

/// Same cycle traversed backwards, still starting at 0.
inline Tour reversed(const Tour& tour) {
  Tour out = tour;
  if (out.order.size() > 1) std::reverse(out.order.begin() + 1, out.order.end());
  return out;
}

}  // namespace qtsp
