#pragma once

// In-process evaluation of the MILP, MIQP and CP formulations.
//
// MILP variables: x[i][j] (j follows i), y[i][j][k] (i, j, k consecutive),
// u[i] (position of customer i != 0). The MIQP drops y and charges
// c[i][j][k] * x[i][j] * x[j][k]. The CP model is a sequence x_0..x_{n-1}
// with all-different, x_0 = 0 and an element-expression objective.

#include <qtsp/errors.hpp>
#include <qtsp/instance.hpp>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qtsp {

enum class SubtourElimination { dl, mtz, flow };

inline std::string_view to_string(SubtourElimination s) {
  switch (s) {
    case SubtourElimination::dl: return "dl";
    case SubtourElimination::mtz: return "mtz";
    case SubtourElimination::flow: return "flow";
  }
  return "?";
}

struct MilpAssignment {
  std::size_t n = 0;
  std::vector<long long> x;  // n*n, diagonal unused
  std::vector<long long> y;  // n*n*n, repeated indices unused
  std::vector<long long> u;  // n, u[0] unused

  MilpAssignment() = default;
  explicit MilpAssignment(std::size_t customers)
      : n(customers), x(customers * customers, 0), y(customers * customers * customers, 0), u(customers, 0) {}

  long long& X(std::size_t i, std::size_t j) { return x[i * n + j]; }
  long long X(std::size_t i, std::size_t j) const { return x[i * n + j]; }
  long long& Y(std::size_t i, std::size_t j, std::size_t k) { return y[(i * n + j) * n + k]; }
  long long Y(std::size_t i, std::size_t j, std::size_t k) const { return y[(i * n + j) * n + k]; }

  friend bool operator==(const MilpAssignment&, const MilpAssignment&) = default;
};

/// Assignment induced by a set of disjoint directed cycles covering N.
///
/// Arcs and consecutive triples follow each cycle. Positions are counted
/// within each cycle: in the cycle through 0 they follow the order from 0
/// (u = 1, 2, ...); any other cycle is numbered 1, 2, ... from its first
/// listed customer.
inline MilpAssignment assignment_from_cycles(std::size_t n, const std::vector<std::vector<int>>& cycles) {
  MilpAssignment a(n);
  for (const auto& raw : cycles) {
    std::vector<int> cycle = raw;
    auto zero = std::find(cycle.begin(), cycle.end(), 0);
    if (zero != cycle.end()) std::rotate(cycle.begin(), zero, cycle.end());
    const std::size_t len = cycle.size();
    for (std::size_t p = 0; p < len; ++p) {
      const auto i = static_cast<std::size_t>(cycle[p]);
      const auto j = static_cast<std::size_t>(cycle[(p + 1) % len]);
      const auto k = static_cast<std::size_t>(cycle[(p + 2) % len]);
      if (i >= n || j >= n || k >= n) throw InvalidArgument("cycle customer out of range");
      if (i != j) a.X(i, j) = 1;
      if (i != j && j != k && i != k) a.Y(i, j, k) = 1;
    }
    const bool through_depot = !cycle.empty() && cycle.front() == 0;
    for (std::size_t p = 0; p < len; ++p) {
      if (cycle[p] == 0) continue;
      a.u[static_cast<std::size_t>(cycle[p])] = static_cast<long long>(through_depot ? p : p + 1);
    }
  }
  return a;
}

inline MilpAssignment assignment_from_tour(const Instance& inst, const Tour& tour) {
  auto report = validate_tour(inst, tour);
  if (!report.ok()) throw InvalidTour("invalid tour: " + report.describe());
  return assignment_from_cycles(inst.n, {tour.order});
}

struct ConstraintViolation {
  std::string constraint;    // family name, e.g. "dl" or "degree-out"
  std::vector<int> indices;  // indices of the violated instance
  double slack = 0.0;        // rhs - lhs; negative for a violated <=

  std::string describe() const {
    std::string out = constraint + "(";
    for (std::size_t p = 0; p < indices.size(); ++p) out += (p ? "," : "") + std::to_string(indices[p]);
    return out + ") slack " + format_shortest(slack);
  }
};

struct ModelCheckReport {
  bool feasible = true;
  double objective = 0.0;
  std::vector<ConstraintViolation> violations;

  bool violates(std::string_view family) const {
    return std::any_of(violations.begin(), violations.end(),
                       [family](const ConstraintViolation& v) { return v.constraint == family; });
  }
};

namespace detail {

inline void add_violation(ModelCheckReport& r, std::string family, std::vector<int> idx, double slack) {
  r.feasible = false;
  r.violations.push_back({std::move(family), std::move(idx), slack});
}

/// Degree, DL subtour elimination, x binary and position bounds: the
/// constraints shared by the MILP and MIQP models.
inline void check_arc_part(const Instance& inst, const MilpAssignment& a, ModelCheckReport& r) {
  const std::size_t n = inst.n;
  const auto nn = static_cast<long long>(n);
  for (std::size_t i = 0; i < n; ++i) {
    long long out = 0, in = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      out += a.X(i, j);
      in += a.X(j, i);
    }
    if (out != 1) add_violation(r, "degree-out", {static_cast<int>(i)}, static_cast<double>(1 - out));
    if (in != 1) add_violation(r, "degree-in", {static_cast<int>(i)}, static_cast<double>(1 - in));
  }
  // u_i - u_j + (n-1) x_ij + (n-3) x_ji <= n-2 for i, j in N \ {0}, i != j
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 1; j < n; ++j) {
      if (i == j) continue;
      long long lhs = a.u[i] - a.u[j] + (nn - 1) * a.X(i, j) + (nn - 3) * a.X(j, i);
      if (lhs > nn - 2) add_violation(r, "dl", {static_cast<int>(i), static_cast<int>(j)}, static_cast<double>(nn - 2 - lhs));
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && a.X(i, j) != 0 && a.X(i, j) != 1)
        add_violation(r, "x-binary", {static_cast<int>(i), static_cast<int>(j)}, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    if (a.u[i] < 1) add_violation(r, "u-bounds", {static_cast<int>(i)}, static_cast<double>(a.u[i] - 1));
    if (a.u[i] > nn - 1) add_violation(r, "u-bounds", {static_cast<int>(i)}, static_cast<double>(nn - 1 - a.u[i]));
  }
}

inline void require_shape(const Instance& inst, const MilpAssignment& a) {
  if (a.n != inst.n || a.x.size() != inst.n * inst.n || a.y.size() != inst.n * inst.n * inst.n ||
      a.u.size() != inst.n)
    throw InvalidArgument("assignment size does not match the instance");
}

}  // namespace detail

/// Evaluates every constraint of the MILP with DL subtour elimination and the
/// objective sum of c[i][j][k] * y[i][j][k] over ascending (i, j, k).
inline ModelCheckReport check_milp(const Instance& inst, const MilpAssignment& a) {
  detail::require_shape(inst, a);
  ModelCheckReport r;
  const std::size_t n = inst.n;
  detail::check_arc_part(inst, a, r);
  // x_ij = sum_k y_ijk = sum_k y_kij
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      long long leaving = 0, entering = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        leaving += a.Y(i, j, k);
        entering += a.Y(k, i, j);
      }
      if (leaving != a.X(i, j))
        detail::add_violation(r, "link-next", {static_cast<int>(i), static_cast<int>(j)},
                              static_cast<double>(a.X(i, j) - leaving));
      if (entering != a.X(i, j))
        detail::add_violation(r, "link-prev", {static_cast<int>(i), static_cast<int>(j)},
                              static_cast<double>(a.X(i, j) - entering));
    }
  double objective = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        const long long v = a.Y(i, j, k);
        if (v != 0 && v != 1)
          detail::add_violation(r, "y-binary", {static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)}, 0.0);
        objective += inst.cost(i, j, k) * static_cast<double>(v);
      }
  r.objective = objective;
  return r;
}

/// Sum of c[i][j][k] * x[i][j] * x[j][k] over ascending (i, j, k).
inline double eval_miqp_objective(const Instance& inst, const MilpAssignment& a) {
  detail::require_shape(inst, a);
  const std::size_t n = inst.n;
  double objective = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        objective += inst.cost(i, j, k) * static_cast<double>(a.X(i, j) * a.X(j, k));
      }
  return objective;
}

/// MIQP feasibility (degree, DL, bounds) with the quadratic objective.
inline ModelCheckReport check_miqp(const Instance& inst, const MilpAssignment& a) {
  detail::require_shape(inst, a);
  ModelCheckReport r;
  detail::check_arc_part(inst, a, r);
  r.objective = eval_miqp_objective(inst, a);
  return r;
}

struct CpReport {
  bool feasible = true;
  std::optional<double> objective;  // absent when a value lies outside N or the length is wrong
  std::vector<std::string> violations;
};

/// The element-expression objective terms as value triples:
/// (x_{n-1}, x_0, x_1), (x_i, x_{i+1}, x_{i+2}) for i = 0..n-3, (x_{n-2}, x_{n-1}, x_0).
inline std::vector<Triple> cp_objective_triples(std::span<const int> seq) {
  const std::size_t n = seq.size();
  std::vector<Triple> t;
  t.push_back({seq[n - 1], seq[0], seq[1]});
  for (std::size_t i = 0; i + 2 < n; ++i) t.push_back({seq[i], seq[i + 1], seq[i + 2]});
  t.push_back({seq[n - 2], seq[n - 1], seq[0]});
  return t;
}

inline CpReport eval_cp(const Instance& inst, std::span<const int> seq) {
  CpReport r;
  const std::size_t n = inst.n;
  if (seq.size() != n) {
    r.feasible = false;
    r.violations.push_back("length " + std::to_string(seq.size()) + " != " + std::to_string(n));
    return r;
  }
  bool in_domain = true;
  for (std::size_t p = 0; p < n; ++p)
    if (seq[p] < 0 || static_cast<std::size_t>(seq[p]) >= n) {
      in_domain = false;
      r.feasible = false;
      r.violations.push_back("domain x" + std::to_string(p) + " = " + std::to_string(seq[p]));
    }
  if (!in_domain) return r;
  std::vector<int> seen(n, 0);
  for (int v : seq)
    if (++seen[static_cast<std::size_t>(v)] == 2) {
      r.feasible = false;
      r.violations.push_back("alldifferent repeats " + std::to_string(v));
    }
  if (seq[0] != 0) {
    r.feasible = false;
    r.violations.push_back("x0 = " + std::to_string(seq[0]) + " != 0");
  }
  if (r.feasible) r.objective = sum_triples(inst, cp_objective_triples(seq));
  return r;
}

}  // namespace qtsp
