#pragma once

// Exhaustive reference solvers. No pruning, no cleverness: these are the
// ground truth the search code is tested against.

#include <qtsp/didp.hpp>
#include <qtsp/errors.hpp>
#include <qtsp/instance.hpp>

#include <algorithm>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace qtsp {

inline constexpr std::size_t kOracleMaxCustomers = 12;
inline constexpr std::size_t kCompletionMaxUnvisited = 9;

struct OracleResult {
  Tour tour;
  double cost = 0.0;
};

/// Minimum-cost tour over all (n-1)! orders with 0 first. Among tours within
/// kCostTolerance of the minimum, the lexicographically smallest is returned.
inline OracleResult brute_force_optimal(const Instance& inst) {
  if (inst.n < 3) throw InvalidArgument("brute_force_optimal: n must be at least 3");
  if (inst.n > kOracleMaxCustomers)
    throw SizeGuard("brute_force_optimal: n=" + std::to_string(inst.n) + " exceeds " +
                    std::to_string(kOracleMaxCustomers));
  Tour tour{std::vector<int>(inst.n)};
  std::iota(tour.order.begin(), tour.order.end(), 0);
  OracleResult best{tour, tour_cost(inst, tour)};
  while (std::next_permutation(tour.order.begin() + 1, tour.order.end())) {
    double cost = tour_cost(inst, tour);
    if (cost < best.cost - kCostTolerance) best = {tour, cost};
  }
  return best;
}

/// Optimal completion cost V(U, i, j, f) by enumerating every order of U.
template <std::size_t Words>
double brute_force_completion(const Instance& inst, const BasicState<Words>& state) {
  std::vector<int> rest = state.unvisited.members();
  if (rest.size() > kCompletionMaxUnvisited)
    throw SizeGuard("brute_force_completion: " + std::to_string(rest.size()) + " unvisited customers exceeds " +
                    std::to_string(kCompletionMaxUnvisited));
  const auto c = [&inst](int a, int b, int d) {
    return inst.cost(static_cast<std::size_t>(a), static_cast<std::size_t>(b), static_cast<std::size_t>(d));
  };
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    int prev = state.prev, cur = state.current, first = state.first;
    std::size_t start = 0;
    if (cur == 0) {
      // First choice fixes f; the cycle then runs 0 -> f -> ... -> 0.
      if (rest.empty()) break;
      prev = 0;
      cur = rest[0];
      first = rest[0];
      start = 1;
    }
    for (std::size_t p = start; p < rest.size(); ++p) {
      total += c(prev, cur, rest[p]);
      prev = cur;
      cur = rest[p];
    }
    total += c(cur, 0, first) + c(prev, cur, 0);
    best = std::min(best, total);
  } while (std::next_permutation(rest.begin(), rest.end()));
  return best;
}

}  // namespace qtsp
