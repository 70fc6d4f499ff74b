#pragma once

#include <qtsp/didp.hpp>
#include <qtsp/instance.hpp>

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace qtsp::test {

/// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::path(QTSP_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Every tour of n customers with 0 first, lexicographic.
inline std::vector<Tour> all_tours(std::size_t n) {
  std::vector<Tour> out;
  Tour t{std::vector<int>(n)};
  for (std::size_t p = 0; p < n; ++p) t.order[p] = static_cast<int>(p);
  do out.push_back(t);
  while (std::next_permutation(t.order.begin() + 1, t.order.end()));
  return out;
}

/// Explicit instance with entries drawn from a fixed pseudo-random stream.
inline Instance random_explicit_instance(std::size_t n, std::uint64_t seed, int max_value = 100) {
  std::mt19937_64 gen(seed);
  CostTensor c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (i != j && j != k && i != k) c(i, j, k) = static_cast<double>(uniform_below(gen, max_value + 1));
  return make_explicit_instance(std::move(c));
}

/// Every state reachable from the root, in breadth-first order.
inline std::vector<State> reachable_states(const Instance& inst) {
  std::vector<State> out{root_state<1>(inst.n)};
  std::set<State> seen{out.front()};
  for (std::size_t p = 0; p < out.size(); ++p)
    for (const auto& t : expand(out[p], inst))
      if (seen.insert(t.next).second) out.push_back(t.next);
  return out;
}

namespace detail {

inline void decompose(std::vector<int> rest, std::size_t min_cycles, std::vector<std::vector<int>>& current,
                      std::vector<std::vector<std::vector<int>>>& out) {
  if (rest.empty()) {
    if (current.size() >= min_cycles) out.push_back(current);
    return;
  }
  const int head = rest.front();
  const std::vector<int> others(rest.begin() + 1, rest.end());
  const std::size_t m = others.size();
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> members{head}, remaining;
    for (std::size_t b = 0; b < m; ++b) ((mask >> b) & 1u ? members : remaining).push_back(others[b]);
    if (members.size() < 3 || (!remaining.empty() && remaining.size() < 3)) continue;
    // Every cyclic order with `head` first.
    std::sort(members.begin() + 1, members.end());
    do {
      current.push_back(members);
      decompose(remaining, min_cycles, current, out);
      current.pop_back();
    } while (std::next_permutation(members.begin() + 1, members.end()));
  }
}

}  // namespace detail

/// Every way to cover {0..n-1} with at least `min_cycles` disjoint directed
/// cycles of length >= 3. Each cycle starts at its smallest customer.
inline std::vector<std::vector<std::vector<int>>> cycle_decompositions(std::size_t n, std::size_t min_cycles = 2) {
  std::vector<int> all(n);
  for (std::size_t p = 0; p < n; ++p) all[p] = static_cast<int>(p);
  std::vector<std::vector<std::vector<int>>> out;
  std::vector<std::vector<int>> current;
  detail::decompose(all, min_cycles, current, out);
  return out;
}

}  // namespace qtsp::test
