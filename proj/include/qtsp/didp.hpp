#pragma once

// Dynamic-programming model of the QTSP.
//
// A state (U, i, j, f) holds the unvisited customers U, the previous
// customer i, the current customer j and the first customer f visited after
// the depot 0. The root is (N \ {0}, 0, 0, 0). From a root-like state
// (j == 0) choosing k sets i = 0 and j = f = k at no cost; afterwards
// visiting k costs c[i][j][k]; once U is empty the cycle is closed for
// c[j][0][f] + c[i][j][0].

#include <qtsp/errors.hpp>
#include <qtsp/instance.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace qtsp {

/// Fixed-width bitset over customer indices, Words * 64 customers at most.
template <std::size_t Words>
class CustomerSet {
 public:
  static constexpr std::size_t capacity = Words * 64;

  constexpr CustomerSet() = default;

  /// {first, ..., last - 1}
  static CustomerSet range(std::size_t first, std::size_t last) {
    CustomerSet s;
    for (std::size_t c = first; c < last; ++c) s.insert(c);
    return s;
  }

  bool contains(std::size_t c) const noexcept { return (words_[c / 64] >> (c % 64)) & 1u; }
  void insert(std::size_t c) noexcept { words_[c / 64] |= std::uint64_t{1} << (c % 64); }
  void erase(std::size_t c) noexcept { words_[c / 64] &= ~(std::uint64_t{1} << (c % 64)); }

  bool empty() const noexcept {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }
  std::size_t size() const noexcept {
    std::size_t total = 0;
    for (auto w : words_) total += static_cast<std::size_t>(std::popcount(w));
    return total;
  }

  /// Calls fn(c) for every member in ascending order.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t w = 0; w < Words; ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        fn(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
        bits &= bits - 1;
      }
    }
  }

  std::vector<int> members() const {
    std::vector<int> out;
    for_each([&](std::size_t c) { out.push_back(static_cast<int>(c)); });
    return out;
  }

  const std::array<std::uint64_t, Words>& words() const noexcept { return words_; }

  friend constexpr auto operator<=>(const CustomerSet&, const CustomerSet&) = default;

 private:
  std::array<std::uint64_t, Words> words_{};
};

template <std::size_t Words>
struct BasicState {
  using Set = CustomerSet<Words>;

  Set unvisited;
  std::uint16_t prev = 0;
  std::uint16_t current = 0;
  std::uint16_t first = 0;

  /// Lexicographic on (unvisited, prev, current, first).
  friend constexpr auto operator<=>(const BasicState&, const BasicState&) = default;
};

/// State for instances with at most 64 customers.
using State = BasicState<1>;

template <std::size_t Words>
struct StateHash {
  std::size_t operator()(const BasicState<Words>& s) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    auto mix = [&h](std::uint64_t v) {
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 0xbf58476d1ce4e5b9ULL;
      h ^= h >> 31;
    };
    for (auto w : s.unvisited.words()) mix(w);
    mix((std::uint64_t{s.prev} << 32) | (std::uint64_t{s.current} << 16) | s.first);
    return static_cast<std::size_t>(h);
  }
};

template <std::size_t Words>
BasicState<Words> root_state(std::size_t n) {
  if (n > CustomerSet<Words>::capacity) throw InvalidArgument("instance too large for state width");
  BasicState<Words> s;
  s.unvisited = CustomerSet<Words>::range(1, n);
  return s;
}

template <std::size_t Words>
constexpr bool is_terminal(const BasicState<Words>& s) noexcept {
  return s.current != 0 && s.unvisited.empty();
}

/// Cost of closing the cycle from a terminal state: c[j][0][f] + c[i][j][0].
template <std::size_t Words>
double terminal_cost(const Instance& inst, const BasicState<Words>& s) noexcept {
  return inst.cost(s.current, 0, s.first) + inst.cost(s.prev, s.current, 0);
}

template <std::size_t Words>
struct Transition {
  BasicState<Words> next;
  double cost = 0.0;
};

/// Successors in increasing order of the chosen customer; empty for
/// terminal states.
template <std::size_t Words>
std::vector<Transition<Words>> expand(const BasicState<Words>& s, const Instance& inst) {
  std::vector<Transition<Words>> out;
  out.reserve(s.unvisited.size());
  s.unvisited.for_each([&](std::size_t k) {
    Transition<Words> t;
    t.next = s;
    t.next.unvisited.erase(k);
    const auto next = static_cast<std::uint16_t>(k);
    if (s.current == 0) {
      t.next.prev = 0;
      t.next.current = next;
      t.next.first = next;
      t.cost = 0.0;
    } else {
      t.next.prev = s.current;
      t.next.current = next;
      t.cost = inst.cost(s.prev, s.current, k);
    }
    out.push_back(t);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Dual bound

/// Cheapest triple in which each customer takes each of the three roles.
struct BoundTables {
  std::vector<double> in_min;   // min c[l][m][k]: k entered
  std::vector<double> mid_min;  // min c[l][k][m]: k passed through
  std::vector<double> out_min;  // min c[k][l][m]: k left
};

inline BoundTables precompute_bound_tables(const Instance& inst) {
  const std::size_t n = inst.n;
  const double inf = std::numeric_limits<double>::infinity();
  BoundTables t{std::vector<double>(n, inf), std::vector<double>(n, inf), std::vector<double>(n, inf)};
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      for (std::size_t c = 0; c < n; ++c) {
        if (c == a || c == b) continue;
        const double v = inst.cost(a, b, c);
        t.out_min[a] = std::min(t.out_min[a], v);
        t.mid_min[b] = std::min(t.mid_min[b], v);
        t.in_min[c] = std::min(t.in_min[c], v);
      }
    }
  return t;
}

/// Lower bound on the completion cost of `s`: the best of three role-based
/// relaxations summed over U plus the fixed endpoints (each customer counted
/// once even when two endpoints coincide).
template <std::size_t Words>
double dual_bound(const BasicState<Words>& s, const BoundTables& t) {
  double in_sum = 0.0, mid_sum = 0.0, out_sum = 0.0;
  s.unvisited.for_each([&](std::size_t k) {
    in_sum += t.in_min[k];
    mid_sum += t.mid_min[k];
    out_sum += t.out_min[k];
  });
  in_sum += t.in_min[0];
  if (s.first != 0) in_sum += t.in_min[s.first];
  mid_sum += t.mid_min[0];
  if (s.current != 0) mid_sum += t.mid_min[s.current];
  out_sum += t.out_min[s.prev];
  if (s.current != s.prev) out_sum += t.out_min[s.current];
  return std::max({in_sum, mid_sum, out_sum});
}

/// Number of 64-bit words needed for n customers; 0 if unsupported.
constexpr std::size_t state_words_for(std::size_t n) noexcept {
  if (n <= 64) return 1;
  if (n <= 128) return 2;
  if (n <= 256) return 4;
  return 0;
}

inline constexpr std::size_t kMaxCustomers = 256;

}  // namespace qtsp
