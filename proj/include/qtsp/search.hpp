#pragma once

// Solvers over the dynamic-programming model in didp.hpp.
//
// solve_exact: best-first search ordered by g + dual_bound, duplicate states
//   keep the smallest g, nodes whose priority cannot beat the incumbent are
//   pruned. Optimality is proven when the best open priority reaches the
//   incumbent.
// solve_cabs: complete anytime beam search. Each pass is a layered beam
//   search keeping the `width` best nodes per layer; the width grows
//   geometrically between passes. A pass that dropped no node able to beat
//   the incumbent proves optimality.
//
// Node ordering everywhere: g + h ascending, then larger g, then state key.

#include <qtsp/didp.hpp>
#include <qtsp/errors.hpp>
#include <qtsp/instance.hpp>
#include <qtsp/trace.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

namespace qtsp {

struct Budget {
  double time_limit_s = std::numeric_limits<double>::infinity();
  std::uint64_t expansion_limit = std::numeric_limits<std::uint64_t>::max();
  /// Cap on search nodes held at once; exceeding it ends the run as memory-out.
  std::size_t node_limit = 20'000'000;
};

struct ExactOptions {
  Budget budget;
  /// When false nothing is discarded by bound and the search runs until the
  /// open list is empty.
  bool prune = true;
};

struct CabsOptions {
  Budget budget;
  std::size_t initial_width = 1;
  double growth = 2.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::no_solution;
  std::optional<Tour> tour;
  std::optional<double> cost;
  double dual = 0.0;
  AnytimeTrace trace;
  std::uint64_t expansions = 0;
  double elapsed = 0.0;
  std::size_t passes = 0;
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Appends trace events while keeping primal nonincreasing, dual
/// nondecreasing and dual <= primal.
class TraceRecorder {
 public:
  explicit TraceRecorder(const Stopwatch& clock) : clock_(clock) {}

  void bound(double dual) {
    double d = clamp(dual);
    if (!trace_.events.empty() && d <= dual_) return;
    dual_ = d;
    push(TraceEventKind::bound);
  }

  void incumbent(double primal, double dual) {
    primal_ = primal;
    dual_ = clamp(dual);
    push(TraceEventKind::incumbent);
  }

  AnytimeTrace finish(SolveStatus status, bool memory_out) {
    if (status == SolveStatus::optimal && primal_) dual_ = *primal_;
    push(TraceEventKind::final);
    trace_.status = status;
    trace_.memory_out = memory_out;
    return std::move(trace_);
  }

  double dual() const noexcept { return dual_; }

 private:
  double clamp(double d) const {
    d = std::max({d, dual_, 0.0});
    if (primal_) d = std::min(d, *primal_);
    return d;
  }
  void push(TraceEventKind kind) { trace_.events.push_back({clock_.seconds(), primal_, dual_, kind}); }

  const Stopwatch& clock_;
  AnytimeTrace trace_;
  std::optional<double> primal_;
  double dual_ = 0.0;
};

template <std::size_t Words>
bool node_before(double f_a, double g_a, const BasicState<Words>& s_a, double f_b, double g_b,
                 const BasicState<Words>& s_b) {
  if (f_a != f_b) return f_a < f_b;
  if (g_a != g_b) return g_a > g_b;
  return s_a < s_b;
}

// ---------------------------------------------------------------------------

template <std::size_t Words>
SolveResult solve_exact_impl(const Instance& inst, const ExactOptions& opts) {
  using S = BasicState<Words>;
  struct Node {
    S state;
    double g;
    double f;
    std::int64_t parent;
  };

  Stopwatch clock;
  TraceRecorder recorder(clock);
  const BoundTables tables = precompute_bound_tables(inst);
  const Budget& budget = opts.budget;

  std::vector<Node> arena;
  std::unordered_map<S, std::size_t, StateHash<Words>> best_index;
  auto later = [&arena](std::size_t a, std::size_t b) {
    const Node& x = arena[a];
    const Node& y = arena[b];
    return node_before(y.f, y.g, y.state, x.f, x.g, x.state);
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> open(later);

  SolveResult result;
  std::optional<double> incumbent;
  bool memory_out = false;
  bool budget_hit = false;
  bool proven = false;

  const S root = root_state<Words>(inst.n);
  const double root_h = dual_bound(root, tables);
  arena.push_back({root, 0.0, root_h, -1});
  best_index.emplace(root, 0);
  open.push(0);
  recorder.bound(root_h);

  auto beats_incumbent = [&](double value) { return !incumbent || value < *incumbent - kCostTolerance; };

  while (true) {
    if (open.empty()) {
      proven = incumbent.has_value();
      break;
    }
    const std::size_t idx = open.top();
    if (best_index.at(arena[idx].state) != idx) {
      open.pop();
      continue;
    }
    if (opts.prune && !beats_incumbent(arena[idx].f)) {
      proven = true;
      break;
    }
    if (result.expansions >= budget.expansion_limit || clock.seconds() >= budget.time_limit_s) {
      budget_hit = true;
      break;
    }
    open.pop();
    ++result.expansions;
    if (result.expansions % 4096 == 0 && opts.prune) {
      double lower = open.empty() ? arena[idx].f : std::min(arena[idx].f, arena[open.top()].f);
      recorder.bound(incumbent ? std::min(lower, *incumbent) : lower);
    }

    const Node node = arena[idx];
    for (const auto& t : expand(node.state, inst)) {
      const double g = node.g + t.cost;
      if (is_terminal(t.next)) {
        const double total = g + terminal_cost(inst, t.next);
        if (!beats_incumbent(total)) continue;
        Tour tour;
        tour.order.push_back(t.next.current);
        for (std::int64_t p = static_cast<std::int64_t>(idx); p >= 0; p = arena[static_cast<std::size_t>(p)].parent)
          tour.order.push_back(arena[static_cast<std::size_t>(p)].state.current);
        std::reverse(tour.order.begin(), tour.order.end());
        const double cost = tour_cost(inst, tour);
        incumbent = cost;
        result.tour = std::move(tour);
        result.cost = cost;
        double lower = std::min(node.f, open.empty() ? node.f : arena[open.top()].f);
        recorder.incumbent(cost, std::min(lower, cost));
        continue;
      }
      const double f = g + dual_bound(t.next, tables);
      if (opts.prune && !beats_incumbent(f)) continue;
      auto found = best_index.find(t.next);
      if (found != best_index.end() && arena[found->second].g <= g) continue;
      if (arena.size() >= budget.node_limit) {
        memory_out = true;
        break;
      }
      arena.push_back({t.next, g, f, static_cast<std::int64_t>(idx)});
      if (found != best_index.end()) found->second = arena.size() - 1;
      else best_index.emplace(t.next, arena.size() - 1);
      open.push(arena.size() - 1);
    }
    if (memory_out) break;
  }

  if (proven) {
    result.status = SolveStatus::optimal;
  } else {
    double lower = recorder.dual();
    while (!open.empty() && best_index.at(arena[open.top()].state) != open.top()) open.pop();
    if (!open.empty()) lower = std::max(lower, arena[open.top()].f);
    recorder.bound(incumbent ? std::min(lower, *incumbent) : lower);
    result.status = incumbent ? SolveStatus::out_of_budget : SolveStatus::no_solution;
  }
  (void)budget_hit;
  result.trace = recorder.finish(result.status, memory_out);
  result.dual = result.trace.final_dual();
  result.elapsed = clock.seconds();
  return result;
}

// ---------------------------------------------------------------------------

template <std::size_t Words>
SolveResult solve_cabs_impl(const Instance& inst, const CabsOptions& opts) {
  using S = BasicState<Words>;
  struct Node {
    S state;
    double g;
    double f;
    std::uint32_t parent;  // index into the previous layer
  };

  if (opts.initial_width == 0) throw InvalidArgument("beam width must be at least 1");
  if (!(opts.growth > 1.0)) throw InvalidArgument("beam growth factor must exceed 1");

  Stopwatch clock;
  TraceRecorder recorder(clock);
  const BoundTables tables = precompute_bound_tables(inst);
  const Budget& budget = opts.budget;

  SolveResult result;
  std::optional<double> incumbent;
  bool memory_out = false;
  bool budget_hit = false;
  bool proven = false;

  const S root = root_state<Words>(inst.n);
  const double root_h = dual_bound(root, tables);
  recorder.bound(root_h);

  auto beats_incumbent = [&](double value) { return !incumbent || value < *incumbent - kCostTolerance; };
  auto ordered = [](const Node& a, const Node& b) { return node_before(a.f, a.g, a.state, b.f, b.g, b.state); };

  std::size_t width = opts.initial_width;
  while (!proven && !budget_hit && !memory_out) {
    ++result.passes;
    std::vector<std::vector<Node>> layers;
    layers.push_back({Node{root, 0.0, root_h, 0}});
    std::size_t stored = 1;
    double dropped_min = std::numeric_limits<double>::infinity();

    while (!layers.back().empty()) {
      const auto& layer = layers.back();
      const std::size_t depth = layers.size() - 1;
      std::vector<Node> next;
      for (std::size_t idx = 0; idx < layer.size(); ++idx) {
        const Node& node = layer[idx];
        if (!beats_incumbent(node.f)) continue;
        if (result.expansions >= budget.expansion_limit || clock.seconds() >= budget.time_limit_s) {
          budget_hit = true;
          break;
        }
        ++result.expansions;
        for (const auto& t : expand(node.state, inst)) {
          const double g = node.g + t.cost;
          if (is_terminal(t.next)) {
            const double total = g + terminal_cost(inst, t.next);
            if (!beats_incumbent(total)) continue;
            Tour tour;
            tour.order.resize(depth + 2);
            tour.order[depth + 1] = t.next.current;
            std::size_t p = idx;
            for (std::size_t d = depth + 1; d-- > 0;) {
              tour.order[d] = layers[d][p].state.current;
              p = layers[d][p].parent;
            }
            const double cost = tour_cost(inst, tour);
            incumbent = cost;
            result.tour = std::move(tour);
            result.cost = cost;
            recorder.incumbent(cost, recorder.dual());
            continue;
          }
          const double f = g + dual_bound(t.next, tables);
          if (!beats_incumbent(f)) continue;
          next.push_back({t.next, g, f, static_cast<std::uint32_t>(idx)});
        }
        if (stored + next.size() > budget.node_limit) {
          memory_out = true;
          break;
        }
      }
      if (budget_hit || memory_out) break;

      // Merge duplicates keeping the smallest g, then keep the best `width`.
      std::sort(next.begin(), next.end(), [](const Node& a, const Node& b) {
        if (a.state != b.state) return a.state < b.state;
        if (a.g != b.g) return a.g < b.g;
        return a.parent < b.parent;
      });
      next.erase(std::unique(next.begin(), next.end(), [](const Node& a, const Node& b) { return a.state == b.state; }),
                 next.end());
      std::sort(next.begin(), next.end(), ordered);
      if (next.size() > width) {
        for (std::size_t d = width; d < next.size(); ++d) dropped_min = std::min(dropped_min, next[d].f);
        next.resize(width);
      }
      stored += next.size();
      layers.push_back(std::move(next));
    }
    if (budget_hit || memory_out) break;

    if (incumbent) {
      const double pass_bound = std::min(dropped_min, *incumbent);
      recorder.bound(pass_bound);
      if (!beats_incumbent(dropped_min)) proven = true;
    } else if (std::isfinite(dropped_min)) {
      recorder.bound(dropped_min);
    }
    if (!proven) {
      const double grown = std::ceil(static_cast<double>(width) * opts.growth);
      width = std::max(width + 1, grown >= static_cast<double>(budget.node_limit)
                                      ? budget.node_limit
                                      : static_cast<std::size_t>(grown));
    }
  }

  if (proven) result.status = SolveStatus::optimal;
  else if (memory_out) result.status = SolveStatus::out_of_budget;
  else result.status = incumbent ? SolveStatus::feasible : SolveStatus::no_solution;
  result.trace = recorder.finish(result.status, memory_out);
  result.dual = result.trace.final_dual();
  result.elapsed = clock.seconds();
  return result;
}

template <typename Fn>
SolveResult dispatch_on_width(const Instance& inst, Fn&& fn) {
  switch (state_words_for(inst.n)) {
    case 1: return fn(std::integral_constant<std::size_t, 1>{});
    case 2: return fn(std::integral_constant<std::size_t, 2>{});
    case 4: return fn(std::integral_constant<std::size_t, 4>{});
    default:
      throw InvalidArgument("instances with more than " + std::to_string(kMaxCustomers) + " customers are not supported");
  }
}

}  // namespace detail

inline SolveResult solve_exact(const Instance& inst, const ExactOptions& opts = {}) {
  return detail::dispatch_on_width(inst, [&](auto words) { return detail::solve_exact_impl<words()>(inst, opts); });
}

inline SolveResult solve_cabs(const Instance& inst, const CabsOptions& opts = {}) {
  return detail::dispatch_on_width(inst, [&](auto words) { return detail::solve_cabs_impl<words()>(inst, opts); });
}

}  // namespace qtsp
