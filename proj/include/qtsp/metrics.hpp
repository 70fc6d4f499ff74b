#pragma once

// Evaluation measures over anytime traces.
//
// optimality gap  = |primal - dual| / primal   (1 without a primal bound)
// primal gap      = |primal - best| / primal   (1 without a primal bound)
// primal integral = integral over [0, horizon] of the primal gap of the best
//                   incumbent at each instant (gap 1 before the first one)
// Differences within kCostTolerance count as gap 0, which also covers a zero
// primal bound with a zero dual / best-known value.

#include <qtsp/errors.hpp>
#include <qtsp/instance.hpp>
#include <qtsp/trace.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace qtsp {

inline double optimality_gap(std::optional<double> primal, double dual) {
  if (dual < 0.0 || (primal && *primal < 0.0)) throw InvalidArgument("optimality_gap: bounds must be nonnegative");
  if (!primal) return 1.0;
  if (*primal < dual - kCostTolerance) throw InconsistentData("optimality_gap: dual bound above primal bound");
  if (std::fabs(*primal - dual) <= kCostTolerance) return 0.0;
  return std::clamp(std::fabs(*primal - dual) / *primal, 0.0, 1.0);
}

inline double primal_gap(std::optional<double> primal, double best_known) {
  if (best_known < 0.0 || (primal && *primal < 0.0)) throw InvalidArgument("primal_gap: values must be nonnegative");
  if (!primal) return 1.0;
  if (best_known > *primal + kCostTolerance)
    throw InconsistentData("primal_gap: best-known value " + format_shortest(best_known) + " worse than primal " +
                           format_shortest(*primal));
  if (std::fabs(*primal - best_known) <= kCostTolerance) return 0.0;
  return std::clamp(std::fabs(*primal - best_known) / *primal, 0.0, 1.0);
}

inline double primal_integral(const AnytimeTrace& trace, double best_known, double horizon) {
  if (!(horizon > 0.0)) throw InvalidArgument("primal_integral: horizon must be positive");
  for (std::size_t e = 1; e < trace.events.size(); ++e)
    if (trace.events[e].elapsed < trace.events[e - 1].elapsed)
      throw InvalidArgument("primal_integral: trace events are not sorted by time");

  double area = 0.0;
  double t_prev = 0.0;
  double gap = 1.0;
  std::optional<double> best;
  for (const auto& ev : trace.events) {
    if (ev.elapsed >= horizon) break;
    if (!ev.primal || (best && *ev.primal >= *best)) continue;
    const double t = std::max(ev.elapsed, 0.0);
    area += gap * (t - t_prev);
    t_prev = t;
    best = ev.primal;
    gap = primal_gap(best, best_known);
  }
  area += gap * (horizon - t_prev);
  return area;
}

// ---------------------------------------------------------------------------
// Batches

struct RunRecord {
  std::string instance;
  std::string solver;
  std::size_t n = 0;
  std::string kind;
  AnytimeTrace trace;
  double time_limit = 0.0;
  bool memory_out = false;
};

inline RunRecord record_from_trace(const TraceFile& file) {
  return {file.meta.instance, file.meta.solver, file.meta.n, file.meta.kind,
          file.trace, file.meta.time_limit, file.trace.memory_out};
}

using BestKnownTable = std::map<std::string, double>;

/// Best primal bound per instance over all runs.
inline BestKnownTable best_known_from_runs(const std::vector<RunRecord>& records) {
  BestKnownTable table;
  for (const auto& r : records) {
    auto p = r.trace.final_primal();
    if (!p) continue;
    auto [it, inserted] = table.emplace(r.instance, *p);
    if (!inserted) it->second = std::min(it->second, *p);
  }
  return table;
}

struct RunMetrics {
  const RunRecord* record = nullptr;
  double opt_gap = 1.0;
  std::optional<double> best_known;  // absent: flagged, left out of primal means
  std::optional<double> primal_gap;
  std::optional<double> primal_integral;
};

inline RunMetrics compute_run_metrics(const RunRecord& r, const BestKnownTable& best, double horizon) {
  RunMetrics m;
  m.record = &r;
  m.opt_gap = optimality_gap(r.trace.final_primal(), std::max(r.trace.final_dual(), 0.0));
  if (auto it = best.find(r.instance); it != best.end()) {
    m.best_known = it->second;
    m.primal_gap = primal_gap(r.trace.final_primal(), it->second);
    m.primal_integral = primal_integral(r.trace, it->second, horizon);
  }
  return m;
}

struct AggregateRow {
  std::size_t n = 0;
  std::string kind;
  std::string solver;
  double mean_opt_gap = 0.0;
  std::optional<double> mean_primal_gap;
  std::optional<double> mean_primal_integral;
  std::size_t count = 0;
  std::size_t flagged = 0;  // runs without a best-known value
};

/// Arithmetic means per (n, kind, solver), rows ordered by kind, solver, n.
inline std::vector<AggregateRow> aggregate_report(const std::vector<RunMetrics>& runs) {
  struct Acc {
    double opt = 0.0, pgap = 0.0, pint = 0.0;
    std::size_t count = 0, with_best = 0;
  };
  std::map<std::tuple<std::string, std::string, std::size_t>, Acc> groups;
  for (const auto& m : runs) {
    auto& acc = groups[{m.record->kind, m.record->solver, m.record->n}];
    acc.opt += m.opt_gap;
    ++acc.count;
    if (m.primal_gap) {
      acc.pgap += *m.primal_gap;
      acc.pint += *m.primal_integral;
      ++acc.with_best;
    }
  }
  std::vector<AggregateRow> rows;
  for (const auto& [key, acc] : groups) {
    AggregateRow row;
    std::tie(row.kind, row.solver, row.n) = key;
    row.count = acc.count;
    row.flagged = acc.count - acc.with_best;
    row.mean_opt_gap = acc.opt / static_cast<double>(acc.count);
    if (acc.with_best > 0) {
      row.mean_primal_gap = acc.pgap / static_cast<double>(acc.with_best);
      row.mean_primal_integral = acc.pint / static_cast<double>(acc.with_best);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<AggregateRow> aggregate_report(const std::vector<RunRecord>& records, const BestKnownTable& best,
                                                  double horizon) {
  std::vector<RunMetrics> runs;
  runs.reserve(records.size());
  for (const auto& r : records) runs.push_back(compute_run_metrics(r, best, horizon));
  return aggregate_report(runs);
}

namespace detail {
inline std::string opt_field(const std::optional<double>& v) { return v ? format_shortest(*v) : std::string(); }
}  // namespace detail

inline std::string format_aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::string out = "n,kind,solver,mean_opt_gap,mean_primal_gap,mean_primal_integral,count\n";
  for (const auto& r : rows)
    out += std::to_string(r.n) + "," + r.kind + "," + r.solver + "," + format_shortest(r.mean_opt_gap) + "," +
           detail::opt_field(r.mean_primal_gap) + "," + detail::opt_field(r.mean_primal_integral) + "," +
           std::to_string(r.count) + "\n";
  return out;
}

inline std::string format_runs_csv(const std::vector<RunMetrics>& runs) {
  std::string out = "instance,n,kind,solver,status,primal,dual,best_known,opt_gap,primal_gap,primal_integral\n";
  for (const auto& m : runs) {
    const auto& r = *m.record;
    auto p = r.trace.final_primal();
    out += r.instance + "," + std::to_string(r.n) + "," + r.kind + "," + r.solver + "," +
           std::string(to_string(r.trace.status)) + "," + (p ? format_shortest(*p) : std::string("inf")) + "," +
           format_shortest(r.trace.final_dual()) + "," + detail::opt_field(m.best_known) + "," +
           format_shortest(m.opt_gap) + "," + detail::opt_field(m.primal_gap) + "," +
           detail::opt_field(m.primal_integral) + "\n";
  }
  return out;
}

/// gnuplot data: one block per (kind, solver), separated by two blank lines.
inline std::string format_gnuplot_dat(const std::vector<AggregateRow>& rows) {
  std::string out;
  std::string block;
  for (const auto& r : rows) {
    std::string key = r.kind + " " + r.solver;
    if (key != block) {
      if (!block.empty()) out += "\n\n";
      out += "# " + key + "\n# n mean_opt_gap mean_primal_gap mean_primal_integral\n";
      block = key;
    }
    out += std::to_string(r.n) + " " + format_shortest(r.mean_opt_gap) + " " +
           (r.mean_primal_gap ? format_shortest(*r.mean_primal_gap) : std::string("NaN")) + " " +
           (r.mean_primal_integral ? format_shortest(*r.mean_primal_integral) : std::string("NaN")) + "\n";
  }
  return out;
}

}  // namespace qtsp
