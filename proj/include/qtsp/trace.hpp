#pragma once

// Anytime traces: time-stamped primal/dual bounds from a solver run, and
// their CSV form.
//
//   # instance=<id>
//   # solver=<name>
//   # n=<N>
//   # kind=<kind>
//   # time_limit=<seconds>
//   # status=<status>
//   # memory=ok|memory-out
//   elapsed_s,primal,dual,event
//   0.000004,inf,1234.5,bound
//
// A missing primal bound is written as "inf".

#include <qtsp/errors.hpp>
#include <qtsp/instance.hpp>
#include <qtsp/io.hpp>

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qtsp {

enum class SolveStatus { optimal, feasible, no_solution, out_of_budget };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible: return "feasible";
    case SolveStatus::no_solution: return "no-solution";
    case SolveStatus::out_of_budget: return "out-of-budget";
  }
  return "?";
}

inline std::optional<SolveStatus> parse_solve_status(std::string_view s) {
  if (s == "optimal") return SolveStatus::optimal;
  if (s == "feasible") return SolveStatus::feasible;
  if (s == "no-solution") return SolveStatus::no_solution;
  if (s == "out-of-budget") return SolveStatus::out_of_budget;
  return std::nullopt;
}

enum class TraceEventKind { incumbent, bound, final };

inline std::string_view to_string(TraceEventKind k) {
  switch (k) {
    case TraceEventKind::incumbent: return "incumbent";
    case TraceEventKind::bound: return "bound";
    case TraceEventKind::final: return "final";
  }
  return "?";
}

struct TraceEvent {
  double elapsed = 0.0;
  std::optional<double> primal;
  double dual = 0.0;
  TraceEventKind kind = TraceEventKind::bound;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct AnytimeTrace {
  std::vector<TraceEvent> events;
  SolveStatus status = SolveStatus::no_solution;
  bool memory_out = false;

  std::optional<double> final_primal() const {
    for (auto it = events.rbegin(); it != events.rend(); ++it)
      if (it->primal) return it->primal;
    return std::nullopt;
  }
  double final_dual() const { return events.empty() ? 0.0 : events.back().dual; }

  /// Time at which the first incumbent was recorded.
  std::optional<double> first_incumbent_time() const {
    for (const auto& e : events)
      if (e.primal) return e.elapsed;
    return std::nullopt;
  }

  /// Broken invariants, empty when the trace is well formed.
  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    for (std::size_t e = 0; e < events.size(); ++e) {
      const auto& ev = events[e];
      const std::string at = "event " + std::to_string(e) + ": ";
      if (ev.dual < 0.0) out.push_back(at + "negative dual bound");
      if (ev.primal && ev.dual > *ev.primal + kCostTolerance) out.push_back(at + "dual above primal");
      if (e == 0) continue;
      const auto& prev = events[e - 1];
      if (ev.elapsed < prev.elapsed) out.push_back(at + "time goes backwards");
      if (ev.dual < prev.dual - kCostTolerance) out.push_back(at + "dual bound decreased");
      if (prev.primal && !ev.primal) out.push_back(at + "primal bound lost");
      if (prev.primal && ev.primal && *ev.primal > *prev.primal) out.push_back(at + "primal bound increased");
    }
    if (status == SolveStatus::optimal) {
      auto p = final_primal();
      if (!p || std::fabs(*p - final_dual()) > kCostTolerance) out.push_back("optimal status without closed gap");
    }
    return out;
  }
};

struct TraceMeta {
  std::string instance;
  std::string solver;
  std::size_t n = 0;
  std::string kind;
  double time_limit = 0.0;
};

inline std::string format_trace_csv(const AnytimeTrace& trace, const TraceMeta& meta) {
  std::string out;
  out += "# instance=" + meta.instance + "\n";
  out += "# solver=" + meta.solver + "\n";
  out += "# n=" + std::to_string(meta.n) + "\n";
  out += "# kind=" + meta.kind + "\n";
  out += "# time_limit=" + format_shortest(meta.time_limit) + "\n";
  out += "# status=" + std::string(to_string(trace.status)) + "\n";
  out += std::string("# memory=") + (trace.memory_out ? "memory-out" : "ok") + "\n";
  out += "elapsed_s,primal,dual,event\n";
  for (const auto& e : trace.events) {
    out += format_fixed(e.elapsed, 6) + ",";
    out += e.primal ? format_shortest(*e.primal) : std::string("inf");
    out += "," + format_shortest(e.dual) + "," + std::string(to_string(e.kind)) + "\n";
  }
  return out;
}

struct TraceFile {
  TraceMeta meta;
  AnytimeTrace trace;
};

inline TraceFile parse_trace_csv(std::string_view text) {
  using detail::expect_number;
  TraceFile file;
  std::map<std::string, std::string, std::less<>> meta;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      auto body = line.substr(1);
      while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      auto eq = body.find('=');
      if (eq != std::string_view::npos) meta[std::string(body.substr(0, eq))] = std::string(body.substr(eq + 1));
      continue;
    }
    if (!header_seen) {
      if (line != "elapsed_s,primal,dual,event") throw ParseError(line_no, "expected trace CSV header");
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> cols;
    std::size_t p = 0;
    while (true) {
      auto comma = line.find(',', p);
      cols.push_back(line.substr(p, comma == std::string_view::npos ? std::string_view::npos : comma - p));
      if (comma == std::string_view::npos) break;
      p = comma + 1;
    }
    if (cols.size() != 4) throw ParseError(line_no, "expected 4 columns");
    TraceEvent ev;
    ev.elapsed = expect_number<double>(cols[0], line_no, "elapsed seconds");
    if (cols[1] != "inf") ev.primal = expect_number<double>(cols[1], line_no, "primal bound");
    ev.dual = expect_number<double>(cols[2], line_no, "dual bound");
    if (cols[3] == "incumbent") ev.kind = TraceEventKind::incumbent;
    else if (cols[3] == "bound") ev.kind = TraceEventKind::bound;
    else if (cols[3] == "final") ev.kind = TraceEventKind::final;
    else throw ParseError(line_no, "unknown event '" + std::string(cols[3]) + "'");
    file.trace.events.push_back(ev);
  }
  if (!header_seen) throw ParseError(0, "trace has no CSV header");

  auto get = [&meta](std::string_view key) -> std::optional<std::string> {
    auto it = meta.find(key);
    if (it == meta.end()) return std::nullopt;
    return it->second;
  };
  file.meta.instance = get("instance").value_or("");
  file.meta.solver = get("solver").value_or("");
  file.meta.kind = get("kind").value_or("");
  if (auto v = get("n")) file.meta.n = expect_number<std::size_t>(*v, 0, "n");
  if (auto v = get("time_limit")) file.meta.time_limit = expect_number<double>(*v, 0, "time limit");
  if (auto v = get("status")) {
    auto s = parse_solve_status(*v);
    if (!s) throw ParseError(0, "unknown status '" + *v + "'");
    file.trace.status = *s;
  }
  file.trace.memory_out = get("memory").value_or("ok") == "memory-out";
  return file;
}

inline TraceFile read_trace_csv(const std::filesystem::path& path) { return parse_trace_csv(read_text_file(path)); }

inline void write_trace_csv(const AnytimeTrace& trace, const TraceMeta& meta, const std::filesystem::path& path) {
  write_text_file_atomic(path, format_trace_csv(trace, meta));
}

}  // namespace qtsp
