#pragma once

// Command-line front end: generate, solve, export, check, metrics.
//
// Exit codes: 0 success (solve: optimal or feasible; check: feasible),
// 1 check found violations, 2 usage / input error, 3 solve found no
// solution, 4 solve ran out of budget or memory.

#include <qtsp/errors.hpp>
#include <qtsp/export.hpp>
#include <qtsp/instance.hpp>
#include <qtsp/io.hpp>
#include <qtsp/metrics.hpp>
#include <qtsp/model.hpp>
#include <qtsp/model_reader.hpp>
#include <qtsp/oracle.hpp>
#include <qtsp/search.hpp>
#include <qtsp/trace.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <ostream>
#include <string>
#include <vector>

namespace qtsp::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolations = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNoSolution = 3;
inline constexpr int kExitBudget = 4;

/// Directory for outputs whose path was not given: $QTSP_OUT_DIR or ".".
inline fs::path default_output_dir() {
  if (const char* env = std::getenv("QTSP_OUT_DIR"); env && *env) return env;
  return ".";
}

inline int exit_code_for(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal:
    case SolveStatus::feasible: return kExitOk;
    case SolveStatus::no_solution: return kExitNoSolution;
    case SolveStatus::out_of_budget: return kExitBudget;
  }
  return kExitUsage;
}

struct GenerateArgs {
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::string kind = "angle";
  double rho = kDefaultRho;
  std::string out;
  std::size_t count = 1;
};

struct SolveArgs {
  std::vector<std::string> instances;
  std::string solver = "cabs";
  double time_limit = 1800.0;
  std::uint64_t expansion_limit = 0;  // 0: unlimited
  std::size_t node_limit = Budget{}.node_limit;
  std::size_t width = 1;
  double growth = 2.0;
  bool no_prune = false;
  std::string out;
  std::string trace;
  std::string out_dir;
  unsigned jobs = 1;
};

struct ExportArgs {
  std::string instance;
  std::string format = "lp-milp";
  std::string subtour = "dl";
  std::string out;
  std::string manifest;
};

struct CheckArgs {
  std::string instance;
  std::string tour;
  std::string assignment;
  std::string model = "milp";
};

struct MetricsArgs {
  std::vector<std::string> traces;
  std::string traces_dir;
  std::string best_known;
  std::string instances_dir;
  double horizon = 0.0;  // 0: each run's time limit
  std::string out;
  std::string runs_out;
  std::string dat;
};

// ---------------------------------------------------------------------------

inline int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  auto kind = parse_cost_kind(a.kind);
  if (!kind || *kind == CostKind::explicit_costs) throw InvalidArgument("--kind must be angle or angledistance");
  if (a.count == 0) throw InvalidArgument("--count must be positive");
  for (std::size_t c = 0; c < a.count; ++c) {
    const std::uint64_t seed = a.seed + c;
    const Instance inst = generate_instance(a.n, seed, *kind, a.rho);
    const std::string name =
        "qtsp_" + std::string(to_string(*kind)) + "_n" + std::to_string(a.n) + "_s" + std::to_string(seed) + ".txt";
    fs::path path;
    if (a.count == 1 && !a.out.empty()) {
      path = a.out;
    } else {
      fs::path dir = a.out.empty() ? default_output_dir() : fs::path(a.out);
      fs::create_directories(dir);
      path = dir / name;
    }
    write_instance(inst, path);
    out << path.string() << " n=" << inst.n << " kind=" << to_string(inst.kind);
    if (inst.rho) out << " rho=" << format_shortest(*inst.rho);
    out << " seed=" << seed << "\n";
  }
  return kExitOk;
}

struct SolveRun {
  SolveResult result;
  fs::path solution_path;
  fs::path trace_path;
};

inline SolveRun solve_one(const SolveArgs& a, const fs::path& instance_path, bool single) {
  const Instance inst = read_instance(instance_path);
  Budget budget;
  budget.time_limit_s = a.time_limit;
  if (a.expansion_limit > 0) budget.expansion_limit = a.expansion_limit;
  budget.node_limit = a.node_limit;

  SolveRun run;
  if (a.solver == "cabs") {
    CabsOptions opts;
    opts.budget = budget;
    opts.initial_width = a.width;
    opts.growth = a.growth;
    run.result = solve_cabs(inst, opts);
  } else if (a.solver == "exact") {
    ExactOptions opts;
    opts.budget = budget;
    opts.prune = !a.no_prune;
    run.result = solve_exact(inst, opts);
  } else {
    detail::Stopwatch clock;
    auto best = brute_force_optimal(inst);
    SolveResult& r = run.result;
    r.status = SolveStatus::optimal;
    r.tour = best.tour;
    r.cost = best.cost;
    r.dual = best.cost;
    r.elapsed = clock.seconds();
    r.trace.events.push_back({r.elapsed, best.cost, best.cost, TraceEventKind::incumbent});
    r.trace.events.push_back({r.elapsed, best.cost, best.cost, TraceEventKind::final});
    r.trace.status = SolveStatus::optimal;
  }

  const std::string stem = instance_path.stem().string();
  const fs::path dir = a.out_dir.empty() ? default_output_dir() : fs::path(a.out_dir);
  if (single && !a.out.empty()) run.solution_path = a.out;
  else run.solution_path = dir / (stem + "." + a.solver + ".sol");
  if (single && !a.trace.empty()) run.trace_path = a.trace;
  else run.trace_path = dir / (stem + "." + a.solver + ".trace.csv");
  for (const auto* p : {&run.solution_path, &run.trace_path})
    if (p->has_parent_path()) fs::create_directories(p->parent_path());

  if (run.result.tour) write_solution(*run.result.tour, *run.result.cost, run.solution_path);
  TraceMeta meta{stem, a.solver, inst.n, std::string(to_string(inst.kind)), a.time_limit};
  write_trace_csv(run.result.trace, meta, run.trace_path);
  return run;
}

inline int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  if (a.solver != "cabs" && a.solver != "exact" && a.solver != "oracle")
    throw InvalidArgument("--solver must be cabs, exact or oracle");
  if (!(a.time_limit > 0.0)) throw InvalidArgument("--time-limit must be positive");
  if (a.node_limit == 0 || a.width == 0 || a.jobs == 0) throw InvalidArgument("limits must be positive");
  const bool single = a.instances.size() == 1;

  std::vector<std::future<SolveRun>> pending(a.instances.size());
  std::vector<std::optional<SolveRun>> done(a.instances.size());
  std::vector<std::string> failures(a.instances.size());
  std::size_t next = 0;
  // At most `jobs` runs in flight; results are reported in input order.
  std::vector<std::size_t> in_flight;
  auto collect = [&](std::size_t idx) {
    try {
      done[idx] = pending[idx].get();
    } catch (const std::exception& e) {
      failures[idx] = e.what();
    }
  };
  while (next < a.instances.size() || !in_flight.empty()) {
    while (next < a.instances.size() && in_flight.size() < a.jobs) {
      const std::size_t idx = next++;
      pending[idx] = std::async(a.jobs > 1 ? std::launch::async : std::launch::deferred,
                                [&a, idx, single] { return solve_one(a, a.instances[idx], single); });
      in_flight.push_back(idx);
    }
    collect(in_flight.front());
    in_flight.erase(in_flight.begin());
  }

  int code = kExitOk;
  for (std::size_t idx = 0; idx < a.instances.size(); ++idx) {
    if (!done[idx]) {
      err << "error: " << a.instances[idx] << ": " << failures[idx] << "\n";
      code = std::max(code, kExitUsage);
      continue;
    }
    const auto& r = done[idx]->result;
    if (!single) out << a.instances[idx] << " ";
    out << to_string(r.status) << " " << (r.cost ? format_shortest(*r.cost) : std::string("inf")) << " "
        << format_shortest(r.dual) << " " << format_fixed(r.elapsed, 3) << " " << r.expansions << "\n";
    code = std::max(code, exit_code_for(r.status));
  }
  return code;
}

inline int cmd_export(const ExportArgs& a, std::ostream& out) {
  const Instance inst = read_instance(a.instance);
  ModelText model;
  if (a.format == "lp-milp") {
    SubtourElimination s;
    if (a.subtour == "dl") s = SubtourElimination::dl;
    else if (a.subtour == "mtz") s = SubtourElimination::mtz;
    else if (a.subtour == "flow") s = SubtourElimination::flow;
    else throw InvalidArgument("--subtour must be dl, mtz or flow");
    model = export_milp(inst, s);
  } else if (a.format == "lp-miqp") {
    if (a.subtour != "dl") throw InvalidArgument("the MIQP model uses dl subtour elimination only");
    model = export_miqp(inst);
  } else if (a.format == "cp") {
    model = export_cp(inst);
  } else {
    throw InvalidArgument("--format must be lp-milp, lp-miqp or cp");
  }
  const std::string ext = model.format == ModelFormat::cp_text ? ".cp" : ".lp";
  fs::path path = a.out.empty() ? default_output_dir() / (fs::path(a.instance).stem().string() + "." + a.format + ext)
                                : fs::path(a.out);
  fs::path manifest = a.manifest.empty() ? path.parent_path() / "vars.tsv" : fs::path(a.manifest);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text_file_atomic(path, model.body);
  write_text_file_atomic(manifest, model.manifest_tsv());
  out << path.string() << " " << model.manifest.size() << " variables, manifest " << manifest.string() << "\n";
  return kExitOk;
}

inline int cmd_check(const CheckArgs& a, std::ostream& out) {
  const Instance inst = read_instance(a.instance);
  if (a.tour.empty() == a.assignment.empty()) throw InvalidArgument("give exactly one of --tour or --assignment");
  if (a.model != "milp" && a.model != "miqp" && a.model != "cp")
    throw InvalidArgument("--model must be milp, miqp or cp");

  auto print_report = [&out](const ModelCheckReport& r) {
    out << (r.feasible ? "feasible" : "infeasible") << " objective " << format_shortest(r.objective) << "\n";
    for (const auto& v : r.violations) out << "violation " << v.describe() << "\n";
    return r.feasible ? kExitOk : kExitViolations;
  };

  if (!a.assignment.empty()) {
    if (a.model == "cp") throw InvalidArgument("assignment files describe MILP/MIQP variables, not the CP model");
    const MilpAssignment asg = parse_assignment(read_text_file(a.assignment));
    if (asg.n != inst.n) throw InvalidArgument("assignment size does not match the instance");
    return print_report(a.model == "milp" ? check_milp(inst, asg) : check_miqp(inst, asg));
  }

  const SolutionFile sol = read_solution(a.tour);
  const TourReport tr = validate_tour(inst, sol.tour);
  if (sol.declared_n != sol.tour.order.size())
    out << "warning: header declares " << sol.declared_n << " customers, tour lists " << sol.tour.order.size() << "\n";
  if (!tr.ok()) {
    out << "infeasible\n";
    for (const auto& v : tr.violations) out << "violation tour " << to_string(v.kind) << " " << v.value << "\n";
    return kExitViolations;
  }
  int code;
  double objective;
  if (a.model == "cp") {
    const CpReport r = eval_cp(inst, sol.tour.order);
    objective = r.objective.value_or(0.0);
    out << (r.feasible ? "feasible" : "infeasible") << " objective " << format_shortest(objective) << "\n";
    for (const auto& v : r.violations) out << "violation " << v << "\n";
    code = r.feasible ? kExitOk : kExitViolations;
  } else {
    const MilpAssignment asg = assignment_from_tour(inst, sol.tour);
    const ModelCheckReport r = a.model == "milp" ? check_milp(inst, asg) : check_miqp(inst, asg);
    objective = r.objective;
    code = print_report(r);
  }
  if (sol.cost)
    out << "recorded cost " << format_shortest(*sol.cost)
        << (std::fabs(*sol.cost - objective) <= kCostTolerance ? " matches" : " differs") << "\n";
  return code;
}

inline BestKnownTable read_best_known_csv(const fs::path& path) {
  BestKnownTable table;
  const std::string text = read_text_file(path);
  std::size_t start = 0, line_no = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line == "instance,best_known") continue;
    auto comma = line.find(',');
    if (comma == std::string_view::npos) throw ParseError(line_no, "expected 'instance,best_known'");
    table[std::string(line.substr(0, comma))] =
        detail::expect_number<double>(line.substr(comma + 1), line_no, "best-known value");
  }
  return table;
}

inline int cmd_metrics(const MetricsArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<fs::path> paths(a.traces.begin(), a.traces.end());
  if (!a.traces_dir.empty()) {
    std::vector<fs::path> found;
    for (const auto& entry : fs::directory_iterator(a.traces_dir))
      if (entry.is_regular_file() && entry.path().filename().string().ends_with(".trace.csv"))
        found.push_back(entry.path());
    std::sort(found.begin(), found.end());
    paths.insert(paths.end(), found.begin(), found.end());
  }
  if (paths.empty()) throw InvalidArgument("no trace files given");

  std::vector<RunRecord> records;
  for (const auto& p : paths) {
    if (!fs::exists(p)) {
      err << "warning: missing trace " << p.string() << ", skipped\n";
      continue;
    }
    try {
      records.push_back(record_from_trace(read_trace_csv(p)));
      if (records.back().instance.empty()) records.back().instance = p.stem().stem().string();
    } catch (const std::exception& e) {
      err << "warning: unreadable trace " << p.string() << " (" << e.what() << "), skipped\n";
    }
  }

  BestKnownTable best = best_known_from_runs(records);
  if (!a.instances_dir.empty()) {
    for (const auto& r : records) {
      if (r.n == 0 || r.n > 9) continue;
      for (const char* ext : {".txt", ".qtsp", ""}) {
        fs::path candidate = fs::path(a.instances_dir) / (r.instance + ext);
        if (fs::is_regular_file(candidate)) {
          best[r.instance] = brute_force_optimal(read_instance(candidate)).cost;
          break;
        }
      }
    }
  }
  if (!a.best_known.empty())
    for (const auto& [id, v] : read_best_known_csv(a.best_known)) best[id] = v;

  std::vector<RunMetrics> runs;
  for (const auto& r : records) {
    const double horizon = a.horizon > 0.0 ? a.horizon : r.time_limit;
    runs.push_back(compute_run_metrics(r, best, horizon > 0.0 ? horizon : 1.0));
    if (!runs.back().best_known) err << "warning: no best-known value for " << r.instance << "\n";
  }
  const auto rows = aggregate_report(runs);

  const fs::path dir = default_output_dir();
  const fs::path summary = a.out.empty() ? dir / "metrics_summary.csv" : fs::path(a.out);
  const fs::path per_run = a.runs_out.empty() ? dir / "metrics_runs.csv" : fs::path(a.runs_out);
  write_text_file_atomic(summary, format_aggregate_csv(rows));
  write_text_file_atomic(per_run, format_runs_csv(runs));
  if (!a.dat.empty()) write_text_file_atomic(a.dat, format_gnuplot_dat(rows));
  out << format_aggregate_csv(rows);
  return kExitOk;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quadratic TSP toolkit: instances, DP solvers, model export and benchmark metrics", "qtsp"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate benchmark instances");
  g->add_option("--n", gen.n, "Number of customers (>= 3)")->required();
  g->add_option("--seed", gen.seed, "Generator seed (first seed with --count)")->capture_default_str();
  g->add_option("--kind", gen.kind, "angle | angledistance")->capture_default_str();
  g->add_option("--rho", gen.rho, "Angle weight for angledistance")->capture_default_str();
  g->add_option("--out", gen.out, "Output file, or directory with --count > 1");
  g->add_option("--count", gen.count, "Number of instances, seeds seed..seed+count-1")->capture_default_str();

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "Solve instances and write solution and trace files");
  s->add_option("instances", sol.instances, "Instance files")->required();
  s->add_option("--solver", sol.solver, "cabs | exact | oracle")->capture_default_str();
  s->add_option("--time-limit", sol.time_limit, "Wall-clock limit in seconds")->capture_default_str();
  s->add_option("--expansion-limit", sol.expansion_limit, "Maximum state expansions (0 = unlimited)");
  s->add_option("--node-limit", sol.node_limit, "Maximum search nodes held at once")->capture_default_str();
  s->add_option("--width", sol.width, "Initial beam width (cabs)")->capture_default_str();
  s->add_option("--growth", sol.growth, "Beam width growth factor (cabs)")->capture_default_str();
  s->add_flag("--no-prune", sol.no_prune, "Disable bound pruning (exact)");
  s->add_option("--out", sol.out, "Solution file (single instance)");
  s->add_option("--trace", sol.trace, "Trace CSV file (single instance)");
  s->add_option("--out-dir", sol.out_dir, "Directory for default output names");
  s->add_option("--jobs", sol.jobs, "Instances solved concurrently")->capture_default_str();

  ExportArgs exp;
  auto* e = app.add_subcommand("export", "Write the MILP, MIQP or CP model of an instance");
  e->add_option("instance", exp.instance, "Instance file")->required();
  e->add_option("--format", exp.format, "lp-milp | lp-miqp | cp")->capture_default_str();
  e->add_option("--subtour", exp.subtour, "dl | mtz | flow (lp-milp)")->capture_default_str();
  e->add_option("--out", exp.out, "Model file");
  e->add_option("--manifest", exp.manifest, "Variable manifest (default vars.tsv next to the model)");

  CheckArgs chk;
  auto* c = app.add_subcommand("check", "Check a tour or assignment against a model");
  c->add_option("instance", chk.instance, "Instance file")->required();
  c->add_option("--tour", chk.tour, "Solution file");
  c->add_option("--assignment", chk.assignment, "MILP assignment file");
  c->add_option("--model", chk.model, "milp | miqp | cp")->capture_default_str();

  MetricsArgs met;
  auto* m = app.add_subcommand("metrics", "Optimality gap, primal gap and primal integral from traces");
  m->add_option("traces", met.traces, "Trace CSV files");
  m->add_option("--traces-dir", met.traces_dir, "Directory of *.trace.csv files");
  m->add_option("--best-known", met.best_known, "CSV with instance,best_known");
  m->add_option("--instances", met.instances_dir, "Instance directory; instances with n <= 9 are solved exhaustively");
  m->add_option("--horizon", met.horizon, "Primal integral horizon in seconds (default: run time limit)");
  m->add_option("--out", met.out, "Aggregate CSV");
  m->add_option("--runs-out", met.runs_out, "Per-run CSV");
  m->add_option("--dat", met.dat, "gnuplot data file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_generate(gen, out);
    if (s->parsed()) return cmd_solve(sol, out, err);
    if (e->parsed()) return cmd_export(exp, out);
    if (c->parsed()) return cmd_check(chk, out);
    if (m->parsed()) return cmd_metrics(met, out, err);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace qtsp::cli
