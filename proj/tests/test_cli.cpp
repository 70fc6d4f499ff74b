#include "support.hpp"

#include <qtsp/cli.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

using namespace qtsp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "qtsp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = test::scratch_dir(std::string("cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    setenv("QTSP_OUT_DIR", dir.c_str(), 1);
  }
  void TearDown() override { unsetenv("QTSP_OUT_DIR"); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  std::string make_instance(std::size_t n, std::uint64_t seed, const std::string& kind = "angle") {
    auto p = path("inst_" + kind + "_" + std::to_string(n) + "_" + std::to_string(seed) + ".txt");
    auto r = run({"generate", "--n", std::to_string(n), "--seed", std::to_string(seed), "--kind", kind, "--out", p});
    EXPECT_EQ(r.code, 0) << r.err;
    return p;
  }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, GenerateReadable) {
  auto p = make_instance(5, 1);
  auto inst = read_instance(p);
  EXPECT_EQ(inst, generate_instance(5, 1, CostKind::angle));
}

TEST_F(Cli, GenerateRecordsRho) {
  auto p = path("ad.txt");
  auto r = run({"generate", "--n", "5", "--seed", "1", "--kind", "angledistance", "--rho", "40", "--out", p});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(read_text_file(p).find("kind angledistance rho=40\n"), std::string::npos);
  EXPECT_EQ(read_instance(p).rho, 40.0);
}

TEST_F(Cli, GenerateBatch) {
  auto r = run({"generate", "--n", "6", "--seed", "3", "--count", "10", "--out", path("batch")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::set<std::uint64_t> seeds;
  for (const auto& e : fs::directory_iterator(dir / "batch")) seeds.insert(*read_instance(e.path()).seed);
  EXPECT_EQ(seeds.size(), 10u);
  EXPECT_EQ(*seeds.begin(), 3u);
  EXPECT_EQ(*seeds.rbegin(), 12u);
}

TEST_F(Cli, GenerateUsesDefaultDirectory) {
  auto r = run({"generate", "--n", "4", "--seed", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "qtsp_angle_n4_s2.txt"));
}

TEST_F(Cli, GenerateErrors) {
  EXPECT_EQ(run({"generate", "--n", "5", "--kind", "circle"}).code, 2);
  EXPECT_EQ(run({"generate", "--n", "2"}).code, 2);
  EXPECT_EQ(run({"generate", "--n", "5", "--out", "/proc/qtsp/forbidden.txt"}).code, 2);
}

TEST_F(Cli, OracleAndCabsAgree) {
  auto p = make_instance(7, 3, "angledistance");
  auto a = run({"solve", p, "--solver", "oracle", "--out", path("o.sol"), "--trace", path("o.csv")});
  auto b = run({"solve", p, "--solver", "cabs", "--out", path("c.sol"), "--trace", path("c.csv")});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(read_solution(path("o.sol")).cost, read_solution(path("c.sol")).cost);
  EXPECT_EQ(b.out.substr(0, 8), "optimal ");
}

TEST_F(Cli, SolveSummaryAndFiles) {
  auto p = make_instance(6, 2);
  auto r = run({"solve", p, "--solver", "exact"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream line(r.out);
  std::string status, cost, dual, elapsed, expansions;
  line >> status >> cost >> dual >> elapsed >> expansions;
  EXPECT_EQ(status, "optimal");
  EXPECT_EQ(cost, dual);
  EXPECT_FALSE(expansions.empty());
  const std::string stem = fs::path(p).stem().string();
  EXPECT_TRUE(fs::exists(dir / (stem + ".exact.sol")));
  auto trace = read_trace_csv(dir / (stem + ".exact.trace.csv"));
  EXPECT_EQ(trace.meta.solver, "exact");
  EXPECT_EQ(trace.trace.status, SolveStatus::optimal);
}

TEST_F(Cli, TinyTimeLimitNeverCrashes) {
  auto p = make_instance(50, 1);
  auto r = run({"solve", p, "--solver", "cabs", "--time-limit", "0.001"});
  EXPECT_TRUE(r.code == 0 || r.code == 3 || r.code == 4) << r.code << r.err;
  auto e = run({"solve", p, "--solver", "exact", "--time-limit", "0.001"});
  EXPECT_TRUE(e.code == 0 || e.code == 3 || e.code == 4) << e.code << e.err;
}

TEST_F(Cli, ExitCodesForBudgets) {
  auto p = make_instance(9, 1);
  EXPECT_EQ(run({"solve", p, "--solver", "cabs", "--expansion-limit", "2"}).code, 3);
  EXPECT_EQ(run({"solve", p, "--solver", "cabs", "--node-limit", "50"}).code, 4);
  // Smallest expansion budget that leaves exact search with an unproven incumbent.
  const auto inst = read_instance(p);
  std::uint64_t limit = 1;
  for (;; ++limit) {
    ExactOptions o;
    o.budget.expansion_limit = limit;
    auto r = solve_exact(inst, o);
    ASSERT_NE(r.status, SolveStatus::optimal);
    if (r.status == SolveStatus::out_of_budget) break;
  }
  EXPECT_EQ(run({"solve", p, "--solver", "exact", "--expansion-limit", std::to_string(limit)}).code, 4);
}

TEST_F(Cli, SolveErrors) {
  EXPECT_EQ(run({"solve", path("missing.txt")}).code, 2);
  write_text_file_atomic(path("bad.txt"), "qtsp 1\nkind angle\nn 5\npoints\n1 1\n");
  auto r = run({"solve", path("bad.txt")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing"), std::string::npos);
  auto p = make_instance(5, 1);
  EXPECT_EQ(run({"solve", p, "--solver", "gurobi"}).code, 2);
  EXPECT_EQ(run({"solve", p, "--time-limit", "-1"}).code, 2);
  EXPECT_EQ(run({"solve", p, "--width", "0"}).code, 2);
  EXPECT_EQ(run({"solve", p, "--bogus"}).code, 2);
}

TEST_F(Cli, BatchSolveWithJobs) {
  std::vector<std::string> args{"solve"};
  for (std::uint64_t s = 1; s <= 4; ++s) args.push_back(make_instance(6, s));
  args.insert(args.end(), {"--solver", "cabs", "--jobs", "2", "--out-dir", path("runs")});
  auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
  EXPECT_EQ(std::distance(fs::directory_iterator(dir / "runs"), fs::directory_iterator{}), 8);
}

TEST_F(Cli, CheckRescoresSolution) {
  auto p = make_instance(7, 4);
  ASSERT_EQ(run({"solve", p, "--solver", "cabs", "--out", path("s.sol")}).code, 0);
  for (std::string model : {"milp", "miqp", "cp"}) {
    auto r = run({"check", p, "--tour", path("s.sol"), "--model", model});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_EQ(r.out.rfind("feasible objective ", 0), 0u) << r.out;
    EXPECT_NE(r.out.find(" matches\n"), std::string::npos) << r.out;
  }
  auto inst = read_instance(p);
  auto sol = read_solution(path("s.sol"));
  auto r = run({"check", p, "--tour", path("s.sol")});
  EXPECT_NE(r.out.find("objective " + format_shortest(tour_cost(inst, sol.tour)) + "\n"), std::string::npos);
}

TEST_F(Cli, CheckRejectsSubtourAssignment) {
  auto p = make_instance(6, 1);
  write_text_file_atomic(path("two.asg"), format_assignment(assignment_from_cycles(6, {{0, 1, 2}, {3, 4, 5}})));
  auto r = run({"check", p, "--assignment", path("two.asg")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("violation dl("), std::string::npos) << r.out;
}

TEST_F(Cli, CheckRejectsIncompleteTour) {
  auto p = make_instance(5, 1);
  write_text_file_atomic(path("short.sol"), "tour 5\n0 1 2 3\ncost 1\n");
  auto r = run({"check", p, "--tour", path("short.sol")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("violation tour missing 4"), std::string::npos) << r.out;
}

TEST_F(Cli, CheckErrors) {
  auto p = make_instance(5, 1);
  EXPECT_EQ(run({"check", p}).code, 2);
  EXPECT_EQ(run({"check", p, "--tour", path("none.sol")}).code, 2);
  write_text_file_atomic(path("x.sol"), "tour 5\n0 1 2 3 4\n");
  EXPECT_EQ(run({"check", p, "--tour", path("x.sol"), "--model", "sat"}).code, 2);
}

TEST_F(Cli, ExportMilpCounts) {
  auto p = make_instance(5, 1);
  auto r = run({"export", p, "--format", "lp-milp", "--subtour", "dl", "--out", path("m.lp")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto tsv = read_text_file(path("vars.tsv"));
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 1 + 84);
  EXPECT_EQ(parse_lp(read_text_file(path("m.lp"))).variables().size(), 84u);
}

TEST_F(Cli, ExportMiqpHasNoY) {
  auto p = make_instance(5, 1);
  ASSERT_EQ(run({"export", p, "--format", "lp-miqp", "--out", path("q.lp")}).code, 0);
  auto vars = parse_lp(read_text_file(path("q.lp"))).variables();
  EXPECT_TRUE(std::none_of(vars.begin(), vars.end(), [](const std::string& v) { return v[0] == 'y'; }));
  EXPECT_EQ(read_text_file(path("q.lp")).find("y_"), std::string::npos);
}

TEST_F(Cli, ExportCpParses) {
  auto p = make_instance(5, 1);
  ASSERT_EQ(run({"export", p, "--format", "cp", "--out", path("m.cp"), "--manifest", path("cp.tsv")}).code, 0);
  auto cp = parse_cp(read_text_file(path("m.cp")));
  EXPECT_EQ(cp.n, 5u);
  EXPECT_TRUE(fs::exists(path("cp.tsv")));
}

TEST_F(Cli, ExportDeterministicAndErrors) {
  auto p = make_instance(5, 1);
  ASSERT_EQ(run({"export", p, "--subtour", "mtz", "--out", path("a.lp")}).code, 0);
  ASSERT_EQ(run({"export", p, "--subtour", "mtz", "--out", path("b.lp")}).code, 0);
  EXPECT_EQ(read_text_file(path("a.lp")), read_text_file(path("b.lp")));
  EXPECT_EQ(run({"export", p, "--format", "mps"}).code, 2);
  EXPECT_EQ(run({"export", p, "--subtour", "gg"}).code, 2);
}

TEST_F(Cli, MetricsOptimalRun) {
  auto p = make_instance(6, 1);
  ASSERT_EQ(run({"solve", p, "--solver", "exact", "--trace", path("t.csv")}).code, 0);
  auto r = run({"metrics", path("t.csv"), "--out", path("summary.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("6,angle,exact,0,0,"), std::string::npos) << r.out;
  EXPECT_EQ(read_text_file(path("summary.csv")), r.out);
  EXPECT_TRUE(fs::exists(dir / "metrics_runs.csv"));
}

TEST_F(Cli, MetricsSkipsMissingTrace) {
  auto p = make_instance(6, 1);
  ASSERT_EQ(run({"solve", p, "--solver", "exact", "--trace", path("t.csv")}).code, 0);
  write_text_file_atomic(path("junk.csv"), "not a trace\n");
  auto r = run({"metrics", path("t.csv"), path("gone.csv"), path("junk.csv")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning: missing trace"), std::string::npos);
  EXPECT_NE(r.err.find("warning: unreadable trace"), std::string::npos);
  EXPECT_NE(r.out.find(",1\n"), std::string::npos);
}

TEST_F(Cli, MetricsBatchOneRowPerGroup) {
  ASSERT_EQ(run({"generate", "--n", "6", "--count", "10", "--out", path("inst")}).code, 0);
  std::vector<std::string> solve{"solve"};
  for (const auto& e : fs::directory_iterator(dir / "inst")) solve.push_back(e.path().string());
  solve.insert(solve.end(), {"--solver", "cabs", "--out-dir", path("traces"), "--time-limit", "10"});
  ASSERT_EQ(run(solve).code, 0);
  auto r = run({"metrics", "--traces-dir", path("traces"), "--instances", path("inst"), "--dat", path("fig.dat")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 2);
  EXPECT_NE(r.out.find("6,angle,cabs,0,0,"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find(",10\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("fig.dat")));
}

TEST_F(Cli, MetricsBestKnownFile) {
  auto p = make_instance(6, 1);
  ASSERT_EQ(run({"solve", p, "--solver", "exact", "--trace", path("t.csv")}).code, 0);
  const double opt = *read_trace_csv(path("t.csv")).trace.final_primal();
  const std::string id = fs::path(p).stem().string();
  write_text_file_atomic(path("best.csv"), "instance,best_known\n" + id + "," + format_shortest(opt * 2) + "\n");
  // A best-known value worse than the run's own primal is inconsistent.
  EXPECT_EQ(run({"metrics", path("t.csv"), "--best-known", path("best.csv")}).code, 2);
}

TEST_F(Cli, EndToEndDeterminism) {
  auto p = make_instance(7, 5);
  ASSERT_EQ(run({"solve", p, "--solver", "exact", "--expansion-limit", "100000", "--out", path("1.sol"), "--trace", path("1.csv")}).code, 0);
  ASSERT_EQ(run({"solve", p, "--solver", "exact", "--expansion-limit", "100000", "--out", path("2.sol"), "--trace", path("2.csv")}).code, 0);
  EXPECT_EQ(read_text_file(path("1.sol")), read_text_file(path("2.sol")));
  auto a = read_trace_csv(path("1.csv")), b = read_trace_csv(path("2.csv"));
  ASSERT_EQ(a.trace.events.size(), b.trace.events.size());
  for (std::size_t e = 0; e < a.trace.events.size(); ++e) {
    EXPECT_EQ(a.trace.events[e].primal, b.trace.events[e].primal);
    EXPECT_EQ(a.trace.events[e].dual, b.trace.events[e].dual);
  }
}

TEST_F(Cli, UsageErrorsAndHelp) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  auto h = run({"--help"});
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("generate"), std::string::npos);
  auto sh = run({"solve", "--help"});
  EXPECT_EQ(sh.code, 0);
  for (const char* flag : {"--solver", "--time-limit", "--expansion-limit", "--width", "--growth", "--trace", "--jobs"})
    EXPECT_NE(sh.out.find(flag), std::string::npos) << flag;
}
