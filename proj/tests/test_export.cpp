#include "support.hpp"

#include <qtsp/export.hpp>
#include <qtsp/model_reader.hpp>

#include <gtest/gtest.h>

using namespace qtsp;

namespace {

std::size_t count_rows(const LpModel& m, std::string_view prefix) {
  return static_cast<std::size_t>(std::count_if(m.constraints.begin(), m.constraints.end(), [&](const LpConstraint& c) {
    return c.name.compare(0, prefix.size(), prefix) == 0;
  }));
}

std::size_t count_vars(const std::set<std::string>& vars, char prefix) {
  return static_cast<std::size_t>(
      std::count_if(vars.begin(), vars.end(), [&](const std::string& v) { return v[0] == prefix && v[1] == '_'; }));
}

}  // namespace

TEST(ExportMilp, CountsForFiveCustomers) {
  auto inst = generate_instance(5, 1, CostKind::angle);
  auto m = export_milp(inst, SubtourElimination::dl);
  EXPECT_EQ(m.count("x_"), 20u);
  EXPECT_EQ(m.count("y_"), 60u);
  EXPECT_EQ(m.count("u_"), 4u);
  EXPECT_EQ(m.manifest.size(), 84u);
  auto lp = parse_lp(m.body);
  EXPECT_EQ(count_rows(lp, "dl_"), 12u);
  EXPECT_EQ(count_rows(lp, "out_"), 5u);
  EXPECT_EQ(count_rows(lp, "in_"), 5u);
  EXPECT_EQ(count_rows(lp, "next_"), 20u);
  EXPECT_EQ(count_rows(lp, "prev_"), 20u);
  auto vars = lp.variables();
  EXPECT_EQ(vars.size(), 84u);
  EXPECT_EQ(count_vars(vars, 'x'), 20u);
  EXPECT_EQ(count_vars(vars, 'y'), 60u);
  EXPECT_EQ(count_vars(vars, 'u'), 4u);
}

TEST(ExportMilp, DlForThreeCustomers) {
  auto inst = generate_instance(3, 1, CostKind::angle);
  auto lp = parse_lp(export_milp(inst).body);
  ASSERT_EQ(count_rows(lp, "dl_"), 2u);
  for (const auto& c : lp.constraints) {
    if (c.name != "dl_1_2") continue;
    EXPECT_EQ(c.rhs, 1.0);
    bool saw = false;
    for (const auto& t : c.terms)
      if (t.var == "x_2_1") {
        saw = true;
        EXPECT_EQ(t.coef, 0.0);
      }
    EXPECT_TRUE(saw);
  }
  EXPECT_NE(export_milp(inst).body.find("dl_1_2: u_1 - u_2 + 2 x_1_2 + 0 x_2_1 <= 1"), std::string::npos);
}

TEST(ExportMilp, RoundTripThroughReader) {
  for (auto subtour : {SubtourElimination::dl, SubtourElimination::mtz, SubtourElimination::flow}) {
    auto inst = generate_instance(6, 2, CostKind::angle_distance);
    auto lp = parse_lp(export_milp(inst, subtour).body);
    for (const auto& t : {Tour{{0, 1, 2, 3, 4, 5}}, Tour{{0, 4, 2, 5, 1, 3}}}) {
      auto ev = evaluate_lp(lp, lp_values_from_tour(inst, t));
      EXPECT_TRUE(ev.feasible) << to_string(subtour) << ": " << (ev.violations.empty() ? "" : ev.violations[0]);
      EXPECT_EQ(ev.objective, tour_cost(inst, t));
    }
  }
}

TEST(ExportMilp, ReaderRejectsSubtours) {
  auto inst = generate_instance(6, 2, CostKind::angle);
  auto lp = parse_lp(export_milp(inst).body);
  auto a = assignment_from_cycles(6, {{0, 1, 2}, {3, 4, 5}});
  std::map<std::string, double> values;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      if (i == j) continue;
      values["x_" + std::to_string(i) + "_" + std::to_string(j)] = static_cast<double>(a.X(i, j));
      for (std::size_t k = 0; k < 6; ++k)
        if (k != i && k != j)
          values["y_" + std::to_string(i) + "_" + std::to_string(j) + "_" + std::to_string(k)] =
              static_cast<double>(a.Y(i, j, k));
    }
  for (std::size_t i = 1; i < 6; ++i) values["u_" + std::to_string(i)] = static_cast<double>(a.u[i]);
  auto ev = evaluate_lp(lp, values);
  EXPECT_FALSE(ev.feasible);
  EXPECT_TRUE(std::any_of(ev.violations.begin(), ev.violations.end(),
                          [](const std::string& v) { return v.rfind("dl_", 0) == 0; }));
}

TEST(ExportMilp, FlowVariant) {
  auto inst = generate_instance(5, 1, CostKind::angle);
  auto m = export_milp(inst, SubtourElimination::flow);
  EXPECT_EQ(m.count("u_"), 0u);
  EXPECT_EQ(m.count("f_"), 20u);
  auto lp = parse_lp(m.body);
  EXPECT_EQ(count_rows(lp, "bal_"), 4u);
  EXPECT_EQ(count_rows(lp, "cap_"), 20u);
}

TEST(ExportMiqp, Counts) {
  auto inst = generate_instance(5, 1, CostKind::angle);
  auto m = export_miqp(inst);
  EXPECT_EQ(m.count("x_"), 20u);
  EXPECT_EQ(m.count("u_"), 4u);
  EXPECT_EQ(m.count("y_"), 0u);
  auto lp = parse_lp(m.body);
  EXPECT_EQ(lp.quadratic.size(), 60u);
  EXPECT_TRUE(lp.objective.empty());
  EXPECT_EQ(count_vars(lp.variables(), 'y'), 0u);
  EXPECT_EQ(m.body.find("/2"), std::string::npos);
  EXPECT_EQ(parse_lp(export_miqp(generate_instance(3, 1, CostKind::angle)).body).quadratic.size(), 6u);
}

TEST(ExportMiqp, RoundTripThroughReader) {
  auto inst = generate_instance(7, 5, CostKind::angle);
  auto lp = parse_lp(export_miqp(inst).body);
  Tour t{{0, 6, 1, 5, 2, 4, 3}};
  auto ev = evaluate_lp(lp, lp_values_from_tour(inst, t));
  EXPECT_TRUE(ev.feasible);
  EXPECT_EQ(ev.objective, tour_cost(inst, t));
}

TEST(LpReader, RejectsHalfConvention) {
  EXPECT_THROW(parse_lp("Minimize\n obj: [ 2 x_0_1 * x_1_2 ] / 2\nSubject To\n c: x_0_1 >= 0\nEnd\n"), ParseError);
  EXPECT_THROW(parse_lp("Minimize\n obj: 3 x\nSubject To\n c: x >= \nEnd\n"), ParseError);
}

TEST(ExportCp, Structure) {
  auto inst = generate_instance(4, 3, CostKind::angle);
  auto m = export_cp(inst);
  auto cp = parse_cp(m.body);
  EXPECT_EQ(cp.n, 4u);
  EXPECT_EQ(cp.alldifferent_count, 1u);
  ASSERT_EQ(cp.fixings.size(), 1u);
  EXPECT_EQ(cp.fixings[0], (std::pair<int, int>{0, 0}));
  EXPECT_EQ(cp.terms.size(), 4u);
  EXPECT_EQ(cp.table, inst.costs);
  EXPECT_EQ(m.body.rfind("cpmodel 1\nvar x0..x3 in 0..3\nalldifferent(x0..x3)\nx0 = 0\n", 0), 0u);
  const std::string table = m.body.substr(m.body.find("\ncost3d\n") + 8);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 24 + 1);  // rows plus "end"
  EXPECT_NE(m.body.find("1 2 3 " + format_fixed(inst.cost(1, 2, 3)) + "\n"), std::string::npos);
}

TEST(ExportCp, EvaluatesToTourCost) {
  auto inst = generate_instance(6, 8, CostKind::angle_distance);
  auto cp = parse_cp(export_cp(inst).body);
  for (const auto& t : test::all_tours(6)) EXPECT_EQ(evaluate_cp(cp, t.order), tour_cost(inst, t));
  EXPECT_FALSE(evaluate_cp(cp, std::vector<int>{1, 0, 2, 3, 4, 5}));
  EXPECT_FALSE(evaluate_cp(cp, std::vector<int>{0, 0, 2, 3, 4, 5}));
}

TEST(ExportCp, ReaderRejectsGarbage) {
  EXPECT_THROW(parse_cp("cpmodel 2\n"), ParseError);
  auto body = export_cp(generate_instance(4, 3, CostKind::angle)).body;
  EXPECT_THROW(parse_cp(body.substr(0, body.size() - 4)), ParseError);
}

TEST(Export, Deterministic) {
  auto a = generate_instance(6, 11, CostKind::angle);
  auto b = generate_instance(6, 11, CostKind::angle);
  EXPECT_EQ(export_milp(a).body, export_milp(b).body);
  EXPECT_EQ(export_miqp(a).body, export_miqp(b).body);
  EXPECT_EQ(export_cp(a).body, export_cp(b).body);
  EXPECT_EQ(export_milp(a).manifest_tsv(), export_milp(b).manifest_tsv());
}

TEST(Export, ManifestTsv) {
  auto m = export_milp(generate_instance(3, 1, CostKind::angle));
  auto tsv = m.manifest_tsv();
  EXPECT_EQ(tsv.rfind("name\tkind\tindices\nx_0_1\tbinary\t0,1\n", 0), 0u);
  EXPECT_NE(tsv.find("u_2\tinteger\t2\n"), std::string::npos);
  EXPECT_NE(tsv.find("y_2_1_0\tbinary\t2,1,0\n"), std::string::npos);
}

TEST(AssignmentFile, RoundTrip) {
  auto a = assignment_from_cycles(6, {{0, 1, 2}, {3, 4, 5}});
  EXPECT_EQ(parse_assignment(format_assignment(a)), a);
  EXPECT_THROW(parse_assignment("assignment 4\nx 1 1 1\n"), ParseError);
  EXPECT_THROW(parse_assignment("assignment 4\nz 1 2\n"), ParseError);
}
