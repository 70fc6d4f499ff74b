#pragma once

// Readers for the emitted model files, used to check models by substitution.
//
// The LP reader accepts the subset of the LP file format the writers emit:
// Minimize with linear terms and an optional [ ... ] block of products,
// Subject To rows "name: expr (<=|>=|=) rhs", Bounds rows "lo <= v <= hi",
// "v >= lo", "v <= hi", "v = val", "v free", Binaries, Generals, End.
// Lines starting with '\' are comments.

#include <qtsp/errors.hpp>
#include <qtsp/instance.hpp>
#include <qtsp/io.hpp>
#include <qtsp/model.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace qtsp {

struct LinearTerm {
  double coef = 0.0;
  std::string var;
};

struct QuadraticTerm {
  double coef = 0.0;
  std::string left;
  std::string right;
};

enum class Sense { le, ge, eq };

struct LpConstraint {
  std::string name;
  std::vector<LinearTerm> terms;
  Sense sense = Sense::le;
  double rhs = 0.0;
};

struct LpModel {
  std::vector<LinearTerm> objective;
  std::vector<QuadraticTerm> quadratic;
  std::vector<LpConstraint> constraints;
  std::map<std::string, std::pair<double, double>> bounds;
  std::set<std::string> binaries;
  std::set<std::string> generals;

  /// Every variable name mentioned anywhere in the model.
  std::set<std::string> variables() const {
    std::set<std::string> out;
    for (const auto& t : objective) out.insert(t.var);
    for (const auto& q : quadratic) {
      out.insert(q.left);
      out.insert(q.right);
    }
    for (const auto& c : constraints)
      for (const auto& t : c.terms) out.insert(t.var);
    for (const auto& [name, b] : bounds) out.insert(name);
    out.insert(binaries.begin(), binaries.end());
    out.insert(generals.begin(), generals.end());
    return out;
  }
};

namespace detail {

struct LpToken {
  std::string text;
  std::size_t line;
};

inline bool is_number_token(std::string_view t) {
  if (t.empty()) return false;
  return std::isdigit(static_cast<unsigned char>(t[0])) || t[0] == '.' ||
         ((t[0] == '-' || t[0] == '+') && t.size() > 1);
}

inline bool is_relation(std::string_view t) { return t == "<=" || t == ">=" || t == "=" || t == "<" || t == ">" || t == "=<" || t == "=>"; }

inline Sense to_sense(std::string_view t) {
  if (t == "<=" || t == "<" || t == "=<") return Sense::le;
  if (t == ">=" || t == ">" || t == "=>") return Sense::ge;
  return Sense::eq;
}

/// Parses "[+|-] [coef] var [* var]" terms until a relation or end of tokens.
inline std::size_t parse_expression(const std::vector<LpToken>& toks, std::size_t pos, std::vector<LinearTerm>* linear,
                                    std::vector<QuadraticTerm>* quadratic) {
  while (pos < toks.size() && !is_relation(toks[pos].text) && toks[pos].text != "[" && toks[pos].text != "]") {
    double sign = 1.0;
    while (pos < toks.size() && (toks[pos].text == "+" || toks[pos].text == "-")) {
      if (toks[pos].text == "-") sign = -sign;
      ++pos;
    }
    if (pos >= toks.size()) throw ParseError(toks.back().line, "dangling sign");
    double coef = 1.0;
    if (is_number_token(toks[pos].text)) {
      coef = expect_number<double>(toks[pos].text, toks[pos].line, "coefficient");
      ++pos;
    }
    if (pos >= toks.size() || is_relation(toks[pos].text) || is_number_token(toks[pos].text))
      throw ParseError(toks[pos < toks.size() ? pos : toks.size() - 1].line, "expected variable name");
    std::string var = toks[pos++].text;
    if (pos < toks.size() && toks[pos].text == "*") {
      if (!quadratic) throw ParseError(toks[pos].line, "product term outside [ ]");
      ++pos;
      if (pos >= toks.size()) throw ParseError(toks.back().line, "expected variable after '*'");
      quadratic->push_back({sign * coef, var, toks[pos++].text});
    } else {
      if (!linear) throw ParseError(toks[pos - 1].line, "linear term inside [ ]");
      linear->push_back({sign * coef, var});
    }
  }
  return pos;
}

inline std::vector<LpToken> tokenize_lp(const std::vector<std::pair<std::string_view, std::size_t>>& lines) {
  std::vector<LpToken> out;
  for (const auto& [line, number] : lines) {
    for (auto tok : split_ws(line)) {
      std::string t(tok);
      // '[', ']' and '*' always form tokens of their own.
      std::string cur;
      for (char ch : t) {
        if (ch == '[' || ch == ']' || ch == '*') {
          if (!cur.empty()) out.push_back({cur, number});
          cur.clear();
          out.push_back({std::string(1, ch), number});
        } else {
          cur += ch;
        }
      }
      if (!cur.empty()) out.push_back({cur, number});
    }
  }
  return out;
}

}  // namespace detail

inline LpModel parse_lp(std::string_view text) {
  using detail::expect_number;
  enum class Section { none, objective, constraints, bounds, binaries, generals, end };
  std::map<Section, std::vector<std::pair<std::string_view, std::size_t>>> body;
  Section section = Section::none;

  std::size_t start = 0, line_no = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    auto toks = detail::split_ws(line);
    if (toks.empty() || toks[0].front() == '\\') {
      if (end == text.size()) break;
      continue;
    }
    std::string head;
    for (auto t : toks) {
      if (!head.empty()) head += ' ';
      for (char ch : t) head += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    if (head == "minimize" || head == "minimum" || head == "min") section = Section::objective;
    else if (head == "subject to" || head == "such that" || head == "st" || head == "s.t.") section = Section::constraints;
    else if (head == "bounds") section = Section::bounds;
    else if (head == "binaries" || head == "binary") section = Section::binaries;
    else if (head == "generals" || head == "general") section = Section::generals;
    else if (head == "end") section = Section::end;
    else if (head == "maximize" || head == "maximum" || head == "max")
      throw ParseError(line_no, "only minimization models are supported");
    else if (section == Section::none || section == Section::end)
      throw ParseError(line_no, "content outside of a section");
    else
      body[section].push_back({line, line_no});
    if (end == text.size()) break;
  }
  if (section != Section::end) throw ParseError(line_no, "missing End");

  LpModel model;

  // Objective: optional "name:" then linear terms and at most one [ ] block.
  {
    auto toks = detail::tokenize_lp(body[Section::objective]);
    std::size_t pos = 0;
    if (pos < toks.size() && toks[pos].text.back() == ':') ++pos;
    while (pos < toks.size()) {
      if (toks[pos].text == "[") {
        pos = detail::parse_expression(toks, pos + 1, nullptr, &model.quadratic);
        if (pos >= toks.size() || toks[pos].text != "]") throw ParseError(line_no, "unterminated [ ] block");
        ++pos;
        if (pos < toks.size() && toks[pos].text.rfind('/', 0) == 0)
          throw ParseError(toks[pos].line, "the '/2' quadratic convention is not used by this reader");
        continue;
      }
      std::size_t next = detail::parse_expression(toks, pos, &model.objective, nullptr);
      if (next == pos) throw ParseError(toks[pos].line, "unexpected token '" + toks[pos].text + "'");
      pos = next;
    }
  }

  // Constraints.
  {
    auto toks = detail::tokenize_lp(body[Section::constraints]);
    std::size_t pos = 0, unnamed = 0;
    while (pos < toks.size()) {
      LpConstraint c;
      if (toks[pos].text.back() == ':') {
        c.name = toks[pos].text.substr(0, toks[pos].text.size() - 1);
        ++pos;
      } else {
        c.name = "R" + std::to_string(++unnamed);
      }
      const std::size_t row_line = pos < toks.size() ? toks[pos].line : line_no;
      pos = detail::parse_expression(toks, pos, &c.terms, nullptr);
      if (pos >= toks.size() || !detail::is_relation(toks[pos].text))
        throw ParseError(row_line, "constraint '" + c.name + "' has no relation");
      c.sense = detail::to_sense(toks[pos].text);
      ++pos;
      if (pos >= toks.size()) throw ParseError(row_line, "constraint '" + c.name + "' has no right-hand side");
      c.rhs = expect_number<double>(toks[pos].text, toks[pos].line, "right-hand side");
      ++pos;
      model.constraints.push_back(std::move(c));
    }
  }

  // Bounds, one per line.
  const double inf = std::numeric_limits<double>::infinity();
  auto bound_value = [&](std::string_view t, std::size_t line) {
    std::string low;
    for (char ch : t) low += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (low == "inf" || low == "+inf" || low == "infinity" || low == "+infinity") return inf;
    if (low == "-inf" || low == "-infinity") return -inf;
    return expect_number<double>(t, line, "bound");
  };
  for (const auto& [line, number] : body[Section::bounds]) {
    auto t = detail::split_ws(line);
    auto set = [&](std::string_view var, std::optional<double> lo, std::optional<double> hi) {
      auto& b = model.bounds.try_emplace(std::string(var), 0.0, inf).first->second;
      if (lo) b.first = *lo;
      if (hi) b.second = *hi;
    };
    if (t.size() == 5 && t[1] == "<=" && t[3] == "<=") {
      set(t[2], bound_value(t[0], number), bound_value(t[4], number));
    } else if (t.size() == 3 && (t[1] == "<=" || t[1] == ">=" || t[1] == "=")) {
      double v = bound_value(t[2], number);
      if (t[1] == "<=") set(t[0], std::nullopt, v);
      else if (t[1] == ">=") set(t[0], v, std::nullopt);
      else set(t[0], v, v);
    } else if (t.size() == 2 && (t[1] == "free" || t[1] == "Free")) {
      set(t[0], -inf, inf);
    } else {
      throw ParseError(number, "unsupported bound syntax");
    }
  }
  for (const auto& [line, number] : body[Section::binaries])
    for (auto t : detail::split_ws(line)) model.binaries.insert(std::string(t));
  for (const auto& [line, number] : body[Section::generals])
    for (auto t : detail::split_ws(line)) model.generals.insert(std::string(t));
  return model;
}

struct LpEvaluation {
  bool feasible = true;
  double objective = 0.0;
  std::vector<std::string> violations;
};

/// Substitutes `values` (absent names are 0) into every row, bound and
/// integrality declaration. Objective terms are summed in file order.
inline LpEvaluation evaluate_lp(const LpModel& model, const std::map<std::string, double>& values) {
  auto val = [&values](const std::string& name) {
    auto it = values.find(name);
    return it == values.end() ? 0.0 : it->second;
  };
  LpEvaluation ev;
  for (const auto& t : model.objective) ev.objective += t.coef * val(t.var);
  for (const auto& q : model.quadratic) ev.objective += q.coef * val(q.left) * val(q.right);
  for (const auto& c : model.constraints) {
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * val(t.var);
    const double tol = kCostTolerance;
    bool ok = c.sense == Sense::le ? lhs <= c.rhs + tol : c.sense == Sense::ge ? lhs >= c.rhs - tol
                                                                                : std::fabs(lhs - c.rhs) <= tol;
    if (!ok) {
      ev.feasible = false;
      ev.violations.push_back(c.name);
    }
  }
  for (const auto& name : model.variables()) {
    const double v = val(name);
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    if (auto it = model.bounds.find(name); it != model.bounds.end()) std::tie(lo, hi) = it->second;
    if (model.binaries.count(name)) {
      lo = std::max(lo, 0.0);
      hi = std::min(hi, 1.0);
    }
    if (v < lo - kCostTolerance || v > hi + kCostTolerance) {
      ev.feasible = false;
      ev.violations.push_back("bound:" + name);
    }
    if ((model.binaries.count(name) || model.generals.count(name)) && std::fabs(v - std::round(v)) > kCostTolerance) {
      ev.feasible = false;
      ev.violations.push_back("integrality:" + name);
    }
  }
  return ev;
}

/// LP variable values induced by a tour: x, y, u and single-commodity flow.
inline std::map<std::string, double> lp_values_from_tour(const Instance& inst, const Tour& tour) {
  const MilpAssignment a = assignment_from_tour(inst, tour);
  const std::size_t n = inst.n;
  std::map<std::string, double> values;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      values["x_" + std::to_string(i) + "_" + std::to_string(j)] = static_cast<double>(a.X(i, j));
      for (std::size_t k = 0; k < n; ++k)
        if (k != i && k != j)
          values["y_" + std::to_string(i) + "_" + std::to_string(j) + "_" + std::to_string(k)] =
              static_cast<double>(a.Y(i, j, k));
    }
  for (std::size_t i = 1; i < n; ++i) values["u_" + std::to_string(i)] = static_cast<double>(a.u[i]);
  // The arc leaving the p-th customer carries the n-1-p units still undelivered.
  for (std::size_t p = 0; p < n; ++p) {
    const auto from = static_cast<std::size_t>(tour.order[p]);
    const auto to = static_cast<std::size_t>(tour.order[(p + 1) % n]);
    values["f_" + std::to_string(from) + "_" + std::to_string(to)] = static_cast<double>(n - 1 - p);
  }
  return values;
}

// ---------------------------------------------------------------------------
// CP text models

struct CpModel {
  std::size_t n = 0;
  std::size_t alldifferent_count = 0;
  std::vector<std::pair<int, int>> fixings;  // (variable, value)
  std::vector<std::array<int, 3>> terms;     // variable positions of each element term
  CostTensor table;
};

inline CpModel parse_cp(std::string_view text) {
  using detail::expect_number;
  detail::LineReader reader(text);
  CpModel m;

  auto want = [&](std::string_view expected_line) {
    auto toks = reader.next(std::string(expected_line));
    std::string joined;
    for (auto t : toks) joined += (joined.empty() ? "" : " ") + std::string(t);
    return joined;
  };
  if (want("'cpmodel 1'") != "cpmodel 1") throw ParseError(reader.line_number(), "expected 'cpmodel 1'");

  const std::string var_line = want("variable declaration");
  {
    // var x0..x{m} in 0..{m}
    const std::string prefix = "var x0..x";
    auto in_pos = var_line.find(" in 0..");
    if (var_line.rfind(prefix, 0) != 0 || in_pos == std::string::npos)
      throw ParseError(reader.line_number(), "expected 'var x0..x<m> in 0..<m>'");
    auto last = expect_number<std::size_t>(std::string_view(var_line).substr(prefix.size(), in_pos - prefix.size()),
                                           reader.line_number(), "last variable index");
    auto hi = expect_number<std::size_t>(std::string_view(var_line).substr(in_pos + 7), reader.line_number(),
                                         "domain upper bound");
    if (hi != last) throw ParseError(reader.line_number(), "domain must be 0..n-1");
    m.n = last + 1;
    if (m.n < 3) throw ParseError(reader.line_number(), "need at least 3 variables");
  }
  const std::string all = "alldifferent(x0..x" + std::to_string(m.n - 1) + ")";
  if (want("alldifferent") != all) throw ParseError(reader.line_number(), "expected '" + all + "'");
  m.alldifferent_count = 1;

  std::string line = want("objective");
  while (line != "minimize sum_element(cost3d, cyclic)") {
    // x<p> = <v>
    auto toks = detail::split_ws(line);
    if (toks.size() != 3 || toks[1] != "=" || toks[0].empty() || toks[0][0] != 'x')
      throw ParseError(reader.line_number(), "expected fixing 'x<p> = <v>' or objective");
    auto var = expect_number<int>(toks[0].substr(1), reader.line_number(), "variable index");
    auto value = expect_number<int>(toks[2], reader.line_number(), "value");
    m.fixings.push_back({var, value});
    line = want("objective");
  }

  line = want("element term or cost3d");
  while (line != "cost3d") {
    // + cost3d[xa][xb][xc]
    if (line.rfind("+ cost3d[x", 0) != 0 || line.back() != ']')
      throw ParseError(reader.line_number(), "expected '+ cost3d[xa][xb][xc]'");
    std::array<int, 3> term{};
    std::string_view rest = std::string_view(line).substr(8);
    for (int slot = 0; slot < 3; ++slot) {
      if (rest.size() < 3 || rest[0] != '[' || rest[1] != 'x') throw ParseError(reader.line_number(), "bad element term");
      auto close = rest.find(']');
      term[slot] = expect_number<int>(rest.substr(2, close - 2), reader.line_number(), "variable index");
      if (term[slot] < 0 || static_cast<std::size_t>(term[slot]) >= m.n)
        throw ParseError(reader.line_number(), "element term refers to an undeclared variable");
      rest = rest.substr(close + 1);
    }
    if (!rest.empty()) throw ParseError(reader.line_number(), "bad element term");
    m.terms.push_back(term);
    line = want("element term or cost3d");
  }

  const std::size_t n = m.n;
  m.table = CostTensor(n, -1.0);
  for (std::size_t row = 0; row < n * (n - 1) * (n - 2); ++row) {
    auto toks = reader.next("cost row");
    if (toks.size() != 4) throw ParseError(reader.line_number(), "expected '<i> <j> <k> <cost>'");
    auto i = expect_number<std::size_t>(toks[0], reader.line_number(), "index");
    auto j = expect_number<std::size_t>(toks[1], reader.line_number(), "index");
    auto k = expect_number<std::size_t>(toks[2], reader.line_number(), "index");
    if (i >= n || j >= n || k >= n || i == j || j == k || i == k || m.table(i, j, k) >= 0.0)
      throw ParseError(reader.line_number(), "bad or repeated cost triple");
    m.table(i, j, k) = expect_number<double>(toks[3], reader.line_number(), "cost");
  }
  if (want("'end'") != "end") throw ParseError(reader.line_number(), "expected 'end'");
  if (!reader.done()) throw ParseError(reader.line_number() + 1, "content after 'end'");
  return m;
}

/// Objective of a parsed CP model at `seq`, or nullopt if `seq` violates the
/// declared constraints.
inline std::optional<double> evaluate_cp(const CpModel& m, std::span<const int> seq) {
  if (seq.size() != m.n) return std::nullopt;
  std::vector<int> seen(m.n, 0);
  for (int v : seq) {
    if (v < 0 || static_cast<std::size_t>(v) >= m.n || seen[static_cast<std::size_t>(v)]++) return std::nullopt;
  }
  for (auto [var, value] : m.fixings)
    if (seq[static_cast<std::size_t>(var)] != value) return std::nullopt;
  std::vector<Triple> triples;
  for (const auto& t : m.terms)
    triples.push_back({seq[static_cast<std::size_t>(t[0])], seq[static_cast<std::size_t>(t[1])],
                       seq[static_cast<std::size_t>(t[2])]});
  std::sort(triples.begin(), triples.end());
  double total = 0.0;
  for (const auto& t : triples)
    total += m.table(static_cast<std::size_t>(t[0]), static_cast<std::size_t>(t[1]), static_cast<std::size_t>(t[2]));
  return total;
}

// ---------------------------------------------------------------------------
// Assignment files
//
//   assignment <N>
//   x <i> <j> <value>
//   y <i> <j> <k> <value>
//   u <i> <value>
//
// Entries that are not listed are 0.

inline std::string format_assignment(const MilpAssignment& a) {
  const std::size_t n = a.n;
  std::string out = "assignment " + std::to_string(n) + "\n";
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && a.X(i, j) != 0)
        out += "x " + std::to_string(i) + " " + std::to_string(j) + " " + std::to_string(a.X(i, j)) + "\n";
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (i != j && j != k && i != k && a.Y(i, j, k) != 0)
          out += "y " + std::to_string(i) + " " + std::to_string(j) + " " + std::to_string(k) + " " +
                 std::to_string(a.Y(i, j, k)) + "\n";
  for (std::size_t i = 1; i < n; ++i)
    if (a.u[i] != 0) out += "u " + std::to_string(i) + " " + std::to_string(a.u[i]) + "\n";
  return out;
}

inline MilpAssignment parse_assignment(std::string_view text) {
  using detail::expect_number;
  detail::LineReader reader(text);
  auto header = reader.next("'assignment <N>'");
  if (header.size() != 2 || header[0] != "assignment") throw ParseError(reader.line_number(), "expected 'assignment <N>'");
  const auto n = expect_number<std::size_t>(header[1], reader.line_number(), "customer count");
  if (n < 3) throw ParseError(reader.line_number(), "customer count must be at least 3");
  MilpAssignment a(n);
  while (!reader.done()) {
    auto t = reader.next("entry");
    const auto line = reader.line_number();
    if (t.empty()) continue;
    auto index = [&](std::size_t p) {
      auto v = expect_number<std::size_t>(t[p], line, "index");
      if (v >= n) throw ParseError(line, "index out of range");
      return v;
    };
    if (t[0] == "x" && t.size() == 4) {
      auto i = index(1), j = index(2);
      if (i == j) throw ParseError(line, "x needs two distinct indices");
      a.X(i, j) = expect_number<long long>(t[3], line, "value");
    } else if (t[0] == "y" && t.size() == 5) {
      auto i = index(1), j = index(2), k = index(3);
      if (i == j || j == k || i == k) throw ParseError(line, "y needs three distinct indices");
      a.Y(i, j, k) = expect_number<long long>(t[4], line, "value");
    } else if (t[0] == "u" && t.size() == 3) {
      auto i = index(1);
      if (i == 0) throw ParseError(line, "customer 0 has no position variable");
      a.u[i] = expect_number<long long>(t[2], line, "value");
    } else {
      throw ParseError(line, "expected 'x i j v', 'y i j k v' or 'u i v'");
    }
  }
  return a;
}

}  // namespace qtsp
