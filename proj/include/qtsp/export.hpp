#pragma once

// Model file writers: LP-format MILP and MIQP models and a small declarative
// CP text format, each with a variable manifest.
//
// Variable names: x_i_j (arc), y_i_j_k (consecutive triple), u_i (position),
// f_i_j (single-commodity flow, flow variant only). Cost coefficients are
// written with 12 fractional digits.

#include <qtsp/instance.hpp>
#include <qtsp/model.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace qtsp {

enum class ModelFormat { lp_milp, lp_miqp, cp_text };

inline std::string_view to_string(ModelFormat f) {
  switch (f) {
    case ModelFormat::lp_milp: return "lp-milp";
    case ModelFormat::lp_miqp: return "lp-miqp";
    case ModelFormat::cp_text: return "cp";
  }
  return "?";
}

struct VariableInfo {
  std::string name;
  std::string kind;  // binary | integer | continuous
  std::vector<int> indices;
};

struct ModelText {
  ModelFormat format = ModelFormat::lp_milp;
  std::string body;
  std::vector<VariableInfo> manifest;

  std::size_t count(std::string_view prefix) const {
    return static_cast<std::size_t>(std::count_if(manifest.begin(), manifest.end(), [prefix](const VariableInfo& v) {
      return v.name.size() > prefix.size() && v.name.compare(0, prefix.size(), prefix) == 0;
    }));
  }

  /// vars.tsv: name, kind, comma-separated indices.
  std::string manifest_tsv() const {
    std::string out = "name\tkind\tindices\n";
    for (const auto& v : manifest) {
      out += v.name + '\t' + v.kind + '\t';
      for (std::size_t p = 0; p < v.indices.size(); ++p) out += (p ? "," : "") + std::to_string(v.indices[p]);
      out += '\n';
    }
    return out;
  }
};

namespace detail {

inline std::string var_name(char prefix, std::initializer_list<std::size_t> idx) {
  std::string s(1, prefix);
  for (auto i : idx) s += '_' + std::to_string(i);
  return s;
}

inline std::string signed_coef(long long c) {
  if (c < 0) return "- " + std::to_string(-c) + " ";
  return "+ " + std::to_string(c) + " ";
}

/// Constraints on x and u shared by both LP models, plus the chosen subtour
/// family. Appends to `rows`; may add flow variables to `manifest`.
inline void emit_arc_constraints(const Instance& inst, SubtourElimination subtour, std::string& rows,
                                 std::vector<VariableInfo>& manifest) {
  const std::size_t n = inst.n;
  const auto nn = static_cast<long long>(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string out = " out_" + std::to_string(i) + ":";
    std::string in = " in_" + std::to_string(i) + ":";
    bool first = true;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      out += (first ? " " : " + ") + var_name('x', {i, j});
      in += (first ? " " : " + ") + var_name('x', {j, i});
      first = false;
    }
    rows += out + " = 1\n" + in + " = 1\n";
  }
  switch (subtour) {
    case SubtourElimination::dl:
      // u_i - u_j + (n-1) x_ij + (n-3) x_ji <= n-2
      for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 1; j < n; ++j) {
          if (i == j) continue;
          rows += " dl_" + std::to_string(i) + "_" + std::to_string(j) + ": " + var_name('u', {i}) + " - " +
                  var_name('u', {j}) + " " + signed_coef(nn - 1) + var_name('x', {i, j}) + " " +
                  signed_coef(nn - 3) + var_name('x', {j, i}) + " <= " + std::to_string(nn - 2) + "\n";
        }
      break;
    case SubtourElimination::mtz:
      // u_i - u_j + n x_ij <= n-1
      for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 1; j < n; ++j) {
          if (i == j) continue;
          rows += " mtz_" + std::to_string(i) + "_" + std::to_string(j) + ": " + var_name('u', {i}) + " - " +
                  var_name('u', {j}) + " " + signed_coef(nn) + var_name('x', {i, j}) + " <= " +
                  std::to_string(nn - 1) + "\n";
        }
      break;
    case SubtourElimination::flow:
      // Node i != 0 absorbs one unit: sum_j f_ji - sum_j f_ij = 1; f_ij <= (n-1) x_ij.
      for (std::size_t i = 1; i < n; ++i) {
        std::string row = " bal_" + std::to_string(i) + ":";
        bool first = true;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          row += (first ? " " : " + ") + var_name('f', {j, i});
          first = false;
        }
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          row += " - " + var_name('f', {i, j});
        }
        rows += row + " = 1\n";
      }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          rows += " cap_" + std::to_string(i) + "_" + std::to_string(j) + ": " + var_name('f', {i, j}) + " " +
                  signed_coef(-(nn - 1)) + var_name('x', {i, j}) + " <= 0\n";
        }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j)
            manifest.push_back({var_name('f', {i, j}), "continuous", {static_cast<int>(i), static_cast<int>(j)}});
      break;
  }
}

inline void add_arc_and_position_vars(std::size_t n, bool with_positions, std::vector<VariableInfo>& manifest) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) manifest.push_back({var_name('x', {i, j}), "binary", {static_cast<int>(i), static_cast<int>(j)}});
  if (with_positions)
    for (std::size_t i = 1; i < n; ++i) manifest.push_back({var_name('u', {i}), "integer", {static_cast<int>(i)}});
}

inline std::string lp_tail(std::size_t n, const std::vector<VariableInfo>& manifest, bool with_positions) {
  std::string out;
  if (with_positions) {
    out += "Bounds\n";
    for (std::size_t i = 1; i < n; ++i) out += " 1 <= " + var_name('u', {i}) + " <= " + std::to_string(n - 1) + "\n";
  }
  out += "Binaries\n";
  for (const auto& v : manifest)
    if (v.kind == "binary") out += " " + v.name + "\n";
  if (with_positions) {
    out += "Generals\n";
    for (const auto& v : manifest)
      if (v.kind == "integer") out += " " + v.name + "\n";
  }
  out += "End\n";
  return out;
}

}  // namespace detail

/// MILP over x, y and u (or flow variables) with the chosen subtour family.
inline ModelText export_milp(const Instance& inst, SubtourElimination subtour = SubtourElimination::dl) {
  using detail::var_name;
  const std::size_t n = inst.n;
  if (n < 3) throw InvalidArgument("models need at least 3 customers");
  const bool with_positions = subtour != SubtourElimination::flow;

  ModelText model;
  model.format = ModelFormat::lp_milp;
  detail::add_arc_and_position_vars(n, with_positions, model.manifest);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (i != j && j != k && i != k)
          model.manifest.push_back(
              {var_name('y', {i, j, k}), "binary", {static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)}});

  std::string& s = model.body;
  s += "\\ QTSP MILP, n = " + std::to_string(n) + ", subtour elimination: " + std::string(to_string(subtour)) + "\n";
  s += "Minimize\n obj:";
  bool first = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        s += std::string(first ? " " : "\n + ") + format_fixed(inst.cost(i, j, k)) + " " + var_name('y', {i, j, k});
        first = false;
      }
  s += "\nSubject To\n";
  std::string rows;
  detail::emit_arc_constraints(inst, subtour, rows, model.manifest);
  // x_ij - sum_k y_ijk = 0 and x_ij - sum_k y_kij = 0
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      std::string next = " next_" + std::to_string(i) + "_" + std::to_string(j) + ": " + var_name('x', {i, j});
      std::string prev = " prev_" + std::to_string(i) + "_" + std::to_string(j) + ": " + var_name('x', {i, j});
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        next += " - " + var_name('y', {i, j, k});
        prev += " - " + var_name('y', {k, i, j});
      }
      rows += next + " = 0\n" + prev + " = 0\n";
    }
  s += rows;
  s += detail::lp_tail(n, model.manifest, with_positions);
  return model;
}

/// MIQP: the MILP without y, objective as explicit products inside [ ].
inline ModelText export_miqp(const Instance& inst) {
  using detail::var_name;
  const std::size_t n = inst.n;
  if (n < 3) throw InvalidArgument("models need at least 3 customers");

  ModelText model;
  model.format = ModelFormat::lp_miqp;
  detail::add_arc_and_position_vars(n, true, model.manifest);

  std::string& s = model.body;
  s += "\\ QTSP MIQP, n = " + std::to_string(n) + ", subtour elimination: dl\n";
  s += "Minimize\n obj: [";
  bool first = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        s += std::string(first ? "\n   " : "\n + ") + format_fixed(inst.cost(i, j, k)) + " " + var_name('x', {i, j}) +
             " * " + var_name('x', {j, k});
        first = false;
      }
  s += "\n ]\nSubject To\n";
  std::string rows;
  detail::emit_arc_constraints(inst, SubtourElimination::dl, rows, model.manifest);
  s += rows;
  s += detail::lp_tail(n, model.manifest, true);
  return model;
}

/// CP model text:
///   cpmodel 1
///   var x0..x{n-1} in 0..{n-1}
///   alldifferent(x0..x{n-1})
///   x0 = 0
///   minimize sum_element(cost3d, cyclic)
///   + cost3d[xa][xb][xc]          (n element terms)
///   cost3d
///   <i> <j> <k> <cost>            (n(n-1)(n-2) rows)
///   end
inline ModelText export_cp(const Instance& inst) {
  const std::size_t n = inst.n;
  if (n < 3) throw InvalidArgument("models need at least 3 customers");
  ModelText model;
  model.format = ModelFormat::cp_text;
  for (std::size_t p = 0; p < n; ++p)
    model.manifest.push_back({"x" + std::to_string(p), "integer", {static_cast<int>(p)}});

  const std::string last = std::to_string(n - 1);
  std::string& s = model.body;
  s += "cpmodel 1\n";
  s += "var x0..x" + last + " in 0.." + last + "\n";
  s += "alldifferent(x0..x" + last + ")\n";
  s += "x0 = 0\n";
  s += "minimize sum_element(cost3d, cyclic)\n";
  std::vector<int> positions(n);
  for (std::size_t p = 0; p < n; ++p) positions[p] = static_cast<int>(p);
  for (const auto& t : cp_objective_triples(positions))
    s += "+ cost3d[x" + std::to_string(t[0]) + "][x" + std::to_string(t[1]) + "][x" + std::to_string(t[2]) + "]\n";
  s += "cost3d\n";
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        s += std::to_string(i) + " " + std::to_string(j) + " " + std::to_string(k) + " " +
             format_fixed(inst.cost(i, j, k)) + "\n";
      }
  s += "end\n";
  return model;
}

}  // namespace qtsp
