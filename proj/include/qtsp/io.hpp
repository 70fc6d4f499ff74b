#pragma once

// Text formats for instances and solutions.
//
// Instance file:
//   qtsp 1
//   kind angle | kind angledistance rho=<decimal> | kind explicit
//   n <N>
//   [seed <u64>]
//   points            followed by N lines "<x> <y>"
//   costs             followed by N(N-1)(N-2) lines "<i> <j> <k> <c>"
//
// Solution file:
//   tour <N>
//   <space separated order starting with 0>
//   cost <decimal>

#include <qtsp/errors.hpp>
#include <qtsp/instance.hpp>

#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace qtsp {

// ---------------------------------------------------------------------------
// Small text helpers

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
    std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r') ++pos;
    if (pos > start) out.push_back(line.substr(start, pos - start));
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  T value{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

template <typename T>
T expect_number(std::string_view text, std::size_t line, std::string_view what) {
  auto v = parse_number<T>(text);
  if (!v) throw ParseError(line, "expected " + std::string(what) + ", got '" + std::string(text) + "'");
  return *v;
}

/// Line reader that tracks 1-based line numbers and skips trailing blanks.
class LineReader {
 public:
  explicit LineReader(std::string_view text) {
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      lines_.push_back(text.substr(start, end - start));
      if (end == text.size()) break;
      start = end + 1;
    }
    while (!lines_.empty() && split_ws(lines_.back()).empty()) lines_.pop_back();
  }

  bool done() const noexcept { return next_ >= lines_.size(); }
  std::size_t line_number() const noexcept { return next_; }  // number of the last line returned

  std::vector<std::string_view> next(std::string_view expecting) {
    if (done()) throw ParseError(lines_.size() + 1, "unexpected end of file, expected " + std::string(expecting));
    return split_ws(lines_[next_++]);
  }

  std::optional<std::vector<std::string_view>> peek() const {
    if (done()) return std::nullopt;
    return split_ws(lines_[next_]);
  }

 private:
  std::vector<std::string_view> lines_;
  std::size_t next_ = 0;
};

}  // namespace detail

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to a temporary sibling and renames it over `path`.
inline void write_text_file_atomic(const std::filesystem::path& path, std::string_view content) {
  static std::atomic<unsigned> counter{0};
  auto tmp = path;
  tmp += ".tmp" + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot write " + path.string());
  }
}

// ---------------------------------------------------------------------------
// Instances

inline std::string format_instance(const Instance& inst) {
  std::string out = "qtsp 1\n";
  out += "kind " + std::string(to_string(inst.kind));
  if (inst.kind == CostKind::angle_distance) out += " rho=" + format_shortest(inst.rho.value_or(kDefaultRho));
  out += "\n";
  out += "n " + std::to_string(inst.n) + "\n";
  if (inst.seed) out += "seed " + std::to_string(*inst.seed) + "\n";
  if (inst.kind == CostKind::explicit_costs) {
    out += "costs\n";
    for (std::size_t i = 0; i < inst.n; ++i)
      for (std::size_t j = 0; j < inst.n; ++j)
        for (std::size_t k = 0; k < inst.n; ++k) {
          if (i == j || j == k || i == k) continue;
          out += std::to_string(i) + ' ' + std::to_string(j) + ' ' + std::to_string(k) + ' ' +
                 format_fixed(inst.cost(i, j, k)) + '\n';
        }
  } else {
    out += "points\n";
    for (const auto& p : inst.points) out += std::to_string(p.x) + ' ' + std::to_string(p.y) + '\n';
  }
  return out;
}

inline Instance parse_instance(std::string_view text) {
  using detail::expect_number;
  detail::LineReader reader(text);

  auto header = reader.next("header");
  if (header.size() != 2 || header[0] != "qtsp" || header[1] != "1")
    throw ParseError(reader.line_number(), "expected header 'qtsp 1'");

  auto kind_line = reader.next("kind line");
  if (kind_line.size() < 2 || kind_line[0] != "kind") throw ParseError(reader.line_number(), "expected 'kind <kind>'");
  auto kind = parse_cost_kind(kind_line[1]);
  if (!kind) throw ParseError(reader.line_number(), "unknown cost kind '" + std::string(kind_line[1]) + "'");
  double rho = kDefaultRho;
  if (*kind == CostKind::angle_distance) {
    if (kind_line.size() != 3 || kind_line[2].substr(0, 4) != "rho=")
      throw ParseError(reader.line_number(), "angledistance kind needs 'rho=<decimal>'");
    rho = expect_number<double>(kind_line[2].substr(4), reader.line_number(), "rho value");
    if (!(rho >= 0.0)) throw ParseError(reader.line_number(), "rho must be >= 0");
  } else if (kind_line.size() != 2) {
    throw ParseError(reader.line_number(), "unexpected tokens after kind");
  }

  auto n_line = reader.next("'n <N>'");
  if (n_line.size() != 2 || n_line[0] != "n") throw ParseError(reader.line_number(), "expected 'n <N>'");
  auto n = expect_number<std::size_t>(n_line[1], reader.line_number(), "customer count");
  if (n < 3) throw ParseError(reader.line_number(), "customer count must be at least 3");

  std::optional<std::uint64_t> seed;
  if (auto peeked = reader.peek(); peeked && !peeked->empty() && (*peeked)[0] == "seed") {
    auto seed_line = reader.next("seed");
    if (seed_line.size() != 2) throw ParseError(reader.line_number(), "expected 'seed <u64>'");
    seed = expect_number<std::uint64_t>(seed_line[1], reader.line_number(), "seed");
  }

  auto section = reader.next(*kind == CostKind::explicit_costs ? "'costs'" : "'points'");
  if (*kind == CostKind::explicit_costs) {
    if (section.size() != 1 || section[0] != "costs") throw ParseError(reader.line_number(), "expected 'costs'");
    const std::size_t expected = n * (n - 1) * (n - 2);
    CostTensor costs(n, -1.0);
    for (std::size_t read = 0; read < expected; ++read) {
      if (reader.done())
        throw ParseError(reader.line_number() + 1, "expected " + std::to_string(expected) + " cost lines, found " +
                                                       std::to_string(read) + " (" +
                                                       std::to_string(expected - read) + " missing)");
      auto row = reader.next("cost line");
      const auto line = reader.line_number();
      if (row.size() != 4) throw ParseError(line, "expected '<i> <j> <k> <cost>'");
      auto i = expect_number<std::size_t>(row[0], line, "index");
      auto j = expect_number<std::size_t>(row[1], line, "index");
      auto k = expect_number<std::size_t>(row[2], line, "index");
      auto c = expect_number<double>(row[3], line, "cost");
      if (i >= n || j >= n || k >= n || i == j || j == k || i == k)
        throw ParseError(line, "triple indices must be distinct and below n");
      if (!(c >= 0.0)) throw ParseError(line, "costs must be nonnegative");
      if (costs(i, j, k) >= 0.0) throw ParseError(line, "duplicate triple");
      costs(i, j, k) = c;
    }
    if (!reader.done()) throw ParseError(reader.line_number() + 1, "unexpected content after cost lines");
    auto inst = make_explicit_instance(std::move(costs));
    inst.seed = seed;
    return inst;
  }

  if (section.size() != 1 || section[0] != "points") throw ParseError(reader.line_number(), "expected 'points'");
  std::vector<Point> points;
  points.reserve(n);
  while (points.size() < n) {
    if (reader.done())
      throw ParseError(reader.line_number() + 1, "header declares n=" + std::to_string(n) + " but only " +
                                                     std::to_string(points.size()) + " points present (" +
                                                     std::to_string(n - points.size()) + " missing)");
    auto row = reader.next("point");
    const auto line = reader.line_number();
    if (row.size() != 2) throw ParseError(line, "expected '<x> <y>'");
    Point p;
    p.x = expect_number<int>(row[0], line, "integer coordinate");
    p.y = expect_number<int>(row[1], line, "integer coordinate");
    points.push_back(p);
  }
  if (!reader.done())
    throw ParseError(reader.line_number() + 1, "more points than the declared n=" + std::to_string(n));
  return make_point_instance(*kind, std::move(points), rho, seed);
}

inline Instance read_instance(const std::filesystem::path& path) { return parse_instance(read_text_file(path)); }

inline void write_instance(const Instance& inst, const std::filesystem::path& path) {
  write_text_file_atomic(path, format_instance(inst));
}

// ---------------------------------------------------------------------------
// Solutions

struct SolutionFile {
  std::size_t declared_n = 0;
  Tour tour;
  std::optional<double> cost;
};

inline std::string format_solution(const Tour& tour, double cost) {
  std::string out = "tour " + std::to_string(tour.order.size()) + "\n";
  for (std::size_t p = 0; p < tour.order.size(); ++p) {
    if (p) out += ' ';
    out += std::to_string(tour.order[p]);
  }
  out += "\ncost " + format_shortest(cost) + "\n";
  return out;
}

/// Reads a solution without validating the tour, so that checkers can
/// report what is wrong with it.
inline SolutionFile parse_solution(std::string_view text) {
  using detail::expect_number;
  detail::LineReader reader(text);
  SolutionFile sol;
  auto header = reader.next("'tour <N>'");
  if (header.size() != 2 || header[0] != "tour") throw ParseError(reader.line_number(), "expected 'tour <N>'");
  sol.declared_n = expect_number<std::size_t>(header[1], reader.line_number(), "tour length");
  auto order = reader.next("tour order");
  for (auto tok : order) sol.tour.order.push_back(expect_number<int>(tok, reader.line_number(), "customer index"));
  if (!reader.done()) {
    auto cost_line = reader.next("cost");
    if (cost_line.size() != 2 || cost_line[0] != "cost") throw ParseError(reader.line_number(), "expected 'cost <decimal>'");
    sol.cost = expect_number<double>(cost_line[1], reader.line_number(), "cost");
  }
  if (!reader.done()) throw ParseError(reader.line_number() + 1, "unexpected content after cost line");
  return sol;
}

inline SolutionFile read_solution(const std::filesystem::path& path) { return parse_solution(read_text_file(path)); }

inline void write_solution(const Tour& tour, double cost, const std::filesystem::path& path) {
  write_text_file_atomic(path, format_solution(tour, cost));
}

}  // namespace qtsp
