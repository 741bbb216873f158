#include "seldonian/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

namespace seldonian {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view cell, std::size_t row, std::size_t column) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw ParseError("non-numeric cell '" + std::string(cell) + "'", row, column);
  }
  return v;
}

// Reads the next non-empty line; false at end of input.
bool next_line(std::istream& in, std::string& line, std::size_t& row) {
  while (std::getline(in, line)) {
    ++row;
    if (!trim(line).empty()) return true;
  }
  return false;
}

}  // namespace

ParseError::ParseError(const std::string& what, std::size_t row, std::size_t column)
    : std::runtime_error("row " + std::to_string(row) +
                         (column ? ", column " + std::to_string(column) : std::string()) + ": " + what),
      row_(row),
      column_(column) {}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t row = 0;
  if (!next_line(in, line, row)) throw ParseError("empty file", 1, 0);
  const auto header = split_csv_line(line);

  std::optional<std::size_t> y_col;
  std::optional<std::size_t> t_col;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "y") {
      y_col = c;
    } else if (header[c] == "t") {
      t_col = c;
    } else {
      feature_cols.push_back(c);
    }
  }
  if (!y_col) throw ParseError("missing column 'y'", row, 0);
  if (!t_col) throw ParseError("missing column 't'", row, 0);

  Dataset d(feature_cols.size() + 1, true);
  std::vector<double> x(feature_cols.size() + 1, 1.0);
  while (next_line(in, line, row)) {
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()),
                       row, 0);
    }
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      x[j] = parse_number(cells[feature_cols[j]], row, feature_cols[j] + 1);
    }
    const double y = parse_number(cells[*y_col], row, *y_col + 1);
    const double t = parse_number(cells[*t_col], row, *t_col + 1);
    if (t != 0.0 && t != 1.0) throw ParseError("type must be 0 or 1", row, *t_col + 1);
    d.push_back(x, y, static_cast<int>(t));
  }
  if (d.empty()) throw ParseError("no data rows", row, 0);
  return d;
}

Dataset ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& d) {
  const std::size_t emitted = d.has_intercept() ? d.feature_count() - 1 : d.feature_count();
  for (std::size_t j = 0; j < emitted; ++j) out << 'f' << (j + 1) << ',';
  out << "y,t\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto x = d.x(i);
    for (std::size_t j = 0; j < emitted; ++j) out << format_double(x[j]) << ',';
    out << format_double(d.y(i)) << ',' << d.t(i) << '\n';
  }
}

std::vector<EpisodeRecord> read_episodes_csv(std::istream& in) {
  std::string line;
  std::size_t row = 0;
  if (!next_line(in, line, row)) throw ParseError("empty file", 1, 0);
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "p1" || header[1] != "p2" || header[2] != "r") {
    throw ParseError("episode header must start with p1,p2,r", row, 0);
  }
  for (std::size_t c = 3; c < header.size(); ++c) {
    if (header[c] != "r" + std::to_string(c - 2)) {
      throw ParseError("expected column r" + std::to_string(c - 2), row, c + 1);
    }
  }
  std::vector<EpisodeRecord> out;
  while (next_line(in, line, row)) {
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()),
                       row, 0);
    }
    EpisodeRecord e;
    e.policy = {parse_number(cells[0], row, 1), parse_number(cells[1], row, 2)};
    e.ret = parse_number(cells[2], row, 3);
    for (std::size_t c = 3; c < cells.size(); ++c) e.constraint_returns.push_back(parse_number(cells[c], row, c + 1));
    out.push_back(std::move(e));
  }
  return out;
}

void write_episodes_csv(std::ostream& out, std::span<const EpisodeRecord> episodes) {
  const std::size_t n = episodes.empty() ? 0 : episodes.front().constraint_returns.size();
  out << "p1,p2,r";
  for (std::size_t j = 0; j < n; ++j) out << ",r" << (j + 1);
  out << '\n';
  for (const auto& e : episodes) {
    out << format_double(e.policy[0]) << ',' << format_double(e.policy[1]) << ',' << format_double(e.ret);
    for (double v : e.constraint_returns) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace seldonian
