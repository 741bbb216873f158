#pragma once
// CSV schemas:
//   dataset   f1..fk, y, t      (the constant feature is implicit; ingestion appends it)
//   episodes  p1, p2, r, r1..rn
// Numbers are written in shortest round-trip form, so emit-then-ingest is exact.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "seldonian/dataset.hpp"
#include "seldonian/rl.hpp"

namespace seldonian {

class ParseError : public std::runtime_error {
 public:
  // row is 1-based and counts the header; column is 1-based (0 when not applicable).
  ParseError(const std::string& what, std::size_t row, std::size_t column);
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

std::string format_double(double v);
std::vector<std::string> split_csv_line(std::string_view line);

Dataset read_dataset_csv(std::istream& in);
Dataset ingest_csv(const std::filesystem::path& path);
void write_dataset_csv(std::ostream& out, const Dataset& d);

std::vector<EpisodeRecord> read_episodes_csv(std::istream& in);
void write_episodes_csv(std::ostream& out, std::span<const EpisodeRecord> episodes);

}  // namespace seldonian
