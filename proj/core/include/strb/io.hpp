#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "strb/linalg.hpp"

namespace strb::io {

/// Formats `value` with 17 significant digits (round-trip exact for doubles).
std::string format_double(double value);

/// Plain-text triplet format: a header line "rows cols nnz" followed by one
/// "i j value" line per stored entry, 0-based indices, column-major order.
void write_triplets(std::ostream& out, const SparseMatrix& matrix);
SparseMatrix read_triplets(std::istream& in);

/// One line per time node, space-separated values in dof order.
void write_trajectory(std::ostream& out, const std::vector<Vector>& states);

/// Minimal CSV writer: header row, comma separated, 17 significant digits, LF endings.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  CsvWriter& operator<<(double value);
  CsvWriter& operator<<(long long value);
  CsvWriter& operator<<(int value) { return *this << static_cast<long long>(value); }
  CsvWriter& operator<<(std::size_t value) { return *this << static_cast<long long>(value); }
  CsvWriter& operator<<(std::string_view text);
  void end_row();

 private:
  void separator();

  std::ostream& out_;
  std::size_t columns_;
  std::size_t column_ = 0;
};

/// Writes `contents` to `path` through a temporary sibling file and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace strb::io
