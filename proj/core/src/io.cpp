#include "strb/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "strb/error.hpp"

namespace strb {

const char* to_string(ThetaId id) {
  switch (id) {
    case ThetaId::One: return "one";
    case ThetaId::Rho: return "rho";
  }
  return "one";
}

ThetaId theta_from_string(const char* name) {
  const std::string_view s(name);
  if (s == "one") return ThetaId::One;
  if (s == "rho") return ThetaId::Rho;
  throw ModelError("unknown parameter function '" + std::string(s) + "'");
}

}  // namespace strb

namespace strb::io {

std::string format_double(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                 std::chars_format::general, 17);
  if (ec != std::errc{}) return "nan";
  return std::string(buffer, end);
}

void write_triplets(std::ostream& out, const SparseMatrix& matrix) {
  out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
  for (int col = 0; col < matrix.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(matrix, col); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
    }
  }
}

SparseMatrix read_triplets(std::istream& in) {
  long rows = 0, cols = 0, nnz = 0;
  if (!(in >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
    throw InvalidArgument("triplet header must read 'rows cols nnz'");
  }
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz));
  for (long k = 0; k < nnz; ++k) {
    long i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) throw InvalidArgument("truncated triplet body");
    if (i < 0 || i >= rows || j < 0 || j >= cols) throw InvalidArgument("triplet index out of range");
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  }
  SparseMatrix matrix(rows, cols);
  matrix.setFromTriplets(triplets.begin(), triplets.end());
  return matrix;
}

void write_trajectory(std::ostream& out, const std::vector<Vector>& states) {
  for (const auto& state : states) {
    for (Eigen::Index i = 0; i < state.size(); ++i) {
      if (i > 0) out << ' ';
      out << format_double(state[i]);
    }
    out << '\n';
  }
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

void CsvWriter::separator() {
  if (column_ > 0) out_ << ',';
  ++column_;
}

CsvWriter& CsvWriter::operator<<(double value) {
  separator();
  out_ << format_double(value);
  return *this;
}

CsvWriter& CsvWriter::operator<<(long long value) {
  separator();
  out_ << value;
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::string_view text) {
  separator();
  out_ << text;
  return *this;
}

void CsvWriter::end_row() {
  if (column_ != columns_) throw InvalidArgument("CSV row has wrong number of columns");
  out_ << '\n';
  column_ = 0;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace strb::io
