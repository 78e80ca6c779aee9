#include "tcrsc/sparse.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tcrsc/errors.hpp"

namespace tcrsc {

SparseMatrix rows_to_matrix(const std::vector<SparseVector>& rows) {
  if (rows.empty()) throw DataError("rows_to_matrix: no rows");
  const Index cols = rows[0].dim;
  SparseMatrix x(static_cast<Index>(rows.size()), cols);
  Eigen::VectorXi counts(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].dim != cols) throw DataError("rows_to_matrix: inconsistent row dims");
    counts[static_cast<Eigen::Index>(r)] = static_cast<int>(rows[r].entries.size());
  }
  x.reserve(counts);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& e : rows[r].entries) {
      x.insert(static_cast<Index>(r), e.index) = e.value;
    }
  }
  x.makeCompressed();
  return x;
}

SparseMatrix take_rows(const SparseMatrix& x, const std::vector<Index>& rows) {
  SparseMatrix out(static_cast<Index>(rows.size()), x.cols());
  Eigen::VectorXi counts(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= x.rows()) throw DataError("take_rows: row index out of range");
    counts[static_cast<Eigen::Index>(r)] =
        static_cast<int>(x.outerIndexPtr()[rows[r] + 1] - x.outerIndexPtr()[rows[r]]);
  }
  out.reserve(counts);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (SparseMatrix::InnerIterator it(x, rows[r]); it; ++it) {
      out.insert(static_cast<Index>(r), it.col()) = it.value();
    }
  }
  out.makeCompressed();
  return out;
}

SparseMatrix take_columns(const SparseMatrix& x, const std::vector<Index>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] < 0 || cols[i] >= x.cols()) throw DataError("take_columns: column index out of range");
    if (i > 0 && cols[i] <= cols[i - 1]) throw DataError("take_columns: columns must be strictly ascending");
  }
  std::vector<Triplet> triplets;
  for (Index r = 0; r < x.rows(); ++r) {
    for (SparseMatrix::InnerIterator it(x, r); it; ++it) {
      const auto pos = std::lower_bound(cols.begin(), cols.end(), it.col());
      if (pos != cols.end() && *pos == it.col()) {
        triplets.emplace_back(r, static_cast<Index>(pos - cols.begin()), it.value());
      }
    }
  }
  SparseMatrix out(x.rows(), static_cast<Index>(cols.size()));
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

Eigen::MatrixXd to_dense(const SparseMatrix& x) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    for (SparseMatrix::InnerIterator it(x, r); it; ++it) {
      d(r, it.col()) = it.value();
    }
  }
  return d;
}

void write_triplets(const SparseMatrix& x, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out << x.rows() << ' ' << x.cols() << ' ' << x.nonZeros() << '\n';
  char buf[32];
  for (Index r = 0; r < x.rows(); ++r) {
    for (SparseMatrix::InnerIterator it(x, r); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%.17g", it.value());
      out << r << ' ' << it.col() << ' ' << buf << '\n';
    }
  }
  if (!out) throw DataError("write failed: " + path);
}

SparseMatrix read_triplets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": missing header line");
  Index rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream hs(line);
    if (!(hs >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
      throw DataError(path + ":1: malformed header (expected `rows cols nnz`)");
    }
  }
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Index r, c;
    double v;
    std::istringstream ls(line);
    if (!(ls >> r >> c >> v)) {
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed triplet line");
    }
    if (r < 0 || r >= rows || c < 0 || c >= cols) {
      throw DataError(path + ":" + std::to_string(line_no) + ": index out of range");
    }
    triplets.emplace_back(r, c, v);
  }
  if (static_cast<Index>(triplets.size()) != nnz) {
    throw DataError(path + ": header declares " + std::to_string(nnz) +
                    " entries, found " + std::to_string(triplets.size()));
  }
  SparseMatrix x(rows, cols);
  x.setFromTriplets(triplets.begin(), triplets.end());
  x.makeCompressed();
  return x;
}

}  // namespace tcrsc
