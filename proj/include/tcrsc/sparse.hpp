#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <vector>

namespace tcrsc {

using Index = std::int64_t;

// Row-major compressed storage (CSR): outerIndexPtr() holds the row offsets,
// innerIndexPtr() the column indices sorted within each row, valuePtr() the
// values. 64-bit indices because the k-mer space reaches 21^8.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;
using SparseMatrixCsc = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;
using Triplet = Eigen::Triplet<double, Index>;

struct SparseEntry {
  Index index = 0;
  double value = 0.0;
  bool operator==(const SparseEntry&) const = default;
};

// One embedding row: strictly increasing indices in [0, dim), no stored zeros.
struct SparseVector {
  Index dim = 0;
  std::vector<SparseEntry> entries;
};

SparseMatrix rows_to_matrix(const std::vector<SparseVector>& rows);

// Row subset in the given order (duplicates allowed).
SparseMatrix take_rows(const SparseMatrix& x, const std::vector<Index>& rows);

// Column subset; cols must be sorted ascending and in range.
SparseMatrix take_columns(const SparseMatrix& x, const std::vector<Index>& cols);

Eigen::MatrixXd to_dense(const SparseMatrix& x);

// Text triplet interchange: header `rows cols nnz`, then one
// `row col value` line per entry in row-major order.
void write_triplets(const SparseMatrix& x, const std::string& path);
SparseMatrix read_triplets(const std::string& path);

}  // namespace tcrsc
