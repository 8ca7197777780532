#pragma once

#include <istream>
#include <string>
#include <tuple>
#include <vector>

namespace sublin {

struct Triplet {
  int row;
  int col;
  double value;
};

// Square sparse matrix stored in both row-major (CSR) and column-major (CSC)
// form so that row scans and column scans are both contiguous. Duplicate
// coordinates are merged by summation at construction.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  static SparseMatrix from_triplets(int n, std::vector<Triplet> triplets);

  int n() const { return n_; }
  std::int64_t nnz() const { return static_cast<std::int64_t>(row_val_.size()); }

  // CSR access: entries of row i as (col, value) pairs.
  struct RowRange {
    const int* idx_begin;
    const int* idx_end;
    const double* val_begin;
    int size() const { return static_cast<int>(idx_end - idx_begin); }
  };
  RowRange row(int i) const {
    auto b = static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(i)]);
    auto e = static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(i) + 1]);
    return {row_col_.data() + b, row_col_.data() + e, row_val_.data() + b};
  }

  // CSC access: entries of column j as (row, value) pairs.
  RowRange col(int j) const {
    auto b = static_cast<std::size_t>(col_ptr_[static_cast<std::size_t>(j)]);
    auto e = static_cast<std::size_t>(col_ptr_[static_cast<std::size_t>(j) + 1]);
    return {col_row_.data() + b, col_row_.data() + e, col_val_.data() + b};
  }

  int row_nnz(int i) const {
    return static_cast<int>(row_ptr_[static_cast<std::size_t>(i) + 1] -
                            row_ptr_[static_cast<std::size_t>(i)]);
  }
  int col_nnz(int j) const {
    return static_cast<int>(col_ptr_[static_cast<std::size_t>(j) + 1] -
                            col_ptr_[static_cast<std::size_t>(j)]);
  }

  // Diagonal entry, 0 if absent. O(1) via cache built at construction.
  double diag(int i) const { return diag_[static_cast<std::size_t>(i)]; }

  SparseMatrix transposed() const;

  std::vector<double> multiply(const std::vector<double>& x) const;
  std::vector<double> multiply_transpose(const std::vector<double>& x) const;

  std::vector<Triplet> to_triplets() const;

 private:
  int n_ = 0;
  std::vector<std::int64_t> row_ptr_;
  std::vector<int> row_col_;
  std::vector<double> row_val_;
  std::vector<std::int64_t> col_ptr_;
  std::vector<int> col_row_;
  std::vector<double> col_val_;
  std::vector<double> diag_;
};

// Matrix Market coordinate reader. Accepts real/integer/pattern fields and
// general/symmetric symmetry. Indices are 1-based on disk, 0-based in memory.
// Only square matrices are accepted.
SparseMatrix read_matrix_market(std::istream& in, const std::string& source_name);
SparseMatrix read_matrix_market_file(const std::string& path);

// Vector reader: either a Matrix Market array (dense column), a Matrix Market
// coordinate vector (n-by-1), or plain "idx value" lines (0-based indices)
// with an optional "# n <dim>" header. Returns the dense vector.
std::vector<double> read_vector_file(const std::string& path, int expected_n);

}  // namespace sublin
