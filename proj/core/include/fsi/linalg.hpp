/// @file linalg.hpp
/// Sparse matrices in CSR form with deterministic triplet assembly, a direct
/// LU factorization, block-system composition, and a generalized eigenvalue
/// power iteration. Assembly order never influences the stored matrix:
/// triplets are sorted by (row, col, value) before accumulation, so any
/// permutation of contributions produces bit-identical results.
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace fsi {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

class SparseMat {
 public:
  SparseMat() = default;
  SparseMat(int rows, int cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  /// Canonical build: duplicates are summed after a full (row, col, value)
  /// sort, making the result independent of the triplet order.
  static SparseMat from_triplets(int rows, int cols, std::vector<Triplet> triplets);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(vals_.size()); }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return vals_; }

  double coeff(int i, int j) const;

  std::vector<double> apply(const std::vector<double>& x) const;
  std::vector<double> apply_transpose(const std::vector<double>& x) const;

  SparseMat transposed() const;
  SparseMat scaled(double s) const;
  static SparseMat sum(const SparseMat& a, double alpha, const SparseMat& b, double beta);

  /// Keep rows/cols whose map entry is >= 0, renumbering to the new index.
  SparseMat select(const std::vector<int>& row_map, int new_rows,
                   const std::vector<int>& col_map, int new_cols) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> vals_;
};

/// x^T A y (and the quadratic form when x == y).
double bilinear(const SparseMat& a, const std::vector<double>& x, const std::vector<double>& y);
double quad(const SparseMat& a, const std::vector<double>& x);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm_inf(const std::vector<double>& a);
void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y);
std::vector<double> scaled(const std::vector<double>& x, double alpha);

/// Sparse LU of a square matrix; factors once, solves many right-hand sides.
/// Throws SingularSystemError if the factorization fails.
class LuFactor {
 public:
  explicit LuFactor(const SparseMat& a);
  ~LuFactor();
  LuFactor(LuFactor&&) noexcept;
  LuFactor& operator=(LuFactor&&) noexcept;

  std::vector<double> solve(const std::vector<double>& rhs) const;
  int dim() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One block of a composed system: `scale * M` (or its transpose) placed at
/// block position (row_block, col_block).
struct BlockEntry {
  int row_block = 0;
  int col_block = 0;
  const SparseMat* mat = nullptr;
  double scale = 1.0;
  bool transpose = false;
};

/// Square block system with a lazily built LU factorization. Reusing the same
/// BlockSystem across solves amortizes the factorization.
class BlockSystem {
 public:
  BlockSystem() = default;

  const SparseMat& matrix() const { return matrix_; }
  const std::vector<int>& offsets() const { return offsets_; }
  int dim() const { return offsets_.empty() ? 0 : offsets_.back(); }

  std::vector<double> solve(const std::vector<double>& rhs) const;
  double residual_inf(const std::vector<double>& x, const std::vector<double>& rhs) const;

  friend BlockSystem compose_system(const std::vector<int>& block_sizes,
                                    const std::vector<BlockEntry>& entries);

 private:
  SparseMat matrix_;
  std::vector<int> offsets_;
  mutable std::unique_ptr<LuFactor> factor_;
};

/// Assemble the global sparse matrix from block contributions. Blocks may
/// overlap (contributions are summed); block sizes fix the offsets. Throws
/// std::invalid_argument on dimension mismatches.
BlockSystem compose_system(const std::vector<int>& block_sizes,
                           const std::vector<BlockEntry>& entries);

/// Factor (if needed) and solve; convenience wrapper over BlockSystem::solve.
std::vector<double> lu_solve(const BlockSystem& system, const std::vector<double>& rhs);

/// A square sparse system with one appended dense constraint row/column:
///   [A w; w^T 0] [x; xi] = [b; beta].
/// Factoring the dense border along with A fills the factors catastrophically,
/// so it never enters the factorization. Precondition: the nonzero pattern of
/// w marks a one-dimensional two-sided null direction of A (constant vector on
/// those rows). Then xi follows from the consistency of the singular part,
/// and x from a factorization of A with one pinned row plus a null-direction
/// shift. The result equals the direct solve of the full bordered matrix.
class BorderedSystem {
 public:
  BorderedSystem() = default;
  BorderedSystem(BlockSystem core, std::vector<double> weights);

  int dim() const { return core_.dim(); }   ///< size of x, border excluded
  const BlockSystem& core() const { return core_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Solve for x; the border multiplier xi is stored through `xi` when given.
  std::vector<double> solve(const std::vector<double>& rhs, double beta,
                            double* xi = nullptr) const;

 private:
  BlockSystem core_;
  std::vector<double> weights_;
  std::vector<int> null_rows_;   ///< ascending indices of nonzero weights
  int pin_row_ = -1;
  double weight_sum_ = 0.0;
  mutable std::unique_ptr<LuFactor> pinned_;
};

/// Largest eigenvalue of K x = lambda M x for symmetric K and symmetric
/// positive definite M, by power iteration on M^{-1} K with M-norm
/// normalization. Deterministic start vector; converges on the Rayleigh
/// quotient to relative tolerance `tol`. Throws ConvergenceError when the
/// iteration budget is exhausted.
double generalized_eig_max(const SparseMat& k, const SparseMat& m, double tol = 1e-6,
                           int max_iter = 10000);

}  // namespace fsi
