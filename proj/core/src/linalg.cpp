/// @file linalg.cpp
#include "fsi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "fsi/errors.hpp"

namespace fsi {

SparseMat SparseMat::from_triplets(int rows, int cols, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw std::invalid_argument("from_triplets: index out of range");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    if (a.row != b.row) return a.row < b.row;
    if (a.col != b.col) return a.col < b.col;
    return a.value < b.value;
  });
  SparseMat m(rows, cols);
  m.col_idx_.reserve(triplets.size());
  m.vals_.reserve(triplets.size());
  size_t i = 0;
  while (i < triplets.size()) {
    int r = triplets[i].row, c = triplets[i].col;
    double v = 0.0;
    while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
      v += triplets[i].value;
      ++i;
    }
    m.col_idx_.push_back(c);
    m.vals_.push_back(v);
    ++m.row_ptr_[r + 1];
  }
  for (int r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

double SparseMat::coeff(int i, int j) const {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
    throw std::invalid_argument("coeff: index out of range");
  for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
    if (col_idx_[k] == j) return vals_[k];
  return 0.0;
}

std::vector<double> SparseMat::apply(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != cols_)
    throw std::invalid_argument("apply: dimension mismatch");
  std::vector<double> y(rows_, 0.0);
  for (int r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += vals_[k] * x[col_idx_[k]];
    y[r] = acc;
  }
  return y;
}

std::vector<double> SparseMat::apply_transpose(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != rows_)
    throw std::invalid_argument("apply_transpose: dimension mismatch");
  std::vector<double> y(cols_, 0.0);
  for (int r = 0; r < rows_; ++r) {
    double xr = x[r];
    if (xr == 0.0) continue;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) y[col_idx_[k]] += vals_[k] * xr;
  }
  return y;
}

SparseMat SparseMat::transposed() const {
  std::vector<Triplet> t;
  t.reserve(vals_.size());
  for (int r = 0; r < rows_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      t.push_back({col_idx_[k], r, vals_[k]});
  return from_triplets(cols_, rows_, std::move(t));
}

SparseMat SparseMat::scaled(double s) const {
  SparseMat m = *this;
  for (double& v : m.vals_) v *= s;
  return m;
}

SparseMat SparseMat::sum(const SparseMat& a, double alpha, const SparseMat& b, double beta) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
    throw std::invalid_argument("sum: dimension mismatch");
  std::vector<Triplet> t;
  t.reserve(a.vals_.size() + b.vals_.size());
  for (int r = 0; r < a.rows_; ++r)
    for (int k = a.row_ptr_[r]; k < a.row_ptr_[r + 1]; ++k)
      t.push_back({r, a.col_idx_[k], alpha * a.vals_[k]});
  for (int r = 0; r < b.rows_; ++r)
    for (int k = b.row_ptr_[r]; k < b.row_ptr_[r + 1]; ++k)
      t.push_back({r, b.col_idx_[k], beta * b.vals_[k]});
  return from_triplets(a.rows_, a.cols_, std::move(t));
}

SparseMat SparseMat::select(const std::vector<int>& row_map, int new_rows,
                            const std::vector<int>& col_map, int new_cols) const {
  if (static_cast<int>(row_map.size()) != rows_ || static_cast<int>(col_map.size()) != cols_)
    throw std::invalid_argument("select: map size mismatch");
  std::vector<Triplet> t;
  t.reserve(vals_.size());
  for (int r = 0; r < rows_; ++r) {
    int nr = row_map[r];
    if (nr < 0) continue;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      int nc = col_map[col_idx_[k]];
      if (nc < 0) continue;
      t.push_back({nr, nc, vals_[k]});
    }
  }
  return from_triplets(new_rows, new_cols, std::move(t));
}

double bilinear(const SparseMat& a, const std::vector<double>& x, const std::vector<double>& y) {
  return dot(x, a.apply(y));
}

double quad(const SparseMat& a, const std::vector<double>& x) { return bilinear(a, x, x); }

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm_inf(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: dimension mismatch");
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

std::vector<double> scaled(const std::vector<double>& x, double alpha) {
  std::vector<double> y(x);
  for (double& v : y) v *= alpha;
  return y;
}

struct LuFactor::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor, int>> solver;
  int n = 0;
};

LuFactor::LuFactor(const SparseMat& a) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("LuFactor: matrix must be square");
  impl_->n = a.rows();
  Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>> view(
      a.rows(), a.cols(), a.nnz(), a.row_ptr().data(), a.col_idx().data(), a.values().data());
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> mat = view;
  impl_->solver.analyzePattern(mat);
  impl_->solver.factorize(mat);
  if (impl_->solver.info() != Eigen::Success)
    throw SingularSystemError("LuFactor: factorization failed (singular matrix)");
}

LuFactor::~LuFactor() = default;
LuFactor::LuFactor(LuFactor&&) noexcept = default;
LuFactor& LuFactor::operator=(LuFactor&&) noexcept = default;

std::vector<double> LuFactor::solve(const std::vector<double>& rhs) const {
  if (static_cast<int>(rhs.size()) != impl_->n)
    throw std::invalid_argument("LuFactor::solve: dimension mismatch");
  Eigen::Map<const Eigen::VectorXd> b(rhs.data(), rhs.size());
  Eigen::VectorXd x = impl_->solver.solve(b);
  if (impl_->solver.info() != Eigen::Success)
    throw SingularSystemError("LuFactor::solve: backsubstitution failed");
  return std::vector<double>(x.data(), x.data() + x.size());
}

int LuFactor::dim() const { return impl_->n; }

BlockSystem compose_system(const std::vector<int>& block_sizes,
                           const std::vector<BlockEntry>& entries) {
  BlockSystem sys;
  sys.offsets_.assign(1, 0);
  for (int s : block_sizes) {
    if (s < 0) throw std::invalid_argument("compose_system: negative block size");
    sys.offsets_.push_back(sys.offsets_.back() + s);
  }
  int dim = sys.offsets_.back();
  int nb = static_cast<int>(block_sizes.size());
  std::vector<Triplet> t;
  for (const auto& e : entries) {
    if (e.row_block < 0 || e.row_block >= nb || e.col_block < 0 || e.col_block >= nb)
      throw std::invalid_argument("compose_system: block index out of range");
    if (e.mat == nullptr) throw std::invalid_argument("compose_system: null block");
    int er = e.transpose ? e.mat->cols() : e.mat->rows();
    int ec = e.transpose ? e.mat->rows() : e.mat->cols();
    if (er != block_sizes[e.row_block] || ec != block_sizes[e.col_block])
      throw std::invalid_argument("compose_system: block dimension mismatch");
    int ro = sys.offsets_[e.row_block], co = sys.offsets_[e.col_block];
    const auto& rp = e.mat->row_ptr();
    const auto& ci = e.mat->col_idx();
    const auto& vv = e.mat->values();
    for (int r = 0; r < e.mat->rows(); ++r) {
      for (int k = rp[r]; k < rp[r + 1]; ++k) {
        if (e.transpose)
          t.push_back({ro + ci[k], co + r, e.scale * vv[k]});
        else
          t.push_back({ro + r, co + ci[k], e.scale * vv[k]});
      }
    }
  }
  sys.matrix_ = SparseMat::from_triplets(dim, dim, std::move(t));
  return sys;
}

std::vector<double> BlockSystem::solve(const std::vector<double>& rhs) const {
  if (!factor_) factor_ = std::make_unique<LuFactor>(matrix_);
  return factor_->solve(rhs);
}

double BlockSystem::residual_inf(const std::vector<double>& x,
                                 const std::vector<double>& rhs) const {
  std::vector<double> r = matrix_.apply(x);
  for (size_t i = 0; i < r.size(); ++i) r[i] -= rhs[i];
  return norm_inf(r);
}

std::vector<double> lu_solve(const BlockSystem& system, const std::vector<double>& rhs) {
  return system.solve(rhs);
}

BorderedSystem::BorderedSystem(BlockSystem core, std::vector<double> weights)
    : core_(std::move(core)), weights_(std::move(weights)) {
  if (static_cast<int>(weights_.size()) != core_.dim())
    throw std::invalid_argument("BorderedSystem: weight size mismatch");
  for (int i = 0; i < core_.dim(); ++i)
    if (weights_[i] != 0.0) {
      null_rows_.push_back(i);
      weight_sum_ += weights_[i];
    }
  if (null_rows_.empty())
    throw std::invalid_argument("BorderedSystem: all border weights vanish");
  if (weight_sum_ == 0.0)
    throw SingularSystemError("BorderedSystem: border weights sum to zero");
  pin_row_ = null_rows_.front();
}

std::vector<double> BorderedSystem::solve(const std::vector<double>& rhs, double beta,
                                          double* xi) const {
  const int n = core_.dim();
  if (static_cast<int>(rhs.size()) != n)
    throw std::invalid_argument("BorderedSystem::solve: rhs size mismatch");
  if (!pinned_) {
    // copy of the core matrix with the pinned row replaced by a unit row
    const SparseMat& a = core_.matrix();
    std::vector<Triplet> t;
    t.reserve(static_cast<size_t>(a.nnz()) + 1);
    const auto& rp = a.row_ptr();
    const auto& ci = a.col_idx();
    const auto& vv = a.values();
    for (int r = 0; r < n; ++r) {
      if (r == pin_row_) continue;
      for (int k = rp[r]; k < rp[r + 1]; ++k) t.push_back({r, ci[k], vv[k]});
    }
    t.push_back({pin_row_, pin_row_, 1.0});
    pinned_ = std::make_unique<LuFactor>(SparseMat::from_triplets(n, n, std::move(t)));
  }
  // the border column carries xi into exactly the null rows, whose equations
  // sum (with unit coefficients) to an identity fixing xi from the data
  double s = 0.0;
  for (int i : null_rows_) s += rhs[i];
  double mult = s / weight_sum_;
  std::vector<double> b(rhs);
  for (int i : null_rows_) b[i] -= mult * weights_[i];
  b[pin_row_] = 0.0;
  std::vector<double> x = pinned_->solve(b);
  // shift along the null direction to satisfy the border row w^T x = beta
  double wx = 0.0;
  for (int i : null_rows_) wx += weights_[i] * x[i];
  double shift = (beta - wx) / weight_sum_;
  for (int i : null_rows_) x[i] += shift;
  if (xi != nullptr) *xi = mult;
  return x;
}

double generalized_eig_max(const SparseMat& k, const SparseMat& m, double tol, int max_iter) {
  if (k.rows() != k.cols() || m.rows() != m.cols() || k.rows() != m.rows())
    throw std::invalid_argument("generalized_eig_max: dimension mismatch");
  if (!(tol > 0.0) || max_iter < 1)
    throw std::invalid_argument("generalized_eig_max: bad tolerance or iteration budget");
  int n = k.rows();
  if (n == 0) return 0.0;
  LuFactor mf(m);
  // deterministic pseudo-random start vector (xorshift64), integer arithmetic
  // only so the result is identical across platforms and runs
  std::vector<double> x(n);
  std::uint64_t s = 0x9e3779b97f4a7c15ull;
  for (int i = 0; i < n; ++i) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    x[i] = static_cast<double>(s >> 11) / 9007199254740992.0 - 0.5;
  }
  double xm = std::sqrt(quad(m, x));
  if (!(xm > 0.0)) throw SingularSystemError("generalized_eig_max: M is not positive definite");
  for (double& v : x) v /= xm;
  double lambda = quad(k, x);
  for (int it = 0; it < max_iter; ++it) {
    std::vector<double> y = mf.solve(k.apply(x));
    double ym2 = quad(m, y);
    if (!(ym2 > 1e-300)) return 0.0;   // K x vanished: spectrum is {0}
    double ym = std::sqrt(ym2);
    for (int i = 0; i < n; ++i) x[i] = y[i] / ym;
    double next = quad(k, x);
    double denom = std::max({std::abs(next), std::abs(lambda), 1e-300});
    if (std::abs(next - lambda) <= tol * denom) return next;
    lambda = next;
  }
  throw ConvergenceError("generalized_eig_max: power iteration did not converge");
}

}  // namespace fsi
