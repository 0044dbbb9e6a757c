#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "dcg/errors.hpp"

namespace dcg::lin {

// Dense row-major matrix of doubles. Desk-scale (n up to a few hundred), so
// density is fine even where the per-agent rows are sparse.
class DenseMatrix {
  public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix diagonal(const std::vector<double>& diag);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }

    const std::vector<double>& entries() const { return entries_; }

    bool operator==(const DenseMatrix& other) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> entries_;
};

class DenseVector {
  public:
    DenseVector() = default;
    explicit DenseVector(std::size_t len);
    explicit DenseVector(std::vector<double> entries);
    DenseVector(std::initializer_list<double> entries);

    std::size_t len() const { return entries_.size(); }
    double operator[](std::size_t i) const { return entries_[i]; }
    double& operator[](std::size_t i) { return entries_[i]; }

    const std::vector<double>& entries() const { return entries_; }

    bool operator==(const DenseVector& other) const = default;

  private:
    std::vector<double> entries_;
};

// Matrix splitting a = m - n with m non-singular.
struct SplitPair {
    DenseMatrix m;
    DenseMatrix n_mat;
};

enum class SplitScheme { jacobi, gauss_seidel };

struct EigenExtremes {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

// ---- kernels ----
// The default kernels run the inner loops under OpenMP when the problem is
// large enough; each output element is produced by one serially-evaluated dot
// product, so results are bitwise identical to the serial reference below.

DenseVector matvec(const DenseMatrix& a, const DenseVector& x);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);

namespace ref {
// Serial reference kernels. Kept for the test suite (bitwise comparison
// against the OpenMP lane) and for the benchmark.
DenseVector matvec(const DenseMatrix& a, const DenseVector& x);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseVector direct_solve(const DenseMatrix& a, const DenseVector& b);
}  // namespace ref

// ---- operations ----

// Gaussian elimination with partial pivoting. Throws SingularMatrix when a
// pivot magnitude falls below 1e-12 times the largest initial entry magnitude.
DenseVector direct_solve(const DenseMatrix& a, const DenseVector& b);

// Multi-right-hand-side variant; columns of b are solved against one
// factorization.
DenseMatrix direct_solve(const DenseMatrix& a, const DenseMatrix& b);

// a = m - n. Jacobi: m = diag(a). Gauss-Seidel: m = lower triangle of a
// including the diagonal. The remainder n = m - a in both cases.
SplitPair matrix_split(const DenseMatrix& a, SplitScheme scheme);

// G = m^{-1} n.
DenseMatrix iteration_matrix(const SplitPair& split);

// Dominant eigenvalue magnitude by power iteration, deterministic all-ones
// start with basis-vector fallbacks. A stable two-cycle in the estimates
// (dominant +/- pair) is resolved by the geometric mean of successive
// estimates. Throws NoConvergence (with best estimate) otherwise.
double spectral_radius(const DenseMatrix& g, double tol = 1e-10,
                       std::size_t max_iters = 100000);

// tau = -ln(rho), only defined for 0 < rho < 1.
double convergence_rate(double rho);

// lambda_max by power iteration on a, lambda_min via the shifted matrix
// lambda_max*I - a. Requires symmetry within 1e-10 entrywise.
EigenExtremes eigen_extremes_spd(const DenseMatrix& a, double tol = 1e-10);

// ||a||_2 = sqrt(lambda_max(a^T a)); a may be rectangular.
double spectral_norm(const DenseMatrix& a, double tol = 1e-10);

// ---- small helpers ----

double norm2(const DenseVector& v);
double norm_inf(const DenseVector& v);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
double max_abs_diff(const DenseVector& a, const DenseVector& b);

}  // namespace dcg::lin
