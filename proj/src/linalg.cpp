#include "dcg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace dcg::lin {

namespace {

void check_finite(const std::vector<double>& entries, const char* what) {
    for (double v : entries) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string(what) + ": non-finite entry");
        }
    }
}

// Element count above which the kernels bother spawning OpenMP threads.
constexpr std::size_t kParallelCutoff = std::size_t{1} << 15;

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != rows_ * cols_) {
        throw std::invalid_argument("DenseMatrix: entries length != rows * cols");
    }
    check_finite(entries_, "DenseMatrix");
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    entries_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) {
            throw std::invalid_argument("DenseMatrix: ragged initializer");
        }
        entries_.insert(entries_.end(), row.begin(), row.end());
    }
    check_finite(entries_, "DenseMatrix");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::diagonal(const std::vector<double>& diag) {
    DenseMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

DenseVector::DenseVector(std::size_t len) : entries_(len, 0.0) {}

DenseVector::DenseVector(std::vector<double> entries) : entries_(std::move(entries)) {
    check_finite(entries_, "DenseVector");
}

DenseVector::DenseVector(std::initializer_list<double> entries) : entries_(entries) {
    check_finite(entries_, "DenseVector");
}

// ---- kernels ----

DenseVector matvec(const DenseMatrix& a, const DenseVector& x) {
    if (a.cols() != x.len()) throw std::invalid_argument("matvec: dimension mismatch");
    const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(a.rows());
    const std::size_t cols = a.cols();
    const double* ap = a.entries().data();
    const double* xp = x.entries().data();
    DenseVector y(a.rows());
#pragma omp parallel for schedule(static) if (a.rows() * a.cols() >= kParallelCutoff)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        double s = 0.0;
        const double* row = ap + static_cast<std::size_t>(i) * cols;
        for (std::size_t j = 0; j < cols; ++j) s += row[j] * xp[j];
        y[static_cast<std::size_t>(i)] = s;
    }
    return y;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: dimension mismatch");
    const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(a.rows());
    const std::size_t inner = a.cols();
    const std::size_t cols = b.cols();
    DenseMatrix c(a.rows(), b.cols());
    const double* ap = a.entries().data();
    const double* bp = b.entries().data();
#pragma omp parallel for schedule(static) if (a.rows() * a.cols() * b.cols() >= kParallelCutoff)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        for (std::size_t k = 0; k < inner; ++k) {
            const double aik = ap[ui * inner + k];
            if (aik == 0.0) continue;
            const double* brow = bp + k * cols;
            for (std::size_t j = 0; j < cols; ++j) c(ui, j) += aik * brow[j];
        }
    }
    return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    }
    return t;
}

namespace ref {

DenseVector matvec(const DenseMatrix& a, const DenseVector& x) {
    if (a.cols() != x.len()) throw std::invalid_argument("matvec: dimension mismatch");
    DenseVector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: dimension mismatch");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

}  // namespace ref

// ---- LU factorization (shared by the solve entry points) ----

namespace {

struct LuFactors {
    std::size_t n = 0;
    std::vector<double> lu;          // packed L (unit diagonal implicit) and U
    std::vector<std::size_t> perm;   // perm[k] = original row index now at row k
};

template <bool Parallel>
LuFactors lu_factor(const DenseMatrix& m) {
    if (!m.square()) throw std::invalid_argument("direct_solve: matrix not square");
    const std::size_t n = m.rows();
    LuFactors f;
    f.n = n;
    f.lu = m.entries();
    f.perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;

    double max_entry = 0.0;
    for (double v : f.lu) max_entry = std::max(max_entry, std::abs(v));
    if (n > 0 && max_entry == 0.0) throw SingularMatrix("direct_solve: zero matrix");
    const double pivot_floor = 1e-12 * max_entry;

    double* a = f.lu.data();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot_row = k;
        double pivot_mag = std::abs(a[k * n + k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double mag = std::abs(a[i * n + k]);
            if (mag > pivot_mag) {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if (pivot_mag < pivot_floor || pivot_mag == 0.0) {
            throw SingularMatrix("direct_solve: pivot below threshold at column " +
                                 std::to_string(k));
        }
        if (pivot_row != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[pivot_row * n + j]);
            std::swap(f.perm[k], f.perm[pivot_row]);
        }
        const double pivot = a[k * n + k];
        const std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(k + 1);
        const std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (Parallel && (n - k) * n >= kParallelCutoff)
        for (std::ptrdiff_t i = lo; i < hi; ++i) {
            const std::size_t ui = static_cast<std::size_t>(i);
            const double factor = a[ui * n + k] / pivot;
            a[ui * n + k] = factor;
            if (factor == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) a[ui * n + j] -= factor * a[k * n + j];
        }
    }
    return f;
}

DenseVector lu_solve(const LuFactors& f, const DenseVector& b) {
    const std::size_t n = f.n;
    if (b.len() != n) throw std::invalid_argument("direct_solve: rhs length mismatch");
    DenseVector x(n);
    const double* a = f.lu.data();
    // Forward substitution on the permuted rhs.
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[f.perm[i]];
        for (std::size_t j = 0; j < i; ++j) s -= a[i * n + j] * x[j];
        x[i] = s;
    }
    // Back substitution.
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= a[ii * n + j] * x[j];
        x[ii] = s / a[ii * n + ii];
    }
    return x;
}

}  // namespace

DenseVector direct_solve(const DenseMatrix& a, const DenseVector& b) {
    return lu_solve(lu_factor<true>(a), b);
}

DenseMatrix direct_solve(const DenseMatrix& a, const DenseMatrix& b) {
    if (b.rows() != a.rows()) throw std::invalid_argument("direct_solve: rhs rows mismatch");
    const LuFactors f = lu_factor<true>(a);
    DenseMatrix x(b.rows(), b.cols());
    DenseVector col(b.rows());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
        const DenseVector xj = lu_solve(f, col);
        for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = xj[i];
    }
    return x;
}

namespace ref {

DenseVector direct_solve(const DenseMatrix& a, const DenseVector& b) {
    return lu_solve(lu_factor<false>(a), b);
}

}  // namespace ref

// ---- splittings ----

SplitPair matrix_split(const DenseMatrix& a, SplitScheme scheme) {
    if (!a.square()) throw std::invalid_argument("matrix_split: matrix not square");
    const std::size_t n = a.rows();
    SplitPair split;
    split.m = DenseMatrix(n, n);
    if (scheme == SplitScheme::jacobi) {
        for (std::size_t i = 0; i < n; ++i) {
            if (a(i, i) == 0.0) {
                throw ZeroDiagonal("matrix_split: zero diagonal at row " + std::to_string(i));
            }
            split.m(i, i) = a(i, i);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) split.m(i, j) = a(i, j);
        }
        lu_factor<false>(split.m);  // gauss_seidel precondition: m non-singular
    }
    split.n_mat = DenseMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) split.n_mat(i, j) = split.m(i, j) - a(i, j);
    }
    return split;
}

DenseMatrix iteration_matrix(const SplitPair& split) {
    return direct_solve(split.m, split.n_mat);
}

// ---- power iteration ----

namespace {

enum class RunOutcome { converged, annihilated, maxed_out };

struct PowerRun {
    RunOutcome outcome;
    double estimate;
};

double vec_norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

// Norm-growth power iteration for a general square matrix. Returns the
// magnitude of the dominant eigenvalue. A persistent two-cycle in the
// estimates (dominant +/- real pair) yields an exactly constant geometric
// mean of successive estimates, which is returned instead.
PowerRun power_iterate_general(const DenseMatrix& g, std::vector<double> v, double tol,
                               std::size_t max_iters) {
    const std::size_t n = g.rows();
    double nv = vec_norm2(v);
    if (nv == 0.0) return {RunOutcome::annihilated, 0.0};
    for (double& x : v) x /= nv;

    double est = -1.0, prev = -1.0, prev2 = -1.0;
    double gm = -1.0, gm_prev = -1.0;
    DenseVector vx(v);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        const DenseVector w = matvec(g, vx);
        const double nw = norm2(w);
        if (nw == 0.0) return {RunOutcome::annihilated, 0.0};
        prev2 = prev;
        prev = est;
        est = nw;
        if (prev >= 0.0 && close_rel(est, prev, tol)) return {RunOutcome::converged, est};
        if (prev >= 0.0) {
            gm_prev = gm;
            gm = std::sqrt(est * prev);
            if (gm_prev >= 0.0 && prev2 >= 0.0 && close_rel(gm, gm_prev, tol) &&
                close_rel(est, prev2, tol)) {
                return {RunOutcome::converged, gm};
            }
        }
        for (std::size_t i = 0; i < n; ++i) vx[i] = w[i] / nw;
    }
    return {RunOutcome::maxed_out, gm >= 0.0 ? gm : std::max(est, 0.0)};
}

// Rayleigh-quotient power iteration; valid when the dominant eigenvalue of
// the symmetric input is non-negative (PSD shifts and Gram matrices here).
PowerRun power_iterate_symmetric(const DenseMatrix& a, std::vector<double> v, double tol,
                                 std::size_t max_iters) {
    const std::size_t n = a.rows();
    double nv = vec_norm2(v);
    if (nv == 0.0) return {RunOutcome::annihilated, 0.0};
    for (double& x : v) x /= nv;

    double est = 0.0;
    bool have_est = false;
    DenseVector vx(v);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        const DenseVector w = matvec(a, vx);
        double rayleigh = 0.0;
        for (std::size_t i = 0; i < n; ++i) rayleigh += vx[i] * w[i];
        if (have_est && close_rel(rayleigh, est, tol)) {
            return {RunOutcome::converged, rayleigh};
        }
        est = rayleigh;
        have_est = true;
        const double nw = norm2(w);
        if (nw == 0.0) return {RunOutcome::annihilated, 0.0};
        for (std::size_t i = 0; i < n; ++i) vx[i] = w[i] / nw;
    }
    return {RunOutcome::maxed_out, est};
}

std::vector<double> ones_vector(std::size_t n) { return std::vector<double>(n, 1.0); }

std::vector<double> basis_vector(std::size_t n, std::size_t k) {
    std::vector<double> v(n, 0.0);
    v[k] = 1.0;
    return v;
}

// Runs the given power iteration from the all-ones vector and from e_1 (the
// deterministic guard against a start orthogonal to the dominant
// eigenvector), then walks the remaining basis vectors only if starts keep
// getting annihilated. Returns the largest converged estimate.
template <typename Iterate>
double dominant_estimate(const DenseMatrix& a, double tol, std::size_t max_iters,
                         Iterate iterate, const char* what) {
    const std::size_t n = a.rows();
    if (n == 0) return 0.0;

    double best_converged = -1.0;
    double best_seen = 0.0;
    bool maxed = false;
    std::size_t annihilated = 0;

    const std::size_t total_starts = n + 1;  // ones, then e_1 .. e_n
    for (std::size_t s = 0; s < total_starts; ++s) {
        std::vector<double> start = s == 0 ? ones_vector(n) : basis_vector(n, s - 1);
        const PowerRun run = iterate(a, std::move(start), tol, max_iters);
        switch (run.outcome) {
            case RunOutcome::converged:
                best_converged = std::max(best_converged, run.estimate);
                break;
            case RunOutcome::maxed_out:
                maxed = true;
                best_seen = std::max(best_seen, run.estimate);
                break;
            case RunOutcome::annihilated:
                ++annihilated;
                break;
        }
        // Two independent non-annihilated starts are enough.
        if (s >= 1 && best_converged >= 0.0) return best_converged;
        if (s >= 1 && maxed) break;
    }
    if (annihilated == total_starts) return 0.0;  // every start is mapped to zero
    if (best_converged >= 0.0) return best_converged;
    throw NoConvergence(std::string(what) + ": power iteration did not settle", best_seen);
}

}  // namespace

double spectral_radius(const DenseMatrix& g, double tol, std::size_t max_iters) {
    if (!g.square()) throw std::invalid_argument("spectral_radius: matrix not square");
    return dominant_estimate(g, tol, max_iters, power_iterate_general, "spectral_radius");
}

double convergence_rate(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw OutOfDomain("convergence_rate: rho outside (0, 1)");
    }
    return -std::log(rho);
}

namespace {

void check_symmetric(const DenseMatrix& a, const char* what) {
    if (!a.square()) throw std::invalid_argument(std::string(what) + ": matrix not square");
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = i + 1; j < a.cols(); ++j) {
            if (std::abs(a(i, j) - a(j, i)) > 1e-10) {
                throw NotSymmetric(std::string(what) + ": entry mismatch at (" +
                                   std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
    }
}

}  // namespace

EigenExtremes eigen_extremes_spd(const DenseMatrix& a, double tol) {
    check_symmetric(a, "eigen_extremes_spd");
    if (a.rows() == 0) throw std::invalid_argument("eigen_extremes_spd: empty matrix");

    const double lambda_max =
        dominant_estimate(a, tol, 100000, power_iterate_symmetric, "eigen_extremes_spd");
    if (lambda_max <= 0.0) {
        throw NotPositiveDefinite("eigen_extremes_spd: lambda_max estimate <= 0");
    }
    DenseMatrix shifted(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            shifted(i, j) = (i == j ? lambda_max : 0.0) - a(i, j);
        }
    }
    const double shift_dominant =
        dominant_estimate(shifted, tol, 100000, power_iterate_symmetric, "eigen_extremes_spd");
    const double lambda_min = lambda_max - shift_dominant;
    if (lambda_min <= 0.0) {
        throw NotPositiveDefinite("eigen_extremes_spd: lambda_min estimate <= 0");
    }
    return {lambda_min, lambda_max};
}

double spectral_norm(const DenseMatrix& a, double tol) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    const DenseMatrix gram = matmul(transpose(a), a);
    double dominant;
    try {
        dominant = dominant_estimate(gram, tol, 100000, power_iterate_symmetric, "spectral_norm");
    } catch (const NoConvergence& e) {
        throw NoConvergence("spectral_norm: power iteration did not settle",
                            std::sqrt(std::max(e.best_estimate, 0.0)));
    }
    return std::sqrt(std::max(dominant, 0.0));
}

// ---- helpers ----

double norm2(const DenseVector& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.len(); ++i) s += v[i] * v[i];
    return std::sqrt(s);
}

double norm_inf(const DenseVector& v) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.len(); ++i) m = std::max(m, std::abs(v[i]));
    return m;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("max_abs_diff: shape mismatch");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.entries().size(); ++i) {
        m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
    }
    return m;
}

double max_abs_diff(const DenseVector& a, const DenseVector& b) {
    if (a.len() != b.len()) throw std::invalid_argument("max_abs_diff: length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.len(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace dcg::lin
