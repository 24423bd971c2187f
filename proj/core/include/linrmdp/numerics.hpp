#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace linrmdp {

/// Thrown when a Cholesky factorization meets a nonpositive pivot; `minor` is
/// the 1-based order of the offending leading principal minor.
class FactorizationError : public std::runtime_error {
public:
    FactorizationError(int minor, double pivot);
    int minor() const noexcept { return minor_; }

private:
    int minor_;
};

/// Dense symmetric matrix stored row-major. Callers are expected to keep it
/// positive (semi-)definite; the invariant is enforced where it matters, at
/// factorization time.
struct PsdMatrix {
    int dim = 0;
    std::vector<double> a; // dim*dim, symmetric

    PsdMatrix() = default;
    explicit PsdMatrix(int d) : dim(d), a(static_cast<std::size_t>(d) * d, 0.0) {}

    static PsdMatrix identity(int d, double scale = 1.0);

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * dim + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * dim + j]; }

    /// Adds w * phi phi^T.
    void add_outer(std::span<const double> phi, double w);
};

/// lambda * I_dim + sum_t weights[t] * features[t] features[t]^T.
/// Weights must be strictly positive and lambda > 0, so the result is
/// positive definite with smallest eigenvalue >= lambda.
PsdMatrix gram_accumulate(int dim, std::span<const std::span<const double>> features,
                          std::span<const double> weights, double lambda);

/// Cholesky factorization M = L L^T, computed once and reused for many
/// right-hand sides.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const PsdMatrix& m);

    int dim() const noexcept { return dim_; }

    std::vector<double> solve(std::span<const double> b) const;

    /// Diagonal of M^{-1}: (M^{-1})_{ii} = ||L^{-1} e_i||^2.
    std::vector<double> inverse_diagonal() const;

private:
    int dim_;
    std::vector<double> lower_; // row-major lower triangle of L
};

/// Solves M x = b for positive definite M.
std::vector<double> psd_solve(const PsdMatrix& m, std::span<const double> b);

/// Diagonal of M^{-1} for positive definite M.
std::vector<double> inverse_diagonal(const PsdMatrix& m);

/// Full eigensystem of a symmetric matrix via cyclic Jacobi sweeps.
/// Eigenvalues are ascending; eigenvectors[k] is the unit eigenvector for
/// values[k].
struct SymEigen {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;
};
SymEigen sym_eigen(const PsdMatrix& m);

/// (lambda_min, lambda_max) of a symmetric matrix.
std::pair<double, double> sym_eigen_extremes(const PsdMatrix& m);

} // namespace linrmdp
