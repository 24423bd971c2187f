#include "linrmdp/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace linrmdp {

FactorizationError::FactorizationError(int minor, double pivot)
    : std::runtime_error("Cholesky factorization failed: leading minor of order " +
                         std::to_string(minor) + " is not positive definite (pivot " +
                         std::to_string(pivot) + ")"),
      minor_(minor) {}

PsdMatrix PsdMatrix::identity(int d, double scale) {
    PsdMatrix m(d);
    for (int i = 0; i < d; ++i) m.at(i, i) = scale;
    return m;
}

void PsdMatrix::add_outer(std::span<const double> phi, double w) {
    for (int i = 0; i < dim; ++i) {
        const double wi = w * phi[static_cast<std::size_t>(i)];
        if (wi == 0.0) continue;
        double* row = a.data() + static_cast<std::size_t>(i) * dim;
        for (int j = 0; j < dim; ++j) row[j] += wi * phi[static_cast<std::size_t>(j)];
    }
}

PsdMatrix gram_accumulate(int dim, std::span<const std::span<const double>> features,
                          std::span<const double> weights, double lambda) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("gram_accumulate: regularizer must be positive");
    if (features.size() != weights.size())
        throw std::invalid_argument("gram_accumulate: features/weights size mismatch");
    PsdMatrix m = PsdMatrix::identity(dim, lambda);
    for (std::size_t t = 0; t < features.size(); ++t) {
        if (static_cast<int>(features[t].size()) != dim)
            throw std::invalid_argument("gram_accumulate: feature dimension mismatch");
        if (!(weights[t] > 0.0))
            throw std::invalid_argument("gram_accumulate: weights must be strictly positive");
        m.add_outer(features[t], weights[t]);
    }
    return m;
}

CholeskyFactor::CholeskyFactor(const PsdMatrix& m)
    : dim_(m.dim), lower_(m.a) {
    const int n = dim_;
    for (int j = 0; j < n; ++j) {
        double* rowj = lower_.data() + static_cast<std::size_t>(j) * n;
        double diag = rowj[j];
        for (int k = 0; k < j; ++k) diag -= rowj[k] * rowj[k];
        if (!(diag > 0.0)) throw FactorizationError(j + 1, diag);
        const double ljj = std::sqrt(diag);
        rowj[j] = ljj;
        for (int i = j + 1; i < n; ++i) {
            double* rowi = lower_.data() + static_cast<std::size_t>(i) * n;
            double s = rowi[j];
            for (int k = 0; k < j; ++k) s -= rowi[k] * rowj[k];
            rowi[j] = s / ljj;
        }
    }
    // zero the unused upper triangle so the factor can be inspected safely
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) lower_[static_cast<std::size_t>(i) * n + j] = 0.0;
}

std::vector<double> CholeskyFactor::solve(std::span<const double> b) const {
    const int n = dim_;
    if (static_cast<int>(b.size()) != n)
        throw std::invalid_argument("CholeskyFactor::solve: size mismatch");
    std::vector<double> x(b.begin(), b.end());
    for (int i = 0; i < n; ++i) {
        const double* row = lower_.data() + static_cast<std::size_t>(i) * n;
        double s = x[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k) s -= row[k] * x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(i)] = s / row[i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k)
            s -= lower_[static_cast<std::size_t>(k) * n + i] * x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(i)] = s / lower_[static_cast<std::size_t>(i) * n + i];
    }
    return x;
}

std::vector<double> CholeskyFactor::inverse_diagonal() const {
    const int n = dim_;
    std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // forward solve L y = e_i; (M^{-1})_{ii} = sum_k y_k^2
        std::fill(y.begin(), y.end(), 0.0);
        for (int r = i; r < n; ++r) {
            const double* row = lower_.data() + static_cast<std::size_t>(r) * n;
            double s = (r == i) ? 1.0 : 0.0;
            for (int k = i; k < r; ++k) s -= row[k] * y[static_cast<std::size_t>(k)];
            y[static_cast<std::size_t>(r)] = s / row[r];
        }
        double acc = 0.0;
        for (int r = i; r < n; ++r) acc += y[static_cast<std::size_t>(r)] * y[static_cast<std::size_t>(r)];
        diag[static_cast<std::size_t>(i)] = acc;
    }
    return diag;
}

std::vector<double> psd_solve(const PsdMatrix& m, std::span<const double> b) {
    return CholeskyFactor(m).solve(b);
}

std::vector<double> inverse_diagonal(const PsdMatrix& m) {
    return CholeskyFactor(m).inverse_diagonal();
}

namespace {

double off_diagonal_norm(const std::vector<double>& a, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = a[static_cast<std::size_t>(i) * n + j];
            s += 2.0 * v * v;
        }
    return std::sqrt(s);
}

} // namespace

SymEigen sym_eigen(const PsdMatrix& m) {
    const int n = m.dim;
    std::vector<double> a = m.a;
    std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;

    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) scale += a[static_cast<std::size_t>(i) * n + j] * a[static_cast<std::size_t>(i) * n + j];
    scale = std::sqrt(scale);
    const double tol = (scale > 0.0 ? scale : 1.0) * 1e-15;

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        if (off_diagonal_norm(a, n) <= tol) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[static_cast<std::size_t>(p) * n + q];
                if (std::abs(apq) <= tol / (n * n + 1.0)) continue;
                const double app = a[static_cast<std::size_t>(p) * n + p];
                const double aqq = a[static_cast<std::size_t>(q) * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a[static_cast<std::size_t>(k) * n + p];
                    const double akq = a[static_cast<std::size_t>(k) * n + q];
                    a[static_cast<std::size_t>(k) * n + p] = c * akp - s * akq;
                    a[static_cast<std::size_t>(k) * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[static_cast<std::size_t>(p) * n + k];
                    const double aqk = a[static_cast<std::size_t>(q) * n + k];
                    a[static_cast<std::size_t>(p) * n + k] = c * apk - s * aqk;
                    a[static_cast<std::size_t>(q) * n + k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v[static_cast<std::size_t>(k) * n + p];
                    const double vkq = v[static_cast<std::size_t>(k) * n + q];
                    v[static_cast<std::size_t>(k) * n + p] = c * vkp - s * vkq;
                    v[static_cast<std::size_t>(k) * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        return a[static_cast<std::size_t>(x) * n + x] < a[static_cast<std::size_t>(y) * n + y];
    });

    SymEigen out;
    out.values.resize(static_cast<std::size_t>(n));
    out.vectors.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
    for (int k = 0; k < n; ++k) {
        const int src = order[static_cast<std::size_t>(k)];
        out.values[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(src) * n + src];
        for (int i = 0; i < n; ++i)
            out.vectors[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
                v[static_cast<std::size_t>(i) * n + src];
    }
    return out;
}

std::pair<double, double> sym_eigen_extremes(const PsdMatrix& m) {
    if (m.dim == 0) return {0.0, 0.0};
    const SymEigen e = sym_eigen(m);
    return {e.values.front(), e.values.back()};
}

} // namespace linrmdp
