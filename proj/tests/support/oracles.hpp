#pragma once

// Test-only oracles. Everything here recomputes expected values from first
// principles (quadrature, explicit hat matrices, direct orthogonalization)
// so the library's computation paths are checked against independent ones.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fqr/basis.hpp"
#include "fqr/panel.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// Deterministic random numbers (fixed algorithm, independent of the standard
// library's distribution implementations)
// ---------------------------------------------------------------------------

inline double uniform(std::mt19937& rng) { return (double(rng()) + 0.5) / 4294967296.0; }

inline double normal(std::mt19937& rng) {
    const double u1 = uniform(rng);
    const double u2 = uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline Eigen::MatrixXd random_matrix(std::mt19937& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    }
    return m;
}

inline Eigen::VectorXd random_vector(std::mt19937& rng, Eigen::Index size) {
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v[i] = normal(rng);
    return v;
}

/// Random matrix with a controlled singular value range, for tests that
/// need well-conditioned inputs free of pivot ties.
inline Eigen::MatrixXd well_conditioned_matrix(std::mt19937& rng, Eigen::Index rows,
                                               Eigen::Index cols) {
    const Eigen::MatrixXd a = random_matrix(rng, rows, cols);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::Index r = svd.singularValues().size();
    Eigen::VectorXd sv(r);
    for (Eigen::Index i = 0; i < r; ++i) sv[i] = 1.0 + 9.0 * (r - i) / double(r);
    return svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Composite trapezoid rule with `points` nodes on [a, b].
template <typename F>
double trapezoid(F&& f, double a, double b, int points) {
    const double h = (b - a) / (points - 1);
    double sum = 0.5 * (f(a) + f(b));
    for (int i = 1; i + 1 < points; ++i) sum += f(a + i * h);
    return sum * h;
}

/// Basis function k (1-based) evaluated from its definition.
inline double basis_function(const fqr::BasisSpec& spec, int k, double t) {
    if (k == 1) return 1.0 / std::sqrt(spec.domain_length);
    return std::sqrt(2.0 / spec.domain_length) * std::cos(spec.omega(k) * t);
}

/// Second derivative of basis function k, from the definition.
inline double basis_function_dd(const fqr::BasisSpec& spec, int k, double t) {
    if (k == 1) return 0.0;
    const double w = spec.omega(k);
    return -w * w * std::sqrt(2.0 / spec.domain_length) * std::cos(w * t);
}

/// Curve value sum_k c_k g_k(t) computed directly from the definition.
inline double eval_curve(const fqr::BasisSpec& spec, const Eigen::VectorXd& coeffs, double t) {
    double v = 0.0;
    for (int k = 1; k <= spec.size; ++k) v += coeffs[k - 1] * basis_function(spec, k, t);
    return v;
}

// ---------------------------------------------------------------------------
// Explicit hat matrix (smoothing oracle)
// ---------------------------------------------------------------------------

/// H = Phi (Phi'Phi + lambda P)^-1 Phi' formed explicitly, inverse and all.
inline Eigen::MatrixXd explicit_hat(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& penalty,
                                    double lambda) {
    const Eigen::MatrixXd m = phi.transpose() * phi + lambda * penalty;
    return phi * m.inverse() * phi.transpose();
}

/// Total GCV computed entirely through the explicit hat matrix.
inline double gcv_via_hat(const Eigen::MatrixXd& values, const Eigen::MatrixXd& phi,
                          const Eigen::MatrixXd& penalty, double lambda) {
    const Eigen::MatrixXd hat = explicit_hat(phi, penalty, lambda);
    const double df = hat.trace();
    const Eigen::Index m = values.cols();
    const Eigen::MatrixXd fitted = hat * values.transpose();  // m x n
    double total = 0.0;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        const double sse = (values.row(i).transpose() - fitted.col(i)).squaredNorm();
        const double denom = 1.0 - df / double(m);
        total += (sse / double(m)) / (denom * denom);
    }
    return total;
}

// ---------------------------------------------------------------------------
// Direct Gram-Schmidt orthogonalization with pivoting (decomposition oracle)
// ---------------------------------------------------------------------------

struct GramSchmidtQr {
    std::vector<int> permutation;
    Eigen::MatrixXd q;  // K x q
    Eigen::MatrixXd r;  // q x n
};

/// Sequentially removes projections onto already-accepted directions and
/// pivots on the largest residual norm (ties to the lowest original index).
/// The diagonal is the residual norm, hence nonnegative by construction.
inline GramSchmidtQr gram_schmidt_qrp(const Eigen::MatrixXd& c) {
    const Eigen::Index K = c.rows();
    const Eigen::Index n = c.cols();
    const Eigen::Index q = std::min(K, n);

    GramSchmidtQr out;
    out.permutation.resize(std::size_t(n));
    for (Eigen::Index j = 0; j < n; ++j) out.permutation[std::size_t(j)] = int(j);
    Eigen::MatrixXd u = c;  // residual columns
    out.q = Eigen::MatrixXd::Zero(K, q);
    out.r = Eigen::MatrixXd::Zero(q, n);

    for (Eigen::Index s = 0; s < q; ++s) {
        Eigen::Index pivot = s;
        double best = -1.0;
        for (Eigen::Index j = s; j < n; ++j) {
            const double norm2 = u.col(j).squaredNorm();
            if (norm2 > best ||
                (norm2 == best &&
                 out.permutation[std::size_t(j)] < out.permutation[std::size_t(pivot)])) {
                best = norm2;
                pivot = j;
            }
        }
        if (pivot != s) {
            u.col(pivot).swap(u.col(s));
            std::swap(out.permutation[std::size_t(pivot)], out.permutation[std::size_t(s)]);
        }
        const double norm = u.col(s).norm();
        if (norm == 0.0) break;
        out.q.col(s) = u.col(s) / norm;
        out.r(s, s) = norm;
        for (Eigen::Index j = s + 1; j < n; ++j) {
            out.r(s, j) = out.q.col(s).dot(u.col(j));
            u.col(j) -= out.r(s, j) * out.q.col(s);
        }
    }
    return out;
}

/// Orthonormal basis of the span of `cols`, via plain (unpivoted) QR on an
/// independent path, for brute-force residual-norm checks.
inline Eigen::MatrixXd orthonormal_span(const Eigen::MatrixXd& cols) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(cols);
    return Eigen::MatrixXd(qr.householderQ()) .leftCols(cols.cols());
}

}  // namespace oracle
