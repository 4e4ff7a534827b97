#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fqr/basis.hpp"
#include "fqr/errors.hpp"
#include "fqr/smoothing.hpp"

namespace fqr {

/// A set of n curves expressed in a shared orthonormal basis: curve i is
/// the i-th column of the K x n coefficient matrix.
struct FunctionalMatrix {
    BasisSpec basis;
    Eigen::MatrixXd coefficients;  // K x n
    std::vector<std::string> labels;

    void validate() const {
        if (labels.size() != std::size_t(coefficients.cols())) {
            throw DataError("label count does not match coefficient columns");
        }
    }
};

inline FunctionalMatrix as_functional(const SmoothFit& fit) {
    FunctionalMatrix fm{fit.basis, fit.coefficients, fit.labels};
    fm.validate();
    return fm;
}

/// L2 inner product of two curves over the basis domain. Because the basis
/// is orthonormal this is exactly the coefficient dot product.
inline double inner_product(const BasisSpec& basis_a, const Eigen::VectorXd& ca,
                            const BasisSpec& basis_b, const Eigen::VectorXd& cb) {
    if (!(basis_a == basis_b)) throw DataError("inner product requires matching basis specs");
    if (ca.size() != cb.size() || ca.size() != basis_a.size) {
        throw DataError("coefficient length does not match basis size");
    }
    return ca.dot(cb);
}

/// Column-pivoted QR factorization of the coefficient matrix: C P = B R with
/// B orthonormal (K x q, q = min(K, n)) and R upper trapezoidal (q x n) with
/// nonnegative, nonincreasing diagonal. The permutation lists original
/// column indices in pivot order.
struct PivotedQr {
    std::vector<int> permutation;    // size n, original indices in pivot order
    Eigen::MatrixXd q_coefficients;  // K x q, orthonormal columns
    Eigen::MatrixXd r;               // q x n
    std::vector<std::string> labels;  // permuted curve identifiers
    bool normalized = false;
    Eigen::VectorXd column_scales;   // original column norms in pivot order (ones if raw)

    Eigen::Index curve_count() const { return Eigen::Index(permutation.size()); }
    Eigen::Index rank_bound() const { return r.rows(); }  // q = min(K, n)
};

/// Householder QR with column pivoting. At each step the pivot is the
/// not-yet-selected column with the largest norm orthogonal to the span of
/// the previous pivots; exact ties resolve to the lowest original index.
/// With `normalize`, columns are scaled to unit norm before pivoting so the
/// ordering depends on curve shape only.
inline PivotedQr qrp(const FunctionalMatrix& fm, bool normalize = false) {
    fm.validate();
    const Eigen::Index K = fm.coefficients.rows();
    const Eigen::Index n = fm.coefficients.cols();
    if (n < 1 || K < 1) throw DataError("decomposition requires at least one curve");
    const Eigen::Index q = std::min(K, n);

    Eigen::MatrixXd a = fm.coefficients;
    Eigen::VectorXd scales = Eigen::VectorXd::Ones(n);
    if (normalize) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double norm = a.col(j).norm();
            if (norm == 0.0) {
                throw DataError("cannot normalize zero-norm curve '" + fm.labels[std::size_t(j)] +
                                "'");
            }
            a.col(j) /= norm;
            scales[j] = norm;
        }
    }

    std::vector<int> perm(std::size_t(n));
    for (Eigen::Index j = 0; j < n; ++j) perm[std::size_t(j)] = int(j);

    Eigen::MatrixXd reflectors = Eigen::MatrixXd::Zero(K, q);
    Eigen::VectorXd betas = Eigen::VectorXd::Zero(q);

    for (Eigen::Index s = 0; s < q; ++s) {
        // Trailing norms are recomputed from the updated block each step;
        // the sizes here are small enough that downdating buys nothing.
        Eigen::Index pivot = s;
        double best = -1.0;
        for (Eigen::Index j = s; j < n; ++j) {
            const double norm2 = a.col(j).tail(K - s).squaredNorm();
            if (norm2 > best || (norm2 == best && perm[std::size_t(j)] < perm[std::size_t(pivot)])) {
                best = norm2;
                pivot = j;
            }
        }
        if (pivot != s) {
            a.col(pivot).swap(a.col(s));
            std::swap(perm[std::size_t(pivot)], perm[std::size_t(s)]);
            std::swap(scales[pivot], scales[s]);
        }
        if (best == 0.0) break;  // remaining block is exactly zero

        Eigen::VectorXd v = a.col(s).tail(K - s);
        const double sigma = v.norm();
        if (sigma == 0.0) continue;
        const double alpha = v[0] >= 0.0 ? -sigma : sigma;
        v[0] -= alpha;
        const double vnorm2 = v.squaredNorm();
        if (vnorm2 == 0.0) continue;
        const double beta = 2.0 / vnorm2;

        a.block(s, s, K - s, n - s) -=
            (beta * v) * (v.transpose() * a.block(s, s, K - s, n - s));
        a(s, s) = alpha;  // eliminate rounding in the pivot column
        a.col(s).tail(K - s - 1).setZero();

        reflectors.col(s).tail(K - s) = v;
        betas[s] = beta;
    }

    PivotedQr out;
    out.permutation = std::move(perm);
    out.normalized = normalize;
    out.column_scales = scales;
    out.r = a.topRows(q);
    for (Eigen::Index s = 0; s + 1 < q; ++s) out.r.col(s).tail(q - s - 1).setZero();

    // Accumulate the thin orthonormal factor: B = H_0 ... H_{q-1} * [e_0..e_{q-1}].
    out.q_coefficients = Eigen::MatrixXd::Identity(K, q);
    for (Eigen::Index s = q - 1; s >= 0; --s) {
        if (betas[s] == 0.0) continue;
        const auto v = reflectors.col(s).tail(K - s);
        auto block = out.q_coefficients.block(s, 0, K - s, q);
        block -= (betas[s] * v) * (v.transpose() * block);
    }

    // Sign convention: flip reflector signs so every diagonal entry is >= 0.
    for (Eigen::Index s = 0; s < q; ++s) {
        if (out.r(s, s) < 0.0) {
            out.r.row(s).tail(n - s) *= -1.0;
            out.q_coefficients.col(s) *= -1.0;
        }
    }

    out.labels.reserve(std::size_t(n));
    for (int idx : out.permutation) out.labels.push_back(fm.labels[std::size_t(idx)]);
    return out;
}

/// Diagonal of R padded with zeros to length n: a nonincreasing sequence
/// measuring each pivot's independent contribution.
inline Eigen::VectorXd r_values(const PivotedQr& qr) {
    Eigen::VectorXd values = Eigen::VectorXd::Zero(qr.curve_count());
    values.head(qr.rank_bound()) = qr.r.diagonal();
    return values;
}

struct QrDiagnostics {
    double factorization_residual = 0.0;   // ||CP - BR||_F / ||C||_F
    double orthonormality_defect = 0.0;    // ||B'B - I||_max
    bool diagonal_nonincreasing = false;
};

/// Checks the factorization against the matrix it was computed from. When
/// the decomposition was normalized, the comparison rescales the input
/// columns the same way.
inline QrDiagnostics verify(const PivotedQr& qr, const FunctionalMatrix& fm) {
    fm.validate();
    const Eigen::Index n = fm.coefficients.cols();
    if (n != qr.curve_count() || fm.coefficients.rows() != qr.q_coefficients.rows()) {
        throw DataError("decomposition dimensions do not match the functional matrix");
    }

    Eigen::MatrixXd permuted(fm.coefficients.rows(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
        permuted.col(j) = fm.coefficients.col(qr.permutation[std::size_t(j)]);
        if (qr.normalized) permuted.col(j) /= qr.column_scales[j];
    }

    QrDiagnostics diag;
    const double denom = permuted.norm();
    diag.factorization_residual =
        denom > 0.0 ? (permuted - qr.q_coefficients * qr.r).norm() / denom
                    : (qr.q_coefficients * qr.r).norm();
    diag.orthonormality_defect =
        (qr.q_coefficients.transpose() * qr.q_coefficients -
         Eigen::MatrixXd::Identity(qr.rank_bound(), qr.rank_bound()))
            .cwiseAbs()
            .maxCoeff();
    diag.diagonal_nonincreasing = true;
    const auto d = qr.r.diagonal();
    for (Eigen::Index k = 0; k + 1 < d.size(); ++k) {
        // Rounding slack: pivoting bounds each entry by its predecessor only
        // up to a few ulps.
        if (d[k + 1] > d[k] * (1.0 + 1e-12)) diag.diagonal_nonincreasing = false;
    }
    return diag;
}

}  // namespace fqr
