#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "fqr/basis.hpp"
#include "fqr/errors.hpp"
#include "fqr/panel.hpp"

namespace fqr {

/// Penalized least-squares representation of n records as smooth curves:
/// each record i minimizes sum_j (y_ij - f_i(t_j))^2 + lambda * int (f_i'')^2.
struct SmoothFit {
    BasisSpec basis;
    Eigen::MatrixXd coefficients;  // K x n, one curve per column
    std::vector<std::string> labels;
    double lambda = 0.0;
    double df = 0.0;       // effective degrees of freedom, shared across records
    int samples = 0;       // m, number of fitting samples per record
    Eigen::VectorXd sse;   // per-record sum of squared residuals
    Eigen::VectorXd gcv;   // per-record generalized cross validation score
    double condition = 0;  // condition estimate of the penalized normal matrix
};

namespace detail {

struct NormalSystem {
    Eigen::MatrixXd gram;       // Phi' Phi
    Eigen::MatrixXd penalized;  // Phi' Phi + lambda P
    Eigen::LLT<Eigen::MatrixXd> llt;
    double condition = 0.0;
};

inline NormalSystem factor_normal_system(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& penalty,
                                         double lambda) {
    NormalSystem sys;
    sys.gram = phi.transpose() * phi;
    sys.penalized = sys.gram + lambda * penalty;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sys.penalized, Eigen::EigenvaluesOnly);
    const double emin = eig.eigenvalues().minCoeff();
    const double emax = eig.eigenvalues().maxCoeff();
    sys.condition = emin > 0.0 ? emax / emin : std::numeric_limits<double>::infinity();
    if (!(emin > 0.0) || !std::isfinite(sys.condition)) {
        throw NumericalError("penalized normal system is singular (condition estimate " +
                             std::to_string(sys.condition) + ")");
    }
    sys.llt.compute(sys.penalized);
    if (sys.llt.info() != Eigen::Success) {
        throw NumericalError("Cholesky factorization of the normal system failed (condition " +
                             std::to_string(sys.condition) + ")");
    }
    return sys;
}

}  // namespace detail

/// Effective degrees of freedom of the smoother at the given penalty:
/// trace(Phi (Phi'Phi + lambda P)^-1 Phi'), evaluated in coefficient space
/// as trace((Phi'Phi + lambda P)^-1 (Phi'Phi)).
inline double hat_df(const BasisSpec& spec, const Eigen::VectorXd& grid, double lambda) {
    if (lambda < 0.0) throw DataError("lambda must be nonnegative");
    const Eigen::MatrixXd phi = basis_eval(spec, grid);
    const auto sys = detail::factor_normal_system(phi, penalty_matrix(spec), lambda);
    return sys.llt.solve(sys.gram).trace();
}

/// Per-record generalized cross validation score in the Craven-Wahba form.
inline double gcv_score(double sse, int samples, double df) {
    if (samples <= 0) throw DataError("sample count must be positive");
    if (df >= samples) {
        throw NumericalError("degenerate GCV: df = " + std::to_string(df) + " >= m = " +
                             std::to_string(samples));
    }
    const double denom = 1.0 - df / samples;
    return (sse / samples) / (denom * denom);
}

/// Fits every record of the log panel by a penalized least-squares solve of
/// the shared symmetric positive-definite normal system.
inline SmoothFit fit_penalized(const LogPanel& panel, const BasisSpec& spec, double lambda) {
    spec.validate();
    if (lambda < 0.0) throw DataError("lambda must be nonnegative");
    const Eigen::Index n = panel.values.rows();
    const Eigen::Index m = panel.values.cols();
    if (n < 1 || m < 1) throw DataError("empty panel");
    if (spec.size > m) {
        throw DataError("basis size " + std::to_string(spec.size) + " exceeds sample count " +
                        std::to_string(m));
    }

    const Eigen::VectorXd grid = panel.day_grid();
    const Eigen::MatrixXd phi = basis_eval(spec, grid);
    const auto sys = detail::factor_normal_system(phi, penalty_matrix(spec), lambda);

    SmoothFit fit;
    fit.basis = spec;
    fit.labels = panel.labels;
    fit.lambda = lambda;
    fit.samples = int(m);
    fit.condition = sys.condition;
    fit.coefficients = sys.llt.solve(phi.transpose() * panel.values.transpose());
    fit.df = sys.llt.solve(sys.gram).trace();

    const Eigen::MatrixXd residual = panel.values.transpose() - phi * fit.coefficients;
    fit.sse = residual.colwise().squaredNorm();
    fit.gcv.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) fit.gcv[i] = gcv_score(fit.sse[i], int(m), fit.df);
    return fit;
}

/// Total GCV of a fit: the sum of the per-record scores.
inline double gcv_total(const SmoothFit& fit) { return fit.gcv.sum(); }

struct GcvScanPoint {
    int basis_size = 0;
    double lambda = 0.0;
    double total_gcv = 0.0;
    bool ok = false;
    std::string error;
};

struct GcvScanResult {
    int best_basis_size = 0;
    double best_lambda = 0.0;
    double best_total_gcv = 0.0;
    std::vector<GcvScanPoint> table;
};

/// Scans (K, lambda) over the given grids and returns the pair minimizing
/// total GCV. Failed fits are recorded and skipped; ties resolve to the
/// smaller K, then the smaller lambda.
inline GcvScanResult grid_search(const LogPanel& panel, const std::vector<int>& basis_sizes,
                                 const std::vector<double>& lambdas,
                                 BasisIndexing indexing = BasisIndexing::standard) {
    if (basis_sizes.empty() || lambdas.empty()) throw DataError("empty search grid");
    const double T = double(panel.values.cols() - 1);

    GcvScanResult result;
    bool found = false;
    for (int K : basis_sizes) {
        for (double lambda : lambdas) {
            GcvScanPoint point;
            point.basis_size = K;
            point.lambda = lambda;
            try {
                BasisSpec spec{BasisKind::fourier_cosine, K, T, indexing};
                const SmoothFit fit = fit_penalized(panel, spec, lambda);
                point.total_gcv = gcv_total(fit);
                point.ok = true;
                if (!found || point.total_gcv < result.best_total_gcv) {
                    found = true;
                    result.best_basis_size = K;
                    result.best_lambda = lambda;
                    result.best_total_gcv = point.total_gcv;
                }
            } catch (const std::exception& e) {
                point.error = e.what();
            }
            result.table.push_back(std::move(point));
        }
    }
    if (!found) throw NumericalError("all fits in the GCV grid search failed");
    return result;
}

/// Evaluates the fitted curves on a grid. Returns n x |grid|, one row per
/// record, in the log domain.
inline Eigen::MatrixXd evaluate_curves(const SmoothFit& fit, const Eigen::VectorXd& grid) {
    return (basis_eval(fit.basis, grid) * fit.coefficients).transpose();
}

}  // namespace fqr
