#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fqr/decompose.hpp"
#include "fqr/errors.hpp"
#include "fqr/panel.hpp"
#include "fqr/smoothing.hpp"

namespace fqr {

/// Fits the n-k non-selected curves against the k selected ones by back
/// substitution of the upper triangular system R11 X = R12, column by
/// column. X is expressed in the coordinates of the decomposed matrix.
inline Eigen::MatrixXd fit_remaining(const PivotedQr& qr, int k) {
    const Eigen::Index n = qr.curve_count();
    if (k < 1 || k > n) throw DataError("k must be in [1, n]");
    if (k == n) return Eigen::MatrixXd(n, 0);  // nothing remains

    const Eigen::Index q = qr.rank_bound();
    if (k > q) {
        throw NumericalError("R11 is singular at k = " + std::to_string(k) +
                             ": only " + std::to_string(q) + " diagonal entries exist");
    }
    for (Eigen::Index j = 0; j < k; ++j) {
        if (qr.r(j, j) <= 0.0) {
            throw NumericalError("R11 is singular: zero diagonal at position " + std::to_string(j));
        }
    }

    Eigen::MatrixXd x(k, n - k);
    for (Eigen::Index col = 0; col < n - k; ++col) {
        for (Eigen::Index row = k - 1; row >= 0; --row) {
            double acc = qr.r(row, k + col);
            for (Eigen::Index t = row + 1; t < k; ++t) acc -= qr.r(row, t) * x(t, col);
            x(row, col) = acc / qr.r(row, row);
        }
    }
    return x;
}

/// Maps a fit computed on the decomposed (possibly column-normalized)
/// matrix back to a fit between the actual curves. Identity when the
/// decomposition was not normalized.
inline Eigen::MatrixXd descale_fit(const PivotedQr& qr, const Eigen::MatrixXd& x, int k) {
    if (!qr.normalized) return x;
    Eigen::MatrixXd scaled = x;
    for (Eigen::Index i = 0; i < scaled.rows(); ++i) scaled.row(i) /= qr.column_scales[i];
    for (Eigen::Index j = 0; j < scaled.cols(); ++j) scaled.col(j) *= qr.column_scales[k + j];
    return scaled;
}

struct ResidualLog {
    double absolute = 0.0;  // ||R22||_F
    double relative = 0.0;  // ||R22||_F / ||R||_F
};

/// Frobenius norm of the trailing R block: the log-domain error of
/// representing everything by the first k pivots. k = 0 means the whole
/// matrix is the residual.
inline ResidualLog residual_log(const PivotedQr& qr, int k) {
    const Eigen::Index n = qr.curve_count();
    const Eigen::Index q = qr.rank_bound();
    if (k < 0 || k > n) throw DataError("k must be in [0, n]");

    ResidualLog out;
    const double total = qr.r.norm();
    if (k >= q || k >= n) {
        out.absolute = 0.0;
    } else {
        out.absolute = qr.r.block(k, k, q - k, n - k).norm();
    }
    out.relative = total > 0.0 ? out.absolute / total : 0.0;
    if (k == 0) out.relative = total > 0.0 ? 1.0 : 0.0;
    return out;
}

/// Rebuilds all n curves from the k selected ones: selected curves pass
/// through unchanged, each remaining curve becomes the fitted combination
/// of the selected coefficient columns. Output is in original label order.
inline FunctionalMatrix reconstruct(const SmoothFit& fit, const PivotedQr& qr,
                                    const Eigen::MatrixXd& x, int k) {
    const Eigen::Index n = qr.curve_count();
    if (k < 1 || k > n) throw DataError("k must be in [1, n]");
    if (x.rows() != k || x.cols() != n - k) throw DataError("fit matrix has wrong dimensions");

    const Eigen::MatrixXd x_curves = descale_fit(qr, x, k);
    Eigen::MatrixXd selected(fit.coefficients.rows(), k);
    for (Eigen::Index j = 0; j < k; ++j) {
        selected.col(j) = fit.coefficients.col(qr.permutation[std::size_t(j)]);
    }

    FunctionalMatrix out;
    out.basis = fit.basis;
    out.labels = fit.labels;
    out.coefficients.resize(fit.coefficients.rows(), n);
    for (Eigen::Index j = 0; j < k; ++j) {
        out.coefficients.col(qr.permutation[std::size_t(j)]) = selected.col(j);
    }
    for (Eigen::Index j = k; j < n; ++j) {
        out.coefficients.col(qr.permutation[std::size_t(j)]) = selected * x_curves.col(j - k);
    }
    return out;
}

/// Relative RMS error between original and reconstructed curves over the
/// non-selected units, measured in the mortality domain on the given grid.
inline double residual_mortality(const SmoothFit& fit, const PivotedQr& qr,
                                 const Eigen::MatrixXd& x, int k, double delta,
                                 const Eigen::VectorXd& grid) {
    const Eigen::Index n = qr.curve_count();
    if (k < 1 || k > n) throw DataError("k must be in [1, n]");
    if (k == n) return 0.0;

    const FunctionalMatrix rebuilt = reconstruct(fit, qr, x, k);
    const Eigen::MatrixXd original = inverse_map(evaluate_curves(fit, grid), delta);
    const Eigen::MatrixXd approx =
        inverse_map((basis_eval(rebuilt.basis, grid) * rebuilt.coefficients).transpose(), delta);

    double num = 0.0, denom = 0.0;
    for (Eigen::Index j = k; j < n; ++j) {
        const Eigen::Index unit = qr.permutation[std::size_t(j)];
        num += (original.row(unit) - approx.row(unit)).squaredNorm();
        denom += original.row(unit).squaredNorm();
    }
    if (denom == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num) / std::sqrt(denom);
}

/// Picks k at the largest gap of the decreasing value sequence: the j
/// maximizing values[j] / values[j+1], with the denominator floored at
/// machine epsilon times the leading value. Ties resolve to the smaller k.
inline int suggest_k(const Eigen::VectorXd& values) {
    const Eigen::Index n = values.size();
    if (n < 2) throw DataError("gap suggestion needs at least 2 values");
    if (!(values.maxCoeff() > 0.0)) throw DataError("gap suggestion needs a nonzero value sequence");

    const double floor_value = std::numeric_limits<double>::epsilon() * values[0];
    int best_k = 1;
    double best_ratio = -1.0;
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const double ratio = values[j] / std::max(values[j + 1], floor_value);
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best_k = int(j) + 1;
        }
    }
    return best_k;
}

struct InfluenceRow {
    std::string unit;
    Eigen::VectorXd coefficients;   // raw fit coefficients on the selected curves
    Eigen::VectorXd signed_squares; // sign(x) * x^2
};

/// Influence of each selected curve on every unit. Selected units carry the
/// identity pattern; remaining units carry their fit coefficients and the
/// signed squares that display magnitude and polarity together. Rows are in
/// pivot order (selected first).
inline std::vector<InfluenceRow> influence_table(const Eigen::MatrixXd& x_curves,
                                                 const std::vector<std::string>& selected_labels,
                                                 const std::vector<std::string>& remaining_labels) {
    const Eigen::Index k = Eigen::Index(selected_labels.size());
    if (x_curves.rows() != k || x_curves.cols() != Eigen::Index(remaining_labels.size())) {
        throw DataError("influence table dimensions are inconsistent");
    }

    std::vector<InfluenceRow> rows;
    rows.reserve(selected_labels.size() + remaining_labels.size());
    for (Eigen::Index i = 0; i < k; ++i) {
        InfluenceRow row;
        row.unit = selected_labels[std::size_t(i)];
        row.coefficients = Eigen::VectorXd::Zero(k);
        row.coefficients[i] = 1.0;
        row.signed_squares = row.coefficients;
        rows.push_back(std::move(row));
    }
    for (Eigen::Index j = 0; j < x_curves.cols(); ++j) {
        InfluenceRow row;
        row.unit = remaining_labels[std::size_t(j)];
        row.coefficients = x_curves.col(j);
        row.signed_squares =
            row.coefficients.unaryExpr([](double v) { return v >= 0.0 ? v * v : -(v * v); });
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Population-weighted national aggregate of per-million curves, equal to
/// total deaths over total population scaled to per-million. Input rows are
/// mortality-domain curves on a common grid.
inline Eigen::VectorXd national_curve(const Eigen::MatrixXd& mortality_values,
                                      const std::vector<long long>& populations) {
    const Eigen::Index n = mortality_values.rows();
    if (Eigen::Index(populations.size()) != n) {
        throw DataError("population count does not match curve count");
    }
    double total = 0.0;
    Eigen::VectorXd curve = Eigen::VectorXd::Zero(mortality_values.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        if (populations[std::size_t(i)] <= 0) {
            throw DataError("missing or nonpositive population for curve " + std::to_string(i));
        }
        const double w = double(populations[std::size_t(i)]);
        curve += w * mortality_values.row(i).transpose();
        total += w;
    }
    return curve / total;
}

// ---------------------------------------------------------------------------
// Aggregated report
// ---------------------------------------------------------------------------

struct SelectionReport {
    int k = 0;
    bool k_was_auto = true;
    int suggested_k = 0;
    std::vector<std::string> selected_labels;
    Eigen::MatrixXd fit_coefficients;        // X solving R11 X = R12
    Eigen::MatrixXd curve_fit_coefficients;  // X mapped back to curve space
    Eigen::VectorXd r_values;                // length n, zero padded
    ResidualLog residual_log;
    double residual_mortality = 0.0;
    std::vector<InfluenceRow> influence;
};

/// Runs the reduction at the requested k (0 = auto via the gap rule) and
/// assembles every per-k quantity the reports need.
inline SelectionReport build_selection_report(const SmoothFit& fit, const PivotedQr& qr,
                                              int requested_k, double delta,
                                              const Eigen::VectorXd& grid) {
    const Eigen::Index n = qr.curve_count();
    SelectionReport report;
    report.r_values = r_values(qr);
    // The gap rule runs on the true diagonal only; the zero padding of
    // r_values past min(K, n) is structural, not a dependence cliff.
    report.suggested_k = qr.rank_bound() < 2 ? 1 : suggest_k(qr.r.diagonal());
    report.k_was_auto = requested_k <= 0;
    report.k = report.k_was_auto ? report.suggested_k : requested_k;
    if (report.k < 1 || report.k > n) {
        throw DataError("requested k = " + std::to_string(report.k) + " outside [1, " +
                        std::to_string(n) + "]");
    }

    report.fit_coefficients = fit_remaining(qr, report.k);
    report.curve_fit_coefficients = descale_fit(qr, report.fit_coefficients, report.k);
    report.residual_log = residual_log(qr, report.k);
    report.residual_mortality =
        residual_mortality(fit, qr, report.fit_coefficients, report.k, delta, grid);

    report.selected_labels.assign(qr.labels.begin(), qr.labels.begin() + report.k);
    const std::vector<std::string> remaining(qr.labels.begin() + report.k, qr.labels.end());
    report.influence =
        influence_table(report.curve_fit_coefficients, report.selected_labels, remaining);
    return report;
}

}  // namespace fqr
