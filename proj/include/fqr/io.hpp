#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fqr/decompose.hpp"
#include "fqr/errors.hpp"
#include "fqr/panel.hpp"
#include "fqr/selection.hpp"
#include "fqr/smoothing.hpp"

namespace fqr {

using json = nlohmann::json;

/// Unit metadata carried alongside the numeric artifacts so later stages
/// can weight and back-transform curves without re-reading the raw CSV.
struct PanelMeta {
    double delta = 0.01;
    std::vector<std::string> names;
    std::vector<std::string> regions;
    std::vector<long long> populations;
};

struct FitArtifact {
    SmoothFit fit;
    PanelMeta meta;
};

namespace detail {

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline json matrix_to_json(const Eigen::MatrixXd& m) {
    json out;
    out["rows"] = m.rows();
    out["cols"] = m.cols();
    json flat = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
    }
    out["row_major"] = std::move(flat);
    return out;
}

inline Eigen::MatrixXd matrix_from_json(const json& j) {
    const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
    const auto& flat = j.at("row_major");
    if (Eigen::Index(flat.size()) != rows * cols) throw DataError("matrix payload size mismatch");
    Eigen::MatrixXd m(rows, cols);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = flat[std::size_t(idx++)].get<double>();
    }
    return m;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

inline Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[Eigen::Index(i)] = j[i].get<double>();
    return v;
}

inline json basis_to_json(const BasisSpec& spec) {
    return json{{"kind", "fourier-cosine"},
                {"K", spec.size},
                {"T", spec.domain_length},
                {"indexing", to_string(spec.indexing)}};
}

inline BasisSpec basis_from_json(const json& j) {
    if (j.at("kind").get<std::string>() != "fourier-cosine") {
        throw DataError("unsupported basis kind '" + j.at("kind").get<std::string>() + "'");
    }
    BasisSpec spec;
    spec.size = j.at("K").get<int>();
    spec.domain_length = j.at("T").get<double>();
    spec.indexing = indexing_from_string(j.at("indexing").get<std::string>());
    return spec;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Panel artifact
// ---------------------------------------------------------------------------

inline json panel_to_json(const LogPanel& panel, int repaired_windows, const std::string& source) {
    json j;
    j["delta"] = panel.delta;
    j["labels"] = panel.labels;
    j["day_grid"] = detail::vector_to_json(panel.day_grid());
    json values = json::array();
    for (Eigen::Index i = 0; i < panel.values.rows(); ++i) {
        values.push_back(detail::vector_to_json(panel.values.row(i).transpose()));
    }
    j["values"] = std::move(values);
    j["metadata"] = json{{"names", panel.names},
                         {"regions", panel.regions},
                         {"populations", panel.populations},
                         {"n", panel.values.rows()},
                         {"m", panel.values.cols()},
                         {"repaired_windows", repaired_windows},
                         {"source", source}};
    return j;
}

inline LogPanel panel_from_json(const json& j) {
    LogPanel panel;
    panel.delta = j.at("delta").get<double>();
    panel.labels = j.at("labels").get<std::vector<std::string>>();
    const auto& meta = j.at("metadata");
    panel.names = meta.at("names").get<std::vector<std::string>>();
    panel.regions = meta.at("regions").get<std::vector<std::string>>();
    panel.populations = meta.at("populations").get<std::vector<long long>>();

    const auto& values = j.at("values");
    const Eigen::Index n = Eigen::Index(values.size());
    if (n == 0) throw DataError("panel artifact has no rows");
    const Eigen::Index m = Eigen::Index(values[0].size());
    panel.values.resize(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (Eigen::Index(values[std::size_t(i)].size()) != m) {
            throw DataError("panel artifact rows have unequal lengths");
        }
        panel.values.row(i) = detail::vector_from_json(values[std::size_t(i)]).transpose();
    }
    if (panel.labels.size() != std::size_t(n)) throw DataError("panel artifact label count mismatch");
    return panel;
}

// ---------------------------------------------------------------------------
// Smooth-fit artifact
// ---------------------------------------------------------------------------

inline json fit_to_json(const SmoothFit& fit, const PanelMeta& meta) {
    json j;
    j["basis"] = detail::basis_to_json(fit.basis);
    j["lambda"] = fit.lambda;
    j["labels"] = fit.labels;
    json flat = json::array();
    for (Eigen::Index i = 0; i < fit.coefficients.rows(); ++i) {
        for (Eigen::Index c = 0; c < fit.coefficients.cols(); ++c) {
            flat.push_back(fit.coefficients(i, c));
        }
    }
    j["coefficients"] = std::move(flat);
    j["df"] = fit.df;
    j["sse"] = detail::vector_to_json(fit.sse);
    j["gcv"] = detail::vector_to_json(fit.gcv);
    j["metadata"] = json{{"delta", meta.delta},
                         {"names", meta.names},
                         {"regions", meta.regions},
                         {"populations", meta.populations},
                         {"samples", fit.samples},
                         {"condition", fit.condition}};
    return j;
}

inline FitArtifact fit_from_json(const json& j) {
    FitArtifact out;
    out.fit.basis = detail::basis_from_json(j.at("basis"));
    out.fit.lambda = j.at("lambda").get<double>();
    out.fit.labels = j.at("labels").get<std::vector<std::string>>();
    const Eigen::Index K = out.fit.basis.size;
    const Eigen::Index n = Eigen::Index(out.fit.labels.size());
    const auto& flat = j.at("coefficients");
    if (Eigen::Index(flat.size()) != K * n) throw DataError("fit artifact coefficient size mismatch");
    out.fit.coefficients.resize(K, n);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < K; ++i) {
        for (Eigen::Index c = 0; c < n; ++c) {
            out.fit.coefficients(i, c) = flat[std::size_t(idx++)].get<double>();
        }
    }
    out.fit.df = j.at("df").get<double>();
    out.fit.sse = detail::vector_from_json(j.at("sse"));
    out.fit.gcv = detail::vector_from_json(j.at("gcv"));
    const auto& meta = j.at("metadata");
    out.meta.delta = meta.at("delta").get<double>();
    out.meta.names = meta.at("names").get<std::vector<std::string>>();
    out.meta.regions = meta.at("regions").get<std::vector<std::string>>();
    out.meta.populations = meta.at("populations").get<std::vector<long long>>();
    out.fit.samples = meta.at("samples").get<int>();
    out.fit.condition = meta.value("condition", 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// Decomposition artifact
// ---------------------------------------------------------------------------

inline json decomposition_to_json(const PivotedQr& qr) {
    json j;
    j["permutation"] = qr.permutation;
    j["labels_in_order"] = qr.labels;
    j["r_diag"] = detail::vector_to_json(qr.r.diagonal());
    const Eigen::Index q = qr.rank_bound();
    const Eigen::Index n = qr.curve_count();
    json packed = json::array();
    for (Eigen::Index i = 0; i < q; ++i) {
        for (Eigen::Index c = i; c < n; ++c) packed.push_back(qr.r(i, c));
    }
    j["r"] = json{{"rows", q}, {"cols", n}, {"upper_row_major", std::move(packed)}};
    j["q_coefficients"] = detail::matrix_to_json(qr.q_coefficients);
    j["normalize_flag"] = qr.normalized;
    j["column_scales"] = detail::vector_to_json(qr.column_scales);
    return j;
}

inline PivotedQr decomposition_from_json(const json& j) {
    PivotedQr qr;
    qr.permutation = j.at("permutation").get<std::vector<int>>();
    qr.labels = j.at("labels_in_order").get<std::vector<std::string>>();
    qr.normalized = j.at("normalize_flag").get<bool>();
    qr.column_scales = detail::vector_from_json(j.at("column_scales"));
    const auto& rj = j.at("r");
    const Eigen::Index q = rj.at("rows").get<Eigen::Index>();
    const Eigen::Index n = rj.at("cols").get<Eigen::Index>();
    const auto& packed = rj.at("upper_row_major");
    qr.r = Eigen::MatrixXd::Zero(q, n);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < q; ++i) {
        for (Eigen::Index c = i; c < n; ++c) {
            if (idx >= Eigen::Index(packed.size())) throw DataError("triangular payload truncated");
            qr.r(i, c) = packed[std::size_t(idx++)].get<double>();
        }
    }
    qr.q_coefficients = detail::matrix_from_json(j.at("q_coefficients"));
    if (Eigen::Index(qr.permutation.size()) != n || qr.labels.size() != std::size_t(n)) {
        throw DataError("decomposition artifact dimensions are inconsistent");
    }
    return qr;
}

// ---------------------------------------------------------------------------
// Selection artifact
// ---------------------------------------------------------------------------

inline json selection_to_json(const SelectionReport& report) {
    json j;
    j["k"] = report.k;
    j["k_source"] = report.k_was_auto ? "auto" : "flag";
    j["suggested_k"] = report.suggested_k;
    j["selected_labels"] = report.selected_labels;
    j["X"] = detail::matrix_to_json(report.fit_coefficients);
    j["X_curves"] = detail::matrix_to_json(report.curve_fit_coefficients);
    j["r_values"] = detail::vector_to_json(report.r_values);
    j["residual_log"] =
        json{{"absolute", report.residual_log.absolute}, {"relative", report.residual_log.relative}};
    j["residual_mortality"] = report.residual_mortality;
    json influence = json::array();
    for (const auto& row : report.influence) {
        influence.push_back(json{{"unit", row.unit},
                                 {"coefficients", detail::vector_to_json(row.coefficients)},
                                 {"signed_squares", detail::vector_to_json(row.signed_squares)}});
    }
    j["influence"] = std::move(influence);
    return j;
}

// ---------------------------------------------------------------------------
// CSV reports
// ---------------------------------------------------------------------------

inline void write_gcv_scan_csv(std::ostream& out, const GcvScanResult& scan) {
    out << "K,lambda,total_gcv\n";
    for (const auto& p : scan.table) {
        out << p.basis_size << ',' << detail::format_number(p.lambda) << ','
            << (p.ok ? detail::format_number(p.total_gcv) : std::string("nan")) << '\n';
    }
}

inline void write_influence_csv(std::ostream& out, const std::vector<InfluenceRow>& rows,
                                const std::vector<std::string>& selected_labels) {
    out << "unit";
    for (const auto& s : selected_labels) out << ',' << s << "_coef";
    for (const auto& s : selected_labels) out << ',' << s << "_signed_sq";
    out << '\n';
    for (const auto& row : rows) {
        out << row.unit;
        for (Eigen::Index i = 0; i < row.coefficients.size(); ++i) {
            out << ',' << detail::format_number(row.coefficients[i]);
        }
        for (Eigen::Index i = 0; i < row.signed_squares.size(); ++i) {
            out << ',' << detail::format_number(row.signed_squares[i]);
        }
        out << '\n';
    }
}

struct ErrorSweepEntry {
    int k = 0;
    double rel_error_log = 0.0;
    double rel_error_mortality = 0.0;  // NaN when the fit at this k is singular
};

inline void write_error_sweep_csv(std::ostream& out, const std::vector<ErrorSweepEntry>& entries) {
    out << "k,rel_error_log,rel_error_mortality\n";
    for (const auto& e : entries) {
        out << e.k << ',' << detail::format_number(e.rel_error_log) << ','
            << (std::isnan(e.rel_error_mortality) ? std::string("nan")
                                                  : detail::format_number(e.rel_error_mortality))
            << '\n';
    }
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("malformed JSON in '" + path + "': " + e.what());
    }
}

inline void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file '" + path + "'");
    out << j.dump(2) << '\n';
}

}  // namespace fqr
