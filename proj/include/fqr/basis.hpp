#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>

#include "fqr/errors.hpp"

namespace fqr {

enum class BasisKind { fourier_cosine };

/// Frequency indexing of the cosine modes. `standard` assigns mode k the
/// frequency (k-1)*pi/T, so mode 2 is the fundamental half-cosine.
/// `literal_paper` assigns k*pi/T for k >= 2, skipping the fundamental.
/// Both systems are orthonormal on [0, T].
enum class BasisIndexing { standard, literal_paper };

inline std::string to_string(BasisIndexing ix) {
    return ix == BasisIndexing::standard ? "standard" : "literal-paper";
}

inline BasisIndexing indexing_from_string(const std::string& s) {
    if (s == "standard") return BasisIndexing::standard;
    if (s == "literal-paper") return BasisIndexing::literal_paper;
    throw DataError("unknown basis indexing '" + s + "' (expected standard|literal-paper)");
}

/// Truncated Fourier cosine system on [0, T]: the constant mode 1/sqrt(T)
/// plus K-1 cosine modes sqrt(2/T)*cos(w_k t), orthonormal in L2([0, T]).
struct BasisSpec {
    BasisKind kind = BasisKind::fourier_cosine;
    int size = 20;                 // K, number of basis functions
    double domain_length = 324.0;  // T, in days
    BasisIndexing indexing = BasisIndexing::standard;

    /// Angular frequency of mode k (1-based). Mode 1 is the constant.
    double omega(int k) const {
        if (k <= 1) return 0.0;
        const double mult = indexing == BasisIndexing::standard ? k - 1 : k;
        return mult * std::numbers::pi / domain_length;
    }

    void validate() const {
        if (size < 1) throw DataError("basis size must be >= 1");
        if (!(domain_length > 0.0)) throw DataError("basis domain length must be positive");
    }

    friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

/// Evaluates all K basis functions on a grid of times. Returns an
/// |grid| x K matrix with one basis function per column.
inline Eigen::MatrixXd basis_eval(const BasisSpec& spec, const Eigen::VectorXd& grid) {
    spec.validate();
    const double T = spec.domain_length;
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0 && grid[i] <= T)) {
            throw DataError("evaluation time " + std::to_string(grid[i]) +
                            " outside basis domain [0, " + std::to_string(T) + "]");
        }
    }
    Eigen::MatrixXd phi(grid.size(), spec.size);
    phi.col(0).setConstant(1.0 / std::sqrt(T));
    const double amplitude = std::sqrt(2.0 / T);
    for (int k = 2; k <= spec.size; ++k) {
        phi.col(k - 1) = amplitude * (spec.omega(k) * grid.array()).cos();
    }
    return phi;
}

/// Second-derivative roughness penalty in coefficient space. Diagonal
/// because the modes stay orthogonal under differentiation: the (k,k)
/// entry is omega_k^4, and the constant mode carries no penalty.
inline Eigen::MatrixXd penalty_matrix(const BasisSpec& spec) {
    spec.validate();
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(spec.size, spec.size);
    for (int k = 2; k <= spec.size; ++k) {
        const double w = spec.omega(k);
        p(k - 1, k - 1) = w * w * w * w;
    }
    return p;
}

/// Uniform grid of `points` times covering [0, T] with exact endpoints.
inline Eigen::VectorXd uniform_grid(double domain_length, int points) {
    if (points < 2) throw DataError("evaluation grid needs at least 2 points");
    Eigen::VectorXd g(points);
    for (int i = 0; i < points; ++i) g[i] = domain_length * i / (points - 1);
    return g;
}

}  // namespace fqr
