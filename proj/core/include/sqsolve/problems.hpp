#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sqsolve/random_stream.hpp"
#include "sqsolve/sq_matrix.hpp"

namespace sqsolve::problems {

/// A consistent test system A x* = b with a prescribed singular spectrum.
struct GeneratedProblem {
    std::shared_ptr<const SQMatrix> matrix;
    DenseVector b;
    DenseVector x_star;
    std::vector<double> singular_values;  ///< descending
    double kappa_sq = 0.0;                ///< sigma_max^2 / sigma_min^2
    double kappaF_sq = 0.0;               ///< sum sigma^2 / sigma_min^2
    Eigen::MatrixXd U;                    ///< n x rank, orthonormal columns
    Eigen::MatrixXd V;                    ///< d x rank, orthonormal columns

    double spectral_norm_sq() const { return singular_values.front() * singular_values.front(); }
};

/// [1 + rho_i] with rho geometrically spaced from `lo` to `hi` inclusive,
/// returned in descending order. count = 1 gives [1 + hi].
std::vector<double> geometric_spectrum(std::size_t count, double lo, double hi);

/// A = U diag(spectrum) V^T with U, V the Q factors of standard-normal
/// matrices, x* = V w for standard-normal w, b = A x*.
///
/// Throws InvalidInput if the spectrum is empty, longer than min(n, d), or
/// has a nonpositive value.
GeneratedProblem generate(std::size_t n, std::size_t d, std::vector<double> spectrum,
                          RandomStream& rng);

/// kappa^2 and kappa_F^2 of a spectrum.
std::pair<double, double> condition_numbers(const std::vector<double>& spectrum);

/// Problem provenance written next to the Matrix Market files.
struct ProblemMeta {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t rank = 0;
    std::uint64_t seed = 0;
    double spec_lo = 0.0;
    double spec_hi = 0.0;
    double kappa_sq = 0.0;
    double kappaF_sq = 0.0;
    double spectral_norm_sq = 0.0;
    double frob_sq = 0.0;
    std::vector<double> singular_values;
};

/// `key = value` lines; singular values comma separated.
void write_meta(const std::filesystem::path& path, const ProblemMeta& meta);
ProblemMeta read_meta(const std::filesystem::path& path);

/// Writes A.mtx, b.mtx, xstar.mtx and meta.txt into `dir`.
void write_problem(const std::filesystem::path& dir, const GeneratedProblem& problem,
                   const ProblemMeta& meta);

} // namespace sqsolve::problems
