#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sqsolve/problems.hpp"
#include "sqsolve/solver.hpp"
#include "sqsolve/sq_matrix.hpp"

namespace sqsolve::experiment {

/// A consistent system with its reference solution and condition numbers.
struct ProblemInstance {
    std::shared_ptr<const SQMatrix> matrix;
    DenseVector b;
    DenseVector x_star;
    double kappa_sq = 0.0;
    double kappaF_sq = 0.0;
    std::optional<double> spectral_norm_sq;

    static ProblemInstance from_generated(const problems::GeneratedProblem& p);
};

/// Parameter overrides applied on top of the default parameter rule.
struct ParamOverrides {
    std::optional<std::size_t> R;
    std::optional<std::size_t> C;
    std::optional<std::size_t> K;
    std::optional<double> alpha;
};

SolverParams resolve_params(const ProblemInstance& problem, double eps, const ParamOverrides& o);

/// ||x - x*|| / ||x*|| (or ||x|| when x* = 0).
double relative_error(const DenseVector& x, const DenseVector& x_star);

// -----------------------------------------------------------------------------
// Independent trials of one solve

struct TrialOutcome {
    std::size_t trial = 0;
    double rel_error = 0.0;
    std::size_t stored = 0;  ///< entries in the sparse iterate
    std::size_t nnz = 0;
    double phi = 0.0;        ///< NaN when ||A^T y|| vanishes
};

/// Trial t uses RandomStream(seed).split(t); results do not depend on the
/// thread count.
std::vector<TrialOutcome> run_trials(const ProblemInstance& problem, const SolverParams& params,
                                     std::size_t trials, std::uint64_t seed, std::size_t threads);

/// Header `trial,rel_error,stored,nnz,phi`, doubles with 17 significant digits.
void write_trials_csv(std::ostream& out, const std::vector<TrialOutcome>& outcomes);

// -----------------------------------------------------------------------------
// Convergence curves for the three iterations

struct ExperimentConfig {
    double eps = 0.25;
    ParamOverrides overrides;
    std::size_t trials = 40;
    std::uint64_t seed = 1;
    /// Iterations to record; empty means every `record_every` steps plus K.
    std::vector<std::size_t> record_at;
    /// 0 picks max(1, K / 50).
    std::size_t record_every = 0;
    std::size_t threads = 1;
};

/// One CSV row: quantiles over trials of `metric` for `algorithm` at
/// iteration k. algorithm is alg1, rk-averaging or gd; metric is error or
/// phi (phi is reported for alg1 only, from k = 1).
struct CurveRow {
    std::string algorithm;
    std::string metric;
    std::size_t k = 0;
    double median = 0.0;
    double q05 = 0.0;
    double q95 = 0.0;
};

struct ExperimentResult {
    SolverParams params;
    std::vector<std::size_t> ks;
    std::vector<CurveRow> rows;
};

/// Runs `trials` independent copies of the row/column sampled solver and of
/// randomized Kaczmarz with averaging, plus deterministic gradient descent,
/// all with the same alpha and R, and summarizes relative error (and phi for
/// the sampled solver) at each recorded iteration by median and 5%/95%
/// quantiles.
ExperimentResult run_experiment(const ProblemInstance& problem, const ExperimentConfig& config);

/// Header `algorithm,metric,k,median,q05,q95`, doubles with 17 significant
/// digits.
void write_curves_csv(std::ostream& out, const std::vector<CurveRow>& rows);

} // namespace sqsolve::experiment
