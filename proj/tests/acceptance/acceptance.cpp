// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "sqsolve/experiment.hpp"
#include "sqsolve/problems.hpp"
#include "sqsolve/reference.hpp"
#include "sqsolve/stats.hpp"
#include "test_support.hpp"

using namespace sqsolve;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double limit_seconds;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---------------------------------------------------------------- AC-1

Outcome moment_identities()
{
    double worst = 0.0;
    std::size_t reports = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        RandomStream rng(seed);
        const auto n = 2 + rng.uniform_index(7);  // 2..8
        const auto d = 1 + rng.uniform_index(5);
        SQMatrix m(support::gaussian_matrix(n, d, rng));
        for (std::size_t R = 1; R <= 3; ++R) {
            worst = std::max(worst, reference::check_Mk_moments(m, R).max_abs_diff());
            ++reports;
        }

        const Eigen::MatrixXd X = support::gaussian_matrix(1 + rng.uniform_index(4), 4, rng);
        const Eigen::MatrixXd Y = support::gaussian_matrix(4, 1 + rng.uniform_index(4), rng);
        std::vector<double> probs(4);
        double total = 0;
        for (int i = 0; i < 4; ++i) total += probs[i] = X.col(i).norm() * Y.row(i).norm();
        for (auto& p : probs) p /= total;
        for (std::size_t S = 1; S <= 2; ++S) {
            worst = std::max(worst, reference::check_amm_variance(X, Y, probs, S).max_abs_diff());
            ++reports;
        }
    }
    return {worst <= 1e-12, "max |lhs - rhs| = " + fmt("%.3g", worst) + " over " + std::to_string(reports) + " reports"};
}

// ---------------------------------------------------------------- AC-2

Outcome unbiasedness()
{
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        RandomStream rng(1000 + seed);
        SQMatrix m(support::gaussian_matrix(4, 3, rng));
        const DenseVector b = support::gaussian_vector(4, rng);
        const SparseIterate y = support::random_sparse(4, 1 + seed % 4, rng);
        SolverParams p;
        p.alpha = 1.0 / reference::spectral_norm_sq(m);
        p.R = p.C = p.K = 1;
        const DenseVector x = dual_to_primal(m, y);
        const DenseVector expected = x - p.alpha * m.entries().transpose() * (m.entries() * x - b);
        const DenseVector mean = support::enumerated_step_mean(m, support::as_span(b), y, p);
        worst = std::max(worst, support::max_abs(mean - expected));
    }
    return {worst <= 1e-12, "max |E[x_k+1] - gd step| = " + fmt("%.3g", worst) + " over 10 problems"};
}

// ---------------------------------------------------------------- AC-3

Outcome variance_bounds()
{
    std::size_t checked = 0, violated = 0;
    double worst_mean = 0.0, tightest = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        RandomStream rng(2000 + seed);
        const auto n = 2 + rng.uniform_index(5);  // 2..6
        const auto d = 2 + rng.uniform_index(5);
        SQMatrix m(support::gaussian_matrix(n, d, rng));
        const DenseVector b = support::gaussian_vector(n, rng);
        const DenseVector x = support::gaussian_vector(d, rng);
        for (std::size_t R = 1; R <= 2; ++R)
            for (std::size_t C = 1; C <= 2; ++C) {
                const auto rep = reference::check_variance_bounds(m, b, x, R, C);
                worst_mean = std::max(worst_mean, rep.conditional_mean.max_abs_diff);
                for (const auto& bc : rep.bounds) {
                    ++checked;
                    if (!bc.holds()) ++violated;
                    if (bc.bound > 0) tightest = std::max(tightest, bc.enumerated / bc.bound);
                }
            }
    }
    return {violated == 0 && worst_mean <= 1e-12,
            std::to_string(checked - violated) + "/" + std::to_string(checked) +
                " bounds hold, largest enumerated/bound = " + fmt("%.3f", tightest) +
                ", max |E[Mx - z | M]| = " + fmt("%.3g", worst_mean)};
}

// ---------------------------------------------------------------- AC-4, 5, 9

experiment::ProblemInstance accuracy_problem()
{
    RandomStream rng(4);
    return experiment::ProblemInstance::from_generated(
        problems::generate(300, 200, problems::geometric_spectrum(50, 1e-15, 9), rng));
}

struct AccuracyRun {
    SolverParams params;
    std::vector<experiment::TrialOutcome> trials;
    std::string csv;
};

AccuracyRun accuracy_trials(std::size_t threads)
{
    const auto inst = accuracy_problem();
    AccuracyRun run;
    run.params = experiment::resolve_params(inst, 0.25, {});
    run.trials = experiment::run_trials(inst, run.params, 20, 20240601, threads);
    std::ostringstream csv;
    experiment::write_trials_csv(csv, run.trials);
    run.csv = csv.str();
    return run;
}

AccuracyRun& first_accuracy_run()
{
    static AccuracyRun run = accuracy_trials(stats::default_thread_count());
    return run;
}

Outcome accuracy()
{
    const auto& run = first_accuracy_run();
    const double eps = 0.25;
    std::vector<double> errors;
    std::size_t within = 0;
    for (const auto& t : run.trials) {
        errors.push_back(t.rel_error);
        if (t.rel_error <= 3 * eps) ++within;
    }
    const double med = stats::median(errors);
    const auto& p = run.params;
    return {med <= std::sqrt(2.0) * eps && within >= 15,
            "R=" + std::to_string(p.R) + " C=" + std::to_string(p.C) + " K=" + std::to_string(p.K) +
                "; median rel. error " + fmt("%.4f", med) + " (limit " + fmt("%.4f", std::sqrt(2.0) * eps) +
                "), " + std::to_string(within) + "/20 within 3 eps, worst " +
                fmt("%.4f", *std::max_element(errors.begin(), errors.end()))};
}

Outcome sparsity()
{
    const auto& run = first_accuracy_run();
    const std::size_t bound = run.params.K * run.params.R;
    std::size_t worst = 0;
    bool ok = true;
    for (const auto& t : run.trials) {
        worst = std::max(worst, t.stored);
        ok = ok && t.nnz <= t.stored && t.stored <= bound;
    }
    return {ok, "max stored entries " + std::to_string(worst) + " <= K*R = " + std::to_string(bound)};
}

Outcome determinism()
{
    const auto& first = first_accuracy_run();
    const auto again = accuracy_trials(stats::default_thread_count());
    const auto threaded = accuracy_trials(3);
    const bool same = first.csv == again.csv && first.csv == threaded.csv;
    return {same, same ? "trial CSV bit-identical across repeat and 3-thread run (" +
                             std::to_string(first.csv.size()) + " bytes)"
                       : "trial CSV differs between runs"};
}

// ---------------------------------------------------------------- AC-6

Outcome sampler_fidelity()
{
    RandomStream rng(6);
    auto problem = problems::generate(60, 30, problems::geometric_spectrum(12, 1e-6, 9), rng);
    const auto params = default_params(*problem.matrix, 0.25, problem.kappa_sq, problem.kappaF_sq,
                                       problem.spectral_norm_sq());
    const auto sol = solve(problem.matrix, support::as_span(problem.b), params, rng);

    const DenseVector x = sol.dense();
    std::vector<double> exact(30);
    for (int j = 0; j < 30; ++j) exact[j] = x(j) * x(j) / x.squaredNorm();

    const std::size_t draws = 50000;
    std::vector<std::size_t> counts(30, 0);
    std::size_t rounds = 0;
    RandomStream srng(66);
    for (std::size_t i = 0; i < draws; ++i) {
        const auto st = sol.sample(srng);
        ++counts[st.accepted_index];
        rounds += st.iterations_used;
    }
    const double tv = stats::total_variation(stats::frequencies(counts), exact);
    const double phi = sol.compute_phi();
    const double mean_rounds = static_cast<double>(rounds) / static_cast<double>(draws);
    return {tv <= 0.02 && mean_rounds >= phi / 2 && mean_rounds <= 2 * phi,
            "TV = " + fmt("%.4f", tv) + " (limit 0.02); mean rounds " + fmt("%.2f", mean_rounds) +
                " vs phi " + fmt("%.2f", phi) + " (nnz " + std::to_string(sol.iterate().nnz()) + ")"};
}

// ---------------------------------------------------------------- AC-7

Outcome rk_equivalence()
{
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomStream rng(7000 + seed);
        const auto p = problems::generate(40, 25, problems::geometric_spectrum(10, 1e-3, 9), rng);
        const auto& m = *p.matrix;
        SparseIterate y = support::random_sparse(40, 10, rng);
        const double alpha = 1.0 / p.spectral_norm_sq();
        std::vector<Index> rows(4);
        for (auto& r : rows) r = m.sample_row(rng);

        const DenseVector expected = reference::rk_averaging_step(m, p.b, dual_to_primal(m, y), rows, alpha);
        apply_rows_exact(m, support::as_span(p.b), y, alpha, rows);
        worst = std::max(worst, support::max_abs(dual_to_primal(m, y) - expected));
    }
    return {worst <= 1e-12, "max |solver step - rk_averaging_step| = " + fmt("%.3g", worst) + " over 20 steps"};
}

// ---------------------------------------------------------------- AC-8

struct CsvRow {
    std::string algorithm, metric;
    std::size_t k;
    double median, q05, q95;
};

std::vector<CsvRow> read_curves(const fs::path& path)
{
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> c;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) c.push_back(f);
        if (c.size() != 6) continue;
        rows.push_back({c[0], c[1], std::stoul(c[2]), std::stod(c[3]), std::stod(c[4]), std::stod(c[5])});
    }
    return rows;
}

std::vector<CsvRow> select(const std::vector<CsvRow>& rows, const std::string& alg, const std::string& metric)
{
    std::vector<CsvRow> out;
    for (const auto& r : rows)
        if (r.algorithm == alg && r.metric == metric) out.push_back(r);
    return out;
}

Outcome figure_shape()
{
    const double eps = 0.25;
    const fs::path csv = fs::temp_directory_path() / "sqsolve_acceptance_curves.csv";
    std::ostringstream out, err;
    const int code = cli::run({"sqsolve", "experiment", "--n", "600", "--d", "400", "--rank", "60",
                               "--spec-lo", "1e-15", "--spec-hi", "9", "--problem-seed", "8",
                               "--eps", "0.25", "--trials", "40", "--seed", "88", "--out", csv.string()},
                              out, err);
    if (code != 0) return {false, "experiment command failed: " + err.str()};
    const auto rows = read_curves(csv);
    fs::remove(csv);

    const auto gd = select(rows, "gd", "error");
    const auto alg1 = select(rows, "alg1", "error");
    const auto phi = select(rows, "alg1", "phi");
    if (gd.empty() || alg1.empty() || phi.empty()) return {false, "missing CSV series"};
    const std::size_t K = gd.back().k;

    // (a)
    bool gd_monotone = true;
    for (std::size_t i = 1; i < gd.size(); ++i)
        gd_monotone = gd_monotone && gd[i].median <= gd[i - 1].median * (1 + 1e-12);

    // (b) every recorded alg1 median in the final quartile is at most 2 eps
    // and gradient descent finishes below the final alg1 median
    const std::size_t quartile_start = (3 * K + 3) / 4;
    double plateau_max = 0.0;
    for (const auto& r : alg1)
        if (r.k >= quartile_start) plateau_max = std::max(plateau_max, r.median);
    const bool plateau = plateau_max <= 2 * eps && gd.back().median < alg1.back().median;

    // (c) pointwise at every recorded k; Kendall's tau is reported alongside
    std::vector<double> tail;
    for (const auto& r : phi)
        if (r.k >= quartile_start) tail.push_back(r.median);
    std::size_t drops = 0;
    for (std::size_t i = 1; i < tail.size(); ++i) drops += tail[i] < tail[i - 1];
    double concordant = 0, pairs = 0;
    for (std::size_t i = 0; i < tail.size(); ++i)
        for (std::size_t j = i + 1; j < tail.size(); ++j) {
            concordant += (tail[j] > tail[i]) - (tail[j] < tail[i]);
            ++pairs;
        }
    const bool phi_up = !tail.empty() && drops == 0;
    const double phi_first = tail.empty() ? 0.0 : tail.front();
    const double prev = tail.empty() ? 0.0 : tail.back();
    const std::size_t phi_points = tail.size();

    std::string detail = std::string("(a) gd nonincreasing: ") + (gd_monotone ? "yes" : "no") +
                         "; (b) alg1 final-quartile median max " + fmt("%.4f", plateau_max) +
                         " (limit 0.5), final alg1 " + fmt("%.4f", alg1.back().median) + " vs gd " +
                         fmt("%.2e", gd.back().median) + "; (c) phi median " + fmt("%.1f", phi_first) +
                         " -> " + fmt("%.1f", prev) + " over " + std::to_string(phi_points) +
                         " final-quartile points, " + std::to_string(drops) + " decreases, Kendall tau " +
                         fmt("%.2f", pairs > 0 ? concordant / pairs : 0.0);
    return {gd_monotone && plateau && phi_up, detail};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> criteria{
        {1, "moment identities", 10, moment_identities},
        {2, "one-step unbiasedness", 5, unbiasedness},
        {3, "variance-bound inequalities", 30, variance_bounds},
        {4, "accuracy at desk scale", 600, accuracy},
        {5, "sparsity bound", 600, sparsity},
        {6, "output-sampler fidelity", 120, sampler_fidelity},
        {7, "RK-averaging equivalence", 5, rk_equivalence},
        {8, "figure shape reproduction", 1200, figure_shape},
        {9, "determinism", 1200, determinism},
    };

    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.limit_seconds;
        const bool pass = o.pass && in_time;
        if (!pass) ++failures;
        std::cout << "AC-" << c.id << ' ' << (pass ? "PASS" : "FAIL") << "  " << c.title << ": " << o.detail
                  << " [" << fmt("%.1f", secs) << " s, limit " << fmt("%.0f", c.limit_seconds) << " s"
                  << (in_time ? "" : ", over time") << "]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
