#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "sqsolve/compressed_solution.hpp"
#include "sqsolve/errors.hpp"
#include "sqsolve/experiment.hpp"
#include "sqsolve/matrix_market.hpp"
#include "sqsolve/problems.hpp"
#include "sqsolve/solver.hpp"
#include "sqsolve/stats.hpp"

namespace sqsolve::cli {

namespace fs = std::filesystem;

namespace {

constexpr auto kDigits = std::numeric_limits<double>::max_digits10;

struct GenerateArgs {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t rank = 0;
    double spec_lo = 1e-15;
    double spec_hi = 9.0;
    std::uint64_t seed = 1;
};

// Matrix/rhs/reference inputs shared by solve, query, sample, experiment.
struct ProblemFiles {
    std::string dir;
    std::string A;
    std::string b;
    std::string xstar;
    std::string meta;

    fs::path resolve(const std::string& explicit_path, const char* default_name) const
    {
        if (!explicit_path.empty()) return explicit_path;
        if (!dir.empty()) return fs::path(dir) / default_name;
        return {};
    }
};

struct ParamFlags {
    double eps = 0.25;
    std::optional<double> kappa_sq;
    std::optional<double> kappaF_sq;
    std::optional<double> spectral_sq;
    experiment::ParamOverrides overrides;
};

void add_problem_options(CLI::App& app, ProblemFiles& f)
{
    app.add_option("--problem", f.dir, "Directory holding A.mtx, b.mtx, xstar.mtx, meta.txt");
    app.add_option("--A", f.A, "Matrix Market file for A");
    app.add_option("--b", f.b, "Matrix Market file for b");
    app.add_option("--xstar", f.xstar, "Matrix Market file for the reference solution");
    app.add_option("--meta", f.meta, "Problem metadata (condition numbers)");
}

void add_param_options(CLI::App& app, ParamFlags& p)
{
    app.add_option("--eps", p.eps, "Target relative accuracy, in (0, 1/4]");
    app.add_option("--kappa-sq", p.kappa_sq, "kappa^2 = ||A||^2 ||A^+||^2");
    app.add_option("--kappaF-sq", p.kappaF_sq, "kappa_F^2 = ||A||_F^2 ||A^+||^2");
    app.add_option("--spectral-sq", p.spectral_sq, "||A||^2 (default: from the condition numbers)");
    app.add_option("--R", p.overrides.R, "Row batch size override")->check(CLI::PositiveNumber);
    app.add_option("--C", p.overrides.C, "Column batch size override")->check(CLI::PositiveNumber);
    app.add_option("--K", p.overrides.K, "Iteration count override")->check(CLI::NonNegativeNumber);
    app.add_option("--alpha", p.overrides.alpha, "Step size override")->check(CLI::PositiveNumber);
}

void add_generate_options(CLI::App& app, GenerateArgs& g, const std::string& seed_flag)
{
    app.add_option("--n", g.n, "Rows")->check(CLI::PositiveNumber);
    app.add_option("--d", g.d, "Columns")->check(CLI::PositiveNumber);
    app.add_option("--rank", g.rank, "Number of nonzero singular values")->check(CLI::PositiveNumber);
    app.add_option("--spec-lo", g.spec_lo, "Smallest rho (singular values are 1 + rho)")
        ->check(CLI::PositiveNumber);
    app.add_option("--spec-hi", g.spec_hi, "Largest rho")->check(CLI::PositiveNumber);
    app.add_option(seed_flag, g.seed, "Generator seed");
}

problems::GeneratedProblem generate_problem(const GenerateArgs& g)
{
    if (g.n == 0 || g.d == 0 || g.rank == 0) throw InvalidInput("--n, --d and --rank are required");
    RandomStream rng(g.seed);
    return problems::generate(g.n, g.d, problems::geometric_spectrum(g.rank, g.spec_lo, g.spec_hi), rng);
}

problems::ProblemMeta meta_for(const GenerateArgs& g, const problems::GeneratedProblem& p)
{
    problems::ProblemMeta meta;
    meta.n = g.n;
    meta.d = g.d;
    meta.rank = g.rank;
    meta.seed = g.seed;
    meta.spec_lo = g.spec_lo;
    meta.spec_hi = g.spec_hi;
    meta.kappa_sq = p.kappa_sq;
    meta.kappaF_sq = p.kappaF_sq;
    meta.spectral_norm_sq = p.spectral_norm_sq();
    meta.frob_sq = p.matrix->frob_sq();
    meta.singular_values = p.singular_values;
    return meta;
}

std::shared_ptr<const SQMatrix> load_matrix(const ProblemFiles& f)
{
    const fs::path path = f.resolve(f.A, "A.mtx");
    if (path.empty()) throw InvalidInput("no matrix given (use --A or --problem)");
    return std::make_shared<const SQMatrix>(mm::read_matrix(path));
}

// Loads A, b, optional x* and condition numbers (flags override meta.txt).
struct LoadedProblem {
    experiment::ProblemInstance instance;
    bool has_reference = false;
    bool has_condition = false;
};

LoadedProblem load_problem(const ProblemFiles& f, const ParamFlags& flags)
{
    LoadedProblem lp;
    auto& inst = lp.instance;
    inst.matrix = load_matrix(f);

    const fs::path b_path = f.resolve(f.b, "b.mtx");
    if (b_path.empty()) throw InvalidInput("no right-hand side given (use --b or --problem)");
    inst.b = mm::read_vector(b_path);
    if (static_cast<Index>(inst.b.size()) != inst.matrix->rows()) {
        throw InvalidInput("b has length " + std::to_string(inst.b.size()) + " but A has " +
                           std::to_string(inst.matrix->rows()) + " rows");
    }

    const fs::path x_path = f.resolve(f.xstar, "xstar.mtx");
    if (!x_path.empty() && (fs::exists(x_path) || !f.xstar.empty())) {
        inst.x_star = mm::read_vector(x_path);
        if (static_cast<Index>(inst.x_star.size()) != inst.matrix->cols()) {
            throw InvalidInput("x* length does not match the columns of A");
        }
        lp.has_reference = true;
    }

    const fs::path meta_path = f.resolve(f.meta, "meta.txt");
    if (!meta_path.empty() && (fs::exists(meta_path) || !f.meta.empty())) {
        const auto meta = problems::read_meta(meta_path);
        inst.kappa_sq = meta.kappa_sq;
        inst.kappaF_sq = meta.kappaF_sq;
        inst.spectral_norm_sq = meta.spectral_norm_sq;
        lp.has_condition = true;
    }
    if (flags.kappa_sq) inst.kappa_sq = *flags.kappa_sq;
    if (flags.kappaF_sq) inst.kappaF_sq = *flags.kappaF_sq;
    if (flags.spectral_sq) inst.spectral_norm_sq = *flags.spectral_sq;
    if (flags.kappa_sq && flags.kappaF_sq) lp.has_condition = true;
    return lp;
}

SolverParams params_for(const LoadedProblem& lp, const ParamFlags& flags, RandomStream& rng)
{
    if (lp.has_condition) return experiment::resolve_params(lp.instance, flags.eps, flags.overrides);

    // No condition numbers: every batch parameter must be given explicitly.
    const auto& o = flags.overrides;
    if (!o.R || !o.C || !o.K) {
        throw InvalidInput("without condition numbers (--meta or --kappa-sq/--kappaF-sq), "
                           "--R, --C and --K are required");
    }
    SolverParams p;
    p.R = *o.R;
    p.C = *o.C;
    p.K = *o.K;
    p.eps = flags.eps;
    if (o.alpha) p.alpha = *o.alpha;
    else if (lp.instance.spectral_norm_sq) p.alpha = 1.0 / *lp.instance.spectral_norm_sq;
    else p.alpha = 1.0 / estimate_spectral_norm(*lp.instance.matrix, 200, rng);
    p.validate();
    return p;
}

void write_iterate_csv(const fs::path& path, const SparseIterate& y)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << std::setprecision(kDigits) << "index,value\n";
    const auto idx = y.indices();
    const auto val = y.values();
    for (std::size_t k = 0; k < idx.size(); ++k) out << idx[k] << ',' << val[k] << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

SparseIterate read_iterate_csv(const fs::path& path, Index n)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    SparseIterate y(n);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (lineno == 1 && line.rfind("index", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw IoError(path.string() + ": malformed line " + std::to_string(lineno));
        try {
            const auto r = std::stoull(line.substr(0, comma));
            const double v = std::stod(line.substr(comma + 1));
            if (r >= n) throw IoError(path.string() + ": index " + std::to_string(r) + " out of range");
            y.set(r, v);
        } catch (const std::logic_error&) {
            throw IoError(path.string() + ": malformed line " + std::to_string(lineno));
        }
    }
    return y;
}

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    std::ostringstream ss;
    ss << std::setprecision(kDigits) << v;
    return ss.str();
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Sample-and-query linear system solver"};
    app.require_subcommand(1);

    // generate
    GenerateArgs gen;
    std::string gen_out = ".";
    auto* cmd_generate = app.add_subcommand("generate", "Write a synthetic consistent problem");
    add_generate_options(*cmd_generate, gen, "--seed");
    cmd_generate->add_option("--out", gen_out, "Output directory");

    // solve
    ProblemFiles solve_files;
    ParamFlags solve_flags;
    std::uint64_t solve_seed = 1;
    std::string solve_out = "y.csv";
    auto* cmd_solve = app.add_subcommand("solve", "Run the sampled solver, write y as CSV");
    add_problem_options(*cmd_solve, solve_files);
    add_param_options(*cmd_solve, solve_flags);
    cmd_solve->add_option("--seed", solve_seed, "Random seed");
    cmd_solve->add_option("--out", solve_out, "Output CSV for y (index,value)");

    // query
    ProblemFiles query_files;
    std::string query_y;
    std::vector<std::size_t> query_idx;
    auto* cmd_query = app.add_subcommand("query", "Print entries of x = A^T y");
    add_problem_options(*cmd_query, query_files);
    cmd_query->add_option("--y", query_y, "Iterate CSV from solve")->required();
    cmd_query->add_option("--index,-i", query_idx, "Column indices (0-based)")->required();

    // sample
    ProblemFiles sample_files;
    std::string sample_y;
    std::size_t sample_count = 1;
    std::uint64_t sample_seed = 1;
    auto* cmd_sample = app.add_subcommand("sample", "Draw indices j with probability x_j^2 / ||x||^2");
    add_problem_options(*cmd_sample, sample_files);
    cmd_sample->add_option("--y", sample_y, "Iterate CSV from solve")->required();
    cmd_sample->add_option("--count,-N", sample_count, "Number of samples")->check(CLI::PositiveNumber);
    cmd_sample->add_option("--seed", sample_seed, "Random seed");

    // experiment
    ProblemFiles exp_files;
    ParamFlags exp_flags;
    GenerateArgs exp_gen;
    experiment::ExperimentConfig exp_cfg;
    std::string exp_out;
    auto* cmd_experiment = app.add_subcommand("experiment", "Convergence curves as CSV");
    add_problem_options(*cmd_experiment, exp_files);
    add_param_options(*cmd_experiment, exp_flags);
    add_generate_options(*cmd_experiment, exp_gen, "--problem-seed");
    cmd_experiment->add_option("--trials", exp_cfg.trials, "Independent trials")->check(CLI::PositiveNumber);
    cmd_experiment->add_option("--seed", exp_cfg.seed, "Master seed for the trials");
    cmd_experiment->add_option("--record-every", exp_cfg.record_every, "Record every k iterations");
    cmd_experiment->add_option("--record", exp_cfg.record_at, "Explicit iterations to record");
    cmd_experiment->add_option("--out", exp_out, "Output CSV (default: stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (*cmd_generate) {
            const auto problem = generate_problem(gen);
            const auto meta = meta_for(gen, problem);
            problems::write_problem(gen_out, problem, meta);
            out << std::setprecision(kDigits) << "wrote " << (fs::path(gen_out) / "A.mtx").string()
                << " b.mtx xstar.mtx meta.txt kappa_sq=" << meta.kappa_sq
                << " kappaF_sq=" << meta.kappaF_sq << '\n';
            return kOk;
        }

        if (*cmd_solve) {
            const auto lp = load_problem(solve_files, solve_flags);
            RandomStream rng(solve_seed);
            const SolverParams p = params_for(lp, solve_flags, rng);
            const auto& b = lp.instance.b;
            const auto sol = solve(lp.instance.matrix,
                                   std::span<const double>(b.data(), static_cast<std::size_t>(b.size())),
                                   p, rng);
            write_iterate_csv(solve_out, sol.iterate());

            const DenseVector x = sol.dense();
            double phi = std::numeric_limits<double>::quiet_NaN();
            if (x.squaredNorm() >= 1e-300) phi = sol.compute_phi();
            out << "R=" << p.R << " C=" << p.C << " K=" << p.K << " alpha=" << format_double(p.alpha)
                << " nnz=" << sol.iterate().nnz() << " stored=" << sol.iterate().stored()
                << " phi=" << format_double(phi);
            if (lp.has_reference) {
                out << " rel_error=" << format_double(experiment::relative_error(x, lp.instance.x_star));
            }
            out << '\n';
            return kOk;
        }

        if (*cmd_query) {
            auto A = load_matrix(query_files);
            CompressedSolution sol(A, read_iterate_csv(query_y, A->rows()));
            out << "index,value\n";
            for (auto j : query_idx) out << j << ',' << format_double(sol.query(j)) << '\n';
            return kOk;
        }

        if (*cmd_sample) {
            auto A = load_matrix(sample_files);
            CompressedSolution sol(A, read_iterate_csv(sample_y, A->rows()));
            RandomStream rng(sample_seed);
            std::size_t rounds = 0;
            double phi = 0.0;
            std::ostringstream body;
            for (std::size_t s = 0; s < sample_count; ++s) {
                const auto st = sol.sample(rng);
                rounds += st.iterations_used;
                phi = st.phi_at_sample;
                body << st.accepted_index << '\n';
            }
            out << body.str();
            out << "# mean_rounds=" << format_double(static_cast<double>(rounds) / static_cast<double>(sample_count))
                << " phi=" << format_double(phi) << '\n';
            return kOk;
        }

        if (*cmd_experiment) {
            experiment::ProblemInstance inst;
            const bool from_files = !exp_files.dir.empty() || !exp_files.A.empty();
            if (from_files) {
                const auto lp = load_problem(exp_files, exp_flags);
                if (!lp.has_reference) throw InvalidInput("experiment needs x* (--xstar or --problem)");
                if (!lp.has_condition) throw InvalidInput("experiment needs condition numbers (--meta or --kappa-sq/--kappaF-sq)");
                inst = lp.instance;
            } else {
                inst = experiment::ProblemInstance::from_generated(generate_problem(exp_gen));
                if (exp_flags.kappa_sq) inst.kappa_sq = *exp_flags.kappa_sq;
                if (exp_flags.kappaF_sq) inst.kappaF_sq = *exp_flags.kappaF_sq;
                if (exp_flags.spectral_sq) inst.spectral_norm_sq = *exp_flags.spectral_sq;
            }
            exp_cfg.eps = exp_flags.eps;
            exp_cfg.overrides = exp_flags.overrides;
            exp_cfg.threads = stats::default_thread_count();
            const auto result = experiment::run_experiment(inst, exp_cfg);
            if (exp_out.empty()) {
                experiment::write_curves_csv(out, result.rows);
            } else {
                std::ofstream f(exp_out);
                if (!f) throw IoError("cannot open for writing: " + exp_out);
                experiment::write_curves_csv(f, result.rows);
                if (!f) throw IoError("write failed: " + exp_out);
                out << "wrote " << exp_out << " (R=" << result.params.R << " C=" << result.params.C
                    << " K=" << result.params.K << ")\n";
            }
            return kOk;
        }
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DegenerateError& e) {
        err << "error: " << e.what() << '\n';
        return kDegenerate;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    }
    return kUsage;
}

} // namespace sqsolve::cli
