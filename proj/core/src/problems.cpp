#include "sqsolve/problems.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "sqsolve/errors.hpp"
#include "sqsolve/matrix_market.hpp"

namespace sqsolve::problems {

std::vector<double> geometric_spectrum(std::size_t count, double lo, double hi)
{
    if (count == 0) throw InvalidInput("spectrum needs at least one value");
    if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
        throw InvalidInput("geometric spacing needs 0 < lo <= hi");
    }
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = 1.0 + hi;
        return out;
    }
    const double log_lo = std::log(lo);
    const double log_hi = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) {
        // descending: i = 0 is the top of the range
        const double t = static_cast<double>(count - 1 - i) / static_cast<double>(count - 1);
        double rho = std::exp(log_lo + t * (log_hi - log_lo));
        if (i == 0) rho = hi;
        if (i + 1 == count) rho = lo;
        out[i] = 1.0 + rho;
    }
    return out;
}

std::pair<double, double> condition_numbers(const std::vector<double>& spectrum)
{
    if (spectrum.empty()) throw InvalidInput("empty spectrum");
    const double smax = *std::max_element(spectrum.begin(), spectrum.end());
    const double smin = *std::min_element(spectrum.begin(), spectrum.end());
    double sum_sq = 0.0;
    for (double s : spectrum) sum_sq += s * s;
    return {smax * smax / (smin * smin), sum_sq / (smin * smin)};
}

namespace {

Eigen::MatrixXd orthonormal_columns(std::size_t rows, std::size_t cols, RandomStream& rng)
{
    Eigen::MatrixXd G(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index c = 0; c < G.cols(); ++c) {
        for (Eigen::Index r = 0; r < G.rows(); ++r) G(r, c) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(G.rows(), G.cols());
    // sign convention diag(R) > 0 makes Q Haar distributed
    const Eigen::MatrixXd& packed = qr.matrixQR();
    for (Eigen::Index c = 0; c < Q.cols(); ++c) {
        if (packed(c, c) < 0.0) Q.col(c) *= -1.0;
    }
    return Q;
}

std::string join(const std::vector<double>& v)
{
    std::ostringstream ss;
    ss << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) ss << ',';
        ss << v[i];
    }
    return ss.str();
}

} // namespace

GeneratedProblem generate(std::size_t n, std::size_t d, std::vector<double> spectrum,
                          RandomStream& rng)
{
    if (n == 0 || d == 0) throw InvalidInput("problem dimensions must be positive");
    if (spectrum.empty()) throw InvalidInput("spectrum must be nonempty");
    if (spectrum.size() > std::min(n, d)) {
        throw InvalidInput("spectrum of length " + std::to_string(spectrum.size()) +
                           " exceeds min(n, d) = " + std::to_string(std::min(n, d)));
    }
    for (double s : spectrum) {
        if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("singular values must be positive");
    }
    std::sort(spectrum.begin(), spectrum.end(), std::greater<>());
    const auto k = static_cast<Eigen::Index>(spectrum.size());

    GeneratedProblem p;
    p.U = orthonormal_columns(n, spectrum.size(), rng);
    p.V = orthonormal_columns(d, spectrum.size(), rng);

    const Eigen::VectorXd sigma = Eigen::VectorXd::Map(spectrum.data(), k);
    DenseMatrix A = p.U * sigma.asDiagonal() * p.V.transpose();

    Eigen::VectorXd w(k);
    for (Eigen::Index i = 0; i < k; ++i) w(i) = rng.normal();
    p.x_star = p.V * w;
    p.b = A * p.x_star;

    std::tie(p.kappa_sq, p.kappaF_sq) = condition_numbers(spectrum);
    p.singular_values = std::move(spectrum);
    p.matrix = std::make_shared<const SQMatrix>(std::move(A));
    return p;
}

void write_meta(const std::filesystem::path& path, const ProblemMeta& meta)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "n = " << meta.n << '\n'
        << "d = " << meta.d << '\n'
        << "rank = " << meta.rank << '\n'
        << "seed = " << meta.seed << '\n'
        << "spec_lo = " << meta.spec_lo << '\n'
        << "spec_hi = " << meta.spec_hi << '\n'
        << "kappa_sq = " << meta.kappa_sq << '\n'
        << "kappaF_sq = " << meta.kappaF_sq << '\n'
        << "spectral_norm_sq = " << meta.spectral_norm_sq << '\n'
        << "frob_sq = " << meta.frob_sq << '\n'
        << "singular_values = " << join(meta.singular_values) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

ProblemMeta read_meta(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError("malformed meta line: " + line);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    auto get = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw IoError(path.string() + ": missing key " + key);
        return it->second;
    };
    ProblemMeta m;
    try {
        m.n = std::stoull(get("n"));
        m.d = std::stoull(get("d"));
        m.rank = std::stoull(get("rank"));
        m.seed = std::stoull(get("seed"));
        m.spec_lo = std::stod(get("spec_lo"));
        m.spec_hi = std::stod(get("spec_hi"));
        m.kappa_sq = std::stod(get("kappa_sq"));
        m.kappaF_sq = std::stod(get("kappaF_sq"));
        m.spectral_norm_sq = std::stod(get("spectral_norm_sq"));
        m.frob_sq = std::stod(get("frob_sq"));
        std::istringstream ss(get("singular_values"));
        std::string tok;
        while (std::getline(ss, tok, ',')) m.singular_values.push_back(std::stod(tok));
    } catch (const std::logic_error& e) {
        throw IoError(path.string() + ": bad numeric value (" + e.what() + ")");
    }
    return m;
}

void write_problem(const std::filesystem::path& dir, const GeneratedProblem& problem,
                   const ProblemMeta& meta)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    mm::write_matrix(dir / "A.mtx", problem.matrix->entries());
    mm::write_vector(dir / "b.mtx", problem.b);
    mm::write_vector(dir / "xstar.mtx", problem.x_star);
    write_meta(dir / "meta.txt", meta);
}

} // namespace sqsolve::problems
