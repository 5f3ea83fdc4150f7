#include "sqsolve/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <vector>

#include "sqsolve/errors.hpp"

namespace sqsolve::mm {

namespace {

enum class Format { array, coordinate };
enum class Symmetry { general, symmetric, skew };

struct Header {
    Format format;
    Symmetry symmetry;
};

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

Header parse_header(const std::string& line)
{
    std::istringstream ss(line);
    std::string banner, object, format, field, symmetry;
    ss >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") throw IoError("missing %%MatrixMarket banner");
    object = lower(object);
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (object != "matrix") throw IoError("unsupported Matrix Market object: " + object);

    Header h{};
    if (format == "array") h.format = Format::array;
    else if (format == "coordinate") h.format = Format::coordinate;
    else throw IoError("unsupported Matrix Market format: " + format);

    if (field != "real" && field != "double" && field != "integer") {
        throw IoError("unsupported Matrix Market field: " + field);
    }

    if (symmetry == "general") h.symmetry = Symmetry::general;
    else if (symmetry == "symmetric") h.symmetry = Symmetry::symmetric;
    else if (symmetry == "skew-symmetric") h.symmetry = Symmetry::skew;
    else throw IoError("unsupported Matrix Market symmetry: " + symmetry);
    return h;
}

// next line that is neither blank nor a comment
bool next_data_line(std::istream& in, std::string& line)
{
    while (std::getline(in, line)) {
        auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '%') continue;
        return true;
    }
    return false;
}

// from_chars rather than operator>>, which fails on subnormals
double parse_value(std::istringstream& ss)
{
    std::string token;
    if (!(ss >> token)) throw IoError("malformed Matrix Market value");
    const char* first = token.data();
    const char* last = first + token.size();
    if (first != last && *first == '+') ++first;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw IoError("malformed Matrix Market value: " + token);
    return v;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    return in;
}

} // namespace

DenseMatrix read_matrix(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty Matrix Market input");
    const Header h = parse_header(line);

    if (!next_data_line(in, line)) throw IoError("missing Matrix Market size line");
    std::istringstream size_line(line);
    long long n = 0, d = 0, nnz = 0;
    size_line >> n >> d;
    if (h.format == Format::coordinate) size_line >> nnz;
    if (!size_line || n <= 0 || d <= 0 || nnz < 0) {
        throw IoError("malformed Matrix Market size line: " + line);
    }
    if (h.symmetry != Symmetry::general && n != d) {
        throw IoError("symmetric Matrix Market data must be square");
    }

    DenseMatrix m = DenseMatrix::Zero(n, d);
    const double mirror = h.symmetry == Symmetry::skew ? -1.0 : 1.0;

    if (h.format == Format::array) {
        // column-major listing; symmetric variants list the lower triangle
        for (long long c = 0; c < d; ++c) {
            const long long r0 = h.symmetry == Symmetry::general ? 0
                               : h.symmetry == Symmetry::symmetric ? c : c + 1;
            for (long long r = r0; r < n; ++r) {
                if (!next_data_line(in, line)) throw IoError("truncated Matrix Market array");
                std::istringstream ss(line);
                const double v = parse_value(ss);
                m(r, c) = v;
                if (h.symmetry != Symmetry::general && r != c) m(c, r) = mirror * v;
            }
        }
    } else {
        for (long long k = 0; k < nnz; ++k) {
            if (!next_data_line(in, line)) throw IoError("truncated Matrix Market coordinates");
            std::istringstream ss(line);
            long long r = 0, c = 0;
            ss >> r >> c;
            const double v = parse_value(ss);
            if (r < 1 || r > n || c < 1 || c > d) {
                throw IoError("Matrix Market coordinate out of range: " + line);
            }
            m(r - 1, c - 1) += v;
            if (h.symmetry != Symmetry::general && r != c) m(c - 1, r - 1) += mirror * v;
        }
    }
    return m;
}

DenseMatrix read_matrix(const std::filesystem::path& path)
{
    auto in = open_in(path);
    try {
        return read_matrix(in);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

DenseVector read_vector(std::istream& in)
{
    DenseMatrix m = read_matrix(in);
    if (m.cols() == 1) return m.col(0);
    if (m.rows() == 1) return m.row(0).transpose();
    throw IoError("expected a vector, got a " + std::to_string(m.rows()) + "x" +
                  std::to_string(m.cols()) + " matrix");
}

DenseVector read_vector(const std::filesystem::path& path)
{
    auto in = open_in(path);
    try {
        return read_vector(in);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_matrix(std::ostream& out, const DenseMatrix& m, const std::string& comment)
{
    out << "%%MatrixMarket matrix array real general\n";
    if (!comment.empty()) {
        std::istringstream lines(comment);
        std::string l;
        while (std::getline(lines, l)) out << "% " << l << '\n';
    }
    out << m.rows() << ' ' << m.cols() << '\n';
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) out << m(r, c) << '\n';
    }
    if (!out) throw IoError("write failed");
}

void write_matrix(const std::filesystem::path& path, const DenseMatrix& m,
                  const std::string& comment)
{
    auto out = open_out(path);
    write_matrix(out, m, comment);
}

void write_vector(std::ostream& out, const DenseVector& v, const std::string& comment)
{
    DenseMatrix m = v;
    write_matrix(out, m, comment);
}

void write_vector(const std::filesystem::path& path, const DenseVector& v,
                  const std::string& comment)
{
    auto out = open_out(path);
    write_vector(out, v, comment);
}

} // namespace sqsolve::mm
