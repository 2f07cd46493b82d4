#include "psvd/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace psvd {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// Line-by-line tokenizer that tracks the current 1-based line number.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Next non-blank line; false at end of input.
    bool next(std::string& out) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            if (!blank(line)) {
                out = line;
                return true;
            }
        }
        return false;
    }

    // Like next(), but also skips % comment lines.
    bool next_data(std::string& out) {
        std::string line;
        while (next(line)) {
            if (line[line.find_first_not_of(" \t")] == '%') continue;
            out = line;
            return true;
        }
        return false;
    }

    long line() const noexcept { return line_; }

private:
    std::istream& in_;
    long line_ = 0;
};

long parse_index(const std::string& tok, const char* what, long line) {
    size_t used = 0;
    long v = 0;
    try {
        v = std::stol(tok, &used);
    } catch (const std::exception&) {
        throw parse_error(std::string("invalid ") + what + " '" + tok + "'", line);
    }
    if (used != tok.size()) throw parse_error(std::string("invalid ") + what + " '" + tok + "'", line);
    return v;
}

double parse_value(const std::string& tok, long line) {
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw parse_error("invalid numeric value '" + tok + "'", line);
    }
    if (used != tok.size()) throw parse_error("invalid numeric value '" + tok + "'", line);
    return v;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> toks;
    std::istringstream iss(s);
    std::string t;
    while (iss >> t) toks.push_back(t);
    return toks;
}

}  // namespace

Matrix read_matrix_market(std::istream& in) {
    LineReader reader(in);
    std::string line;
    if (!reader.next(line)) throw parse_error("empty input", reader.line());

    auto header = split(lower(line));
    if (header.size() != 5 || header[0] != "%%matrixmarket" || header[1] != "matrix")
        throw parse_error("malformed MatrixMarket header", reader.line());
    const std::string& format = header[2];
    const std::string& field = header[3];
    const std::string& symmetry = header[4];
    if (format != "coordinate" && format != "array")
        throw parse_error("unsupported format '" + format + "'", reader.line());
    if (field != "real")
        throw parse_error("unsupported field '" + field + "' (only real is handled)",
                          reader.line());
    if (symmetry != "general" && symmetry != "symmetric")
        throw parse_error("unsupported symmetry '" + symmetry + "'", reader.line());
    const bool coordinate = format == "coordinate";
    const bool symmetric = symmetry == "symmetric";

    if (!reader.next_data(line)) throw parse_error("missing size line", reader.line());
    auto size_toks = split(line);
    const size_t expected = coordinate ? 3 : 2;
    if (size_toks.size() != expected)
        throw parse_error("size line must carry " + std::to_string(expected) + " numbers",
                          reader.line());
    const long rows = parse_index(size_toks[0], "row count", reader.line());
    const long cols = parse_index(size_toks[1], "column count", reader.line());
    if (rows < 1 || cols < 1) throw parse_error("matrix dimensions must be positive", reader.line());
    if (symmetric && rows != cols)
        throw parse_error("symmetric matrix must be square", reader.line());

    Matrix a = Matrix::Zero(rows, cols);

    if (coordinate) {
        const long nnz = parse_index(size_toks[2], "entry count", reader.line());
        if (nnz < 0) throw parse_error("entry count must be non-negative", reader.line());
        for (long t = 0; t < nnz; ++t) {
            if (!reader.next_data(line))
                throw parse_error("unexpected end of input: expected " + std::to_string(nnz) +
                                      " entries, found " + std::to_string(t),
                                  reader.line());
            auto toks = split(line);
            if (toks.size() != 3)
                throw parse_error("coordinate entry must be 'row col value'", reader.line());
            const long i = parse_index(toks[0], "row index", reader.line());
            const long j = parse_index(toks[1], "column index", reader.line());
            const double v = parse_value(toks[2], reader.line());
            if (i < 1 || i > rows || j < 1 || j > cols)
                throw parse_error("index out of range", reader.line());
            a(i - 1, j - 1) += v;  // duplicates accumulate
            if (symmetric && i != j) a(j - 1, i - 1) += v;
        }
        if (reader.next_data(line))
            throw parse_error("trailing data after the last entry", reader.line());
    } else {
        // Array format: column-major scan; symmetric files pack the lower
        // triangle of each column.
        for (long j = 0; j < cols; ++j) {
            for (long i = symmetric ? j : 0; i < rows; ++i) {
                if (!reader.next_data(line))
                    throw parse_error("unexpected end of input in array data", reader.line());
                auto toks = split(line);
                if (toks.size() != 1)
                    throw parse_error("array data expects one value per line", reader.line());
                const double v = parse_value(toks[0], reader.line());
                a(i, j) = v;
                if (symmetric && i != j) a(j, i) = v;
            }
        }
        if (reader.next_data(line))
            throw parse_error("trailing data after the last entry", reader.line());
    }
    if (!a.allFinite()) throw parse_error("matrix contains non-finite values");
    return a;
}

Matrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open '" + path + "'");
    return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const Matrix& a) {
    if (a.rows() < 1 || a.cols() < 1) throw contract_error("write_matrix_market: empty matrix");
    require_finite(a, "write_matrix_market input");
    out << "%%MatrixMarket matrix array real general\n";
    out << a.rows() << " " << a.cols() << "\n";
    char buf[64];
    for (Index j = 0; j < a.cols(); ++j) {
        for (Index i = 0; i < a.rows(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", a(i, j));
            out << buf << "\n";
        }
    }
    if (!out) throw validation_error("write_matrix_market: stream failure");
}

void write_matrix_market(const std::string& path, const Matrix& a) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot open '" + path + "' for writing");
    write_matrix_market(out, a);
}

}  // namespace psvd
