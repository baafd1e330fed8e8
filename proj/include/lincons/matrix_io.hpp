#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lincons/classify.hpp"

namespace lincons {

namespace detail {

/// Reads lines, skipping blank lines and `#` comments, keeping 1-based line numbers.
class LineReader {
public:
    LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    bool next(std::string& line) {
        while (std::getline(in_, line)) {
            ++line_number_;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            return true;
        }
        return false;
    }

    [[nodiscard]] int line_number() const { return line_number_; }
    [[nodiscard]] const std::string& source() const { return source_; }

    [[noreturn]] void fail(const std::string& message, int column = 0) const {
        std::string where = source_ + ":" + std::to_string(line_number_);
        if (column > 0) where += ":" + std::to_string(column);
        throw InputError(where + ": " + message);
    }

private:
    std::istream& in_;
    std::string source_;
    int line_number_ = 0;
};

inline std::vector<double> parse_row(LineReader& reader, const std::string& line,
                                     Index expected_count) {
    std::vector<double> values;
    std::istringstream tokens(line);
    std::string token;
    int column = 0;
    while (tokens >> token) {
        ++column;
        try {
            std::size_t consumed = 0;
            const double value = std::stod(token, &consumed);
            if (consumed != token.size()) throw std::invalid_argument(token);
            if (!std::isfinite(value)) reader.fail("non-finite value '" + token + "'", column);
            values.push_back(value);
        } catch (const std::logic_error&) {
            reader.fail("'" + token + "' is not a number", column);
        }
    }
    if (expected_count >= 0 && static_cast<Index>(values.size()) != expected_count)
        reader.fail("expected " + std::to_string(expected_count) + " values, got " +
                    std::to_string(values.size()));
    return values;
}

}  // namespace detail

/// Parses the text matrix format: a header line `n m`, then mn rows of mn
/// whitespace-separated reals. `#` starts a comment line.
inline SystemMatrix read_matrix_file(std::istream& in, const std::string& source = "<input>") {
    detail::LineReader reader(in, source);
    std::string line;
    if (!reader.next(line)) throw InputError(source + ": empty file, expected a header line 'n m'");

    long n = 0, m = 0;
    {
        std::istringstream header(line);
        std::string extra;
        if (!(header >> n >> m) || (header >> extra))
            reader.fail("header must be two integers 'n m'");
        if (n < 2 || m < 1) reader.fail("header requires n >= 2 and m >= 1");
    }

    const Index order = static_cast<Index>(n * m);
    Matrix A(order, order);
    for (Index r = 0; r < order; ++r) {
        if (!reader.next(line))
            throw InputError(source + ": unexpected end of file, expected " + std::to_string(order) +
                             " matrix rows");
        const auto values = detail::parse_row(reader, line, order);
        for (Index c = 0; c < order; ++c) A(r, c) = values[static_cast<std::size_t>(c)];
    }
    if (reader.next(line)) reader.fail("trailing content after the matrix rows");
    return SystemMatrix(static_cast<Index>(n), static_cast<Index>(m), std::move(A));
}

inline SystemMatrix read_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open matrix file '" + path.string() + "'");
    return read_matrix_file(in, path.string());
}

namespace detail {

inline void write_value(std::ostream& out, double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    out << buffer;
}

}  // namespace detail

/// Serializes at 17 significant digits, so write-then-read reproduces the
/// entries bit-identically.
inline void write_matrix_file(std::ostream& out, const SystemMatrix& sys) {
    out << sys.n << ' ' << sys.m << '\n';
    for (Index r = 0; r < sys.order(); ++r) {
        for (Index c = 0; c < sys.order(); ++c) {
            if (c > 0) out << ' ';
            detail::write_value(out, sys.A(r, c));
        }
        out << '\n';
    }
}

inline void write_matrix_file(const std::filesystem::path& path, const SystemMatrix& sys) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write matrix file '" + path.string() + "'");
    write_matrix_file(out, sys);
}

/// Reads a headerless whitespace matrix (used for non-square inputs such as a
/// consensus functional). All rows must have equal length.
inline Matrix read_plain_matrix(std::istream& in, const std::string& source = "<input>") {
    detail::LineReader reader(in, source);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (reader.next(line)) {
        auto values = detail::parse_row(reader, line, -1);
        if (!rows.empty() && values.size() != rows.front().size())
            reader.fail("expected " + std::to_string(rows.front().size()) + " values, got " +
                        std::to_string(values.size()));
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw InputError(source + ": empty matrix");
    Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index r = 0; r < M.rows(); ++r)
        for (Index c = 0; c < M.cols(); ++c)
            M(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    return M;
}

inline Matrix read_plain_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open matrix file '" + path.string() + "'");
    return read_plain_matrix(in, path.string());
}

/// Undirected edge list: lines `u v` with 1-based vertex indices. Rejects
/// self-loops and duplicate edges.
inline std::vector<std::pair<Index, Index>> read_edge_list(std::istream& in,
                                                           const std::string& source = "<input>") {
    detail::LineReader reader(in, source);
    std::vector<std::pair<Index, Index>> edges;
    std::set<std::pair<Index, Index>> seen;
    std::string line;
    while (reader.next(line)) {
        std::istringstream tokens(line);
        long u = 0, v = 0;
        std::string extra;
        if (!(tokens >> u >> v) || (tokens >> extra))
            reader.fail("expected an edge 'u v' with two vertex indices");
        if (u < 1 || v < 1) reader.fail("vertex indices are 1-based");
        if (u == v) reader.fail("self-loop on vertex " + std::to_string(u));
        const auto key = std::minmax(static_cast<Index>(u), static_cast<Index>(v));
        if (!seen.insert(key).second)
            reader.fail("duplicate edge " + std::to_string(key.first) + " " +
                        std::to_string(key.second));
        edges.emplace_back(key);
    }
    if (edges.empty()) throw InputError(source + ": empty edge list");
    return edges;
}

/// Oriented incidence matrix with the fixed min-to-max orientation: the edge
/// (u, v) with u < v begins at u (-1) and ends at v (+1).
inline Matrix incidence_from_edges(const std::vector<std::pair<Index, Index>>& edges) {
    Index vertex_count = 0;
    for (const auto& [u, v] : edges) vertex_count = std::max({vertex_count, u, v});
    Matrix B = Matrix::Zero(vertex_count, static_cast<Index>(edges.size()));
    for (std::size_t e = 0; e < edges.size(); ++e) {
        B(edges[e].first - 1, static_cast<Index>(e)) = -1.0;
        B(edges[e].second - 1, static_cast<Index>(e)) = 1.0;
    }
    return B;
}

}  // namespace lincons
