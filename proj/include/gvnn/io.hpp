#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gvnn/error.hpp"
#include "gvnn/linalg.hpp"

// CSV primitives shared by the data loaders and the CLI. Values are written
// with %.17g so a write/read round trip reproduces every double bit-exactly;
// lines starting with '#' are comments (the CLI uses them for format/version
// headers) and are skipped on load.

namespace gvnn {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv_matrix(std::ostream& os, const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << format_double(m(i, j));
        }
        os << '\n';
    }
}

inline void write_csv_matrix(const std::string& path, const Matrix& m,
                             const std::vector<std::string>& header_comments = {}) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    for (const auto& line : header_comments) {
        if (!line.empty() && line.front() == '#') os << line << '\n';
        else os << "# " << line << '\n';
    }
    write_csv_matrix(os, m);
    if (!os) throw IoError("write failed: " + path);
}

/// Rectangular numeric CSV -> Matrix. Comment lines ('#') and blank lines are
/// ignored; row/col indices in errors are 1-based over data lines.
inline Matrix load_csv_matrix(std::istream& is) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t data_row = 0;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        ++data_row;
        std::vector<double> row;
        std::size_t col = 0;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const std::size_t comma = line.find(',', pos);
            const std::string cell =
                line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            ++col;
            const char* begin = cell.c_str();
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            // allow surrounding whitespace, nothing else
            const char* tail = end;
            while (*tail == ' ' || *tail == '\t') ++tail;
            if (end == begin || *tail != '\0') {
                throw ParseError(data_row, col, "not a number: '" + cell + "'");
            }
            row.push_back(v);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw RaggedRowsError("row " + std::to_string(data_row) + " has " +
                                  std::to_string(row.size()) + " cells, expected " +
                                  std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("CSV contains no data rows");
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    return m;
}

inline Matrix load_csv_matrix(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    return load_csv_matrix(is);
}

/// FNV-1a over raw bytes; used for input digests and manifest digests.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a64_hex(std::string_view bytes) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace gvnn
