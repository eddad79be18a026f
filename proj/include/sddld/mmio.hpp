#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sddld/errors.hpp"
#include "sddld/sparse.hpp"

namespace sddld {

// Matrix Market exchange format, coordinate real symmetric, 1-based indices.
// A "general" header is accepted when the content is symmetric; mismatched
// mirrored entries raise AsymmetricInput through the builder.
inline SymmetricSparse read_matrix_market(std::istream& in, const std::string& name = "<stream>") {
    std::string line;
    std::size_t lineno = 0;
    const auto parse_error = [&](const std::string& what) {
        fail(ErrorCode::ParseError, name + ":" + std::to_string(lineno) + ": " + what);
    };

    if (!std::getline(in, line)) parse_error("empty file");
    ++lineno;
    {
        std::istringstream hs(line);
        std::string banner, object, format, field, symmetry;
        hs >> banner >> object >> format >> field >> symmetry;
        for (auto* s : {&object, &format, &field, &symmetry})
            for (auto& c : *s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (banner != "%%MatrixMarket" || object != "matrix") parse_error("not a MatrixMarket matrix header");
        if (format != "coordinate") parse_error("only coordinate format is supported");
        if (field != "real" && field != "integer") parse_error("only real entries are supported");
        if (symmetry != "symmetric" && symmetry != "general") parse_error("only symmetric or general symmetry");
    }

    while (std::getline(in, line)) {
        ++lineno;
        std::size_t i = 0;
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i < line.size() && line[i] != '%') break;
    }
    long rows = 0, cols = 0, nnz = 0;
    {
        std::istringstream ss(line);
        if (!(ss >> rows >> cols >> nnz)) parse_error("expected 'rows cols nnz'");
        if (rows != cols) parse_error("matrix must be square");
        if (rows < 0 || nnz < 0) parse_error("negative size");
    }

    std::vector<Triplet> ts;
    ts.reserve(static_cast<std::size_t>(nnz));
    for (long k = 0; k < nnz; ++k) {
        long r = 0, c = 0;
        double v = 0.0;
        if (!std::getline(in, line)) {
            ++lineno;
            parse_error("unexpected end of file");
        }
        ++lineno;
        std::istringstream ss(line);
        if (!(ss >> r >> c >> v)) parse_error("expected 'row col value'");
        if (r < 1 || c < 1 || r > rows || c > cols) parse_error("index out of range");
        ts.push_back({static_cast<Index>(r - 1), static_cast<Index>(c - 1), v});
    }
    return SymmetricSparse::from_triplets(static_cast<Index>(rows), ts);
}

inline SymmetricSparse read_matrix_market_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::ParseError, "cannot open " + path);
    return read_matrix_market(in, path);
}

// Writes the stored (upper) triangle as a lower-triangle symmetric coordinate
// file with 17 significant digits, so a read of the output reproduces the
// entries exactly.
inline void write_matrix_market(std::ostream& out, const SymmetricSparse& a) {
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << a.dim() << " " << a.dim() << " " << a.nnz_upper() << "\n";
    char buf[64];
    for (const auto& e : a.entries()) {
        // store row >= col (lower triangle), 1-based
        std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", e.col + 1, e.row + 1, e.value);
        out << buf;
    }
}

inline void write_matrix_market_file(const std::string& path, const SymmetricSparse& a) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::ParseError, "cannot open " + path + " for writing");
    write_matrix_market(out, a);
}

} // namespace sddld
