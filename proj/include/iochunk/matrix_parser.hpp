#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "iochunk/error.hpp"
#include "iochunk/field.hpp"
#include "iochunk/frame_parser.hpp"
#include "iochunk/matrix.hpp"

namespace iochunk {

struct MatrixOptions {
    char field_sep = ',';
    /// First field of each record is its row name rather than data.
    bool row_names_col = false;
    std::size_t skip_lines = 0;
    bool strip_cr = true;
    /// Unparseable fields raise StrictViolation instead of becoming NA.
    bool strict = false;
};

template <class T>
struct ParsedMatrix {
    DenseMatrix<T> matrix;
    /// Fields that became NA without being the literal NA token.
    std::uint64_t failures = 0;
};

namespace detail {

template <ColumnType Type>
inline bool parse_matrix_cell(std::string_view f, matrix_elem_t<Type>& out) {
    using E = MatrixElement<Type>;
    if constexpr (Type == ColumnType::Character) {
        out.assign(f);
        return true;
    } else {
        if constexpr (Type == ColumnType::Real) {
            if (auto v = parse_real(f)) {
                out = *v;
                return true;
            }
        } else if constexpr (Type == ColumnType::Integer) {
            if (auto v = parse_integer(f)) {
                out = *v;
                return true;
            }
        } else if constexpr (Type == ColumnType::Logical) {
            if (auto v = parse_logical(f)) {
                out = *v ? 1 : 0;
                return true;
            }
        } else if constexpr (Type == ColumnType::Complex) {
            if (auto v = parse_complex(f)) {
                out = *v;
                return true;
            }
        }
        out = E::na();
        return f == "NA";
    }
}

}  // namespace detail

/// Parses records of identically-sized delimited fields into a row-major
/// matrix. Every record must have the same field count (RaggedInput
/// otherwise); input with no records yields a 0x0 matrix.
template <ColumnType Type>
ParsedMatrix<matrix_elem_t<Type>> parse_matrix(std::string_view chunk, const MatrixOptions& opts = {}) {
    static_assert(Type != ColumnType::Bytes && Type != ColumnType::Timestamp && Type != ColumnType::Skip,
                  "matrix element type must be Logical, Integer, Real, Character or Complex");
    using T = matrix_elem_t<Type>;
    ParsedMatrix<T> out;
    std::vector<T>& data = out.matrix.data();
    std::vector<std::string>& row_names = out.matrix.row_names;

    std::size_t skip = opts.skip_lines;
    std::size_t width = 0;  // fields per record, row name included
    std::size_t rows = 0;
    std::string scratch;
    std::size_t expect = 0;

    detail::for_each_line(chunk, opts.strip_cr, [&](const char* b, const char* e) {
        if (skip > 0) {
            --skip;
            return true;
        }
        if (rows == 0) {
            // Width comes from the first record; reserve once it is known.
            width = detail::split_record(b, e, opts.field_sep, std::nullopt, scratch, static_cast<std::size_t>(-2),
                                         [](std::size_t, std::string_view) {});
            if (opts.row_names_col && width < 1)
                throw Error(ErrorKind::RaggedInput, "record has no row-name field");
            expect = detail::count_records(std::string_view(b, static_cast<std::size_t>(chunk.data() + chunk.size() - b)));
            data.reserve(expect * (width - (opts.row_names_col ? 1 : 0)));
            if (opts.row_names_col) row_names.reserve(expect);
        }
        std::size_t n = detail::split_record(b, e, opts.field_sep, std::nullopt, scratch, width,
                                             [&](std::size_t i, std::string_view f) {
                                                 if (opts.row_names_col && i == 0) {
                                                     row_names.emplace_back(f);
                                                     return;
                                                 }
                                                 T v;
                                                 if (!detail::parse_matrix_cell<Type>(f, v)) ++out.failures;
                                                 data.push_back(std::move(v));
                                             });
        if (n != width)
            throw Error(ErrorKind::RaggedInput, "record " + std::to_string(rows + 1) + " has " +
                                                    (n > width ? "more than " + std::to_string(width)
                                                               : std::to_string(n)) +
                                                    " fields, expected " + std::to_string(width));
        ++rows;
        return true;
    });

    const std::size_t cols = rows == 0 ? 0 : width - (opts.row_names_col ? 1 : 0);
    out.matrix.reset_shape(rows, cols);
    if (opts.strict && out.failures > 0)
        throw Error(ErrorKind::StrictViolation, std::to_string(out.failures) + " unparseable matrix fields");
    return out;
}

}  // namespace iochunk
