#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "iochunk/error.hpp"
#include "iochunk/field.hpp"

namespace iochunk {

/// Ordered column declarations that drive typed parsing.
struct Schema {
    std::vector<ColumnType> types;
    /// One name per non-Skip type, or empty (names are then V1, V2, ...).
    std::vector<std::string> names;
    char field_sep = ',';
    bool strip_cr = true;
    std::optional<char> quote;
    /// Turn coercion failures and ragged rows into an error.
    bool strict = false;

    std::size_t output_columns() const {
        return static_cast<std::size_t>(std::count_if(types.begin(), types.end(), [](ColumnType t) { return t != ColumnType::Skip; }));
    }

    void validate() const {
        if (types.empty()) throw Error(ErrorKind::SchemaError, "schema has no columns");
        if (!names.empty() && names.size() != output_columns())
            throw Error(ErrorKind::SchemaError, "expected " + std::to_string(output_columns()) + " names, got " +
                                                    std::to_string(names.size()));
        std::set<std::string_view> seen;
        for (const auto& n : names)
            if (!seen.insert(n).second) throw Error(ErrorKind::SchemaError, "duplicate column name '" + n + "'");
    }

    std::vector<std::string> resolved_names() const {
        if (!names.empty()) return names;
        std::vector<std::string> out;
        for (std::size_t i = 0; i < output_columns(); ++i) out.push_back("V" + std::to_string(i + 1));
        return out;
    }
};

// Storage per type: Logical -> uint8, Integer -> int64, Real and Timestamp ->
// double, Character and Bytes -> string, Complex -> complex<double>.
using ColumnStorage = std::variant<std::vector<std::uint8_t>, std::vector<std::int64_t>, std::vector<double>,
                                   std::vector<std::string>, std::vector<std::complex<double>>>;

inline ColumnStorage make_storage(ColumnType t) {
    switch (t) {
    case ColumnType::Logical: return std::vector<std::uint8_t>{};
    case ColumnType::Integer: return std::vector<std::int64_t>{};
    case ColumnType::Real:
    case ColumnType::Timestamp: return std::vector<double>{};
    case ColumnType::Character:
    case ColumnType::Bytes: return std::vector<std::string>{};
    case ColumnType::Complex: return std::vector<std::complex<double>>{};
    case ColumnType::Skip: break;
    }
    throw Error(ErrorKind::SchemaError, "Skip columns have no storage");
}

/// One typed column with its null mask. Null cells hold a value-initialized
/// placeholder so that equal frames are equal element by element.
struct Column {
    ColumnType type = ColumnType::Character;
    ColumnStorage values;
    std::vector<std::uint8_t> null;  // 1 = missing

    Column() = default;
    explicit Column(ColumnType t) : type(t), values(make_storage(t)) {}

    std::size_t size() const noexcept { return null.size(); }
    bool is_null(std::size_t i) const noexcept { return null[i] != 0; }

    template <class T>
    std::vector<T>& as() { return std::get<std::vector<T>>(values); }
    template <class T>
    const std::vector<T>& as() const { return std::get<std::vector<T>>(values); }

    void reserve(std::size_t n) {
        null.reserve(n);
        std::visit([n](auto& v) { v.reserve(n); }, values);
    }

    void push_null() {
        null.push_back(1);
        std::visit([](auto& v) { v.emplace_back(); }, values);
    }

    /// Appends a FieldValue whose alternative matches this column's storage.
    void push(const FieldValue& v) {
        if (std::holds_alternative<std::monostate>(v)) {
            push_null();
            return;
        }
        null.push_back(0);
        switch (type) {
        case ColumnType::Logical: as<std::uint8_t>().push_back(std::get<bool>(v) ? 1 : 0); break;
        case ColumnType::Integer: as<std::int64_t>().push_back(std::get<std::int64_t>(v)); break;
        case ColumnType::Real:
        case ColumnType::Timestamp: as<double>().push_back(std::get<double>(v)); break;
        case ColumnType::Character:
        case ColumnType::Bytes: as<std::string>().push_back(std::get<std::string>(v)); break;
        case ColumnType::Complex: as<std::complex<double>>().push_back(std::get<std::complex<double>>(v)); break;
        case ColumnType::Skip: break;
        }
    }

    void append(const Column& other) {
        null.insert(null.end(), other.null.begin(), other.null.end());
        std::visit(
            [&](auto& mine) {
                const auto& theirs = std::get<std::decay_t<decltype(mine)>>(other.values);
                mine.insert(mine.end(), theirs.begin(), theirs.end());
            },
            values);
    }
};

namespace detail {
// NaNs compare equal to each other; everything else compares bitwise so
// that -0.0 and 0.0 stay distinct.
inline bool same_real(double a, double b) noexcept {
    if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}
}  // namespace detail

inline bool operator==(const Column& a, const Column& b) {
    if (a.type != b.type || a.null != b.null || a.values.index() != b.values.index()) return false;
    return std::visit(
        [&](const auto& av) {
            using Vec = std::decay_t<decltype(av)>;
            const auto& bv = std::get<Vec>(b.values);
            if (av.size() != bv.size()) return false;
            for (std::size_t i = 0; i < av.size(); ++i) {
                if (a.null[i]) continue;
                if constexpr (std::is_same_v<Vec, std::vector<double>>) {
                    if (!detail::same_real(av[i], bv[i])) return false;
                } else if constexpr (std::is_same_v<Vec, std::vector<std::complex<double>>>) {
                    if (!detail::same_real(av[i].real(), bv[i].real()) || !detail::same_real(av[i].imag(), bv[i].imag()))
                        return false;
                } else {
                    if (av[i] != bv[i]) return false;
                }
            }
            return true;
        },
        a.values);
}

/// Columnar table: every column holds exactly n_rows cells.
struct Frame {
    std::size_t n_rows = 0;
    std::vector<Column> columns;
    std::vector<std::string> names;

    std::size_t n_cols() const noexcept { return columns.size(); }

    std::optional<std::size_t> index_of(std::string_view name) const {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) return std::nullopt;
        return static_cast<std::size_t>(it - names.begin());
    }

    const Column& column(std::string_view name) const {
        auto i = index_of(name);
        if (!i) throw Error(ErrorKind::MissingColumn, std::string(name));
        return columns[*i];
    }

    std::vector<ColumnType> types() const {
        std::vector<ColumnType> t;
        for (const auto& c : columns) t.push_back(c.type);
        return t;
    }

    /// Row-concatenates `other`, which must have the same column types.
    void append_rows(const Frame& other) {
        if (columns.empty() && n_rows == 0) {
            *this = other;
            return;
        }
        if (other.columns.size() != columns.size())
            throw Error(ErrorKind::DimensionMismatch, "append_rows: column count differs");
        for (std::size_t j = 0; j < columns.size(); ++j) {
            if (columns[j].type != other.columns[j].type)
                throw Error(ErrorKind::DimensionMismatch, "append_rows: column type differs at " + std::to_string(j));
            columns[j].append(other.columns[j]);
        }
        n_rows += other.n_rows;
    }

    friend bool operator==(const Frame& a, const Frame& b) {
        return a.n_rows == b.n_rows && a.names == b.names && a.columns == b.columns;
    }
};

/// An empty frame with the schema's output columns.
inline Frame empty_frame(const Schema& schema) {
    Frame f;
    f.names = schema.resolved_names();
    for (ColumnType t : schema.types)
        if (t != ColumnType::Skip) f.columns.emplace_back(t);
    return f;
}

}  // namespace iochunk
