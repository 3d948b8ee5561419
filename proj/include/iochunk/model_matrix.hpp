#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "iochunk/error.hpp"
#include "iochunk/frame.hpp"
#include "iochunk/matrix.hpp"

namespace iochunk {

struct NumericTerm {
    std::string column;
};

/// Treatment-contrast factor: the first level is the baseline and every
/// other level gets an indicator column named column + level.
struct FactorTerm {
    std::string column;
    std::vector<std::string> levels;
};

using Term = std::variant<NumericTerm, FactorTerm>;

inline const std::string& term_column(const Term& t) {
    return std::visit([](const auto& x) -> const std::string& { return x.column; }, t);
}

struct TermSpec {
    std::string response;
    std::vector<Term> terms;
    bool intercept = true;
};

struct ExpandOptions {
    /// Drop rows with unlisted factor levels instead of raising UnknownLevel.
    bool lenient_levels = false;
};

struct ExpandResult {
    DenseMatrix<double> matrix;
    std::uint64_t dropped_null = 0;
    std::uint64_t dropped_unknown_level = 0;

    std::uint64_t dropped() const { return dropped_null + dropped_unknown_level; }
};

/// Minutes after midnight for an hhmm clock reading (1430 -> 870). The value
/// is read as a zero-padded 4-digit string; readings of 2400 and above are
/// not special-cased.
inline std::optional<std::int64_t> normalize_hhmm(std::optional<std::int64_t> value) {
    if (!value) return std::nullopt;
    if (*value < 0 || *value > 9999)
        throw Error(ErrorKind::OutOfRange, "hhmm value " + std::to_string(*value) + " outside 0..9999");
    return (*value / 100) * 60 + *value % 100;
}

/// Rewrites an Integer column of `frame` in place through normalize_hhmm.
inline void normalize_hhmm_column(Frame& frame, std::string_view name) {
    auto idx = frame.index_of(name);
    if (!idx) throw Error(ErrorKind::MissingColumn, std::string(name));
    Column& c = frame.columns[*idx];
    if (c.type != ColumnType::Integer)
        throw Error(ErrorKind::SchemaError, "hhmm column '" + std::string(name) + "' must be integer");
    auto& v = c.as<std::int64_t>();
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!c.is_null(i)) v[i] = *normalize_hhmm(v[i]);
}

/// Output column names: (Intercept), response, then each term's columns.
inline std::vector<std::string> model_column_names(const TermSpec& spec) {
    std::vector<std::string> names;
    if (spec.intercept) names.emplace_back("(Intercept)");
    names.push_back(spec.response);
    for (const Term& t : spec.terms) {
        if (const auto* num = std::get_if<NumericTerm>(&t)) {
            names.push_back(num->column);
        } else {
            const auto& fac = std::get<FactorTerm>(t);
            for (std::size_t k = 1; k < fac.levels.size(); ++k) names.push_back(fac.column + fac.levels[k]);
        }
    }
    return names;
}

namespace detail {

inline double numeric_cell(const Column& c, std::size_t i) {
    switch (c.type) {
    case ColumnType::Logical: return c.as<std::uint8_t>()[i];
    case ColumnType::Integer: return static_cast<double>(c.as<std::int64_t>()[i]);
    case ColumnType::Real:
    case ColumnType::Timestamp: return c.as<double>()[i];
    default: break;
    }
    throw Error(ErrorKind::SchemaError, "column is not numeric");
}

inline bool is_numeric(ColumnType t) {
    return t == ColumnType::Logical || t == ColumnType::Integer || t == ColumnType::Real || t == ColumnType::Timestamp;
}

// Resolved factor: level label -> position in the caller's level list.
struct FactorIndex {
    const Column* column = nullptr;
    std::unordered_map<std::string, std::size_t> text;
    std::unordered_map<std::int64_t, std::size_t> integer;
    std::size_t n_levels = 0;

    // nullopt: level not listed.
    std::optional<std::size_t> lookup(std::size_t row) const {
        if (column->type == ColumnType::Integer) {
            auto it = integer.find(column->as<std::int64_t>()[row]);
            if (it == integer.end()) return std::nullopt;
            return it->second;
        }
        auto it = text.find(column->as<std::string>()[row]);
        if (it == text.end()) return std::nullopt;
        return it->second;
    }
};

}  // namespace detail

/// Builds the model matrix for `spec`: intercept (optional), response, then
/// numeric terms copied through and factor terms expanded to |levels| - 1
/// indicators. Rows with a null in any used column are dropped and counted.
inline ExpandResult expand(const Frame& frame, const TermSpec& spec, const ExpandOptions& opts = {}) {
    auto find = [&](const std::string& name) -> const Column& {
        auto i = frame.index_of(name);
        if (!i) throw Error(ErrorKind::MissingColumn, name);
        return frame.columns[*i];
    };

    const Column& response = find(spec.response);
    if (!detail::is_numeric(response.type))
        throw Error(ErrorKind::SchemaError, "response '" + spec.response + "' is not numeric");

    std::vector<const Column*> used{&response};
    std::vector<std::variant<const Column*, detail::FactorIndex>> plan;
    for (const Term& t : spec.terms) {
        if (const auto* num = std::get_if<NumericTerm>(&t)) {
            const Column& c = find(num->column);
            if (!detail::is_numeric(c.type))
                throw Error(ErrorKind::SchemaError, "numeric term '" + num->column + "' is not numeric");
            used.push_back(&c);
            plan.emplace_back(&c);
            continue;
        }
        const auto& fac = std::get<FactorTerm>(t);
        const Column& c = find(fac.column);
        if (c.type != ColumnType::Integer && c.type != ColumnType::Character)
            throw Error(ErrorKind::SchemaError, "factor '" + fac.column + "' must be integer or character");
        if (fac.levels.empty()) throw Error(ErrorKind::SchemaError, "factor '" + fac.column + "' has no levels");
        detail::FactorIndex idx;
        idx.column = &c;
        idx.n_levels = fac.levels.size();
        std::set<std::string_view> seen;
        for (std::size_t k = 0; k < fac.levels.size(); ++k) {
            const std::string& lvl = fac.levels[k];
            if (lvl.empty() || !seen.insert(lvl).second)
                throw Error(ErrorKind::SchemaError, "factor '" + fac.column + "' levels must be unique and non-empty");
            if (c.type == ColumnType::Integer) {
                // A label that is not an integer can never match an integer cell.
                if (auto v = parse_integer(lvl)) idx.integer.emplace(*v, k);
            } else {
                idx.text.emplace(lvl, k);
            }
        }
        used.push_back(&c);
        plan.emplace_back(std::move(idx));
    }

    ExpandResult r;
    const auto names = model_column_names(spec);
    const std::size_t width = names.size();
    std::vector<double> data;
    data.reserve(frame.n_rows * width);
    std::vector<double> row(width);
    std::vector<std::size_t> level_of(plan.size());

    for (std::size_t i = 0; i < frame.n_rows; ++i) {
        bool has_null = false;
        for (const Column* c : used) has_null |= c->is_null(i);
        if (has_null) {
            ++r.dropped_null;
            continue;
        }
        bool unknown = false;
        for (std::size_t p = 0; p < plan.size(); ++p) {
            if (const auto* idx = std::get_if<detail::FactorIndex>(&plan[p])) {
                auto lvl = idx->lookup(i);
                if (!lvl) {
                    if (!opts.lenient_levels) {
                        std::string cell = idx->column->type == ColumnType::Integer
                                               ? std::to_string(idx->column->as<std::int64_t>()[i])
                                               : idx->column->as<std::string>()[i];
                        throw Error(ErrorKind::UnknownLevel, "value '" + cell + "' of factor '" +
                                                                 term_column(spec.terms[p]) + "' is not a listed level");
                    }
                    unknown = true;
                    break;
                }
                level_of[p] = *lvl;
            }
        }
        if (unknown) {
            ++r.dropped_unknown_level;
            continue;
        }
        std::size_t k = 0;
        if (spec.intercept) row[k++] = 1.0;
        row[k++] = detail::numeric_cell(response, i);
        for (std::size_t p = 0; p < plan.size(); ++p) {
            if (const auto* col = std::get_if<const Column*>(&plan[p])) {
                row[k++] = detail::numeric_cell(**col, i);
            } else {
                const auto& idx = std::get<detail::FactorIndex>(plan[p]);
                for (std::size_t l = 1; l < idx.n_levels; ++l) row[k++] = level_of[p] == l ? 1.0 : 0.0;
            }
        }
        data.insert(data.end(), row.begin(), row.end());
    }
    const std::size_t rows = data.size() / width;
    r.matrix = DenseMatrix<double>(rows, width, std::move(data));
    r.matrix.col_names = names;
    return r;
}

}  // namespace iochunk
