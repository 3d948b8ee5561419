#pragma once

#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "iochunk/field.hpp"
#include "iochunk/frame.hpp"
#include "iochunk/frame_parser.hpp"

namespace iochunk::naive {

// Reference parser: one std::getline per record, a per-character state
// machine that copies every field into its own std::string, and
// parse_field() on each. It shares no scanning code with parse_frame and is
// the baseline the benchmark compares against.

inline std::vector<std::string> split_fields(const std::string& line, char sep, const std::optional<char>& quote) {
    enum class State { Field, Quoted, QuoteInQuoted };
    std::vector<std::string> fields(1);
    State st = State::Field;
    for (char c : line) {
        switch (st) {
        case State::Field:
            if (quote && c == *quote) st = State::Quoted;
            else if (c == sep) fields.emplace_back();
            else fields.back().push_back(c);
            break;
        case State::Quoted:
            if (c == *quote) st = State::QuoteInQuoted;
            else fields.back().push_back(c);
            break;
        case State::QuoteInQuoted:
            if (c == *quote) {
                fields.back().push_back(c);
                st = State::Quoted;
            } else if (c == sep) {
                fields.emplace_back();
                st = State::Field;
            } else {
                fields.back().push_back(c);
                st = State::Field;
            }
            break;
        }
    }
    return fields;
}

inline ParsedFrame parse_frame(std::string_view chunk, const Schema& schema, std::size_t skip_lines = 0) {
    schema.validate();
    ParsedFrame r;
    r.frame = empty_frame(schema);
    r.stats.failures.assign(r.frame.n_cols(), 0);

    std::istringstream in{std::string(chunk)};
    std::string line;
    while (std::getline(in, line)) {
        if (schema.strip_cr && !line.empty() && line.back() == '\r') line.pop_back();
        if (skip_lines > 0) {
            --skip_lines;
            continue;
        }
        std::vector<std::string> fields = split_fields(line, schema.field_sep, schema.quote);
        std::size_t out = 0;
        for (std::size_t i = 0; i < schema.types.size(); ++i) {
            ColumnType t = schema.types[i];
            if (t == ColumnType::Skip) continue;
            if (i < fields.size()) {
                FieldValue v = parse_field(fields[i], t);
                if (is_coercion_failure(fields[i], v)) ++r.stats.failures[out];
                r.frame.columns[out].push(v);
            } else {
                r.frame.columns[out].push_null();
            }
            ++out;
        }
        if (fields.size() < schema.types.size()) ++r.stats.short_rows;
        if (fields.size() > schema.types.size()) ++r.stats.long_rows;
        ++r.stats.records;
    }
    r.frame.n_rows = r.stats.records;
    detail::enforce_strict(schema, r);
    return r;
}

}  // namespace iochunk::naive
