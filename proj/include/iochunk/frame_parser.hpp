#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iochunk/error.hpp"
#include "iochunk/field.hpp"
#include "iochunk/frame.hpp"

namespace iochunk {

/// Per-parse diagnostics. A coercion failure is a field that became null
/// without being the literal NA (empty fields count).
struct ParseStats {
    std::vector<std::uint64_t> failures;  // one per output column
    std::uint64_t records = 0;
    std::uint64_t short_rows = 0;
    std::uint64_t long_rows = 0;

    std::uint64_t total_failures() const {
        std::uint64_t n = 0;
        for (auto f : failures) n += f;
        return n;
    }
    bool clean() const { return total_failures() == 0 && short_rows == 0 && long_rows == 0; }

    void merge(const ParseStats& o) {
        if (failures.size() < o.failures.size()) failures.resize(o.failures.size());
        for (std::size_t i = 0; i < o.failures.size(); ++i) failures[i] += o.failures[i];
        records += o.records;
        short_rows += o.short_rows;
        long_rows += o.long_rows;
    }

    friend bool operator==(const ParseStats&, const ParseStats&) = default;
};

struct ParsedFrame {
    Frame frame;
    ParseStats stats;
};

namespace detail {

/// Calls `line(begin, end)` for every record of `chunk`, '\r' stripped when
/// asked. A trailing separator does not open an extra record.
template <class F>
inline void for_each_line(std::string_view chunk, bool strip_cr, F&& line) {
    const char* p = chunk.data();
    const char* const end = p + chunk.size();
    while (p < end) {
        const char* nl = static_cast<const char*>(std::memchr(p, '\n', static_cast<std::size_t>(end - p)));
        const char* le = nl ? nl : end;
        const char* next = nl ? nl + 1 : end;
        if (strip_cr && le > p && le[-1] == '\r') --le;
        if (!line(p, le)) return;
        p = next;
    }
}

/// Quote-aware field splitter for one record. A quote byte toggles a region
/// in which separators are literal; a doubled quote inside the region is a
/// literal quote.
template <class F>
inline std::size_t split_quoted(const char* p, const char* end, char sep, char quote, std::string& scratch,
                                std::size_t max_fields, F&& field) {
    std::size_t i = 0;
    scratch.clear();
    bool in_quote = false;
    for (; p < end; ++p) {
        char c = *p;
        if (c == quote) {
            if (in_quote && p + 1 < end && p[1] == quote) {
                scratch += quote;
                ++p;
            } else {
                in_quote = !in_quote;
            }
        } else if (c == sep && !in_quote) {
            if (i < max_fields) field(i, std::string_view(scratch));
            ++i;
            scratch.clear();
        } else {
            scratch += c;
        }
    }
    if (i < max_fields) field(i, std::string_view(scratch));
    return i + 1;
}

/// Splits one record on `sep`, calling field(i, text) for i < max_fields.
/// Returns the record's field count, or max_fields + 1 once it is known to
/// have more fields than that.
template <class F>
inline std::size_t split_record(const char* p, const char* end, char sep, const std::optional<char>& quote,
                                std::string& scratch, std::size_t max_fields, F&& field) {
    if (quote && std::memchr(p, *quote, static_cast<std::size_t>(end - p)))
        return split_quoted(p, end, sep, *quote, scratch, max_fields, field);
    std::size_t i = 0;
    for (;;) {
        const char* s = static_cast<const char*>(std::memchr(p, sep, static_cast<std::size_t>(end - p)));
        const char* fe = s ? s : end;
        if (i == max_fields) return max_fields + 1;
        field(i, std::string_view(p, static_cast<std::size_t>(fe - p)));
        ++i;
        if (!s) return i;
        p = s + 1;
    }
}

// Typed append target prepared once per parse so the per-field path does no
// variant dispatch.
struct CellSink {
    ColumnType type = ColumnType::Skip;
    std::vector<std::uint8_t>* null = nullptr;
    std::vector<std::uint8_t>* logical = nullptr;
    std::vector<std::int64_t>* integer = nullptr;
    std::vector<double>* real = nullptr;
    std::vector<std::string>* text = nullptr;
    std::vector<std::complex<double>>* cplx = nullptr;
    std::uint64_t* failures = nullptr;

    void push_null() {
        null->push_back(1);
        switch (type) {
        case ColumnType::Logical: logical->push_back(0); break;
        case ColumnType::Integer: integer->push_back(0); break;
        case ColumnType::Real:
        case ColumnType::Timestamp: real->push_back(0.0); break;
        case ColumnType::Character:
        case ColumnType::Bytes: text->emplace_back(); break;
        case ColumnType::Complex: cplx->emplace_back(); break;
        case ColumnType::Skip: break;
        }
    }

    void fail() {
        push_null();
        ++*failures;
    }

    void push(std::string_view f) {
        if (type == ColumnType::Skip) return;
        if (f.empty()) return fail();
        if (f.size() == 2 && f[0] == 'N' && f[1] == 'A') return push_null();
        switch (type) {
        case ColumnType::Logical:
            if (auto v = parse_logical(f)) {
                null->push_back(0);
                logical->push_back(*v ? 1 : 0);
                return;
            }
            return fail();
        case ColumnType::Integer:
            if (auto v = parse_integer(f)) {
                null->push_back(0);
                integer->push_back(*v);
                return;
            }
            return fail();
        case ColumnType::Real:
            if (auto v = parse_real(f)) {
                null->push_back(0);
                real->push_back(*v);
                return;
            }
            return fail();
        case ColumnType::Timestamp:
            if (auto v = parse_timestamp(f)) {
                null->push_back(0);
                real->push_back(*v);
                return;
            }
            return fail();
        case ColumnType::Character:
            null->push_back(0);
            text->emplace_back(f);
            return;
        case ColumnType::Bytes:
            if (auto v = parse_bytes(f)) {
                null->push_back(0);
                text->push_back(std::move(*v));
                return;
            }
            return fail();
        case ColumnType::Complex:
            if (auto v = parse_complex(f)) {
                null->push_back(0);
                cplx->push_back(*v);
                return;
            }
            return fail();
        case ColumnType::Skip: return;
        }
    }
};

inline std::vector<CellSink> make_sinks(const Schema& schema, Frame& frame, ParseStats& stats) {
    std::vector<CellSink> sinks(schema.types.size());
    std::size_t out = 0;
    for (std::size_t i = 0; i < schema.types.size(); ++i) {
        ColumnType t = schema.types[i];
        sinks[i].type = t;
        if (t == ColumnType::Skip) continue;
        Column& c = frame.columns[out];
        CellSink& s = sinks[i];
        s.null = &c.null;
        s.failures = &stats.failures[out];
        switch (t) {
        case ColumnType::Logical: s.logical = &c.as<std::uint8_t>(); break;
        case ColumnType::Integer: s.integer = &c.as<std::int64_t>(); break;
        case ColumnType::Real:
        case ColumnType::Timestamp: s.real = &c.as<double>(); break;
        case ColumnType::Character:
        case ColumnType::Bytes: s.text = &c.as<std::string>(); break;
        case ColumnType::Complex: s.cplx = &c.as<std::complex<double>>(); break;
        case ColumnType::Skip: break;
        }
        ++out;
    }
    return sinks;
}

inline std::size_t count_records(std::string_view chunk) {
    std::size_t n = 0;
    const char* p = chunk.data();
    const char* end = p + chunk.size();
    while (p < end) {
        const char* nl = static_cast<const char*>(std::memchr(p, '\n', static_cast<std::size_t>(end - p)));
        ++n;
        if (!nl) break;
        p = nl + 1;
    }
    return n;
}

inline void enforce_strict(const Schema& schema, const ParsedFrame& r) {
    if (!schema.strict || r.stats.clean()) return;
    throw Error(ErrorKind::StrictViolation, std::to_string(r.stats.total_failures()) + " coercion failures, " +
                                                std::to_string(r.stats.short_rows) + " short rows, " +
                                                std::to_string(r.stats.long_rows) + " long rows");
}

}  // namespace detail

/// Parses delimited records into a typed Frame, skipping the first
/// `skip_lines` records. Unparseable fields become null and are counted.
/// Short records are null-padded and long records truncated; both are
/// counted in the returned stats.
inline ParsedFrame parse_frame(std::string_view chunk, const Schema& schema, std::size_t skip_lines = 0) {
    schema.validate();
    ParsedFrame r;
    r.frame = empty_frame(schema);
    r.stats.failures.assign(r.frame.n_cols(), 0);

    std::size_t expect = detail::count_records(chunk);
    expect = expect > skip_lines ? expect - skip_lines : 0;
    for (auto& c : r.frame.columns) c.reserve(expect);

    auto sinks = detail::make_sinks(schema, r.frame, r.stats);
    const std::size_t width = schema.types.size();
    std::string scratch;

    detail::for_each_line(chunk, schema.strip_cr, [&](const char* b, const char* e) {
        if (skip_lines > 0) {
            --skip_lines;
            return true;
        }
        std::size_t n = detail::split_record(b, e, schema.field_sep, schema.quote, scratch, width,
                                             [&](std::size_t i, std::string_view f) { sinks[i].push(f); });
        if (n < width) {
            for (std::size_t i = n; i < width; ++i)
                if (sinks[i].type != ColumnType::Skip) sinks[i].push_null();
            ++r.stats.short_rows;
        } else if (n > width) {
            ++r.stats.long_rows;
        }
        ++r.stats.records;
        return true;
    });
    r.frame.n_rows = r.stats.records;
    detail::enforce_strict(schema, r);
    return r;
}

/// Splits off the first record as a header. Returns the header fields and
/// the remaining bytes.
inline std::pair<std::vector<std::string>, std::string_view> split_header(std::string_view chunk, const Schema& schema) {
    if (chunk.empty()) throw Error(ErrorKind::HeaderArityMismatch, "input has no header record");
    const char* nl = static_cast<const char*>(std::memchr(chunk.data(), '\n', chunk.size()));
    std::size_t line_len = nl ? static_cast<std::size_t>(nl - chunk.data()) : chunk.size();
    std::string_view rest = nl ? chunk.substr(line_len + 1) : std::string_view{};
    const char* b = chunk.data();
    const char* e = b + line_len;
    if (schema.strip_cr && e > b && e[-1] == '\r') --e;
    std::vector<std::string> fields;
    std::string scratch;
    detail::split_record(b, e, schema.field_sep, schema.quote, scratch, static_cast<std::size_t>(-2),
                         [&](std::size_t, std::string_view f) { fields.emplace_back(f); });
    return {std::move(fields), rest};
}

/// Takes column names from the header row and applies them to `schema`
/// (header fields of Skip columns are dropped).
inline void apply_header(Schema& schema, const std::vector<std::string>& header) {
    if (header.size() != schema.types.size())
        throw Error(ErrorKind::HeaderArityMismatch, "header has " + std::to_string(header.size()) + " fields, schema has " +
                                                        std::to_string(schema.types.size()));
    schema.names.clear();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (schema.types[i] != ColumnType::Skip) schema.names.push_back(header[i]);
    schema.validate();
}

/// parse_frame for a chunk whose first record is a header. Any names already
/// in `schema` are replaced by the header's.
inline ParsedFrame parse_frame_with_header(std::string_view chunk, Schema schema) {
    auto [header, rest] = split_header(chunk, schema);
    apply_header(schema, header);
    return parse_frame(rest, schema, 0);
}

/// Narrowest type per column in the chain Logical -> Integer -> Real ->
/// Character that accepts every non-null sampled field. All-null columns
/// become Character; Bytes, Complex and Timestamp are never inferred.
inline Schema infer_schema(std::string_view sample, std::size_t max_records, char field_sep, std::size_t skip_lines = 0) {
    if (max_records == 0) throw Error(ErrorKind::SchemaError, "max_records must be positive");
    std::vector<unsigned> ok;  // bit k: level k (logical, integer, real, character) accepts every field so far
    std::vector<bool> seen;
    std::size_t width = 0;
    std::size_t taken = 0;
    std::string scratch;
    std::vector<std::string_view> fields;

    auto accepts = [](int lvl, std::string_view f) {
        switch (lvl) {
        case 0: return parse_logical(f).has_value();
        case 1: return parse_integer(f).has_value();
        case 2: return parse_real(f).has_value();
        default: return true;
        }
    };

    detail::for_each_line(sample, true, [&](const char* b, const char* e) {
        if (skip_lines > 0) {
            --skip_lines;
            return true;
        }
        fields.clear();
        detail::split_record(b, e, field_sep, std::nullopt, scratch, static_cast<std::size_t>(-2),
                             [&](std::size_t, std::string_view f) { fields.push_back(f); });
        if (taken == 0) {
            width = fields.size();
            ok.assign(width, 0b1111u);
            seen.assign(width, false);
        } else if (fields.size() != width) {
            throw Error(ErrorKind::RaggedSample, "record " + std::to_string(taken + 1) + " has " +
                                                     std::to_string(fields.size()) + " fields, expected " +
                                                     std::to_string(width));
        }
        for (std::size_t j = 0; j < width; ++j) {
            if (is_null_token(fields[j])) continue;
            seen[j] = true;
            for (int k = 0; k < 3; ++k)
                if ((ok[j] >> k & 1u) && !accepts(k, fields[j])) ok[j] &= ~(1u << k);
        }
        return ++taken < max_records;
    });
    if (taken == 0) throw Error(ErrorKind::SchemaError, "sample contains no records");

    Schema s;
    s.field_sep = field_sep;
    constexpr ColumnType chain[] = {ColumnType::Logical, ColumnType::Integer, ColumnType::Real, ColumnType::Character};
    for (std::size_t j = 0; j < width; ++j) s.types.push_back(seen[j] ? chain[std::countr_zero(ok[j])] : ColumnType::Character);
    return s;
}

}  // namespace iochunk
