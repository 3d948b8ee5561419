#pragma once

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "iochunk/error.hpp"

namespace iochunk {

enum class ColumnType : std::uint8_t { Logical, Integer, Real, Character, Bytes, Complex, Timestamp, Skip };

inline std::string_view to_string(ColumnType t) {
    switch (t) {
    case ColumnType::Logical: return "logical";
    case ColumnType::Integer: return "integer";
    case ColumnType::Real: return "real";
    case ColumnType::Character: return "character";
    case ColumnType::Bytes: return "bytes";
    case ColumnType::Complex: return "complex";
    case ColumnType::Timestamp: return "timestamp";
    case ColumnType::Skip: return "skip";
    }
    return "?";
}

/// Single-letter codes used on the command line: l i r c b x t s.
inline char type_letter(ColumnType t) {
    constexpr char letters[] = {'l', 'i', 'r', 'c', 'b', 'x', 't', 's'};
    return letters[static_cast<int>(t)];
}

inline ColumnType type_from_letter(char c) {
    switch (c) {
    case 'l': return ColumnType::Logical;
    case 'i': return ColumnType::Integer;
    case 'r': return ColumnType::Real;
    case 'c': return ColumnType::Character;
    case 'b': return ColumnType::Bytes;
    case 'x': return ColumnType::Complex;
    case 't': return ColumnType::Timestamp;
    case 's': return ColumnType::Skip;
    }
    throw Error(ErrorKind::SchemaError, std::string("unknown column type letter '") + c + "'");
}

/// "i,c,r" -> {Integer, Character, Real}.
inline std::vector<ColumnType> parse_type_letters(std::string_view spec) {
    std::vector<ColumnType> out;
    std::size_t at = 0;
    while (at <= spec.size()) {
        std::size_t comma = spec.find(',', at);
        if (comma == std::string_view::npos) comma = spec.size();
        std::string_view tok = spec.substr(at, comma - at);
        if (tok.size() != 1) throw Error(ErrorKind::SchemaError, "bad type token '" + std::string(tok) + "'");
        out.push_back(type_from_letter(tok[0]));
        at = comma + 1;
    }
    return out;
}

inline std::string type_letters(const std::vector<ColumnType>& types) {
    std::string s;
    for (std::size_t i = 0; i < types.size(); ++i) {
        if (i) s += ',';
        s += type_letter(types[i]);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Civil calendar <-> day count (proleptic Gregorian, days since 1970-01-01).

inline constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) noexcept {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDate {
    std::int64_t year;
    unsigned month;
    unsigned day;
};

inline constexpr CivilDate civil_from_days(std::int64_t z) noexcept {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {y + (m <= 2), m, d};
}

inline constexpr unsigned days_in_month(std::int64_t y, unsigned m) noexcept {
    constexpr unsigned dim[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) return 29;
    return dim[m - 1];
}

// ---------------------------------------------------------------------------
// Field coercion. Every function returns nullopt on failure; none throws.

/// Empty field or the literal NA.
inline bool is_null_token(std::string_view f) noexcept { return f.empty() || f == "NA"; }

inline std::optional<bool> parse_logical(std::string_view f) noexcept {
    if (f == "TRUE" || f == "T") return true;
    if (f == "FALSE" || f == "F") return false;
    return std::nullopt;
}

inline std::optional<std::int64_t> parse_integer(std::string_view f) noexcept {
    if (!f.empty() && f.front() == '+') {
        f.remove_prefix(1);
        if (!f.empty() && f.front() == '-') return std::nullopt;
    }
    if (f.empty()) return std::nullopt;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size()) return std::nullopt;
    return v;
}

inline std::optional<double> parse_real(std::string_view f) noexcept {
    if (f.empty()) return std::nullopt;
    if (f == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (f == "Inf") return std::numeric_limits<double>::infinity();
    if (f == "-Inf") return -std::numeric_limits<double>::infinity();
    if (f.front() == '+') {
        f.remove_prefix(1);
        if (f.empty() || f.front() == '-' || f.front() == '+') return std::nullopt;
    }
    // from_chars also takes "inf", "nan" and friends; only the tokens above count.
    const char lead = f.front() == '-' && f.size() > 1 ? f[1] : f.front();
    if (lead != '.' && (lead < '0' || lead > '9')) return std::nullopt;
    double v = 0;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ptr != f.data() + f.size()) return std::nullopt;
    // Out-of-range magnitudes saturate like strtod rather than failing.
    if (ec == std::errc::result_out_of_range) {
        bool neg = f.front() == '-';
        std::size_t e = f.find_first_of("eE");
        bool tiny = e != std::string_view::npos && f.find('-', e) != std::string_view::npos;
        double mag = tiny ? 0.0 : std::numeric_limits<double>::infinity();
        return neg ? -mag : mag;
    }
    if (ec != std::errc()) return std::nullopt;
    return v;
}

/// "<re>+<im>i", "<re>-<im>i", "<re>", or "<im>i".
inline std::optional<std::complex<double>> parse_complex(std::string_view f) noexcept {
    if (f.empty()) return std::nullopt;
    if (f.back() != 'i') {
        auto re = parse_real(f);
        if (!re) return std::nullopt;
        return std::complex<double>(*re, 0.0);
    }
    std::string_view body = f.substr(0, f.size() - 1);
    std::size_t split = std::string_view::npos;
    for (std::size_t i = body.size(); i-- > 1;) {
        char c = body[i];
        if ((c == '+' || c == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    if (split == std::string_view::npos) {
        auto im = parse_real(body);
        if (!im) return std::nullopt;
        return std::complex<double>(0.0, *im);
    }
    auto re = parse_real(body.substr(0, split));
    std::string_view im_text = body.substr(split + 1);
    if (!re || im_text.empty() || im_text.front() == '+' || im_text.front() == '-') return std::nullopt;
    auto im = parse_real(im_text);
    if (!im) return std::nullopt;
    return std::complex<double>(*re, body[split] == '-' ? -*im : *im);
}

namespace detail {
inline bool digits(std::string_view s, std::size_t pos, std::size_t n, unsigned& out) noexcept {
    out = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        char c = s[i];
        if (c < '0' || c > '9') return false;
        out = out * 10 + static_cast<unsigned>(c - '0');
    }
    return true;
}
}  // namespace detail

/// "YYYY-MM-DD HH:MM:SS" read as UTC, or a bare number of epoch seconds.
inline std::optional<double> parse_timestamp(std::string_view f) noexcept {
    if (f.size() == 19 && f[4] == '-' && f[7] == '-' && f[10] == ' ' && f[13] == ':' && f[16] == ':') {
        unsigned y, mo, d, h, mi, s;
        if (!detail::digits(f, 0, 4, y) || !detail::digits(f, 5, 2, mo) || !detail::digits(f, 8, 2, d) ||
            !detail::digits(f, 11, 2, h) || !detail::digits(f, 14, 2, mi) || !detail::digits(f, 17, 2, s))
            return std::nullopt;
        if (mo < 1 || mo > 12 || d < 1 || d > days_in_month(y, mo) || h > 23 || mi > 59 || s > 59)
            return std::nullopt;
        std::int64_t days = days_from_civil(y, mo, d);
        return static_cast<double>(days * 86400 + h * 3600 + mi * 60 + s);
    }
    return parse_real(f);
}

inline int hex_nibble(char c) noexcept {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

/// Hex-encoded bytes, two digits per byte.
inline std::optional<std::string> parse_bytes(std::string_view f) {
    if (f.size() % 2 != 0) return std::nullopt;
    std::string out(f.size() / 2, '\0');
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = hex_nibble(f[2 * i]);
        int lo = hex_nibble(f[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out[i] = static_cast<char>((hi << 4) | lo);
    }
    return out;
}

/// Dynamically typed cell; monostate is null.
using FieldValue = std::variant<std::monostate, bool, std::int64_t, double, std::string, std::complex<double>>;

/// Coerces one separator-free field. Null on empty, "NA", or unparseable
/// input; callers tell the last case apart with is_null_token().
inline FieldValue parse_field(std::string_view f, ColumnType type) {
    if (is_null_token(f)) return std::monostate{};
    auto wrap = [](auto opt) -> FieldValue {
        if (!opt) return std::monostate{};
        return FieldValue(*std::move(opt));
    };
    switch (type) {
    case ColumnType::Logical: return wrap(parse_logical(f));
    case ColumnType::Integer: return wrap(parse_integer(f));
    case ColumnType::Real: return wrap(parse_real(f));
    case ColumnType::Character: return std::string(f);
    case ColumnType::Bytes: return wrap(parse_bytes(f));
    case ColumnType::Complex: return wrap(parse_complex(f));
    case ColumnType::Timestamp: return wrap(parse_timestamp(f));
    case ColumnType::Skip: return std::monostate{};
    }
    return std::monostate{};
}

/// A field that coerced to null without being the explicit NA token.
inline bool is_coercion_failure(std::string_view f, const FieldValue& v) noexcept {
    return std::holds_alternative<std::monostate>(v) && f != "NA";
}

// ---------------------------------------------------------------------------
// Rendering (the inverse of the parsers above).

/// Shortest decimal that reads back to the identical double.
inline void append_real(std::string& out, double v) {
    if (std::isnan(v)) {
        out += "NaN";
        return;
    }
    if (std::isinf(v)) {
        out += v < 0 ? "-Inf" : "Inf";
        return;
    }
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

inline void append_integer(std::string& out, std::int64_t v) {
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

inline void append_complex(std::string& out, std::complex<double> z) {
    append_real(out, z.real());
    out += std::signbit(z.imag()) ? '-' : '+';
    append_real(out, std::fabs(z.imag()));
    out += 'i';
}

inline void append_bytes_hex(std::string& out, std::string_view bytes) {
    constexpr char hex[] = "0123456789abcdef";
    for (unsigned char c : bytes) {
        out += hex[c >> 4];
        out += hex[c & 15];
    }
}

/// Whole seconds within years 0000..9999 render as a UTC date-time; anything
/// else falls back to plain epoch seconds.
inline void append_timestamp(std::string& out, double secs) {
    constexpr double lo = -62167219200.0;  // 0000-01-01 00:00:00
    constexpr double hi = 253402300799.0;  // 9999-12-31 23:59:59
    if (!(secs >= lo && secs <= hi) || secs != std::floor(secs) || (secs == 0 && std::signbit(secs))) {
        append_real(out, secs);
        return;
    }
    auto total = static_cast<std::int64_t>(secs);
    std::int64_t days = total >= 0 ? total / 86400 : -((-total + 86399) / 86400);
    std::int64_t rem = total - days * 86400;
    CivilDate c = civil_from_days(days);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u %02lld:%02lld:%02lld", static_cast<long long>(c.year), c.month,
                  c.day, static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                  static_cast<long long>(rem % 60));
    out += buf;
}

}  // namespace iochunk
