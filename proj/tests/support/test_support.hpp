#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "iochunk/iochunk.hpp"

namespace iochunk::testing {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "iochunk-test-XXXXXX").string();
        if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline void write_file(const fs::path& p, std::string_view bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + p.string());
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), {}};
}

inline std::vector<Chunk> drain(ByteSource& src, const ChunkerConfig& cfg) {
    std::vector<Chunk> out;
    for (auto& c : iter_chunks(src, cfg)) out.push_back(std::move(c));
    return out;
}

/// Newline-terminated records of random printable bytes, lengths 0..max_len.
inline std::string random_records(std::mt19937_64& rng, std::size_t n, std::size_t max_len = 40) {
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<int> ch(32, 126);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t l = len(rng);
        for (std::size_t k = 0; k < l; ++k) out += static_cast<char>(ch(rng));
        out += '\n';
    }
    return out;
}

/// Random non-null cell generators. Values are restricted to what the text
/// format can carry: character cells are never "" or "NA" and avoid
/// newlines (and the separator unless quoting is on); bytes are non-empty.
class CellGen {
public:
    CellGen(std::mt19937_64& rng, bool allow_sep) : rng_(rng), allow_sep_(allow_sep) {}

    bool logical() { return coin(0.5); }

    std::int64_t integer() {
        switch (pick(6)) {
        case 0: return std::numeric_limits<std::int64_t>::min();
        case 1: return std::numeric_limits<std::int64_t>::max();
        case 2: return 0;
        case 3: return std::uniform_int_distribution<std::int64_t>(-1000, 1000)(rng_);
        default: return static_cast<std::int64_t>(rng_());
        }
    }

    double real() {
        switch (pick(10)) {
        case 0: return std::numeric_limits<double>::quiet_NaN();
        case 1: return coin(0.5) ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        case 2: return coin(0.5) ? -0.0 : 0.0;
        case 3: return std::numeric_limits<double>::denorm_min() * static_cast<double>(pick(1000) + 1);
        case 4: return static_cast<double>(std::uniform_int_distribution<int>(-99999, 99999)(rng_)) / 100.0;
        default: return finite_bits();
        }
    }

    double timestamp() {
        switch (pick(4)) {
        case 0: return static_cast<double>(std::uniform_int_distribution<std::int64_t>(-2000000000LL, 4000000000LL)(rng_));
        case 1: return static_cast<double>(std::uniform_int_distribution<std::int64_t>(0, 1700000000)(rng_)) + 0.25;
        case 2: return -62167219200.0;  // 0000-01-01 00:00:00
        default: return finite_bits();
        }
    }

    std::string text() {
        static const std::string plain =
            "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _-.;:!?/()[]{}<>@#$%^&*+=~`'";
        std::string s;
        std::size_t len = 1 + pick(12);
        for (std::size_t i = 0; i < len; ++i) {
            if (allow_sep_ && coin(0.08)) s += coin(0.5) ? ',' : '"';
            else s += plain[pick(plain.size())];
        }
        if (s == "NA") s += "x";
        return s;
    }

    std::string bytes() {
        std::string s(1 + pick(10), '\0');
        for (auto& c : s) c = static_cast<char>(pick(256));
        return s;
    }

    std::complex<double> complex() {
        auto part = [&]() -> double {
            switch (pick(5)) {
            case 0: return 0.0;
            case 1: return -0.0;
            case 2: return static_cast<double>(std::uniform_int_distribution<int>(-500, 500)(rng_)) / 8.0;
            default: return finite_bits();
            }
        };
        double re = part();
        double im = part();
        return {re, im};
    }

    bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }
    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

private:
    double finite_bits() {
        for (;;) {
            double v = std::bit_cast<double>(rng_());
            if (std::isfinite(v)) return v;
        }
    }

    std::mt19937_64& rng_;
    bool allow_sep_;
};

inline void push_random(Column& c, CellGen& g) {
    FieldValue v;
    switch (c.type) {
    case ColumnType::Logical: v = g.logical(); break;
    case ColumnType::Integer: v = g.integer(); break;
    case ColumnType::Real: v = g.real(); break;
    case ColumnType::Timestamp: v = g.timestamp(); break;
    case ColumnType::Character: v = g.text(); break;
    case ColumnType::Bytes: v = g.bytes(); break;
    case ColumnType::Complex: v = g.complex(); break;
    case ColumnType::Skip: return;
    }
    c.push(v);
}

/// Random frame over the non-Skip entries of `schema`.
inline Frame random_frame(std::mt19937_64& rng, const Schema& schema, std::size_t rows, double null_rate = 0.1) {
    CellGen g(rng, schema.quote.has_value());
    Frame f = empty_frame(schema);
    for (std::size_t r = 0; r < rows; ++r)
        for (auto& c : f.columns) {
            if (g.coin(null_rate)) c.push_null();
            else push_random(c, g);
        }
    f.n_rows = rows;
    return f;
}

inline DenseMatrix<double> random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::normal_distribution<double> z;
    DenseMatrix<double> m(rows, cols);
    for (auto& v : m.data()) v = z(rng);
    return m;
}

}  // namespace iochunk::testing
