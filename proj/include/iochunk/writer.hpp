#pragma once

#include <cerrno>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

#include "iochunk/error.hpp"
#include "iochunk/field.hpp"
#include "iochunk/frame.hpp"
#include "iochunk/matrix.hpp"
#include "iochunk/source.hpp"

namespace iochunk {

struct WriteOptions {
    char field_sep = ',';
    bool include_header = false;
    /// When set, cells that would collide with the separator are quoted;
    /// otherwise such cells raise SeparatorCollision.
    std::optional<char> quote;
};

namespace detail {

inline void append_text_cell(std::string& out, std::string_view s, const WriteOptions& opts) {
    bool collides = s.find(opts.field_sep) != std::string_view::npos || s.find('\n') != std::string_view::npos;
    bool has_quote = opts.quote && s.find(*opts.quote) != std::string_view::npos;
    if (!collides && !has_quote) {
        out += s;
        return;
    }
    if (s.find('\n') != std::string_view::npos)
        throw Error(ErrorKind::SeparatorCollision, "cell contains a newline");
    if (!opts.quote) throw Error(ErrorKind::SeparatorCollision, "cell contains the field separator");
    const char q = *opts.quote;
    out += q;
    for (char c : s) {
        if (c == q) out += q;
        out += c;
    }
    out += q;
}

inline void append_cell(std::string& out, const Column& c, std::size_t i, const WriteOptions& opts) {
    if (c.is_null(i)) {
        out += "NA";
        return;
    }
    switch (c.type) {
    case ColumnType::Logical: out += c.as<std::uint8_t>()[i] ? "TRUE" : "FALSE"; break;
    case ColumnType::Integer: append_integer(out, c.as<std::int64_t>()[i]); break;
    case ColumnType::Real: append_real(out, c.as<double>()[i]); break;
    case ColumnType::Timestamp: append_timestamp(out, c.as<double>()[i]); break;
    case ColumnType::Character: append_text_cell(out, c.as<std::string>()[i], opts); break;
    case ColumnType::Bytes: append_bytes_hex(out, c.as<std::string>()[i]); break;
    case ColumnType::Complex: append_complex(out, c.as<std::complex<double>>()[i]); break;
    case ColumnType::Skip: break;
    }
}

}  // namespace detail

/// Renders a frame as delimited text: one record per row, nulls as NA, every
/// record newline-terminated. Reals use the shortest exact decimal form.
inline std::string format_frame(const Frame& frame, const WriteOptions& opts = {}) {
    std::string out;
    out.reserve(frame.n_rows * (frame.n_cols() * 8 + 1));
    if (opts.include_header) {
        for (std::size_t j = 0; j < frame.names.size(); ++j) {
            if (j) out += opts.field_sep;
            detail::append_text_cell(out, frame.names[j], opts);
        }
        out += '\n';
    }
    for (std::size_t i = 0; i < frame.n_rows; ++i) {
        for (std::size_t j = 0; j < frame.n_cols(); ++j) {
            if (j) out += opts.field_sep;
            detail::append_cell(out, frame.columns[j], i, opts);
        }
        out += '\n';
    }
    return out;
}

/// Headerless, row-name-free rendering of a matrix.
template <class T>
std::string format_matrix(const DenseMatrix<T>& m, char field_sep = ',') {
    std::string out;
    out.reserve(m.n_rows() * m.n_cols() * 12);
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
        auto row = m.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += field_sep;
            const T& v = row[j];
            if constexpr (std::is_same_v<T, double>) {
                append_real(out, v);
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                if (v == MatrixElement<ColumnType::Integer>::na()) out += "NA";
                else append_integer(out, v);
            } else if constexpr (std::is_same_v<T, std::int8_t>) {
                if (v == MatrixElement<ColumnType::Logical>::na()) out += "NA";
                else out += v ? "TRUE" : "FALSE";
            } else if constexpr (std::is_same_v<T, std::complex<double>>) {
                append_complex(out, v);
            } else {
                out += v;
            }
        }
        out += '\n';
    }
    return out;
}

/// Append-only file sink for checkpoints. Single owner.
class FileSink {
public:
    /// Opens `path` for appending; `truncate` starts it empty.
    explicit FileSink(const std::filesystem::path& path, bool truncate = false) : path_(path) {
        int flags = O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC | (truncate ? O_TRUNC : 0);
        int fd = path == "-" ? STDOUT_FILENO : ::open(path.c_str(), flags, 0644);
        if (fd < 0)
            throw Error(ErrorKind::WriteFailure, "cannot open " + path.string() + ": " + std::strerror(errno));
        fd_ = UniqueFd(fd, path != "-");
    }

    void write(std::string_view bytes) {
        while (!bytes.empty()) {
            ssize_t n = ::write(fd_.get(), bytes.data(), bytes.size());
            if (n < 0) {
                if (errno == EINTR) continue;
                throw Error(ErrorKind::WriteFailure, path_.string() + ": " + std::strerror(errno));
            }
            bytes.remove_prefix(static_cast<std::size_t>(n));
            bytes_written_ += static_cast<std::uint64_t>(n);
        }
    }

    std::uint64_t bytes_written() const noexcept { return bytes_written_; }
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    UniqueFd fd_;
    std::uint64_t bytes_written_ = 0;
};

/// Appends one formatted block to the checkpoint. Blocks produced by
/// format_frame/format_matrix end in a newline, so successive appends form
/// one valid delimited file.
inline FileSink& append_to_checkpoint(FileSink& sink, std::string_view bytes) {
    sink.write(bytes);
    return sink;
}

inline std::filesystem::path names_sidecar(const std::filesystem::path& checkpoint) {
    return std::filesystem::path(checkpoint.string() + ".names");
}

/// One column name per line.
inline void write_names(const std::filesystem::path& path, const std::vector<std::string>& names) {
    std::string body;
    for (const auto& n : names) {
        if (n.find('\n') != std::string::npos) throw Error(ErrorKind::WriteFailure, "column name contains a newline");
        body += n;
        body += '\n';
    }
    FileSink sink(path, true);
    sink.write(body);
}

inline std::vector<std::string> read_names(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ReadFailure, "cannot open " + path.string());
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        names.push_back(line);
    }
    return names;
}

}  // namespace iochunk
