#pragma once

#include <algorithm>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include "iochunk/error.hpp"

namespace iochunk {

/// Pull-based byte stream. read() returns 0 only at end of stream and throws
/// Error(ReadFailure) on I/O errors.
class ByteSource {
public:
    virtual ~ByteSource() = default;
    virtual std::size_t read(std::span<char> out) = 0;
};

class MemorySource final : public ByteSource {
public:
    explicit MemorySource(std::string_view bytes) : bytes_(bytes) {}

    std::size_t read(std::span<char> out) override {
        std::size_t n = std::min(out.size(), bytes_.size() - pos_);
        std::memcpy(out.data(), bytes_.data() + pos_, n);
        pos_ += n;
        return n;
    }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

class UniqueFd {
public:
    UniqueFd() = default;
    explicit UniqueFd(int fd, bool owned = true) : fd_(fd), owned_(owned) {}
    UniqueFd(UniqueFd&& o) noexcept : fd_(std::exchange(o.fd_, -1)), owned_(o.owned_) {}
    UniqueFd& operator=(UniqueFd&& o) noexcept {
        if (this != &o) {
            reset();
            fd_ = std::exchange(o.fd_, -1);
            owned_ = o.owned_;
        }
        return *this;
    }
    UniqueFd(const UniqueFd&) = delete;
    UniqueFd& operator=(const UniqueFd&) = delete;
    ~UniqueFd() { reset(); }

    int get() const noexcept { return fd_; }
    void reset() noexcept {
        if (fd_ >= 0 && owned_) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_ = -1;
    bool owned_ = true;
};

inline UniqueFd open_for_read(const std::filesystem::path& path) {
    if (path == "-") return UniqueFd(STDIN_FILENO, false);
    int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd < 0)
        throw Error(ErrorKind::ReadFailure, "cannot open " + path.string() + ": " + std::strerror(errno));
    return UniqueFd(fd);
}

/// True when `fd` refers to a regular file (pread-able at arbitrary offsets).
inline bool is_seekable(int fd) {
    struct stat st {};
    return ::fstat(fd, &st) == 0 && S_ISREG(st.st_mode);
}

inline std::uint64_t file_size(int fd) {
    struct stat st {};
    if (::fstat(fd, &st) != 0)
        throw Error(ErrorKind::ReadFailure, std::string("fstat: ") + std::strerror(errno));
    return static_cast<std::uint64_t>(st.st_size);
}

inline std::size_t read_some(int fd, std::span<char> out) {
    for (;;) {
        ssize_t n = ::read(fd, out.data(), out.size());
        if (n >= 0) return static_cast<std::size_t>(n);
        if (errno != EINTR) throw Error(ErrorKind::ReadFailure, std::strerror(errno));
    }
}

inline std::size_t pread_some(int fd, std::span<char> out, std::uint64_t offset) {
    for (;;) {
        ssize_t n = ::pread(fd, out.data(), out.size(), static_cast<off_t>(offset));
        if (n >= 0) return static_cast<std::size_t>(n);
        if (errno != EINTR) throw Error(ErrorKind::ReadFailure, std::strerror(errno));
    }
}

/// Sequential reader over a file, pipe or standard input ("-").
class FileSource final : public ByteSource {
public:
    explicit FileSource(const std::filesystem::path& path) : fd_(open_for_read(path)) {}
    explicit FileSource(UniqueFd fd) : fd_(std::move(fd)) {}

    std::size_t read(std::span<char> out) override { return read_some(fd_.get(), out); }
    int fd() const noexcept { return fd_.get(); }

private:
    UniqueFd fd_;
};

struct ByteRange {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;

    friend bool operator==(const ByteRange&, const ByteRange&) = default;
};

/// Reads the records owned by a provisional byte range of a regular file.
/// A record is owned iff its first byte lies in [offset, offset + length):
/// the reader skips the partial record at the front (unless offset is 0) and
/// reads past the end of the range to finish its last record.
class RangeSource final : public ByteSource {
public:
    RangeSource(const std::filesystem::path& path, ByteRange range, char record_sep)
        : fd_(open_for_read(path)), sep_(record_sep) {
        if (!is_seekable(fd_.get()))
            throw Error(ErrorKind::NotSeekable, path.string() + " is not a regular file");
        size_ = file_size(fd_.get());
        limit_ = std::min<std::uint64_t>(range.offset + range.length, size_);
        pos_ = owned_start(range.offset);
        begin_ = pos_;
        if (pos_ >= limit_) done_ = true;
    }

    /// Absolute file offset of the first owned record.
    std::uint64_t start() const noexcept { return begin_; }

    std::size_t read(std::span<char> out) override {
        if (done_ || out.empty()) return 0;
        if (pos_ < limit_) {
            auto want = static_cast<std::size_t>(std::min<std::uint64_t>(out.size(), limit_ - pos_));
            std::size_t n = pread_some(fd_.get(), out.first(want), pos_);
            if (n == 0) {
                done_ = true;
                return 0;
            }
            pos_ += n;
            last_ = out[n - 1];
            return n;
        }
        // Past the range end: finish the record in progress, if any.
        if (last_ == sep_) {
            done_ = true;
            return 0;
        }
        std::size_t n = pread_some(fd_.get(), out, pos_);
        if (n == 0) {
            done_ = true;
            return 0;
        }
        if (const void* hit = std::memchr(out.data(), sep_, n)) {
            n = static_cast<std::size_t>(static_cast<const char*>(hit) - out.data()) + 1;
            done_ = true;
        }
        pos_ += n;
        return n;
    }

private:
    std::uint64_t owned_start(std::uint64_t offset) {
        if (offset == 0) return 0;
        if (offset >= size_) return size_;
        char prev = 0;
        if (pread_some(fd_.get(), std::span<char>(&prev, 1), offset - 1) == 1 && prev == sep_) return offset;
        std::string block(64 * 1024, '\0');
        std::uint64_t at = offset;
        while (at < size_) {
            std::size_t n = pread_some(fd_.get(), block, at);
            if (n == 0) break;
            if (const void* hit = std::memchr(block.data(), sep_, n))
                return at + static_cast<std::uint64_t>(static_cast<const char*>(hit) - block.data()) + 1;
            at += n;
        }
        return size_;
    }

    UniqueFd fd_;
    char sep_;
    std::uint64_t size_ = 0;
    std::uint64_t limit_ = 0;
    std::uint64_t pos_ = 0;
    std::uint64_t begin_ = 0;
    char last_ = 0;
    bool done_ = false;
};

}  // namespace iochunk
