#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "iochunk/error.hpp"
#include "iochunk/source.hpp"

namespace iochunk {

inline constexpr std::size_t kDefaultChunkBytes = std::size_t{32} << 20;

struct ChunkerConfig {
    std::size_t target_bytes = kDefaultChunkBytes;
    /// 0 means 8 * target_bytes.
    std::size_t hard_cap_bytes = 0;
    char record_sep = '\n';

    std::size_t hard_cap() const noexcept { return hard_cap_bytes ? hard_cap_bytes : 8 * target_bytes; }

    void validate() const {
        if (target_bytes == 0) throw Error(ErrorKind::SchemaError, "target_bytes must be positive");
        if (hard_cap() < target_bytes) throw Error(ErrorKind::SchemaError, "hard_cap_bytes < target_bytes");
    }
};

/// A record-aligned slice of the source. Unless is_last, data ends with the
/// record separator.
struct Chunk {
    std::string data;
    std::uint64_t seq = 0;
    /// Absolute offset of data[0] in the source.
    std::uint64_t offset = 0;
    bool is_last = false;
};

/// Resumable chunking state: the carried partial record plus stream position.
struct ChunkCursor {
    std::string carry;
    std::uint64_t offset = 0;  // absolute offset of carry[0]
    std::uint64_t seq = 0;
    bool eof = false;
};

namespace detail {

inline constexpr std::size_t kMinRead = 64 * 1024;

// Appends up to `n` bytes from `src`; sets cur.eof when the source is drained.
// Reads in bounded pieces so a small input never pays for a full-size buffer.
inline void fill(ByteSource& src, ChunkCursor& cur, std::size_t n) {
    constexpr std::size_t kPiece = 1 << 20;
    std::size_t got = 0;
    while (got < n) {
        const std::size_t want = std::min(n - got, kPiece);
        const std::size_t old = cur.carry.size();
        cur.carry.resize(old + want);
        std::size_t r = src.read(std::span<char>(cur.carry.data() + old, want));
        cur.carry.resize(old + r);
        if (r == 0) {
            cur.eof = true;
            break;
        }
        got += r;
    }
}

inline std::size_t record_start_before(const std::string& buf, std::size_t pos, char sep) {
    const void* hit = ::memrchr(buf.data(), sep, pos);
    return hit ? static_cast<std::size_t>(static_cast<const char*>(hit) - buf.data()) + 1 : 0;
}

}  // namespace detail

/// Produces the next chunk from `src`, or nullopt at end of stream.
///
/// Chunk boundaries are a function of absolute stream offsets only: with
/// target T, a chunk holds exactly the records whose first byte lies in one
/// grid cell [kT, (k+1)T) (cells owning no record start are skipped). So a
/// chunk starting in cell k ends at the first separator at or after
/// (k+1)T - 1, and readers starting at any cell boundary reproduce the same
/// chunks as a single sequential pass.
inline std::optional<Chunk> next_chunk(ByteSource& src, const ChunkerConfig& cfg, ChunkCursor& cur) {
    const std::size_t target = cfg.target_bytes;
    const std::size_t cap = cfg.hard_cap();
    const char sep = cfg.record_sep;

    if (cur.carry.empty() && !cur.eof) detail::fill(src, cur, std::max(target, detail::kMinRead));
    if (cur.carry.empty()) return std::nullopt;

    const std::uint64_t cell_end = (cur.offset / target + 1) * target;
    std::size_t search_from = static_cast<std::size_t>(cell_end - 1 - cur.offset);
    std::size_t cut = 0;
    std::size_t step = detail::kMinRead;

    for (;;) {
        if (cur.carry.size() <= search_from && !cur.eof)
            detail::fill(src, cur, std::max(search_from + 1 - cur.carry.size(), detail::kMinRead));
        if (cur.carry.size() > search_from) {
            const void* hit = std::memchr(cur.carry.data() + search_from, sep, cur.carry.size() - search_from);
            if (hit) {
                std::size_t q = static_cast<std::size_t>(static_cast<const char*>(hit) - cur.carry.data());
                std::size_t rec = detail::record_start_before(cur.carry, q, sep);
                if (q + 1 - rec > cap)
                    throw Error(ErrorKind::RecordTooLarge,
                                "record at offset " + std::to_string(cur.offset + rec) + " exceeds " + std::to_string(cap) + " bytes");
                cut = q + 1;
                break;
            }
        }
        std::size_t rec = detail::record_start_before(cur.carry, std::min(search_from, cur.carry.size()), sep);
        if (cur.carry.size() - rec > cap)
            throw Error(ErrorKind::RecordTooLarge,
                        "record at offset " + std::to_string(cur.offset + rec) + " exceeds " + std::to_string(cap) + " bytes");
        if (cur.eof) {
            cut = cur.carry.size();
            break;
        }
        search_from = std::max(search_from, cur.carry.size());
        detail::fill(src, cur, step);
        step = std::min(2 * step, std::max(target, detail::kMinRead));
    }

    Chunk chunk;
    chunk.seq = cur.seq++;
    chunk.offset = cur.offset;
    if (cut == cur.carry.size()) {
        chunk.data = std::move(cur.carry);
        cur.carry.clear();
    } else {
        chunk.data.assign(cur.carry, 0, cut);
        cur.carry.erase(0, cut);
    }
    cur.offset += cut;
    if (cur.carry.empty() && !cur.eof) detail::fill(src, cur, std::max(target, detail::kMinRead));
    chunk.is_last = cur.eof && cur.carry.empty();
    return chunk;
}

/// Sequential chunk reader; the single owner of its source position.
class Chunker {
public:
    Chunker(ByteSource& src, ChunkerConfig cfg, std::uint64_t start_offset = 0) : src_(&src), cfg_(cfg) {
        cfg_.validate();
        cur_.offset = start_offset;
    }

    std::optional<Chunk> next() { return next_chunk(*src_, cfg_, cur_); }
    const ChunkerConfig& config() const noexcept { return cfg_; }

    class iterator {
    public:
        using iterator_category = std::input_iterator_tag;
        using value_type = Chunk;
        using difference_type = std::ptrdiff_t;
        using pointer = Chunk*;
        using reference = Chunk&;

        iterator() = default;
        explicit iterator(Chunker* owner) : owner_(owner) { advance(); }

        Chunk& operator*() { return *current_; }
        Chunk* operator->() { return &*current_; }
        iterator& operator++() {
            advance();
            return *this;
        }
        void operator++(int) { advance(); }
        friend bool operator==(const iterator& it, std::default_sentinel_t) { return !it.current_; }

    private:
        void advance() { current_ = owner_->next(); }
        Chunker* owner_ = nullptr;
        std::optional<Chunk> current_;
    };

    iterator begin() { return iterator(this); }
    std::default_sentinel_t end() { return {}; }

private:
    ByteSource* src_;
    ChunkerConfig cfg_;
    ChunkCursor cur_;
};

/// Pull-based iteration over the chunks of `src`.
inline Chunker iter_chunks(ByteSource& src, const ChunkerConfig& cfg) { return Chunker(src, cfg); }

/// Near-equal provisional ranges covering [0, file_size); the remainder goes
/// to the earliest ranges.
inline std::vector<ByteRange> byte_range_splits(std::uint64_t file_size, std::uint64_t n_splits) {
    if (n_splits == 0) throw Error(ErrorKind::SchemaError, "n_splits must be >= 1");
    std::vector<ByteRange> out;
    out.reserve(n_splits);
    const std::uint64_t base = file_size / n_splits;
    const std::uint64_t rem = file_size % n_splits;
    std::uint64_t at = 0;
    for (std::uint64_t i = 0; i < n_splits; ++i) {
        std::uint64_t len = base + (i < rem ? 1 : 0);
        out.push_back({at, len});
        at += len;
    }
    return out;
}

/// Splits whose boundaries fall on multiples of `cell_bytes`, so that each
/// split's chunks coincide with the chunks of a sequential pass.
inline std::vector<ByteRange> grid_aligned_splits(std::uint64_t file_size, std::uint64_t n_splits, std::uint64_t cell_bytes) {
    const std::uint64_t cells = (file_size + cell_bytes - 1) / cell_bytes;
    auto splits = byte_range_splits(cells, n_splits);
    for (auto& r : splits) {
        r.offset *= cell_bytes;
        r.length = std::min(r.length * cell_bytes, file_size - std::min(file_size, r.offset));
    }
    return splits;
}

}  // namespace iochunk
