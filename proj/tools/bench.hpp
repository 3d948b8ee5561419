#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "iochunk/chunker.hpp"
#include "iochunk/frame.hpp"

namespace iochunk::tools {

/// Writes roughly `target_bytes` of mixed-type delimited records (no
/// header) and returns the schema describing them.
Schema write_synthetic_csv(const std::filesystem::path& path, std::uint64_t target_bytes, std::uint64_t seed = 42);

struct BenchOptions {
    std::filesystem::path input;  // used when size_mb is unset
    std::optional<double> size_mb;
    std::optional<Schema> schema;  // inferred from the input when unset
    bool header = false;
    std::size_t trials = 5;
    std::uint64_t seed = 42;
    ChunkerConfig chunker;
};

struct BenchReport {
    std::uint64_t bytes = 0;
    std::uint64_t rows = 0;
    Schema schema;
    std::vector<double> bulk_seconds;
    std::vector<double> naive_seconds;
    std::vector<double> raw_seconds;
    bool identical = false;

    static double median(std::vector<double> v);
    double mbps(const std::vector<double>& secs) const;
    double bulk_mbps() const { return mbps(bulk_seconds); }
    double naive_mbps() const { return mbps(naive_seconds); }
    double raw_mbps() const { return mbps(raw_seconds); }
    /// naive time / bulk time, medians.
    double speedup() const { return median(naive_seconds) / median(bulk_seconds); }

    std::string to_text() const;
};

/// Times (a) chunked bulk parse_frame, (b) the naive per-line parser and
/// (c) a raw read of the same bytes, and checks (a) and (b) agree.
BenchReport run_bench(const BenchOptions& opts);

}  // namespace iochunk::tools
