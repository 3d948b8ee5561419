#include "bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include <unistd.h>

#include "iochunk/frame_parser.hpp"
#include "iochunk/naive_parser.hpp"
#include "iochunk/source.hpp"

namespace iochunk::tools {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorKind::ReadFailure, "cannot open " + p.string());
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

Schema write_synthetic_csv(const std::filesystem::path& path, std::uint64_t target_bytes, std::uint64_t seed) {
    // Airline-like mix: mostly small integers, some reals, short codes.
    Schema s;
    s.types = parse_type_letters("i,i,i,r,c,l,i,r,c,i");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> small(0, 2400);
    std::uniform_int_distribution<int> delay(-60, 600);
    std::uniform_int_distribution<int> pct(0, 99);
    std::uniform_int_distribution<int> cents(-100000, 100000);
    std::uniform_int_distribution<int> letter(0, 25);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::WriteFailure, "cannot create " + path.string());
    std::string line;
    std::string block;
    std::uint64_t written = 0;
    auto na_or = [&](std::string v) { return pct(rng) < 2 ? std::string("NA") : v; };
    while (written < target_bytes) {
        line.clear();
        line += std::to_string(1987 + pct(rng) % 22) + ',';
        line += std::to_string(1 + pct(rng) % 12) + ',';
        line += na_or(std::to_string(small(rng))) + ',';
        line += na_or(std::to_string(cents(rng) / 100.0).substr(0, 8)) + ',';
        line += std::string{char('A' + letter(rng)), char('A' + letter(rng))} + ',';
        line += (pct(rng) < 50 ? "TRUE" : "FALSE");
        line += ',';
        line += na_or(std::to_string(delay(rng))) + ',';
        line += na_or(std::to_string(cents(rng) / 1000.0).substr(0, 7)) + ',';
        line += std::string{char('A' + letter(rng)), char('A' + letter(rng)), char('A' + letter(rng))} + ',';
        line += std::to_string(small(rng) * 3) + '\n';
        block += line;
        written += line.size();
        if (block.size() > (1 << 20)) {
            out.write(block.data(), static_cast<std::streamsize>(block.size()));
            block.clear();
        }
    }
    out.write(block.data(), static_cast<std::streamsize>(block.size()));
    if (!out) throw Error(ErrorKind::WriteFailure, "write failed: " + path.string());
    return s;
}

double BenchReport::median(std::vector<double> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double BenchReport::mbps(const std::vector<double>& secs) const {
    double m = median(secs);
    return m > 0 ? static_cast<double>(bytes) / 1e6 / m : 0;
}

std::string BenchReport::to_text() const {
    std::ostringstream o;
    char buf[160];
    o << "input: " << bytes << " bytes, " << rows << " rows, schema " << type_letters(schema.types) << "\n";
    o << "trials: " << bulk_seconds.size() << " (median reported)\n";
    std::snprintf(buf, sizeof buf, "bulk   parse : %10.2f MB/s\n", bulk_mbps());
    o << buf;
    std::snprintf(buf, sizeof buf, "naive  parse : %10.2f MB/s\n", naive_mbps());
    o << buf;
    std::snprintf(buf, sizeof buf, "raw    read  : %10.2f MB/s\n", raw_mbps());
    o << buf;
    std::snprintf(buf, sizeof buf, "naive/bulk time ratio : %.2f\n", speedup());
    o << buf;
    std::snprintf(buf, sizeof buf, "bulk parse/raw read time ratio : %.2f\n",
                  median(bulk_seconds) / std::max(median(raw_seconds), 1e-12));
    o << buf;
    o << "frames identical: " << (identical ? "yes" : "NO") << "\n";
    return o.str();
}

BenchReport run_bench(const BenchOptions& opts) {
    BenchReport rep;
    std::filesystem::path input = opts.input;
    std::optional<std::filesystem::path> temp;
    if (opts.size_mb) {
        temp = std::filesystem::temp_directory_path() /
               ("iochunk-bench-" + std::to_string(::getpid()) + "-" + std::to_string(opts.seed) + ".csv");
        rep.schema = write_synthetic_csv(*temp, static_cast<std::uint64_t>(*opts.size_mb * 1e6), opts.seed);
        input = *temp;
    }
    struct Cleanup {
        std::optional<std::filesystem::path>& p;
        ~Cleanup() {
            if (p) std::filesystem::remove(*p);
        }
    } cleanup{temp};

    if (opts.schema) {
        rep.schema = *opts.schema;
    } else if (!opts.size_mb) {
        FileSource probe(input);
        std::string sample(1 << 16, '\0');
        sample.resize(probe.read(sample));
        if (auto nl = sample.rfind('\n'); nl != std::string::npos) sample.resize(nl + 1);
        rep.schema = infer_schema(sample, 1000, ',', opts.header ? 1 : 0);
    }
    rep.bytes = std::filesystem::file_size(input);
    const std::size_t trials = std::max<std::size_t>(1, opts.trials);

    Frame bulk_frame;
    ParseStats bulk_stats;
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<ParsedFrame> parts;
        auto t0 = Clock::now();
        FileSource src(input);
        Chunker chunker(src, opts.chunker);
        std::size_t skip = opts.header ? 1 : 0;
        while (auto c = chunker.next()) {
            parts.push_back(parse_frame(c->data, rep.schema, skip));
            skip = 0;
        }
        rep.bulk_seconds.push_back(seconds_since(t0));
        if (t == 0) {
            bulk_frame = empty_frame(rep.schema);
            bulk_stats.failures.assign(bulk_frame.n_cols(), 0);
            for (auto& p : parts) {
                bulk_frame.append_rows(p.frame);
                bulk_stats.merge(p.stats);
            }
        }
    }

    ParsedFrame naive_result;
    for (std::size_t t = 0; t < trials; ++t) {
        auto t0 = Clock::now();
        std::string text = read_file(input);
        ParsedFrame r = naive::parse_frame(text, rep.schema, opts.header ? 1 : 0);
        rep.naive_seconds.push_back(seconds_since(t0));
        if (t == 0) naive_result = std::move(r);
    }

    std::string block(opts.chunker.target_bytes, '\0');
    for (std::size_t t = 0; t < trials; ++t) {
        auto t0 = Clock::now();
        FileSource src(input);
        std::uint64_t total = 0;
        while (std::size_t n = src.read(block)) total += n;
        rep.raw_seconds.push_back(seconds_since(t0));
        if (total != rep.bytes) throw Error(ErrorKind::ReadFailure, "short raw read");
    }

    rep.rows = bulk_frame.n_rows;
    rep.identical = bulk_frame == naive_result.frame && bulk_stats == naive_result.stats;
    return rep;
}

}  // namespace iochunk::tools
