#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "bench.hpp"
#include "iochunk/iochunk.hpp"

namespace iochunk::tools {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr const char* kSchemaHelp =
    "comma-separated type letters (l=logical i=integer r=real c=character b=bytes x=complex t=timestamp s=skip), "
    "or 'infer'";

std::vector<std::string> split_list(std::string_view s, char sep = ',') {
    std::vector<std::string> out;
    std::size_t at = 0;
    while (at <= s.size()) {
        std::size_t e = s.find(sep, at);
        if (e == std::string_view::npos) e = s.size();
        if (e > at) out.emplace_back(s.substr(at, e - at));
        at = e + 1;
    }
    return out;
}

char single_byte(const std::string& s, const char* what) {
    if (s == "\\t" || s == "tab") return '\t';
    if (s.size() != 1) throw Error(ErrorKind::SchemaError, std::string(what) + " must be a single byte");
    return s[0];
}

ChunkerConfig chunker_config(std::size_t flag_bytes) {
    ChunkerConfig c;
    if (const char* env = std::getenv("CHUNK_TARGET_BYTES"); env && *env) {
        auto v = parse_integer(env);
        if (!v || *v <= 0) throw Error(ErrorKind::SchemaError, "CHUNK_TARGET_BYTES must be a positive integer");
        c.target_bytes = static_cast<std::size_t>(*v);
    }
    if (flag_bytes) c.target_bytes = flag_bytes;
    return c;
}

/// "-" writes to the caller's stream, anything else to a (truncated) file.
class Output {
public:
    Output(const std::string& dest, std::ostream& stdout_stream) {
        if (dest == "-") {
            os_ = &stdout_stream;
        } else {
            file_ = std::make_unique<std::ofstream>(dest, std::ios::binary | std::ios::trunc);
            if (!*file_) throw Error(ErrorKind::WriteFailure, "cannot create " + dest);
            os_ = file_.get();
        }
    }
    void write(std::string_view s) {
        os_->write(s.data(), static_cast<std::streamsize>(s.size()));
        if (!*os_) throw Error(ErrorKind::WriteFailure, "write failed");
    }
    void flush() { os_->flush(); }

private:
    std::ostream* os_ = nullptr;
    std::unique_ptr<std::ofstream> file_;
};

/// Removes up to `n` leading records from `chunk`, decrementing `n`.
std::string_view drop_records(std::string_view chunk, std::size_t& n) {
    while (n > 0 && !chunk.empty()) {
        std::size_t nl = chunk.find('\n');
        chunk = nl == std::string_view::npos ? std::string_view{} : chunk.substr(nl + 1);
        --n;
    }
    return chunk;
}

// Options shared by commands that read delimited input.
struct InputFormat {
    std::string sep = ",";
    std::string schema = "infer";
    bool header = false;
    std::size_t skip = 0;
    std::string quote;
    bool strict = false;
    std::size_t chunk_bytes = 0;
};

void add_input_format(CLI::App* cmd, InputFormat& f, bool with_quote) {
    cmd->add_option("--sep", f.sep, "field separator byte")->capture_default_str();
    cmd->add_option("--schema", f.schema, kSchemaHelp)->capture_default_str();
    cmd->add_flag("--header", f.header, "first record (after --skip) holds column names");
    cmd->add_option("--skip", f.skip, "records to skip at the start of each input")->capture_default_str();
    if (with_quote) cmd->add_option("--quote", f.quote, "quote byte (quoting is off by default)");
    cmd->add_flag("--strict", f.strict, "fail (exit 2) on coercion failures or ragged rows");
    cmd->add_option("--chunk-bytes", f.chunk_bytes, "target chunk size (overrides CHUNK_TARGET_BYTES)");
}

/// Streams one delimited input through the chunker, resolving skip/header
/// and the schema on the first records, and hands each parsed chunk on.
/// The schema is shared across calls so several inputs parse alike.
class FrameStream {
public:
    FrameStream(const InputFormat& fmt, std::ostream& err) : fmt_(fmt), err_(err) {
        schema_.field_sep = single_byte(fmt.sep, "--sep");
        if (!fmt.quote.empty()) schema_.quote = single_byte(fmt.quote, "--quote");
        schema_.strict = fmt.strict;
        if (fmt.schema != "infer") {
            schema_.types = parse_type_letters(fmt.schema);
            have_types_ = true;
        }
    }

    const Schema& schema() const { return schema_; }
    bool resolved() const { return have_types_; }

    template <class OnFrame>
    std::uint64_t run(const fs::path& input, OnFrame&& on_frame) {
        FileSource src(input);
        Chunker chunker(src, chunker_config(fmt_.chunk_bytes));
        std::size_t to_skip = fmt_.skip;
        bool need_header = fmt_.header;
        std::optional<std::vector<std::string>> header;
        std::uint64_t bytes = 0;
        while (auto c = chunker.next()) {
            bytes += c->data.size();
            std::string_view body = drop_records(c->data, to_skip);
            if (body.empty()) continue;
            if (need_header) {
                auto [h, rest] = split_header(body, schema_);
                header = std::move(h);
                need_header = false;
                body = rest;
                if (have_types_) apply_header(schema_, *header);
            }
            if (!have_types_) {
                if (body.empty()) continue;
                Schema inferred = infer_schema(body, 1000, schema_.field_sep);
                schema_.types = inferred.types;
                have_types_ = true;
                err_ << "inferred schema: " << type_letters(schema_.types) << "\n";
                if (header) apply_header(schema_, *header);
            }
            on_frame(parse_frame(body, schema_, 0));
        }
        if (header && !have_types_) {
            // Header without data: every column is character.
            schema_.types.assign(header->size(), ColumnType::Character);
            have_types_ = true;
            apply_header(schema_, *header);
        }
        return bytes;
    }

private:
    const InputFormat& fmt_;
    std::ostream& err_;
    Schema schema_;
    bool have_types_ = false;
};

void report_stats(std::ostream& err, const Schema& schema, const ParseStats& stats) {
    err << "rows: " << stats.records << "\n";
    auto names = schema.resolved_names();
    err << "coercion failures:";
    for (std::size_t j = 0; j < stats.failures.size() && j < names.size(); ++j)
        err << " " << names[j] << "=" << stats.failures[j];
    err << "\n";
    if (stats.short_rows || stats.long_rows)
        err << "ragged rows: " << stats.short_rows << " short, " << stats.long_rows << " long\n";
}

void report_throughput(std::ostream& err, std::uint64_t bytes, Clock::time_point t0) {
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    char buf[128];
    std::snprintf(buf, sizeof buf, "throughput: %.2f MB/s (%llu bytes in %.3f s)\n",
                  secs > 0 ? static_cast<double>(bytes) / 1e6 / secs : 0.0, static_cast<unsigned long long>(bytes), secs);
    err << buf;
}

// --------------------------------------------------------------------------

struct ParseArgs {
    std::string input;
    std::string out = "-";
    InputFormat fmt;
};

int cmd_parse(const ParseArgs& a, std::ostream& out, std::ostream& err) {
    auto t0 = Clock::now();
    Output sink(a.out, out);
    FrameStream stream(a.fmt, err);
    ParseStats total;
    bool wrote_header = false;
    WriteOptions wopts;
    wopts.field_sep = single_byte(a.fmt.sep, "--sep");
    if (!a.fmt.quote.empty()) wopts.quote = single_byte(a.fmt.quote, "--quote");

    std::uint64_t bytes = stream.run(a.input, [&](ParsedFrame&& r) {
        wopts.include_header = a.fmt.header && !wrote_header;
        sink.write(format_frame(r.frame, wopts));
        wrote_header = true;
        total.merge(r.stats);
    });
    if (a.fmt.header && !wrote_header && stream.resolved()) {
        wopts.include_header = true;
        sink.write(format_frame(empty_frame(stream.schema()), wopts));
    }
    sink.flush();
    report_stats(err, stream.schema(), total);
    report_throughput(err, bytes, t0);
    return kExitOk;
}

// --------------------------------------------------------------------------

struct MmArgs {
    std::vector<std::string> inputs;
    std::string response;
    std::string out;
    bool no_intercept = false;
    bool lenient_levels = false;
    InputFormat fmt;
    // Term flags in command-line order: (flag, value).
    std::vector<std::pair<std::string, std::string>> term_flags;
};

std::vector<std::string> parse_levels(std::string_view spec) {
    if (auto dots = spec.find(".."); dots != std::string_view::npos && spec.find(',') == std::string_view::npos) {
        auto lo = parse_integer(spec.substr(0, dots));
        auto hi = parse_integer(spec.substr(dots + 2));
        if (!lo || !hi || *lo > *hi) throw Error(ErrorKind::SchemaError, "bad level range '" + std::string(spec) + "'");
        std::vector<std::string> out;
        for (auto v = *lo; v <= *hi; ++v) out.push_back(std::to_string(v));
        return out;
    }
    return split_list(spec);
}

TermSpec build_term_spec(const MmArgs& a, std::vector<std::string>& hhmm) {
    TermSpec spec;
    spec.response = a.response;
    spec.intercept = !a.no_intercept;
    std::vector<std::string> seen;
    auto add_numeric = [&](const std::string& col) {
        if (std::find(seen.begin(), seen.end(), col) != seen.end()) return;
        seen.push_back(col);
        spec.terms.push_back(NumericTerm{col});
    };
    for (const auto& [flag, value] : a.term_flags) {
        if (flag == "--numeric") {
            for (const auto& col : split_list(value)) add_numeric(col);
        } else if (flag == "--hhmm") {
            for (const auto& col : split_list(value)) {
                hhmm.push_back(col);
                add_numeric(col);
            }
        } else {
            auto eq = value.find('=');
            if (eq == std::string::npos || eq == 0)
                throw Error(ErrorKind::SchemaError, "--factor expects COL=level1,level2,...");
            std::string col = value.substr(0, eq);
            if (std::find(seen.begin(), seen.end(), col) != seen.end())
                throw Error(ErrorKind::SchemaError, "column '" + col + "' used twice");
            seen.push_back(col);
            spec.terms.push_back(FactorTerm{col, parse_levels(std::string_view(value).substr(eq + 1))});
        }
    }
    return spec;
}

int cmd_mm(const MmArgs& a, std::ostream& err) {
    std::vector<std::string> hhmm;
    TermSpec spec = build_term_spec(a, hhmm);
    const fs::path ckpt = a.out;
    const fs::path partial = ckpt.string() + ".partial";
    { std::ofstream marker(partial); }

    FileSink sink(ckpt, true);
    write_names(names_sidecar(ckpt), model_column_names(spec));
    ExpandOptions eopts;
    eopts.lenient_levels = a.lenient_levels;

    FrameStream stream(a.fmt, err);
    std::uint64_t total_rows = 0;
    for (const auto& input : a.inputs) {
        std::uint64_t rows = 0, dropped_null = 0, dropped_level = 0, records = 0;
        stream.run(input, [&](ParsedFrame&& r) {
            records += r.stats.records;
            for (const auto& col : hhmm) normalize_hhmm_column(r.frame, col);
            ExpandResult e = expand(r.frame, spec, eopts);
            append_to_checkpoint(sink, format_matrix(e.matrix));
            rows += e.matrix.n_rows();
            dropped_null += e.dropped_null;
            dropped_level += e.dropped_unknown_level;
        });
        err << input << ": " << records << " records, " << rows << " rows written, " << dropped_null + dropped_level
            << " dropped (" << dropped_null << " with nulls, " << dropped_level << " with unlisted levels)\n";
        total_rows += rows;
    }
    fs::remove(partial);
    err << "checkpoint " << ckpt.string() << ": " << total_rows << " rows, "
        << model_column_names(spec).size() << " columns\n";
    return kExitOk;
}

// --------------------------------------------------------------------------

struct FitArgs {
    std::string checkpoint;
    std::string response;
    std::size_t parallel = 1;
    std::string mode = "seq";
    double rank_tol = kDefaultRankTol;
    std::string sep = ",";
    std::size_t chunk_bytes = 0;
};

std::string format_fit(const RegressionFit& fit, std::uint64_t n) {
    std::ostringstream o;
    o << "rows: " << n << "\n";
    o << "rank: " << fit.rank << " of " << fit.names.size() << "\n";
    std::size_t width = 0;
    for (const auto& name : fit.names) width = std::max(width, name.size());
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
        std::string line = fit.names[i];
        line.resize(width + 2, ' ');
        if (fit.coef[i]) append_real(line, *fit.coef[i]);
        else line += "aliased";
        o << line << "\n";
    }
    o << "aliased:";
    if (fit.dropped.empty()) o << " none";
    for (const auto& d : fit.dropped) o << " " << d;
    o << "\n";
    return o.str();
}

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
    auto t0 = Clock::now();
    const auto names = read_names(names_sidecar(a.checkpoint));
    auto it = std::find(names.begin(), names.end(), a.response);
    if (it == names.end()) throw Error(ErrorKind::MissingColumn, "response '" + a.response + "' not in checkpoint names");
    const std::size_t resp = static_cast<std::size_t>(it - names.begin());
    std::vector<std::string> regressors;
    for (std::size_t j = 0; j < names.size(); ++j)
        if (j != resp) regressors.push_back(names[j]);

    ApplyConfig cfg;
    cfg.chunker = chunker_config(a.chunk_bytes);
    cfg.parallel = a.parallel;
    if (a.mode == "seq") cfg.mode = ApplyMode::Sequential;
    else if (a.mode == "pipeline") cfg.mode = ApplyMode::Pipeline;
    else if (a.mode == "split") cfg.mode = ApplyMode::WorkersRead;
    else throw Error(ErrorKind::SchemaError, "--mode must be seq, pipeline or split");

    MatrixOptions mopts;
    mopts.field_sep = single_byte(a.sep, "--sep");
    const std::size_t width = names.size();
    auto parts = chunk_apply(
        fs::path(a.checkpoint),
        [&](const Chunk& c) {
            auto m = parse_matrix<ColumnType::Real>(c.data, mopts);
            if (m.matrix.n_rows() == 0) return NormalEqAccumulator(width - 1);
            if (m.matrix.n_cols() != width)
                throw Error(ErrorKind::DimensionMismatch, "checkpoint rows have " + std::to_string(m.matrix.n_cols()) +
                                                              " fields, names sidecar lists " + std::to_string(width));
            return NormalEqAccumulator::from_block(m.matrix, resp);
        },
        cfg);

    NormalEqAccumulator acc(width - 1);
    for (const auto& p : parts) acc += p;
    RegressionFit fit = solve_ne(acc, regressors, a.rank_tol);
    out << format_fit(fit, acc.n());
    out.flush();

    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    err << "fit: mode " << a.mode << ", parallel " << a.parallel << ", " << parts.size() << " chunks, " << secs
        << " s\n";
    return kExitOk;
}

// --------------------------------------------------------------------------

struct BenchArgs {
    std::string input;
    double size_mb = 0;
    std::string schema = "infer";
    std::size_t trials = 5;
    bool header = false;
    std::uint64_t seed = 42;
    std::size_t chunk_bytes = 0;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    BenchOptions opts;
    if (a.size_mb > 0) opts.size_mb = a.size_mb;
    else if (a.input.empty()) throw Error(ErrorKind::SchemaError, "bench needs --size-mb or an input file");
    opts.input = a.input;
    if (a.schema != "infer") {
        Schema s;
        s.types = parse_type_letters(a.schema);
        opts.schema = s;
    }
    opts.header = a.header;
    opts.trials = a.trials;
    opts.seed = a.seed;
    opts.chunker = chunker_config(a.chunk_bytes);
    BenchReport rep = run_bench(opts);
    out << rep.to_text();
    out.flush();
    return rep.identical ? kExitOk : kExitVerifyFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Chunked delimited-text toolkit: parse, model-matrix checkpoints, out-of-core fits, benchmarks", "iochunk"};
    app.require_subcommand(1);

    ParseArgs pa;
    auto* parse = app.add_subcommand("parse", "parse delimited text and re-serialize it");
    parse->add_option("input", pa.input, "input file ('-' for standard input)")->required();
    parse->add_option("--out", pa.out, "output path ('-' for standard output)")->capture_default_str();
    add_input_format(parse, pa.fmt, true);

    MmArgs ma;
    std::vector<std::string> numeric_sink, factor_sink, hhmm_sink;
    auto* mm = app.add_subcommand("mm", "write a model-matrix checkpoint from one or more inputs");
    mm->add_option("inputs", ma.inputs, "input files")->required();
    mm->add_option("--response", ma.response, "response column")->required();
    mm->add_option("--numeric", numeric_sink, "numeric term column(s), comma-separated; repeatable")
        ->allow_extra_args(false)
        ->take_all();
    mm->add_option("--factor", factor_sink, "factor term COL=l1,l2,... or COL=lo..hi; repeatable")
        ->allow_extra_args(false)
        ->take_all();
    mm->add_option("--hhmm", hhmm_sink, "hhmm clock column(s) converted to minutes after midnight")
        ->allow_extra_args(false)
        ->take_all();
    mm->add_option("--out", ma.out, "checkpoint path")->required();
    mm->add_flag("--no-intercept", ma.no_intercept, "omit the (Intercept) column");
    mm->add_flag("--lenient-levels", ma.lenient_levels, "drop rows with unlisted factor levels instead of failing");
    add_input_format(mm, ma.fmt, false);

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "least-squares fit over a checkpoint via blockwise normal equations");
    fit->add_option("checkpoint", fa.checkpoint, "checkpoint file (with <checkpoint>.names)")->required();
    fit->add_option("--response", fa.response, "response column name")->required();
    fit->add_option("--parallel", fa.parallel, "worker count")->capture_default_str()->check(CLI::PositiveNumber);
    fit->add_option("--mode", fa.mode, "seq, pipeline or split")->capture_default_str()
        ->check(CLI::IsMember({"seq", "pipeline", "split"}));
    fit->add_option("--rank-tol", fa.rank_tol, "relative pivot threshold for rank detection")->capture_default_str();
    fit->add_option("--sep", fa.sep, "field separator byte")->capture_default_str();
    fit->add_option("--chunk-bytes", fa.chunk_bytes, "target chunk size (overrides CHUNK_TARGET_BYTES)");

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "compare bulk and naive parsing throughput");
    bench->add_option("input", ba.input, "input file (omit with --size-mb)");
    bench->add_option("--size-mb", ba.size_mb, "generate a synthetic file of this many MB");
    bench->add_option("--schema", ba.schema, kSchemaHelp)->capture_default_str();
    bench->add_option("--trials", ba.trials, "timed repetitions (median reported)")->capture_default_str();
    bench->add_flag("--header", ba.header, "input has a header record");
    bench->add_option("--seed", ba.seed, "synthetic data seed")->capture_default_str();
    bench->add_option("--chunk-bytes", ba.chunk_bytes, "target chunk size (overrides CHUNK_TARGET_BYTES)");

    // Term order matters for the model matrix layout, so collect the term
    // flags in the order given before CLI11 groups them by option.
    for (std::size_t i = 1; i < args.size(); ++i) {
        for (std::string flag : {"--numeric", "--factor", "--hhmm"}) {
            if (args[i] == flag && i + 1 < args.size()) ma.term_flags.emplace_back(flag, args[i + 1]);
            else if (args[i].rfind(flag + "=", 0) == 0) ma.term_flags.emplace_back(flag, args[i].substr(flag.size() + 1));
        }
    }

    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (*parse) return cmd_parse(pa, out, err);
        if (*mm) return cmd_mm(ma, err);
        if (*fit) return cmd_fit(fa, out, err);
        if (*bench) return cmd_bench(ba, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::StrictViolation ? kExitVerifyFailure : kExitInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}

}  // namespace iochunk::tools
