#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <filesystem>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

#include "iochunk/chunker.hpp"
#include "iochunk/error.hpp"
#include "iochunk/source.hpp"

namespace iochunk {

enum class ApplyMode { Sequential, Pipeline, WorkersRead };

enum class EventKind { ReadBegin, ReadEnd, Dispatch, ComputeBegin, ComputeEnd, Collect };

inline std::string_view to_string(EventKind k) {
    switch (k) {
    case EventKind::ReadBegin: return "read-begin";
    case EventKind::ReadEnd: return "read-end";
    case EventKind::Dispatch: return "dispatch";
    case EventKind::ComputeBegin: return "compute-begin";
    case EventKind::ComputeEnd: return "compute-end";
    case EventKind::Collect: return "collect";
    }
    return "?";
}

/// Instrumentation record. `seq` is the chunk the event concerns (for
/// ReadBegin, the chunk about to be read); `worker` is the reading split in
/// WorkersRead mode and 0 otherwise.
struct ScheduleEvent {
    EventKind kind;
    std::uint64_t seq;
    std::size_t worker;
    std::chrono::steady_clock::time_point at;
};

struct ApplyConfig {
    ApplyMode mode = ApplyMode::Sequential;
    std::size_t parallel = 1;
    ChunkerConfig chunker;
    /// Called for every scheduling event, serialized by the engine.
    std::function<void(const ScheduleEvent&)> observer;

    static ApplyConfig sequential(ChunkerConfig c = {}) { return {ApplyMode::Sequential, 1, c, {}}; }
    static ApplyConfig pipeline(std::size_t p, ChunkerConfig c = {}) { return {ApplyMode::Pipeline, p, c, {}}; }
    static ApplyConfig workers_read(std::size_t p, ChunkerConfig c = {}) { return {ApplyMode::WorkersRead, p, c, {}}; }
};

namespace detail {

class EventLog {
public:
    explicit EventLog(const std::function<void(const ScheduleEvent&)>& obs) : obs_(obs) {}
    void operator()(EventKind k, std::uint64_t seq, std::size_t worker = 0) {
        if (!obs_) return;
        std::lock_guard lock(mu_);
        obs_({k, seq, worker, std::chrono::steady_clock::now()});
    }

private:
    const std::function<void(const ScheduleEvent&)>& obs_;
    std::mutex mu_;
};

/// Fixed-size pool; tasks run in submission order as threads free up.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t n) {
        for (std::size_t i = 0; i < n; ++i)
            threads_.emplace_back([this] { run(); });
    }
    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    ~WorkerPool() {
        {
            std::lock_guard lock(mu_);
            stopping_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    void submit(std::function<void()> task) {
        {
            std::lock_guard lock(mu_);
            queue_.push_back(std::move(task));
        }
        cv_.notify_one();
    }

private:
    void run() {
        for (;;) {
            std::function<void()> task;
            {
                std::unique_lock lock(mu_);
                cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
                if (queue_.empty()) return;
                task = std::move(queue_.front());
                queue_.pop_front();
            }
            task();
        }
    }

    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::function<void()>> queue_;
    bool stopping_ = false;
    std::vector<std::thread> threads_;
};

inline std::string describe(std::exception_ptr e) {
    try {
        std::rethrow_exception(e);
    } catch (const std::exception& ex) {
        return ex.what();
    } catch (...) {
        return "unknown exception";
    }
}

template <class F>
using apply_result_t = std::invoke_result_t<F&, const Chunk&>;

template <class F>
std::vector<apply_result_t<F>> apply_sequential(ByteSource& src, F& f, const ApplyConfig& cfg) {
    EventLog log(cfg.observer);
    Chunker chunker(src, cfg.chunker);
    std::vector<apply_result_t<F>> results;
    for (std::uint64_t seq = 0;; ++seq) {
        log(EventKind::ReadBegin, seq);
        std::optional<Chunk> c = chunker.next();
        log(EventKind::ReadEnd, seq);
        if (!c) break;
        log(EventKind::Dispatch, seq);
        log(EventKind::ComputeBegin, seq);
        try {
            results.push_back(f(std::as_const(*c)));
        } catch (...) {
            throw WorkerFailure(c->seq, c->offset, describe(std::current_exception()));
        }
        log(EventKind::ComputeEnd, seq);
        log(EventKind::Collect, seq);
    }
    return results;
}

// Master reads; up to `parallel` computations in flight. With all workers
// busy the master reads exactly one chunk ahead, then blocks on the oldest
// computation and hands the prefetched chunk to the freed slot.
template <class F>
std::vector<apply_result_t<F>> apply_pipeline(ByteSource& src, F& f, const ApplyConfig& cfg) {
    using R = apply_result_t<F>;
    struct InFlight {
        std::uint64_t seq;
        std::uint64_t offset;
        std::future<R> result;
    };

    EventLog log(cfg.observer);
    Chunker chunker(src, cfg.chunker);
    std::vector<R> results;
    std::deque<InFlight> inflight;
    std::uint64_t next_seq = 0;
    std::exception_ptr failure;

    WorkerPool pool(cfg.parallel);

    auto read = [&]() -> std::optional<Chunk> {
        log(EventKind::ReadBegin, next_seq);
        std::optional<Chunk> c = chunker.next();
        log(EventKind::ReadEnd, next_seq);
        if (c) ++next_seq;
        return c;
    };

    auto dispatch = [&](Chunk&& c) {
        auto chunk = std::make_shared<Chunk>(std::move(c));
        auto promise = std::make_shared<std::promise<R>>();
        inflight.push_back({chunk->seq, chunk->offset, promise->get_future()});
        log(EventKind::Dispatch, chunk->seq);
        pool.submit([chunk, promise, &f, &log] {
            log(EventKind::ComputeBegin, chunk->seq);
            try {
                R r = f(std::as_const(*chunk));
                log(EventKind::ComputeEnd, chunk->seq);
                promise->set_value(std::move(r));
            } catch (...) {
                log(EventKind::ComputeEnd, chunk->seq);
                promise->set_exception(std::current_exception());
            }
        });
    };

    std::optional<Chunk> pending;
    try {
        pending = read();
        while (pending || !inflight.empty()) {
            while (pending && inflight.size() < cfg.parallel) {
                dispatch(std::move(*pending));
                pending = read();
            }
            if (inflight.empty()) break;
            InFlight oldest = std::move(inflight.front());
            inflight.pop_front();
            try {
                results.push_back(oldest.result.get());
            } catch (...) {
                failure = std::make_exception_ptr(
                    WorkerFailure(oldest.seq, oldest.offset, describe(std::current_exception())));
                break;
            }
            log(EventKind::Collect, oldest.seq);
        }
    } catch (...) {
        failure = std::current_exception();  // chunker errors
    }
    if (failure) {
        for (auto& x : inflight) x.result.wait();
        std::rethrow_exception(failure);
    }
    return results;
}

template <class F>
std::vector<apply_result_t<F>> apply_workers_read(const std::filesystem::path& path, F& f, const ApplyConfig& cfg) {
    using R = apply_result_t<F>;
    UniqueFd probe = open_for_read(path);
    if (!is_seekable(probe.get())) throw Error(ErrorKind::NotSeekable, path.string() + " is not a regular file");
    const std::uint64_t size = file_size(probe.get());
    const auto splits = grid_aligned_splits(size, cfg.parallel, cfg.chunker.target_bytes);

    struct SplitOutcome {
        std::vector<R> results;
        std::exception_ptr error;
        bool worker_error = false;  // raised by f, not by reading
        std::uint64_t error_offset = 0;
    };
    std::vector<SplitOutcome> outcomes(splits.size());
    std::atomic<bool> stop{false};
    EventLog log(cfg.observer);

    {
        std::vector<std::jthread> workers;
        for (std::size_t w = 0; w < splits.size(); ++w) {
            workers.emplace_back([&, w] {
                SplitOutcome& out = outcomes[w];
                try {
                    RangeSource src(path, splits[w], cfg.chunker.record_sep);
                    Chunker chunker(src, cfg.chunker, src.start());
                    for (std::uint64_t local = 0; !stop.load(std::memory_order_relaxed); ++local) {
                        log(EventKind::ReadBegin, local, w);
                        std::optional<Chunk> c = chunker.next();
                        log(EventKind::ReadEnd, local, w);
                        if (!c) break;
                        log(EventKind::ComputeBegin, local, w);
                        try {
                            out.results.push_back(f(std::as_const(*c)));
                        } catch (...) {
                            out.error = std::current_exception();
                            out.worker_error = true;
                            out.error_offset = c->offset;
                            stop = true;
                            return;
                        }
                        log(EventKind::ComputeEnd, local, w);
                    }
                } catch (...) {
                    out.error = std::current_exception();
                    stop = true;
                }
            });
        }
    }

    for (auto& out : outcomes) {
        if (!out.error) continue;
        if (!out.worker_error) std::rethrow_exception(out.error);
        // Global sequence number: chunks that start before the failing one.
        FileSource src(path);
        Chunker chunker(src, cfg.chunker);
        std::uint64_t seq = 0;
        while (auto c = chunker.next()) {
            if (c->offset >= out.error_offset) break;
            ++seq;
        }
        throw WorkerFailure(seq, out.error_offset, describe(out.error));
    }

    std::vector<R> results;
    for (auto& out : outcomes)
        for (auto& r : out.results) results.push_back(std::move(r));
    return results;
}

}  // namespace detail

/// Runs f over every chunk of `src` and returns the results in chunk order.
/// f must be a pure function of the chunk's bytes. WorkersRead needs a file
/// path; with a stream it raises NotSeekable.
template <class F>
std::vector<detail::apply_result_t<F>> chunk_apply(ByteSource& src, F&& f, const ApplyConfig& cfg) {
    cfg.chunker.validate();
    if (cfg.parallel == 0) throw Error(ErrorKind::SchemaError, "parallel must be >= 1");
    switch (cfg.mode) {
    case ApplyMode::Sequential: return detail::apply_sequential(src, f, cfg);
    case ApplyMode::Pipeline: return detail::apply_pipeline(src, f, cfg);
    case ApplyMode::WorkersRead: break;
    }
    throw Error(ErrorKind::NotSeekable, "workers-read mode needs a seekable file, not a stream");
}

/// As above, reading from a file ("-" is standard input). In WorkersRead
/// mode each worker opens the file itself and reads one grid-aligned byte
/// range; the chunk boundaries, and so the results, match the other modes.
/// The Chunk::seq seen by f in that mode counts within the worker's range;
/// Chunk::offset is always absolute.
template <class F>
std::vector<detail::apply_result_t<F>> chunk_apply(const std::filesystem::path& path, F&& f, const ApplyConfig& cfg) {
    cfg.chunker.validate();
    if (cfg.parallel == 0) throw Error(ErrorKind::SchemaError, "parallel must be >= 1");
    if (cfg.mode == ApplyMode::WorkersRead) {
        if (path == "-") throw Error(ErrorKind::NotSeekable, "workers-read mode cannot read standard input");
        return detail::apply_workers_read(path, f, cfg);
    }
    FileSource src(path);
    return chunk_apply(src, f, cfg);
}

}  // namespace iochunk
