#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace iochunk {

enum class ErrorKind {
    RecordTooLarge,
    ReadFailure,
    WriteFailure,
    SchemaError,
    HeaderArityMismatch,
    RaggedSample,
    RaggedInput,
    StrictViolation,
    SeparatorCollision,
    OutOfRange,
    UnknownLevel,
    MissingColumn,
    DimensionMismatch,
    DegenerateSystem,
    NotSeekable,
    WorkerFailure,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::RecordTooLarge: return "RecordTooLarge";
    case ErrorKind::ReadFailure: return "ReadFailure";
    case ErrorKind::WriteFailure: return "WriteFailure";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::HeaderArityMismatch: return "HeaderArityMismatch";
    case ErrorKind::RaggedSample: return "RaggedSample";
    case ErrorKind::RaggedInput: return "RaggedInput";
    case ErrorKind::StrictViolation: return "StrictViolation";
    case ErrorKind::SeparatorCollision: return "SeparatorCollision";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::UnknownLevel: return "UnknownLevel";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateSystem: return "DegenerateSystem";
    case ErrorKind::NotSeekable: return "NotSeekable";
    case ErrorKind::WorkerFailure: return "WorkerFailure";
    }
    return "Unknown";
}

/// Base exception for everything the library throws. `kind()` lets callers
/// (and the CLI's exit-code mapping) branch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised by chunk_apply when the user function throws. `seq` is the global
/// chunk sequence number, `offset` the chunk's first byte in the source.
class WorkerFailure : public Error {
public:
    WorkerFailure(std::uint64_t seq, std::uint64_t offset, const std::string& cause)
        : Error(ErrorKind::WorkerFailure,
                "chunk " + std::to_string(seq) + " (offset " + std::to_string(offset) + "): " + cause),
          seq_(seq), offset_(offset), cause_(cause) {}

    std::uint64_t seq() const noexcept { return seq_; }
    std::uint64_t offset() const noexcept { return offset_; }
    const std::string& cause() const noexcept { return cause_; }

private:
    std::uint64_t seq_;
    std::uint64_t offset_;
    std::string cause_;
};

}  // namespace iochunk
