#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kubediag {

enum class ErrorCode {
    InvalidQuery,
    InvalidArgument,
    DuplicateId,
    NotFound,
    ClassificationError,
    SchemaViolation,
    InvalidPath,
    EmptyHistory,
    InvalidContext,
    SynthesisError,
    NoEvidence,
    AlreadyRecorded,
    ScenarioParseError,
    ParseError,
    IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library.
///
/// `stage()` is filled in by the engine when an error escapes one of the
/// diagnosis stages (retrieve, route, explore, synthesize, ...).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    const std::string& stage() const noexcept { return stage_; }
    void set_stage(std::string stage) { stage_ = std::move(stage); }

private:
    ErrorCode code_;
    std::string stage_;
};

/// Raised by synthesis clients; `retryable()` tells synthesize() whether to try again.
class SynthesisFailure : public Error {
public:
    SynthesisFailure(const std::string& message, bool retryable)
        : Error(ErrorCode::SynthesisError, message), retryable_(retryable) {}
    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

class ClassificationFailure : public Error {
public:
    ClassificationFailure(std::string document_id, const std::string& message)
        : Error(ErrorCode::ClassificationError, message), document_id_(std::move(document_id)) {}
    const std::string& document_id() const noexcept { return document_id_; }

private:
    std::string document_id_;
};

/// Line-numbered failure while loading a JSON-lines file. Lines are 1-based.
class LineError : public Error {
public:
    LineError(ErrorCode code, std::size_t line, const std::string& message)
        : Error(code, "line " + std::to_string(line) + ": " + message), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace kubediag
