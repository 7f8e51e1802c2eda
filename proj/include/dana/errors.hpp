#pragma once

#include <stdexcept>
#include <string>

namespace dana {

// Root of every error this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input document; message carries the locus (path, record, byte offset).
class ParseError : public Error {
public:
    using Error::Error;
};

// Structurally well-formed input violating a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

class DuplicateIdError : public Error {
public:
    explicit DuplicateIdError(std::string id)
        : Error("duplicate id: " + id), id_(std::move(id)) {}
    const std::string& id() const { return id_; }

private:
    std::string id_;
};

class DuplicateNameError : public Error {
public:
    explicit DuplicateNameError(std::string name)
        : Error("duplicate name: " + name), name_(std::move(name)) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

// Scripted backend: no rule's substrings all matched the request.
class NoMatchingRuleError : public Error {
public:
    using Error::Error;
};

// Network-level failure; the only retryable class.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& what, int attempts = 1)
        : Error(what), attempts_(attempts) {}
    int attempts() const { return attempts_; }

private:
    int attempts_;
};

// Remote spoke, but not the dialect we expect.
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Constrained first-line verdict was neither allowed keyword.
class VerdictParseError : public Error {
public:
    using Error::Error;
};

class DecompositionFormatError : public Error {
public:
    using Error::Error;
};

class GradeError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// Task execution failed; carries the offending task id.
class ExecutionError : public Error {
public:
    ExecutionError(std::string task_id, const std::string& what)
        : Error("task '" + task_id + "': " + what), task_id_(std::move(task_id)) {}
    const std::string& task_id() const { return task_id_; }

private:
    std::string task_id_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class EncodingError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace dana
