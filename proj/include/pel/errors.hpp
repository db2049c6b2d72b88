#pragma once

#include <stdexcept>
#include <string>

namespace pel {

// Exit codes shared by the CLI: 2 config/usage, 3 validation, 4 numeric.
enum class ExitCode : int {
    ok = 0,
    usage = 2,
    validation = 3,
    numeric = 4,
};

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::numeric; }
};

/// Operand outside the mathematical domain of a primitive or encoding.
class DomainError : public Error {
  public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::validation; }
};

class ShapeError : public Error {
  public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::usage; }
};

/// NaN/Inf produced during evaluation or training.
class NumericError : public Error {
  public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::numeric; }
};

/// Input data that violates a contract (non-unitary matrix, bad labels, ...).
class ValidationError : public Error {
  public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::validation; }
};

class ParseError : public Error {
  public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::usage; }
};

class UsageError : public Error {
  public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::usage; }
};

/// Invalid configuration document; the message starts with the field path.
class ConfigError : public Error {
  public:
    ConfigError(const std::string &path, const std::string &what) : Error(path + ": " + what), path_(path) {}
    ExitCode exit_code() const noexcept override { return ExitCode::usage; }
    const std::string &path() const noexcept { return path_; }

  private:
    std::string path_;
};

}  // namespace pel
