#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace geezmt {

// Base of every error the toolkit raises. `kind()` is a short stable tag
// used by the CLI in its machine-readable error line.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

class IoError : public Error {
public:
  IoError(std::string path, const std::string& what)
      : Error("io", path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

class DecodeError : public Error {
public:
  DecodeError(const std::string& where, std::size_t byte_offset)
      : Error("decode", where + ": invalid UTF-8 at byte offset " +
                            std::to_string(byte_offset)),
        offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class AlignmentError : public Error {
public:
  AlignmentError(std::size_t source_lines, std::size_t target_lines)
      : Error("alignment", "line count mismatch: source has " +
                               std::to_string(source_lines) +
                               " lines, target has " +
                               std::to_string(target_lines)),
        source_lines_(source_lines), target_lines_(target_lines) {}
  std::size_t source_lines() const noexcept { return source_lines_; }
  std::size_t target_lines() const noexcept { return target_lines_; }

private:
  std::size_t source_lines_;
  std::size_t target_lines_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class FormatError : public Error {
public:
  FormatError(const std::string& what, std::size_t line)
      : Error("format", "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  explicit FormatError(const std::string& what)
      : Error("format", what), line_(0) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class BackendError : public Error {
public:
  BackendError(int status, bool retriable, const std::string& message)
      : Error("backend", message + " (status " + std::to_string(status) + ")"),
        status_(status), retriable_(retriable) {}
  int status() const noexcept { return status_; }
  bool retriable() const noexcept { return retriable_; }

private:
  int status_;
  bool retriable_;
};

class EmptyCompletionError : public Error {
public:
  EmptyCompletionError() : Error("empty-output", "backend returned an empty completion") {}
};

}  // namespace geezmt
