#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace divcov {

// Process exit codes used by the CLI.
enum class ExitCode : int {
  kOk = 0,
  kContract = 2,
  kEndpoint = 3,
  kIncomplete = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// A precondition or invariant of a call was violated by the caller's data.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what)
      : Error(ExitCode::kContract, what) {}
};

// Malformed serialized record. byte_offset is relative to the record start.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset,
             std::string field_path)
      : Error(ExitCode::kContract,
              what + " (at byte " + std::to_string(byte_offset) +
                  (field_path.empty() ? "" : ", field " + field_path) + ")"),
        byte_offset_(byte_offset),
        field_path_(std::move(field_path)) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }
  const std::string& field_path() const noexcept { return field_path_; }

 private:
  std::size_t byte_offset_;
  std::string field_path_;
};

// Endpoint unreachable, timed out, or returned a non-2xx status.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what)
      : Error(ExitCode::kEndpoint, what) {}
};

// Endpoint answered but the body does not follow the wire contract.
class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what)
      : Error(ExitCode::kEndpoint, what) {}
};

// A required artifact (score row, answer set, feature vector) is missing.
class IncompleteError : public Error {
 public:
  explicit IncompleteError(const std::string& what)
      : Error(ExitCode::kIncomplete, what) {}
};

// Training diverged (non-finite loss or parameters).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ExitCode::kContract, what) {}
};

}  // namespace divcov
