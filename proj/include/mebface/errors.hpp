#pragma once

#include <stdexcept>
#include <string>

namespace mebface {

/// Tensor or parameter dimensions that do not fit together.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or truncated input file (PGM, params, vault, codebook).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required file is missing or cannot be opened.
class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vault checksum did not match the payload.
class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

class UnknownUserError : public std::out_of_range {
 public:
  explicit UnknownUserError(const std::string& user_id)
      : std::out_of_range("unknown user: " + user_id), user_id_(user_id) {}
  const std::string& user_id() const noexcept { return user_id_; }

 private:
  std::string user_id_;
};

class DuplicateUserError : public std::invalid_argument {
 public:
  explicit DuplicateUserError(const std::string& user_id)
      : std::invalid_argument("duplicate user: " + user_id) {}
};

}  // namespace mebface
