// Copyright 2026 The qkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QKIT_ERRORS_HPP
#define QKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qkit {

/// Process exit codes used by the CLI.
enum class ExitCode : int {
  kSuccess = 0,
  kValidation = 2,
  kProtocolViolation = 3,
  kIo = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const { return ExitCode::kValidation; }
};

/// Bad input: malformed matrices, out-of-range parameters, bad config.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input outside a function's domain (e.g. x not coprime to N).
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NoPreimageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class GenerationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Simulation or enumeration exceeds its fixed resource budget.
class CapacityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IntegrityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A party sent a message out of order or with a malformed payload.
class ProtocolViolation : public Error {
 public:
  ProtocolViolation(std::string sender, const std::string& what)
      : Error(sender + ": " + what), sender_(std::move(sender)) {}
  const std::string& sender() const { return sender_; }
  ExitCode exit_code() const override { return ExitCode::kProtocolViolation; }

 private:
  std::string sender_;
};

class IoError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::kIo; }
};

}  // namespace qkit

#endif  // QKIT_ERRORS_HPP
