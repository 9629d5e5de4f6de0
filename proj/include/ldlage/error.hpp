// Copyright 2026 The ldlage Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LDLAGE_ERROR_HPP_
#define LDLAGE_ERROR_HPP_

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace ldlage {

/// Base class of every exception thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// An argument violates a documented precondition.
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// Two objects that must belong together do not (e.g. a forward trace
/// produced by a different head).
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// A dataset file could not be parsed. line() is 1-based (the header is
/// line 1); 0 means the error is not tied to a specific line.
class DataFormatError : public Error {
 public:
  explicit DataFormatError(const std::string& what, std::size_t line = 0)
      : Error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Training produced a non-finite loss. Indices are 0-based.
class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(const std::string& what, int epoch, int batch)
      : Error(what), epoch_(epoch), batch_(batch) {}
  int epoch() const { return epoch_; }
  int batch() const { return batch_; }

 private:
  int epoch_;
  int batch_;
};

/// Recoverable conditions (e.g. a target age outside the grid) are reported
/// through this hook instead of failing. The default handler writes one line
/// to stderr. Install a handler before spawning concurrent work.
using WarningHandler = std::function<void(const std::string&)>;

/// Replaces the process-wide warning handler, returning the previous one.
/// Passing nullptr restores the default stderr handler.
WarningHandler set_warning_handler(WarningHandler handler);

/// Routes a message to the current warning handler.
void warn(const std::string& message);

}  // namespace ldlage

#endif  // LDLAGE_ERROR_HPP_
