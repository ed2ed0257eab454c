// Copyright 2026 The MSRD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MSRD_ERROR_HPP_
#define MSRD_ERROR_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace msrd {

enum class ErrorCode {
  kInvalidArgument,
  kFormat,      // malformed container header
  kTruncation,  // payload length disagrees with the declared shape
  kValidation,  // well-formed input violating a value invariant
  kSchema,      // manifest JSON missing/mistyped field
  kShape,       // tensor shapes disagree
  kIo,
};

const char* to_string(ErrorCode code) noexcept;

/// Library exception. Every failure thrown by the core carries a code so the
/// C layer can map it onto a stable integer without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::uint64_t> byte_offset = std::nullopt)
      : std::runtime_error(what), code_(code), byte_offset_(byte_offset) {}

  ErrorCode code() const noexcept { return code_; }
  /// Offset into the offending file, for container format errors.
  std::optional<std::uint64_t> byte_offset() const noexcept { return byte_offset_; }

 private:
  ErrorCode code_;
  std::optional<std::uint64_t> byte_offset_;
};

using WarningSink = std::function<void(std::string_view)>;

/// Replaces the process-wide warning sink (default: stderr). Passing an empty
/// function silences warnings.
void set_warning_sink(WarningSink sink);
/// Writes "msrd: warning: <message>" to stderr.
WarningSink default_warning_sink();
void warn(std::string_view message);

}  // namespace msrd

#endif  // MSRD_ERROR_HPP_
