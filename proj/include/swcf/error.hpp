// Copyright 2026 The SWCF-Net Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace swcf {

enum class ErrorCode {
    kDimension,
    kIndex,
    kArgument,
    kState,
    kNumeric,
    kData,
    kFormat,
    kConfig,
    kIo,
};

/// Short machine-parsable tag, e.g. "E_DIMENSION".
std::string_view error_tag(ErrorCode code);

/// Process exit code for a failure of the given kind (see README).
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

#define SWCF_DEFINE_ERROR(Name, Code)                                     \
    class Name : public Error {                                           \
      public:                                                             \
        explicit Name(const std::string& message) : Error(Code, message) {} \
    }

SWCF_DEFINE_ERROR(DimensionError, ErrorCode::kDimension);
SWCF_DEFINE_ERROR(IndexError, ErrorCode::kIndex);
SWCF_DEFINE_ERROR(ArgumentError, ErrorCode::kArgument);
SWCF_DEFINE_ERROR(StateError, ErrorCode::kState);
SWCF_DEFINE_ERROR(NumericError, ErrorCode::kNumeric);
SWCF_DEFINE_ERROR(DataError, ErrorCode::kData);
SWCF_DEFINE_ERROR(FormatError, ErrorCode::kFormat);
SWCF_DEFINE_ERROR(ConfigError, ErrorCode::kConfig);
SWCF_DEFINE_ERROR(IoError, ErrorCode::kIo);

#undef SWCF_DEFINE_ERROR

}  // namespace swcf
