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

#include "swcf/error.hpp"

namespace swcf {

std::string_view error_tag(ErrorCode code) {
    switch (code) {
        case ErrorCode::kDimension: return "E_DIMENSION";
        case ErrorCode::kIndex: return "E_INDEX";
        case ErrorCode::kArgument: return "E_ARGUMENT";
        case ErrorCode::kState: return "E_STATE";
        case ErrorCode::kNumeric: return "E_NUMERIC";
        case ErrorCode::kData: return "E_DATA";
        case ErrorCode::kFormat: return "E_FORMAT";
        case ErrorCode::kConfig: return "E_CONFIG";
        case ErrorCode::kIo: return "E_IO";
    }
    return "E_UNKNOWN";
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::kConfig:
        case ErrorCode::kArgument:
            return 1;
        case ErrorCode::kData:
        case ErrorCode::kFormat:
        case ErrorCode::kIo:
        case ErrorCode::kIndex:
        case ErrorCode::kDimension:
        case ErrorCode::kState:
            return 2;
        case ErrorCode::kNumeric:
            return 3;
    }
    return 1;
}

}  // namespace swcf
