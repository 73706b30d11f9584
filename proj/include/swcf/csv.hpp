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

#include <string>
#include <string_view>
#include <vector>

namespace swcf {

/// Shortest round-trip decimal form, independent of the C locale.
std::string format_double(double v);

/// Locale-independent strict parse; throws FormatError on trailing junk.
double parse_double(std::string_view s);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Strict reader: the first line must equal `expected_header` (when given)
/// and every row must have exactly as many fields as the header.
CsvTable read_csv(std::string_view text, std::string_view expected_header = {});

}  // namespace swcf
