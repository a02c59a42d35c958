//
// Copyright 2026 The fairaudit Authors
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
//

#ifndef FAIRAUDIT_SRC_TEXT_UTIL_H_
#define FAIRAUDIT_SRC_TEXT_UTIL_H_

#include <string>
#include <string_view>

namespace fairaudit::internal {

// Lowercases ASCII letters and collapses whitespace runs to a single space,
// trimming both ends.
std::string NormalizeForMatch(std::string_view text);

std::string_view Trim(std::string_view text);

bool IsBlank(std::string_view text);

// Replaces every "{name}" occurrence with `value`.
void ReplaceAll(std::string& text, std::string_view from, std::string_view to);

// printf-style fixed-point formatting; e.g. FormatFixed(91.94, 1) == "91.9".
std::string FormatFixed(double value, int decimals);

}  // namespace fairaudit::internal

#endif  // FAIRAUDIT_SRC_TEXT_UTIL_H_
