// Copyright 2026 The ngosim Authors. All Rights Reserved.
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
// =============================================================================

#pragma once

#include <functional>
#include <string>

namespace ngo {

using WarningHandler = std::function<void(const std::string&)>;

// Non-fatal diagnostics (stability warnings, schedule constraint waivers).
// The default handler writes to stderr.
void warn(const std::string& message);

// Returns the previous handler. Passing an empty function restores stderr.
WarningHandler set_warning_handler(WarningHandler handler);

}  // namespace ngo
