// Copyright 2026 The dyco Authors. All Rights Reserved.
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

#include <functional>
#include <string_view>

namespace dyco {

using LogSink = std::function<void(std::string_view)>;

/// Warnings go to stderr unless a sink is installed (tests capture them).
void log_warning(std::string_view message);
LogSink set_warning_sink(LogSink sink);

}  // namespace dyco
