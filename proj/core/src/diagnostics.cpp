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

#include "ngo/diagnostics.hpp"

#include <iostream>
#include <mutex>
#include <utility>

#include "ngo/error.hpp"

namespace ngo {
namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler() {
  static WarningHandler h;
  return h;
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidSize: return "invalid-size";
    case ErrorCode::kInvalidEdge: return "invalid-edge";
    case ErrorCode::kNotConnected: return "not-connected";
    case ErrorCode::kAsymmetricMatrix: return "asymmetric-matrix";
    case ErrorCode::kInvalidExponent: return "invalid-exponent";
    case ErrorCode::kShapeError: return "shape-error";
    case ErrorCode::kBoundUndefined: return "bound-undefined";
    case ErrorCode::kNoData: return "no-data";
    case ErrorCode::kOptimizerFailed: return "optimizer-failed";
    case ErrorCode::kIncompleteTrace: return "incomplete-trace";
    case ErrorCode::kInvalidK: return "invalid-k";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kPartitionFailed: return "partition-failed";
    case ErrorCode::kScheduleConstraint: return "schedule-constraint";
    case ErrorCode::kConfigError: return "config-error";
    case ErrorCode::kIoError: return "io-error";
  }
  return "unknown";
}

void warn(const std::string& message) {
  std::lock_guard lock(handler_mutex());
  if (handler()) {
    handler()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

WarningHandler set_warning_handler(WarningHandler h) {
  std::lock_guard lock(handler_mutex());
  return std::exchange(handler(), std::move(h));
}

}  // namespace ngo
