// Copyright 2026 The Cobrand Authors.
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

#include <cstdint>

namespace cobrand {

// Streaming count / mean / population variance.
//
// The variance is advanced with the mean from *before* the new sample:
//   V <- ((T-1)/T) * (V + (mean_old - x)^2 / T),   mean <- mean + (x - mean)/T
// which keeps V equal to the batch population variance of the stream.
struct RunningStats {
  std::int64_t count = 0;
  double mean = 0.0;
  double var = 0.0;

  void push(double x) {
    ++count;
    const double n = static_cast<double>(count);
    const double d = mean - x;
    var = ((n - 1.0) / n) * (var + d * d / n);
    mean += (x - mean) / n;
  }

  bool visited() const { return count > 0; }
};

}  // namespace cobrand
