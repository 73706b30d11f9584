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

#include <cstddef>
#include <cstdint>

namespace swcf {

/// Counter-based random stream: draw k is a pure function of (seed, k).
///
/// Each draw hashes the pair with the SplitMix64 finalizer, so sequences are
/// identical on every platform and independent of thread scheduling. Use
/// `fork` to derive statistically independent child streams by name/index.
class RngState {
  public:
    RngState() = default;
    explicit RngState(std::uint64_t seed, std::uint64_t counter = 0) : seed_(seed), counter_(counter) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t counter() const noexcept { return counter_; }

    std::uint64_t next_u64() noexcept;
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Unbiased integer in [0, n); n must be > 0.
    std::uint64_t below(std::uint64_t n) noexcept;
    /// Standard normal via Box-Muller (one value per two draws).
    double normal() noexcept;

    /// Child stream keyed by `stream`; does not advance this stream.
    RngState fork(std::uint64_t stream) const noexcept;

    friend bool operator==(const RngState&, const RngState&) = default;

  private:
    std::uint64_t seed_ = 0;
    std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace swcf
