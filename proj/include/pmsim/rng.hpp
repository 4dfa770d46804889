// Copyright 2026 The pmsim Authors
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

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pmsim/errors.hpp"

namespace pmsim {

// Philox4x32-10 block cipher (Random123 constants). A (key, counter) pair maps
// to four 32-bit words; there is no hidden state, so any trial of a Monte Carlo
// ensemble can be generated independently and in any order, on any number of
// threads, with identical output for a given seed.
class Philox4x32 {
 public:
  using Block = std::array<uint32_t, 4>;

  Philox4x32(uint32_t key0, uint32_t key1) : k0_(key0), k1_(key1) {}

  Block operator()(Block ctr) const {
    uint32_t k0 = k0_;
    uint32_t k1 = k1_;
    for (int round = 0; round < 10; ++round) {
      uint64_t p0 = uint64_t(0xD2511F53u) * ctr[0];
      uint64_t p1 = uint64_t(0xCD9E8D57u) * ctr[2];
      ctr = {uint32_t(p1 >> 32) ^ ctr[1] ^ k0, uint32_t(p1),
             uint32_t(p0 >> 32) ^ ctr[3] ^ k1, uint32_t(p0)};
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return ctr;
  }

 private:
  uint32_t k0_;
  uint32_t k1_;
};

// Draw source for one Monte Carlo trial. The counter layout is
// (block index, trial lo, trial hi, stream id); the key carries the user seed.
// Distinct (seed, stream, trial) triples therefore never collide.
class TrialRng {
 public:
  TrialRng(uint64_t seed, uint32_t stream, uint64_t trial)
      : gen_(uint32_t(seed), uint32_t(seed >> 32)),
        c1_(uint32_t(trial)),
        c2_(uint32_t(trial >> 32)),
        c3_(stream) {}

  uint32_t next_u32() {
    if (idx_ == 4) {
      block_ = gen_({ctr_++, c1_, c2_, c3_});
      idx_ = 0;
    }
    return block_[idx_++];
  }

  uint64_t next_u64() {
    uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform on [0, 1) with 53 significant bits.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the paired deviate is cached so the
  // number of counter blocks consumed stays deterministic.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double angle = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

  // Index draw by inverse CDF over a cumulative weight table whose last
  // entry is the total weight (usually 1).
  int discrete(const std::vector<double>& cumulative) {
    if (cumulative.empty()) throw ConfigError("discrete draw: empty weight table");
    double u = uniform() * cumulative.back();
    int lo = 0;
    int hi = int(cumulative.size()) - 1;
    while (lo < hi) {
      int mid = (lo + hi) / 2;
      if (u < cumulative[mid]) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return lo;
  }

 private:
  Philox4x32 gen_;
  uint32_t ctr_ = 0;
  uint32_t c1_;
  uint32_t c2_;
  uint32_t c3_;
  Philox4x32::Block block_{};
  int idx_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pmsim
