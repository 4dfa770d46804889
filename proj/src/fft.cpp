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

#include "fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <map>
#include <mutex>

#include "pmsim/errors.hpp"

namespace pmsim::detail {

namespace {

// One cached plan (with its dedicated buffer) per (size, direction). Plans are
// created with FFTW_ESTIMATE so the chosen algorithm, and therefore the exact
// floating-point result, depends only on the transform size.
struct PlanSlot {
  fftw_plan plan = nullptr;
  fftw_complex* buf = nullptr;
  int n = 0;
};

std::mutex& fft_mutex() {
  static std::mutex m;
  return m;
}

PlanSlot& slot_for(int n, bool forward) {
  static std::map<std::pair<int, bool>, PlanSlot> cache;
  PlanSlot& slot = cache[{n, forward}];
  if (!slot.plan) {
    slot.buf = fftw_alloc_complex(size_t(n));
    if (!slot.buf) throw NumericalError("fft: allocation failed");
    slot.plan = fftw_plan_dft_1d(n, slot.buf, slot.buf,
                                 forward ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!slot.plan) throw NumericalError("fft: plan creation failed");
    slot.n = n;
  }
  return slot;
}

void transform(std::complex<double>* data, int n, bool forward) {
  std::lock_guard<std::mutex> lock(fft_mutex());
  PlanSlot& slot = slot_for(n, forward);
  std::memcpy(slot.buf, data, sizeof(fftw_complex) * size_t(n));
  fftw_execute(slot.plan);
  double scale = 1.0 / std::sqrt(double(n));
  auto* out = reinterpret_cast<std::complex<double>*>(slot.buf);
  for (int i = 0; i < n; ++i) data[i] = out[i] * scale;
}

}  // namespace

void fft_unitary(Eigen::VectorXcd& v, bool forward) {
  transform(v.data(), int(v.size()), forward);
}

void fft_unitary_cols(Eigen::MatrixXcd& m, bool forward) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    transform(m.col(c).data(), int(m.rows()), forward);
  }
}

}  // namespace pmsim::detail
