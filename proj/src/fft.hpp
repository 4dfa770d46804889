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

#include <Eigen/Dense>

namespace pmsim::detail {

// Unitary DFT (1/sqrt(n) each way). Forward uses the exp(-i 2 pi j k / n)
// kernel, so index k of the result carries momentum 2 pi k / (n dx) with the
// upper half aliased to negative momenta.
void fft_unitary(Eigen::VectorXcd& v, bool forward);

// Same transform applied to every column of a matrix (pointer index = row).
void fft_unitary_cols(Eigen::MatrixXcd& m, bool forward);

}  // namespace pmsim::detail
