// Copyright 2026 The PatchDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "patchdp/convolution.h"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>

namespace patchdp {
namespace {

// FFTW planning is not thread-safe; execution with new-array functions is.
std::mutex& PlannerMutex() {
  static std::mutex mu;
  return mu;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> Allocate(size_t n) {
  return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

struct PlanDeleter {
  void operator()(fftw_plan p) const {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;

size_t NextFastSize(size_t n) {
  size_t size = 1;
  while (size < n) size <<= 1;
  // 3 * 2^k is also fast in FFTW and often much closer.
  if (size >= 4 && (size / 4) * 3 >= n) return (size / 4) * 3;
  return size;
}

}  // namespace

std::vector<double> ConvolveDirect(std::span<const double> a,
                                   std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (size_t j = 0; j < b.size(); ++j) {
    const double bj = b[j];
    if (bj == 0.0) continue;
    double* dst = out.data() + j;
    for (size_t i = 0; i < a.size(); ++i) dst[i] += a[i] * bj;
  }
  return out;
}

std::vector<double> ConvolveFft(std::span<const double> a,
                                std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const size_t out_size = a.size() + b.size() - 1;
  const size_t n = NextFastSize(out_size);
  const size_t spectrum = n / 2 + 1;
  const bool same = a.data() == b.data() && a.size() == b.size();

  FftwBuffer<double> real = Allocate<double>(n);
  FftwBuffer<fftw_complex> fa = Allocate<fftw_complex>(spectrum);
  FftwBuffer<fftw_complex> fb =
      same ? nullptr : Allocate<fftw_complex>(spectrum);

  Plan forward;
  Plan backward;
  {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    forward.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), real.get(),
                                       fa.get(), FFTW_ESTIMATE));
    backward.reset(fftw_plan_dft_c2r_1d(static_cast<int>(n), fa.get(),
                                        real.get(), FFTW_ESTIMATE));
  }

  auto transform = [&](std::span<const double> in, fftw_complex* dst) {
    std::fill(real.get(), real.get() + n, 0.0);
    std::copy(in.begin(), in.end(), real.get());
    fftw_execute_dft_r2c(forward.get(), real.get(), dst);
  };
  transform(a, fa.get());
  if (!same) transform(b, fb.get());

  auto* za = reinterpret_cast<std::complex<double>*>(fa.get());
  const auto* zb =
      reinterpret_cast<const std::complex<double>*>(same ? fa.get() : fb.get());
  for (size_t k = 0; k < spectrum; ++k) za[k] *= zb[k];

  fftw_execute_dft_c2r(backward.get(), fa.get(), real.get());
  std::vector<double> out(out_size);
  const double scale = 1.0 / static_cast<double>(n);
  for (size_t i = 0; i < out_size; ++i) out[i] = real[i] * scale;
  return out;
}

}  // namespace patchdp
