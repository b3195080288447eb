// Copyright 2026 The mtsim Authors
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

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <memory>
#include <mutex>

#include "mtsim/error.h"
#include "mtsim/simulate.h"

namespace mtsim {
namespace {

constexpr std::size_t kDirectLimit = 64;

// FFTW's planner is not re-entrant; executing a plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using FftwArray = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwArray<T> fftw_array(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwArray<T>(p);
}

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {}
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  fftw_plan get() const { return plan_; }

 private:
  fftw_plan plan_;
};

// Smallest 2^a 3^b 5^c >= n.
std::size_t fft_size(std::size_t n) {
  std::size_t best = 1;
  while (best < n) best <<= 1;
  for (std::size_t p5 = 1; p5 < best; p5 *= 5)
    for (std::size_t p35 = p5; p35 < best; p35 *= 3) {
      std::size_t v = p35;
      while (v < n) v <<= 1;
      best = std::min(best, v);
    }
  return best;
}

std::vector<double> direct(const std::vector<double>& x, const std::vector<double>& h) {
  std::vector<double> y(x.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t k = 0; k < h.size(); ++k) y[i + k] += x[i] * h[k];
  return y;
}

std::vector<double> via_fft(const std::vector<double>& x, const std::vector<double>& h) {
  const std::size_t out_len = x.size() + h.size() - 1;
  const std::size_t n = fft_size(out_len);
  const std::size_t bins = n / 2 + 1;

  auto a = fftw_array<double>(n);
  auto b = fftw_array<double>(n);
  auto fa = fftw_array<fftw_complex>(bins);
  auto fb = fftw_array<fftw_complex>(bins);

  std::unique_ptr<Plan> fwd, inv;
  {
    std::lock_guard lock(planner_mutex());
    fwd = std::make_unique<Plan>(
        fftw_plan_dft_r2c_1d(static_cast<int>(n), a.get(), fa.get(), FFTW_ESTIMATE));
    inv = std::make_unique<Plan>(
        fftw_plan_dft_c2r_1d(static_cast<int>(n), fa.get(), a.get(), FFTW_ESTIMATE));
  }

  std::fill_n(a.get(), n, 0.0);
  std::copy(x.begin(), x.end(), a.get());
  std::fill_n(b.get(), n, 0.0);
  std::copy(h.begin(), h.end(), b.get());
  fftw_execute_dft_r2c(fwd->get(), a.get(), fa.get());
  fftw_execute_dft_r2c(fwd->get(), b.get(), fb.get());

  for (std::size_t k = 0; k < bins; ++k) {
    const double re = fa[k][0] * fb[k][0] - fa[k][1] * fb[k][1];
    const double im = fa[k][0] * fb[k][1] + fa[k][1] * fb[k][0];
    fa[k][0] = re;
    fa[k][1] = im;
  }
  fftw_execute_dft_c2r(inv->get(), fa.get(), a.get());

  std::vector<double> y(out_len);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < out_len; ++i) y[i] = a[i] * scale;
  return y;
}

}  // namespace

AudioBuffer convolve(const AudioBuffer& source, const ImpulseResponse& ir) {
  if (source.sample_rate_hz != ir.sample_rate_hz)
    throw ConfigError("convolve: sample rate mismatch (" +
                      std::to_string(source.sample_rate_hz) + " vs " +
                      std::to_string(ir.sample_rate_hz) + " Hz)");
  if (ir.samples.empty())
    throw ConfigError("convolve: empty impulse response '" + ir.id + "'");
  if (source.samples.empty()) return AudioBuffer{{}, source.sample_rate_hz};
  const bool small =
      std::min(source.samples.size(), ir.samples.size()) <= kDirectLimit;
  return AudioBuffer{small ? direct(source.samples, ir.samples)
                           : via_fft(source.samples, ir.samples),
                     source.sample_rate_hz};
}

}  // namespace mtsim
