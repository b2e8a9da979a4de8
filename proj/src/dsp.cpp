// SPDX-License-Identifier: Apache-2.0
#include "nfsense/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace nfsense::dsp {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct RealFft::Impl {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (plan) fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

RealFft::RealFft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n == 0) throw std::invalid_argument("FFT length must be positive");
  std::lock_guard lock(planner_mutex());
  impl_->in = fftw_alloc_real(n);
  impl_->out = fftw_alloc_complex(n / 2 + 1);
  if (!impl_->in || !impl_->out) throw std::bad_alloc();
  // ESTIMATE keeps plans, and therefore rounding, identical across runs.
  impl_->plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), impl_->in, impl_->out, FFTW_ESTIMATE);
  if (!impl_->plan) throw std::runtime_error("FFTW planning failed");
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

std::vector<std::complex<double>> RealFft::forward(std::span<const double> x) {
  if (x.size() != n_) throw std::invalid_argument("FFT input length mismatch");
  std::copy(x.begin(), x.end(), impl_->in);
  fftw_execute(impl_->plan);
  std::vector<std::complex<double>> out(bins());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = {impl_->out[k][0], impl_->out[k][1]};
  return out;
}

std::vector<double> RealFft::magnitude(std::span<const double> x) {
  if (x.size() != n_) throw std::invalid_argument("FFT input length mismatch");
  std::copy(x.begin(), x.end(), impl_->in);
  fftw_execute(impl_->plan);
  std::vector<double> out(bins());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::hypot(impl_->out[k][0], impl_->out[k][1]);
  return out;
}

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / n);
  return w;
}

std::vector<double> kaiser(std::size_t n, double beta) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  const double norm = std::cyl_bessel_i(0.0, beta);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
    w[i] = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
  }
  return w;
}

std::vector<double> fir_lowpass(std::size_t taps, double cutoff_hz, double fs_hz) {
  if (taps % 2 == 0) throw std::invalid_argument("FIR tap count must be odd");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < fs_hz / 2.0)) {
    throw std::invalid_argument("FIR cutoff must lie in (0, fs/2)");
  }
  const double fc = cutoff_hz / fs_hz;
  const auto mid = static_cast<double>(taps / 2);
  const std::vector<double> w = kaiser(taps, kFirKaiserBeta);
  std::vector<double> h(taps);
  double sum = 0.0;
  for (std::size_t i = 0; i < taps; ++i) {
    const double m = static_cast<double>(i) - mid;
    const double sinc = m == 0.0 ? 2.0 * fc : std::sin(2.0 * kPi * fc * m) / (kPi * m);
    h[i] = sinc * w[i];
    sum += h[i];
  }
  for (double& v : h) v /= sum;
  return h;
}

namespace {

// Causal convolution truncated to the input length.
std::vector<double> filter_forward(std::span<const double> h, const std::vector<double>& x) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = 0.0;
    const std::size_t kmax = std::min(h.size(), n + 1);
    for (std::size_t k = 0; k < kmax; ++k) acc += h[k] * x[n - k];
    y[n] = acc;
  }
  return y;
}

}  // namespace

std::vector<double> filtfilt(std::span<const double> h, std::span<const double> x) {
  if (x.empty()) return {};
  if (h.empty()) throw std::invalid_argument("filter has no taps");
  const std::size_t n = x.size();
  const std::size_t pad = std::min(3 * h.size(), n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  std::vector<double> y = filter_forward(h, ext);
  std::reverse(y.begin(), y.end());
  y = filter_forward(h, y);
  std::reverse(y.begin(), y.end());
  // Forward-backward with a symmetric kernel of length M delays by zero
  // overall, so the original samples sit at [pad, pad + n).
  return {y.begin() + static_cast<std::ptrdiff_t>(pad),
          y.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

double median(std::vector<double> x) {
  if (x.empty()) throw std::invalid_argument("median of empty sequence");
  const std::size_t mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid), x.end());
  const double upper = x[mid];
  if (x.size() % 2 == 1) return upper;
  const double lower = *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::vector<double> hampel(std::span<const double> x, std::size_t half_width, double n_sigma) {
  std::vector<double> out(x.begin(), x.end());
  const std::size_t n = x.size();
  std::vector<double> win;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half_width ? i - half_width : 0;
    const std::size_t hi = std::min(n, i + half_width + 1);
    win.assign(x.begin() + static_cast<std::ptrdiff_t>(lo), x.begin() + static_cast<std::ptrdiff_t>(hi));
    const double med = median(win);
    for (double& v : win) v = std::abs(v - med);
    const double mad = 1.4826 * median(win);
    if (std::abs(x[i] - med) > n_sigma * mad) out[i] = med;
  }
  return out;
}

std::vector<double> unwrap(std::span<const double> phase) {
  std::vector<double> out(phase.begin(), phase.end());
  double offset = 0.0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double d = phase[i] - phase[i - 1];
    offset -= 2.0 * kPi * std::round(d / (2.0 * kPi));
    out[i] = phase[i] + offset;
  }
  return out;
}

std::vector<double> interp_linear(std::span<const double> t, std::span<const double> y,
                                  std::span<const double> query) {
  if (t.empty() || t.size() != y.size()) throw std::invalid_argument("interp_linear: bad support");
  std::vector<double> out(query.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < query.size(); ++i) {
    const double q = query[i];
    if (q <= t.front()) {
      out[i] = y.front();
      continue;
    }
    if (q >= t.back()) {
      out[i] = y.back();
      continue;
    }
    if (j > 0 && t[j] > q) j = 0;
    while (t[j + 1] < q) ++j;
    const double a = (q - t[j]) / (t[j + 1] - t[j]);
    out[i] = y[j] + a * (y[j + 1] - y[j]);
  }
  return out;
}

std::vector<double> detrend_linear(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> out(x.begin(), x.end());
  if (n < 2) {
    for (double& v : out) v = 0.0;
    return out;
  }
  const double tm = 0.5 * static_cast<double>(n - 1);
  const double ym = mean(x);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = static_cast<double>(i) - tm;
    sxy += dt * (x[i] - ym);
    sxx += dt * dt;
  }
  const double slope = sxy / sxx;
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - ym - slope * (static_cast<double>(i) - tm);
  return out;
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size()));
}

Psd welch(std::span<const double> x, double fs_hz, std::size_t seg_len) {
  if (seg_len < 2 || x.size() < seg_len) throw std::invalid_argument("welch: track shorter than one segment");
  const std::vector<double> w = hann(seg_len);
  double w_energy = 0.0;
  for (double v : w) w_energy += v * v;
  RealFft fft(seg_len);
  const std::size_t hop = seg_len / 2;
  Psd out;
  out.power.assign(fft.bins(), 0.0);
  std::size_t segments = 0;
  std::vector<double> buf(seg_len);
  for (std::size_t start = 0; start + seg_len <= x.size(); start += hop) {
    const double m = mean(x.subspan(start, seg_len));
    for (std::size_t i = 0; i < seg_len; ++i) buf[i] = (x[start + i] - m) * w[i];
    const std::vector<double> mag = fft.magnitude(buf);
    for (std::size_t k = 0; k < mag.size(); ++k) out.power[k] += mag[k] * mag[k];
    ++segments;
  }
  const double scale = 1.0 / (fs_hz * w_energy * static_cast<double>(segments));
  for (std::size_t k = 0; k < out.power.size(); ++k) {
    out.power[k] *= scale;
    const bool edge = k == 0 || (seg_len % 2 == 0 && k == out.power.size() - 1);
    if (!edge) out.power[k] *= 2.0;
  }
  out.freq_hz.resize(out.power.size());
  for (std::size_t k = 0; k < out.freq_hz.size(); ++k) out.freq_hz[k] = k * fs_hz / seg_len;
  return out;
}

}  // namespace nfsense::dsp
