// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace nfsense::dsp {

/// Real-input forward DFT of fixed length backed by an FFTW plan.
/// One instance must not be shared between threads; separate instances may
/// run concurrently.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// Unnormalised one-sided spectrum X_k = sum_n x_n e^{-i 2 pi k n / N}.
  std::vector<std::complex<double>> forward(std::span<const double> x);
  /// |X_k| for k = 0 .. bins()-1.
  std::vector<double> magnitude(std::span<const double> x);

 private:
  struct Impl;
  std::size_t n_ = 0;
  std::unique_ptr<Impl> impl_;
};

/// Periodic Hann window (w[0] = 0, period n).
std::vector<double> hann(std::size_t n);
/// Symmetric Kaiser window.
std::vector<double> kaiser(std::size_t n, double beta);

/// Kaiser shape used by fir_lowpass. With 129 taps at fs = 64 f_cut the
/// zero-phase passband gain stays within 0.3% of 1 up to f_cut / 4.
inline constexpr double kFirKaiserBeta = 4.0;

/// Windowed-sinc (Kaiser) low-pass FIR with unit DC gain. `taps` is odd.
std::vector<double> fir_lowpass(std::size_t taps, double cutoff_hz, double fs_hz);

/// Zero-phase filtering: forward then backward pass, with odd-reflection
/// padding of min(3 * taps, n - 1) samples at each end.
std::vector<double> filtfilt(std::span<const double> h, std::span<const double> x);

/// Replaces samples deviating from the window median by more than
/// n_sigma * 1.4826 * MAD with that median. Window spans 2 * half_width + 1.
std::vector<double> hampel(std::span<const double> x, std::size_t half_width, double n_sigma);

/// Nearest-multiple-of-2pi continuation.
std::vector<double> unwrap(std::span<const double> phase);

/// Piecewise-linear interpolation of (t, y) at `query`; holds end values
/// outside [t.front(), t.back()]. `t` strictly increasing and non-empty.
std::vector<double> interp_linear(std::span<const double> t, std::span<const double> y,
                                  std::span<const double> query);

/// Removes the least-squares line.
std::vector<double> detrend_linear(std::span<const double> x);

double mean(std::span<const double> x);
/// Population standard deviation.
double stddev(std::span<const double> x);
double median(std::vector<double> x);

struct Psd {
  std::vector<double> freq_hz;
  std::vector<double> power;
};

/// Welch estimate with Hann segments of `seg_len`, 50% overlap, per-segment
/// mean removal, one-sided density scaling.
Psd welch(std::span<const double> x, double fs_hz, std::size_t seg_len);

}  // namespace nfsense::dsp
