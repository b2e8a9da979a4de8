// SPDX-License-Identifier: Apache-2.0
#include "nfsense/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "nfsense/tcn.hpp"
#include "nfsense/text_io.hpp"

namespace nfsense {

namespace {

void require_same_shape(const Spectrogram& a, const Spectrogram& b) {
  if (a.n_f != b.n_f || a.n_t != b.n_t) {
    throw std::invalid_argument("spectrogram shapes differ: " + std::to_string(a.n_f) + "x" + std::to_string(a.n_t) +
                                " vs " + std::to_string(b.n_f) + "x" + std::to_string(b.n_t));
  }
}

std::vector<double> mean_spectrum(const Spectrogram& spec) {
  std::vector<double> avg(spec.n_f, 0.0);
  std::size_t cols = 0;
  for (std::size_t t = 0; t < spec.n_t; ++t) {
    if (spec.no_data_cols[t]) continue;
    ++cols;
    for (std::size_t f = 0; f < spec.n_f; ++f) avg[f] += spec.at(f, t);
  }
  if (cols == 0) throw std::invalid_argument("no data");
  for (double& v : avg) v /= static_cast<double>(cols);
  return avg;
}

/// Phase-averaged STFT magnitude (bins 0..n_bins-1) of a unit tone at f_hz
/// after the same mean removal and Hann window the pipeline applies.
std::vector<double> tone_template(double f_hz, double fs_hz, std::size_t fft_len, std::size_t n_bins,
                                  dsp::RealFft& fft, const std::vector<double>& w) {
  constexpr int kPhases = 16;
  std::vector<double> acc(n_bins, 0.0);
  std::vector<double> buf(fft_len);
  for (int p = 0; p < kPhases; ++p) {
    const double phi = 2.0 * std::numbers::pi * p / kPhases;
    for (std::size_t n = 0; n < fft_len; ++n) buf[n] = std::sin(2.0 * std::numbers::pi * f_hz * n / fs_hz + phi);
    const double m = dsp::mean(buf);
    for (std::size_t n = 0; n < fft_len; ++n) buf[n] = (buf[n] - m) * w[n];
    const std::vector<double> mag = fft.magnitude(buf);
    for (std::size_t k = 0; k < n_bins; ++k) acc[k] += mag[k];
  }
  return acc;
}

/// min over (a, c) of ||y - a x - c||^2; the constant absorbs a flat floor.
double affine_residual(std::span<const double> y, std::span<const double> x) {
  const double n = static_cast<double>(y.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    sx += x[k];
    sy += y[k];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  return sxx > 0.0 ? syy - sxy * sxy / sxx : syy;
}

double parabola_offset(double a, double b, double c) {
  const double den = a - 2.0 * b + c;
  if (den == 0.0) return 0.0;
  return std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
}

}  // namespace

double recovery_mse(const Spectrogram& recovered, const Spectrogram& truth) {
  require_same_shape(recovered, truth);
  if (truth.data.empty()) throw std::invalid_argument("recovery_mse: empty spectrogram");
  double se = 0.0;
  for (std::size_t i = 0; i < truth.data.size(); ++i) {
    const double d = recovered.data[i] - truth.data[i];
    se += d * d;
  }
  return se / static_cast<double>(truth.data.size());
}

RateEstimate estimate_rate(const Spectrogram& spec, RateBand band, const RateOptions& opt) {
  if (!(band.lo_hz >= 0.0 && band.hi_hz > band.lo_hz)) throw std::invalid_argument("rate band must satisfy 0 <= lo < hi");
  if (!(spec.bin_hz > 0.0)) throw std::invalid_argument("spectrogram has no bin spacing");
  if (band.hi_hz > spec.bin_hz * static_cast<double>(spec.n_f - 1)) {
    throw std::invalid_argument("rate band exceeds spectrogram coverage");
  }
  const std::vector<double> avg = mean_spectrum(spec);

  RateEstimate out;
  double total = 0.0;
  for (double v : avg) total += v;
  const double peak = *std::max_element(avg.begin(), avg.end());
  out.confidence = total > 0.0 ? peak / (total / static_cast<double>(avg.size())) : 0.0;

  if (opt.refine == RateRefine::parabolic) {
    const auto k_lo = static_cast<std::size_t>(std::ceil(band.lo_hz / spec.bin_hz - 1e-12));
    const auto k_hi = static_cast<std::size_t>(std::floor(band.hi_hz / spec.bin_hz + 1e-12));
    if (k_lo > k_hi) throw std::invalid_argument("rate band contains no spectrogram bin");
    std::size_t k = k_lo;
    for (std::size_t i = k_lo; i <= k_hi; ++i)
      if (avg[i] > avg[k]) k = i;
    double delta = 0.0;
    if (k > 0 && k + 1 < avg.size()) delta = parabola_offset(avg[k - 1], avg[k], avg[k + 1]);
    out.bpm = std::max(0.0, 60.0 * (static_cast<double>(k) + delta) * spec.bin_hz);
    return out;
  }

  if (opt.fft_len < 2 || !(opt.scan_step_hz > 0.0)) throw std::invalid_argument("invalid rate template options");
  const double fs = spec.bin_hz * static_cast<double>(opt.fft_len);
  const std::size_t n_bins =
      std::min(spec.n_f, static_cast<std::size_t>(std::ceil(band.hi_hz / spec.bin_hz)) + 2);
  dsp::RealFft fft(opt.fft_len);
  const std::vector<double> w = dsp::hann(opt.fft_len);

  const auto steps = static_cast<std::size_t>(std::floor((band.hi_hz - band.lo_hz) / opt.scan_step_hz)) + 1;
  std::vector<double> resid(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double f = band.lo_hz + static_cast<double>(i) * opt.scan_step_hz;
    const std::vector<double> tpl = tone_template(f, fs, opt.fft_len, n_bins, fft, w);
    resid[i] = affine_residual(std::span<const double>(avg).first(n_bins), tpl);
  }
  const auto best = static_cast<std::size_t>(std::min_element(resid.begin(), resid.end()) - resid.begin());
  double delta = 0.0;
  if (best > 0 && best + 1 < steps) delta = parabola_offset(resid[best - 1], resid[best], resid[best + 1]);
  const double f_hat = band.lo_hz + (static_cast<double>(best) + delta) * opt.scan_step_hz;
  out.bpm = std::max(0.0, 60.0 * f_hat);
  return out;
}

double spectral_entropy(const Spectrogram& spec) {
  if (spec.n_f == 0) throw std::invalid_argument("spectral_entropy: no frequency bins");
  double sum_h = 0.0;
  std::size_t cols = 0;
  for (std::size_t t = 0; t < spec.n_t; ++t) {
    if (spec.no_data_cols[t]) continue;
    ++cols;
    double total = 0.0;
    for (std::size_t f = 0; f < spec.n_f; ++f) total += std::max(0.0, spec.at(f, t));
    if (!(total > 0.0)) {
      sum_h += std::log2(static_cast<double>(spec.n_f));
      continue;
    }
    double h = 0.0;
    for (std::size_t f = 0; f < spec.n_f; ++f) {
      const double p = std::max(0.0, spec.at(f, t)) / total;
      if (p > 0.0) h -= p * std::log2(p);
    }
    sum_h += h;
  }
  if (cols == 0) throw std::invalid_argument("spectral_entropy: every column is no-data");
  return sum_h / static_cast<double>(cols);
}

std::vector<double> band_energy_db(const Spectrogram& spec, RateBand band) {
  std::vector<double> out(spec.n_t, -std::numeric_limits<double>::infinity());
  for (std::size_t t = 0; t < spec.n_t; ++t) {
    if (spec.no_data_cols[t]) continue;
    double e = 0.0;
    for (std::size_t f = 0; f < spec.n_f; ++f) {
      const double hz = static_cast<double>(f) * spec.bin_hz;
      if (hz >= band.lo_hz && hz <= band.hi_hz) e += spec.at(f, t) * spec.at(f, t);
    }
    out[t] = 10.0 * std::log10(e);
  }
  return out;
}

ComparisonReport compare_csi_bfi(std::span<const double> csi, std::span<const double> bfi, double fs_hz,
                                 double window_s) {
  if (csi.size() != bfi.size()) throw std::invalid_argument("compare_csi_bfi: tracks differ in length");
  if (!(fs_hz > 0.0) || !(window_s > 0.0)) throw std::invalid_argument("compare_csi_bfi: fs and window must be > 0");
  const auto win = static_cast<std::size_t>(std::llround(window_s * fs_hz));
  if (win < 2 || csi.size() < win) throw std::invalid_argument("compare_csi_bfi: track shorter than one window");
  ComparisonReport r;
  r.window_s = window_s;
  for (std::size_t s = 0; s + win <= csi.size(); s += win) {
    r.csi_window_std.push_back(dsp::stddev(dsp::detrend_linear(csi.subspan(s, win))));
    r.bfi_window_std.push_back(dsp::stddev(dsp::detrend_linear(bfi.subspan(s, win))));
  }
  const std::size_t seg = std::min<std::size_t>(256, csi.size());
  r.csi_psd = dsp::welch(csi, fs_hz, seg);
  r.bfi_psd = dsp::welch(bfi, fs_hz, seg);
  return r;
}

double high_frequency_fraction(const dsp::Psd& psd, double cutoff_hz) {
  double total = 0.0, high = 0.0;
  for (std::size_t k = 0; k < psd.power.size(); ++k) {
    total += psd.power[k];
    if (psd.freq_hz[k] > cutoff_hz) high += psd.power[k];
  }
  return total > 0.0 ? high / total : 0.0;
}

Spectrogram baseline_interpolation(const Spectrogram& x) { return interpolate_columns(x); }

Spectrogram baseline_passthrough(const Spectrogram& x) { return x; }

void write_metric_rows(std::ostream& os, std::span<const std::pair<std::string, double>> rows) {
  os << "metric,value\n";
  for (const auto& [name, value] : rows) os << name << ',' << format_double(value) << '\n';
}

void write_comparison_csv(std::ostream& os, const ComparisonReport& report) {
  os << "window,t_s,csi_std,bfi_std\n";
  for (std::size_t i = 0; i < report.csi_window_std.size(); ++i) {
    os << i << ',' << format_double(static_cast<double>(i) * report.window_s) << ','
       << format_double(report.csi_window_std[i]) << ',' << format_double(report.bfi_window_std[i]) << '\n';
  }
}

}  // namespace nfsense
