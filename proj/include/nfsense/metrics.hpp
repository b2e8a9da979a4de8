// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nfsense/dsp.hpp"
#include "nfsense/sra.hpp"

namespace nfsense {

/// Mean squared entrywise difference over all entries.
double recovery_mse(const Spectrogram& recovered, const Spectrogram& truth);

struct RateEstimate {
  double bpm = 0.0;
  /// Peak-to-mean ratio of the time-averaged spectrum over the band bins.
  double confidence = 0.0;
};

struct RateBand {
  double lo_hz = 0.1;
  double hi_hz = 0.6;
};

enum class RateRefine {
  /// Three-point parabola through the argmax bin and its neighbours.
  parabolic,
  /// Least-squares match of the averaged spectrum against the averaged STFT
  /// magnitude of a unit tone, scanned over the band and refined by a
  /// parabola through the residual minimum.
  tone_template,
};

struct RateOptions {
  RateRefine refine = RateRefine::tone_template;
  /// STFT length the spectrogram was computed with; the template needs it.
  std::size_t fft_len = 256;
  /// Candidate spacing of the template scan.
  double scan_step_hz = 0.002;
};

/// Throws std::invalid_argument("no data") when every column is a sentinel.
RateEstimate estimate_rate(const Spectrogram& spec, RateBand band, const RateOptions& opt = {});

/// Per-column Shannon entropy (bits) of the column normalised to unit sum,
/// averaged over non-sentinel columns. All-zero columns count as uniform.
double spectral_entropy(const Spectrogram& spec);

/// Band energy (sum of squares over band bins) of each column in dB; sentinel
/// columns hold -infinity.
std::vector<double> band_energy_db(const Spectrogram& spec, RateBand band);

struct ComparisonReport {
  double window_s = 0.1;
  std::vector<double> csi_window_std;
  std::vector<double> bfi_window_std;
  dsp::Psd csi_psd;
  dsp::Psd bfi_psd;
};

/// Per-window standard deviations after a linear detrend inside each window,
/// plus Welch spectra (segments of min(256, n) samples) of both tracks.
ComparisonReport compare_csi_bfi(std::span<const double> csi, std::span<const double> bfi, double fs_hz,
                                 double window_s = 0.1);

/// Share of total PSD power at frequencies above `cutoff_hz`.
double high_frequency_fraction(const dsp::Psd& psd, double cutoff_hz);

/// Masked columns filled by column-wise linear interpolation.
Spectrogram baseline_interpolation(const Spectrogram& x);
/// The masked input unchanged (sentinels stay at -1).
Spectrogram baseline_passthrough(const Spectrogram& x);

/// `metric,value` rows.
void write_metric_rows(std::ostream& os, std::span<const std::pair<std::string, double>> rows);
void write_comparison_csv(std::ostream& os, const ComparisonReport& report);

}  // namespace nfsense
