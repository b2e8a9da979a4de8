// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "nfsense/scene.hpp"

namespace nfsense {

struct SraConfig {
  double dt = 0.1;
  int n_nsp = 2;
  double f_rs = 64.0;
  double f_cut = 1.0;
  std::size_t n_f = 32;
  std::size_t fft_len = 256;
  std::size_t hop = 16;
  double min_label_slice_s = 4.0;
  std::size_t fir_taps = 129;
  std::size_t hampel_half_width = 3;
  double hampel_sigma = 3.0;

  void validate() const;
  static SraConfig respiration();
  /// Gesture and activity share one geometry: 64-sample windows, hop 4.
  static SraConfig motion();
};

struct Slice {
  double start = 0.0;
  double stop = 0.0;
  bool non_sparse = false;

  friend bool operator==(const Slice&, const Slice&) = default;
};

/// Windows [k dt, (k+1) dt) over [0, duration_s) (the last one clipped) are
/// non-sparse iff they hold more than n_nsp samples; equal neighbours merge.
std::vector<Slice> segment(std::span<const double> times, double duration_s, const SraConfig& cfg);

struct ResampledSeries {
  std::vector<double> values;
  std::vector<bool> no_data;
  double rate = 0.0;
};

/// Uniform grid g / f_rs on [0, duration_s). See the pipeline notes in the
/// README for the dense/sparse treatment.
ResampledSeries resample(std::span<const double> times, std::span<const double> values,
                         const std::vector<Slice>& slices, double duration_s, const SraConfig& cfg);

/// Unnormalised STFT magnitudes, n_f x n_t row-major (bin outer).
struct RawSpectrogram {
  std::size_t n_f = 0;
  std::size_t n_t = 0;
  std::vector<double> mag;
  std::vector<bool> no_data_cols;
  std::vector<double> frame_times;
  std::vector<std::size_t> frame_start;
  double bin_hz = 0.0;
};

struct Spectrogram {
  std::size_t n_f = 0;
  std::size_t n_t = 0;
  /// n_f x n_t row-major (bin outer), entries in [-1, 1].
  std::vector<double> data;
  std::vector<bool> no_data_cols;
  std::vector<double> frame_times;
  double bin_hz = 0.0;

  double at(std::size_t f, std::size_t t) const { return data[f * n_t + t]; }
  double& at(std::size_t f, std::size_t t) { return data[f * n_t + t]; }
};

/// Hann-windowed, per-frame mean removed; a frame is no-data when more than
/// half its instants are no-data. Frame time is the window centre.
RawSpectrogram stft(const ResampledSeries& rs, const SraConfig& cfg);

/// Joint min-max over unflagged entries; flagged columns become -1; constant
/// input maps to 0.
Spectrogram normalize(const RawSpectrogram& raw);

Spectrogram spectrogram(const ResampledSeries& rs, const SraConfig& cfg);

/// Two-state Markov chain over columns with stationary missing probability
/// `fraction` and mean missing-run length `mean_run`. true = masked.
std::vector<bool> make_mask(std::size_t n_t, double fraction, double mean_run, std::uint64_t seed);

/// Copy of `label` with masked columns set to -1.
Spectrogram apply_mask(const Spectrogram& label, const std::vector<bool>& mask);

/// Normalised label chunks of `chunk_frames` columns: only frames whose
/// window lies inside a non-sparse slice of at least min_label_slice_s.
std::vector<Spectrogram> label_chunks(const RawSpectrogram& raw, const std::vector<Slice>& slices,
                                      const SraConfig& cfg, std::size_t chunk_frames);

/// Phase of a rendered link through segment, resample and STFT, then cut into
/// label chunks.
std::vector<Spectrogram> labels_from_series(const CsiSeries& series, double duration_s, const SraConfig& cfg,
                                            std::size_t chunk_frames);

struct MaskParams {
  double fraction = 0.3;
  double mean_run = 8.0;
};

struct TrainingPair {
  Spectrogram x;
  Spectrogram y;
};

struct Dataset {
  std::vector<TrainingPair> train;
  std::vector<TrainingPair> test;
};

/// Labels are shuffled with `seed` and split at label level (round(n *
/// split_fraction) to train); each label yields masks_per_label pairs.
Dataset build_dataset(const std::vector<Spectrogram>& labels, std::size_t masks_per_label, const MaskParams& mask,
                      double split_fraction, std::uint64_t seed);

/// Header `N_F N_T t0_s frame_dt_s`, n_f rows of values, then the 0/1 flag row.
void write_spectrogram(std::ostream& os, const Spectrogram& s);
Spectrogram read_spectrogram(std::string_view text);

/// dir/train/NNNN.{x,y} and dir/test/NNNN.{x,y}.
void write_dataset(const std::filesystem::path& dir, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace nfsense
