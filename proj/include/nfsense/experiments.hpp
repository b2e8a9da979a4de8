// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "nfsense/metrics.hpp"
#include "nfsense/scene.hpp"
#include "nfsense/sra.hpp"

namespace nfsense {

/// Single-user breathing scenes rendered densely, cut into label chunks and
/// masked column-wise. Subject parameters are drawn per subject from `seed`.
struct RespirationDatasetOptions {
  std::size_t n_subjects = 8;
  double total_s = 1800.0;
  double sample_rate_hz = 100.0;
  std::size_t chunk_frames = 32;
  std::size_t masks_per_label = 8;
  MaskParams mask{0.3, 8.0};
  double split_fraction = 0.7;
  double noise_std = 0.05;
  std::uint64_t seed = 1;
};

/// Labels in subject order.
std::vector<Spectrogram> respiration_labels(const RespirationDatasetOptions& opt);
Dataset respiration_dataset(const RespirationDatasetOptions& opt);

struct LinkReport {
  double true_bpm = 0.0;
  double estimated_bpm = 0.0;
  double abs_error_bpm = 0.0;
  double entropy_bits = 0.0;
  /// Mean respiration-band column energy outside holds over that inside, in dB.
  double hold_drop_db = 0.0;
};

struct SeparabilityReport {
  std::vector<LinkReport> near_field;
  double baseline_bpm = 0.0;
  /// |baseline estimate - each subject's rate|.
  std::vector<double> baseline_errors_bpm;
  double baseline_entropy_bits = 0.0;

  double near_field_median_error() const;
  double baseline_median_error() const;
  double near_field_mean_entropy() const;
  double min_hold_drop_db() const;
};

/// Renders the four-user scene densely at `sample_rate_hz`, runs the
/// respiration pipeline on every UE link and on the baseline observer and
/// evaluates rate, entropy and breath-hold visibility.
SeparabilityReport four_user_separability(const FourUserOptions& opt, double sample_rate_hz = 100.0,
                                          RateBand band = {});

}  // namespace nfsense
