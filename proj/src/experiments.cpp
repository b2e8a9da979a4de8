// SPDX-License-Identifier: Apache-2.0
#include "nfsense/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nfsense/dsp.hpp"
#include "nfsense/rng.hpp"

namespace nfsense {

namespace {

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

Scene respiration_subject(const RespirationDatasetOptions& opt, std::size_t index, double duration_s) {
  Rng rng(derive_seed(opt.seed, {0x72657370, index}));
  Scene scene;
  scene.cfg.lambda = 0.06;
  scene.cfg.alpha = 4.0;
  scene.cfg.eta = 1.0;
  scene.cfg.b = 0.0;
  scene.cfg.g_tilde = 1.0;
  scene.noise_std = opt.noise_std;
  scene.seed = derive_seed(opt.seed, {0x7363656e65, index});

  const double d = uniform(rng, 1.0, 3.0);
  const double ang = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const Point2D ue{d * std::cos(ang), d * std::sin(ang)};
  const double off = uniform(rng, 0.1, 0.25);
  const Point2D subject{ue.x * (1.0 + off / d), ue.y * (1.0 + off / d)};
  const double rate = uniform(rng, 10.0, 24.0);
  const double amp = uniform(rng, 0.003, 0.007);

  // One hold per started minute, placed in its own minute.
  std::vector<std::pair<double, double>> holds;
  for (double m0 = 0.0; m0 + 30.0 <= duration_s; m0 += 60.0) {
    const double len = uniform(rng, 8.0, 15.0);
    const double span = std::min(60.0, duration_s - m0) - len;
    const double start = m0 + uniform(rng, 0.0, std::max(0.0, span));
    holds.emplace_back(start, start + len);
  }
  scene.users.push_back({ue, subject, MotionProfile::breath_holds(rate, std::move(holds), amp)});
  scene.validate();
  return scene;
}

struct LinkSpectrogram {
  RawSpectrogram raw;
  Spectrogram spec;
};

LinkSpectrogram link_spectrogram(const CsiSeries& series, double duration_s, const SraConfig& cfg) {
  const std::vector<double> phase = csi_phase(series);
  const std::vector<Slice> slices = segment(series.t, duration_s, cfg);
  const ResampledSeries rs = resample(series.t, phase, slices, duration_s, cfg);
  LinkSpectrogram out;
  out.raw = stft(rs, cfg);
  out.spec = normalize(out.raw);
  return out;
}

double median_of(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  return dsp::median(v);
}

}  // namespace

std::vector<Spectrogram> respiration_labels(const RespirationDatasetOptions& opt) {
  if (opt.n_subjects == 0 || !(opt.total_s > 0.0)) throw std::invalid_argument("dataset needs subjects and duration");
  const double per_subject = opt.total_s / static_cast<double>(opt.n_subjects);
  const SraConfig cfg = SraConfig::respiration();
  const std::vector<double> times = uniform_times(per_subject, opt.sample_rate_hz);
  std::vector<Spectrogram> labels;
  for (std::size_t s = 0; s < opt.n_subjects; ++s) {
    const Scene scene = respiration_subject(opt, s, per_subject);
    const CsiSeries series = render_csi(scene, 0, times);
    std::vector<Spectrogram> part = labels_from_series(series, per_subject, cfg, opt.chunk_frames);
    labels.insert(labels.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return labels;
}

Dataset respiration_dataset(const RespirationDatasetOptions& opt) {
  return build_dataset(respiration_labels(opt), opt.masks_per_label, opt.mask, opt.split_fraction, opt.seed);
}

double SeparabilityReport::near_field_median_error() const {
  std::vector<double> e;
  for (const LinkReport& l : near_field) e.push_back(l.abs_error_bpm);
  return median_of(e);
}

double SeparabilityReport::baseline_median_error() const { return median_of(baseline_errors_bpm); }

double SeparabilityReport::near_field_mean_entropy() const {
  if (near_field.empty()) throw std::invalid_argument("no near-field links");
  double s = 0.0;
  for (const LinkReport& l : near_field) s += l.entropy_bits;
  return s / static_cast<double>(near_field.size());
}

double SeparabilityReport::min_hold_drop_db() const {
  double m = std::numeric_limits<double>::infinity();
  for (const LinkReport& l : near_field) m = std::min(m, l.hold_drop_db);
  return m;
}

SeparabilityReport four_user_separability(const FourUserOptions& opt, double sample_rate_hz, RateBand band) {
  const Scene scene = four_user_scene(opt);
  const SraConfig cfg = SraConfig::respiration();
  const std::vector<double> times = uniform_times(opt.duration_s, sample_rate_hz);
  const double window_s = static_cast<double>(cfg.fft_len) / cfg.f_rs;
  SeparabilityReport rep;

  for (std::size_t i = 0; i < scene.users.size(); ++i) {
    const LinkSpectrogram ls = link_spectrogram(render_csi(scene, i, times), opt.duration_s, cfg);
    LinkReport lr;
    lr.true_bpm = scene.users[i].motion.rate_bpm;
    lr.estimated_bpm = estimate_rate(ls.spec, band, RateOptions{RateRefine::tone_template, cfg.fft_len}).bpm;
    lr.abs_error_bpm = std::abs(lr.estimated_bpm - lr.true_bpm);
    lr.entropy_bits = spectral_entropy(ls.spec);

    const std::vector<double> energy = band_energy_db(ls.spec, band);
    const auto& holds = scene.users[i].motion.holds;
    double in_sum = 0.0, out_sum = 0.0;
    std::size_t in_n = 0, out_n = 0;
    for (std::size_t t = 0; t < ls.spec.n_t; ++t) {
      if (ls.spec.no_data_cols[t]) continue;
      const double a = static_cast<double>(ls.raw.frame_start[t]) / cfg.f_rs;
      const double b = a + window_s;
      bool inside = false, overlaps = false;
      for (const auto& [h0, h1] : holds) {
        inside = inside || (a >= h0 && b <= h1);
        overlaps = overlaps || (a < h1 && b > h0);
      }
      const double lin = std::pow(10.0, energy[t] / 10.0);
      if (inside) {
        in_sum += lin;
        ++in_n;
      } else if (!overlaps) {
        out_sum += lin;
        ++out_n;
      }
    }
    if (in_n == 0 || out_n == 0) throw std::runtime_error("hold windows too short to measure band energy");
    lr.hold_drop_db = 10.0 * std::log10((out_sum / out_n) / std::max(in_sum / in_n, 1e-300));
    rep.near_field.push_back(lr);
  }

  const LinkSpectrogram base = link_spectrogram(render_baseline(scene, times), opt.duration_s, cfg);
  rep.baseline_bpm = estimate_rate(base.spec, band, RateOptions{RateRefine::tone_template, cfg.fft_len}).bpm;
  for (const SceneUser& u : scene.users) rep.baseline_errors_bpm.push_back(std::abs(rep.baseline_bpm - u.motion.rate_bpm));
  rep.baseline_entropy_bits = spectral_entropy(base.spec);
  return rep;
}

}  // namespace nfsense
