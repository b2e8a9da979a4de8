// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "nfsense/bfi.hpp"
#include "nfsense/dsp.hpp"
#include "nfsense/metrics.hpp"
#include "nfsense/rng.hpp"
#include "nfsense/scene.hpp"
#include "nfsense/traffic.hpp"

using namespace nfsense;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Spectrogram filled(std::size_t n_f, std::size_t n_t, double v) {
  Spectrogram s;
  s.n_f = n_f;
  s.n_t = n_t;
  s.data.assign(n_f * n_t, v);
  s.no_data_cols.assign(n_t, false);
  s.frame_times.assign(n_t, 0.0);
  s.bin_hz = 0.25;
  return s;
}

Spectrogram tone_spectrogram(double f_hz, double seconds) {
  const SraConfig cfg = SraConfig::respiration();
  ResampledSeries rs;
  rs.rate = cfg.f_rs;
  const auto n = static_cast<std::size_t>(seconds * cfg.f_rs);
  for (std::size_t g = 0; g < n; ++g) rs.values.push_back(std::sin(kTwoPi * f_hz * static_cast<double>(g) / cfg.f_rs + 0.3));
  rs.no_data.assign(n, false);
  return spectrogram(rs, cfg);
}

Spectrogram link_spectrogram(const CsiSeries& c, double duration) {
  const SraConfig cfg = SraConfig::respiration();
  const auto slices = segment(c.t, duration, cfg);
  return spectrogram(resample(c.t, csi_phase(c), slices, duration, cfg), cfg);
}

}  // namespace

TEST_CASE("recovery mse") {
  const Spectrogram a = filled(4, 10, 0.3);
  CHECK(recovery_mse(a, a) == 0.0);
  const Spectrogram b = filled(4, 10, 0.4);
  CHECK(recovery_mse(a, b) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(recovery_mse(b, a) == recovery_mse(a, b));

  // Three of ten columns differ, each with column mse 0.04.
  Spectrogram c = a;
  for (std::size_t t : {1, 4, 7})
    for (std::size_t f = 0; f < 4; ++f) c.at(f, t) += 0.2;
  CHECK(recovery_mse(c, a) == doctest::Approx(0.3 * 0.04).epsilon(1e-12));
  CHECK_THROWS(recovery_mse(a, filled(4, 9, 0.3)));
}

TEST_CASE("rate of a pure tone") {
  for (double f : {0.2, 0.25, 0.3, 0.35}) {
    const Spectrogram s = tone_spectrogram(f, 60.0);
    const RateEstimate r = estimate_rate(s, RateBand{});
    CHECK(std::abs(r.bpm - 60.0 * f) <= 0.3);
    CHECK(r.confidence > 1.0);
  }
  const Spectrogram s = tone_spectrogram(0.25, 60.0);
  CHECK(estimate_rate(s, RateBand{}).bpm == doctest::Approx(15.0).epsilon(0.3 / 15.0));
  // The parabolic variant is kept for comparison; it is biased on 0.25 Hz bins.
  const RateEstimate para = estimate_rate(s, RateBand{}, RateOptions{RateRefine::parabolic});
  CHECK(std::abs(para.bpm - 15.0) < 3.0);

  Spectrogram scaled = s;
  for (double& v : scaled.data) v *= 0.37;
  CHECK(estimate_rate(scaled, RateBand{}).bpm == doctest::Approx(estimate_rate(s, RateBand{}).bpm).epsilon(1e-9));

  Spectrogram gone = s;
  std::fill(gone.no_data_cols.begin(), gone.no_data_cols.end(), true);
  CHECK_THROWS_WITH(estimate_rate(gone, RateBand{}), "no data");
  CHECK_THROWS(estimate_rate(s, RateBand{0.1, 9.0}));
}

// Clean means no dynamic clutter path and no ambient term. The subject sits
// 0.15 m radially behind the UE; some offsets put the static/subject phasor
// angle near +-90 deg, where the phase fundamental vanishes and the second
// harmonic wins, so the offset is part of the scene definition.
TEST_CASE("near-field single subject rate within 1 bpm") {
  const Point2D ue{1.5, 0.5};
  const double d = std::hypot(ue.x, ue.y);
  const Point2D subject{ue.x * (1.0 + 0.15 / d), ue.y * (1.0 + 0.15 / d)};
  for (double bpm : {11.0, 16.5, 22.0}) {
    Scene scene;
    scene.cfg.eta = 0.0;
    scene.cfg.b = 0.0;
    scene.users.push_back({ue, subject, MotionProfile::respiration(bpm, 0.005)});
    scene.noise_std = 0.05;
    scene.seed = 3;
    const CsiSeries c = render_csi(scene, 0, uniform_times(120.0, 100.0));
    const RateEstimate r = estimate_rate(link_spectrogram(c, 120.0), RateBand{});
    CHECK(std::abs(r.bpm - bpm) < 1.0);
  }
}

TEST_CASE("spectral entropy") {
  Spectrogram one = filled(32, 5, 0.0);
  for (std::size_t t = 0; t < 5; ++t) one.at(3, t) = 0.8;
  CHECK(spectral_entropy(one) == 0.0);
  CHECK(spectral_entropy(filled(32, 5, 0.4)) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(spectral_entropy(filled(32, 5, 0.0)) == doctest::Approx(5.0).epsilon(1e-14));

  Rng rng(2);
  Spectrogram noisy = filled(32, 20, 0.0);
  for (double& v : noisy.data) v = uniform01(rng);
  const double h = spectral_entropy(noisy);
  CHECK(h >= 0.0);
  CHECK(h <= 5.0);

  Spectrogram gone = one;
  gone.no_data_cols.assign(5, true);
  CHECK_THROWS(spectral_entropy(gone));
}

TEST_CASE("band energy") {
  Spectrogram s = filled(8, 3, 0.0);
  s.at(1, 0) = 1.0;  // 0.25 Hz, inside the default band
  s.at(4, 0) = 1.0;  // 1.0 Hz, outside
  s.no_data_cols[2] = true;
  const auto e = band_energy_db(s, RateBand{});
  CHECK(e[0] == doctest::Approx(0.0));
  CHECK(std::isinf(e[1]));
  CHECK(std::isinf(e[2]));
  CHECK(e[2] < 0.0);
}

TEST_CASE("CSI and BFI comparison statistics") {
  const std::vector<double> flat(500, 2.0);
  const ComparisonReport z = compare_csi_bfi(flat, flat, 100.0);
  REQUIRE(z.csi_window_std.size() == 50);
  for (double v : z.csi_window_std) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS(compare_csi_bfi(std::vector<double>(5, 0.0), std::vector<double>(5, 0.0), 100.0));
  CHECK_THROWS(compare_csi_bfi(flat, std::vector<double>(400, 0.0), 100.0));

  Rng rng(6);
  std::vector<double> noise(4000);
  for (double& v : noise) v = standard_normal(rng);
  const std::vector<double> smooth = dsp::filtfilt(dsp::fir_lowpass(33, 5.0, 100.0), noise);
  const ComparisonReport r = compare_csi_bfi(noise, smooth, 100.0);
  CHECK(dsp::median(r.bfi_window_std) < dsp::median(r.csi_window_std));
  CHECK(high_frequency_fraction(r.bfi_psd, 5.0) < high_frequency_fraction(r.csi_psd, 5.0));

  std::ostringstream os;
  write_comparison_csv(os, r);
  CHECK(os.str().rfind("window,t_s,csi_std,bfi_std\n0,0,", 0) == 0);
}

// BFI is only observed at its report instants (at most 10 per second), so
// the comparison track is the report-time angle interpolated onto the dense
// CSI grid.
TEST_CASE("activity scene: BFI suppresses high-frequency content") {
  Scene scene;
  scene.users.push_back({{1.5, 1.0}, {1.65, 1.1}, MotionProfile::activity(21)});
  scene.noise_std = 1e-4;
  scene.seed = 8;
  const double fs = 200.0;
  const double duration = 20.0;
  const auto times = uniform_times(duration, fs);
  std::vector<double> csi;
  for (const ChannelMatrix& h : render_mimo(scene, 0, times, ArrayGeometry{})) csi.push_back(std::arg(h(0, 0)));
  csi = dsp::unwrap(csi);

  const std::vector<double> reports = generate_arrivals(TrafficModel::defaults(TrafficKind::ul_bfi, 4), duration);
  REQUIRE(reports.size() > 20);
  std::vector<double> phi;
  for (const ChannelMatrix& h : render_mimo(scene, 0, reports, ArrayGeometry{}))
    phi.push_back(extract_angles(steering_matrix(h)).phi.front());
  const std::vector<double> bfi = dsp::interp_linear(reports, dsp::unwrap(phi), times);

  const ComparisonReport r = compare_csi_bfi(csi, bfi, fs);
  CHECK(high_frequency_fraction(r.bfi_psd, 5.0) < high_frequency_fraction(r.csi_psd, 5.0));
}

TEST_CASE("baselines and metric rows") {
  Spectrogram x = filled(2, 4, 0.5);
  x.no_data_cols[1] = true;
  x.at(0, 1) = x.at(1, 1) = -1.0;
  CHECK(baseline_passthrough(x).data == x.data);
  const Spectrogram li = baseline_interpolation(x);
  CHECK(li.at(0, 1) == doctest::Approx(0.5));

  std::ostringstream os;
  const std::vector<std::pair<std::string, double>> rows{{"a", 0.5}, {"b", 2.0}};
  write_metric_rows(os, rows);
  CHECK(os.str() == "metric,value\na,0.5\nb,2\n");
}
