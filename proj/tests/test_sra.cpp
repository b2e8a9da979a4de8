// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <vector>

#include "nfsense/rng.hpp"
#include "nfsense/sra.hpp"
#include "nfsense/text_io.hpp"
#include "nfsense/traffic.hpp"

using namespace nfsense;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> grid_times(double t0, double t1, double rate) {
  std::vector<double> t;
  for (double x = t0; x < t1 - 1e-12; x += 1.0 / rate) t.push_back(x);
  return t;
}

Spectrogram constant_label(std::size_t n_f, std::size_t n_t, double v) {
  Spectrogram s;
  s.n_f = n_f;
  s.n_t = n_t;
  s.data.assign(n_f * n_t, v);
  s.no_data_cols.assign(n_t, false);
  s.frame_times.resize(n_t);
  for (std::size_t t = 0; t < n_t; ++t) s.frame_times[t] = 0.25 * static_cast<double>(t);
  s.bin_hz = 0.25;
  return s;
}

}  // namespace

TEST_CASE("config presets") {
  const SraConfig r = SraConfig::respiration();
  CHECK(r.fft_len == 256);
  CHECK(r.hop == 16);
  CHECK(r.f_cut == 1.0);
  const SraConfig m = SraConfig::motion();
  CHECK(m.fft_len == 64);
  CHECK(m.hop == 4);
  CHECK(m.f_cut == 20.0);
  SraConfig bad = r;
  bad.f_cut = 40.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("segmentation") {
  const SraConfig cfg = SraConfig::respiration();
  const auto dense = segment(grid_times(0.0, 5.0, 64.0), 5.0, cfg);
  REQUIRE(dense.size() == 1);
  CHECK(dense[0].non_sparse);
  CHECK(dense[0].stop == doctest::Approx(5.0));

  const auto empty = segment({}, 3.0, cfg);
  REQUIRE(empty.size() == 1);
  CHECK_FALSE(empty[0].non_sparse);

  std::vector<double> t = grid_times(0.0, 1.0, 64.0);
  const auto tail = grid_times(2.0, 3.0, 64.0);
  t.insert(t.end(), tail.begin(), tail.end());
  const auto s = segment(t, 3.0, cfg);
  REQUIRE(s.size() == 3);
  CHECK(s[0].non_sparse);
  CHECK_FALSE(s[1].non_sparse);
  CHECK(s[2].non_sparse);
  CHECK(std::abs(s[0].stop - 1.0) <= cfg.dt);
  CHECK(std::abs(s[1].stop - 2.0) <= cfg.dt);
}

TEST_CASE("resample passes a slow sinusoid") {
  const SraConfig cfg = SraConfig::respiration();
  const auto t = grid_times(0.0, 60.0, 100.0);
  std::vector<double> x;
  for (double v : t) x.push_back(std::sin(kTwoPi * 0.25 * v));
  const ResampledSeries rs = resample(t, x, segment(t, 60.0, cfg), 60.0, cfg);
  CHECK(rs.rate == 64.0);
  double peak = 0.0;
  for (std::size_t g = 640; g < rs.values.size() - 640; ++g) peak = std::max(peak, std::abs(rs.values[g]));
  CHECK(peak > 0.99);
  CHECK(peak < 1.01);
  CHECK(std::none_of(rs.no_data.begin(), rs.no_data.end(), [](bool b) { return b; }));
}

TEST_CASE("resample bridges empty sparse slices") {
  const SraConfig cfg = SraConfig::respiration();
  std::vector<double> t = grid_times(0.0, 2.0, 64.0);
  const auto tail = grid_times(4.0, 6.0, 64.0);
  t.insert(t.end(), tail.begin(), tail.end());
  const std::vector<double> x(t.size(), 0.5);
  const auto slices = segment(t, 6.0, cfg);
  const ResampledSeries rs = resample(t, x, slices, 6.0, cfg);
  for (std::size_t g = 0; g < rs.values.size(); ++g) {
    const double tg = static_cast<double>(g) / 64.0;
    if (tg > 2.1 && tg < 3.9) {
      CHECK(rs.no_data[g]);
      CHECK(rs.values[g] == doctest::Approx(0.5).epsilon(1e-9));
    }
  }
}

TEST_CASE("resample removes a single outlier") {
  const SraConfig cfg = SraConfig::respiration();
  const auto t = grid_times(0.0, 30.0, 100.0);
  Rng rng(17);
  const double sigma = 0.01;
  std::vector<double> clean, noisy;
  for (double v : t) {
    clean.push_back(std::sin(kTwoPi * 0.3 * v));
    noisy.push_back(clean.back() + sigma * standard_normal(rng));
  }
  noisy[1500] += 10.0;
  const auto slices = segment(t, 30.0, cfg);
  const ResampledSeries a = resample(t, noisy, slices, 30.0, cfg);
  const ResampledSeries b = resample(t, clean, slices, 30.0, cfg);
  double worst = 0.0;
  for (std::size_t g = 0; g < a.values.size(); ++g) worst = std::max(worst, std::abs(a.values[g] - b.values[g]));
  CHECK(worst < 3.0 * sigma);
}

TEST_CASE("segment and resample agree on dense instants") {
  const SraConfig cfg = SraConfig::respiration();
  const auto t = generate_arrivals(TrafficModel::defaults(TrafficKind::ul_csi, 4), 60.0);
  const std::vector<double> x(t.size(), 1.0);
  const auto slices = segment(t, 60.0, cfg);
  const ResampledSeries rs = resample(t, x, slices, 60.0, cfg);
  for (std::size_t g = 0; g < rs.values.size(); ++g) {
    const double tg = static_cast<double>(g) / cfg.f_rs;
    for (const Slice& s : slices)
      if (s.non_sparse && tg >= s.start && tg < s.stop) CHECK_FALSE(rs.no_data[g]);
  }
}

TEST_CASE("STFT of a bin-centred tone") {
  const SraConfig cfg = SraConfig::respiration();
  ResampledSeries rs;
  rs.rate = cfg.f_rs;
  for (std::size_t g = 0; g < 64 * 30; ++g) rs.values.push_back(std::sin(kTwoPi * 0.5 * static_cast<double>(g) / 64.0));
  rs.no_data.assign(rs.values.size(), false);
  const RawSpectrogram raw = stft(rs, cfg);
  CHECK(raw.bin_hz == 0.25);
  CHECK(raw.n_f == 32);
  for (std::size_t t = 0; t < raw.n_t; ++t) {
    std::size_t best = 0;
    for (std::size_t f = 1; f < raw.n_f; ++f)
      if (raw.mag[f * raw.n_t + t] > raw.mag[best * raw.n_t + t]) best = f;
    CHECK(best == 2);
  }

  ResampledSeries gone = rs;
  gone.no_data.assign(gone.values.size(), true);
  const Spectrogram s = spectrogram(gone, cfg);
  for (bool b : s.no_data_cols) CHECK(b);
  for (double v : s.data) CHECK(v == -1.0);

  ResampledSeries shorty = rs;
  shorty.values.resize(100);
  shorty.no_data.resize(100);
  CHECK_THROWS(stft(shorty, cfg));
}

TEST_CASE("normalisation") {
  RawSpectrogram raw;
  raw.n_f = 3;
  raw.n_t = 1;
  raw.mag = {2.0, 4.0, 6.0};
  raw.no_data_cols = {false};
  raw.frame_times = {0.0};
  const Spectrogram s = normalize(raw);
  CHECK(s.data == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(normalize(RawSpectrogram{s.n_f, s.n_t, s.data, s.no_data_cols, s.frame_times, {0}, 0.0}).data == s.data);

  raw.mag = {3.0, 3.0, 3.0};
  for (double v : normalize(raw).data) CHECK(v == 0.0);

  RawSpectrogram mixed;
  mixed.n_f = 2;
  mixed.n_t = 3;
  mixed.mag = {1.0, 9.0, 5.0, 3.0, 7.0, 2.0};
  mixed.no_data_cols = {false, true, false};
  mixed.frame_times = {0.0, 0.25, 0.5};
  const Spectrogram m = normalize(mixed);
  CHECK(m.at(0, 1) == -1.0);
  CHECK(m.at(1, 1) == -1.0);
  CHECK(m.at(0, 0) < m.at(0, 2));
  CHECK(m.at(0, 0) == 0.0);
  CHECK(m.at(0, 2) == 1.0);
  for (double v : m.data) CHECK((v >= -1.0 && v <= 1.0));
}

TEST_CASE("mask generator") {
  const auto none = make_mask(100, 0.0, 4.0, 1);
  CHECK(std::count(none.begin(), none.end(), true) == 0);
  const auto all = make_mask(100, 1.0, 4.0, 1);
  CHECK(std::count(all.begin(), all.end(), true) == 100);
  CHECK(make_mask(50, 0.3, 8.0, 9) == make_mask(50, 0.3, 8.0, 9));

  const auto m = make_mask(200000, 0.3, 8.0, 3);
  const double frac = static_cast<double>(std::count(m.begin(), m.end(), true)) / 200000.0;
  CHECK(frac == doctest::Approx(0.3).epsilon(0.05));
  std::size_t runs = 0, in_run = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i]) ++in_run;
    if (m[i] && (i == 0 || !m[i - 1])) ++runs;
  }
  CHECK(static_cast<double>(in_run) / static_cast<double>(runs) == doctest::Approx(8.0).epsilon(0.05));
  CHECK_THROWS(make_mask(10, 0.9, 1.0, 1));
  CHECK_THROWS(make_mask(10, 1.5, 4.0, 1));
}

TEST_CASE("dataset builder") {
  std::vector<Spectrogram> labels;
  for (int i = 0; i < 10; ++i) labels.push_back(constant_label(4, 8, 0.1 * i));
  const Dataset id = build_dataset(labels, 1, MaskParams{0.0, 4.0}, 0.7, 5);
  CHECK(id.train.size() == 7);
  CHECK(id.test.size() == 3);
  for (const TrainingPair& p : id.train) CHECK(p.x.data == p.y.data);

  const Dataset a = build_dataset(labels, 3, MaskParams{0.3, 2.0}, 0.7, 5);
  CHECK(a.train.size() == 21);
  for (const TrainingPair& p : a.train)
    for (std::size_t t = 0; t < p.x.n_t; ++t)
      if (p.x.no_data_cols[t])
        for (std::size_t f = 0; f < p.x.n_f; ++f) CHECK(p.x.at(f, t) == -1.0);

  const auto dir = std::filesystem::temp_directory_path() / "nfsense_test_dataset";
  std::filesystem::remove_all(dir);
  write_dataset(dir / "a", a);
  write_dataset(dir / "b", build_dataset(labels, 3, MaskParams{0.3, 2.0}, 0.7, 5));
  for (const char* part : {"train", "test"}) {
    for (const auto& e : std::filesystem::directory_iterator(dir / "a" / part)) {
      CHECK(read_text_file(e.path()) == read_text_file(dir / "b" / part / e.path().filename()));
    }
  }
  const Dataset back = read_dataset(dir / "a");
  REQUIRE(back.test.size() == a.test.size());
  CHECK(back.test[1].x.data == a.test[1].x.data);
  CHECK(back.test[1].x.no_data_cols == a.test[1].x.no_data_cols);
  std::filesystem::remove_all(dir);

  CHECK_THROWS(build_dataset({}, 1, MaskParams{}, 0.7, 1));
}

TEST_CASE("spectrogram text round trip") {
  Spectrogram s = constant_label(3, 4, 0.25);
  s.at(1, 2) = 0.75;
  s.no_data_cols[3] = true;
  for (std::size_t f = 0; f < 3; ++f) s.at(f, 3) = -1.0;
  std::ostringstream os;
  write_spectrogram(os, s);
  CHECK(os.str().rfind("3 4 0 0.25\n", 0) == 0);
  const Spectrogram back = read_spectrogram(os.str());
  CHECK(back.data == s.data);
  CHECK(back.no_data_cols == s.no_data_cols);
  CHECK(back.bin_hz == 0.25);
  CHECK_THROWS(read_spectrogram("3 4 0 0.25\n1 2 3 4\n"));
}
