// SPDX-License-Identifier: Apache-2.0
#include "nfsense/sra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nfsense/dsp.hpp"
#include "nfsense/rng.hpp"
#include "nfsense/text_io.hpp"

namespace nfsense {

void SraConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (n_nsp < 1) throw std::invalid_argument("n_nsp must be >= 1");
  if (!(f_cut > 0.0) || !(f_rs > 2.0 * f_cut)) throw std::invalid_argument("need f_rs > 2 f_cut > 0");
  if (fft_len < 2) throw std::invalid_argument("fft_len must be >= 2");
  if (n_f == 0 || n_f > fft_len / 2 + 1) throw std::invalid_argument("n_f must lie in [1, fft_len/2 + 1]");
  if (hop < 1) throw std::invalid_argument("hop must be >= 1");
  if (fir_taps % 2 == 0) throw std::invalid_argument("fir_taps must be odd");
}

SraConfig SraConfig::respiration() { return {}; }

SraConfig SraConfig::motion() {
  SraConfig c;
  c.f_cut = 20.0;
  c.fft_len = 64;
  c.hop = 4;
  return c;
}

std::vector<Slice> segment(std::span<const double> times, double duration_s, const SraConfig& cfg) {
  cfg.validate();
  if (!(duration_s > 0.0)) throw std::invalid_argument("duration must be > 0");
  const auto windows = static_cast<std::size_t>(std::ceil(duration_s / cfg.dt - 1e-9));
  std::vector<int> counts(windows, 0);
  for (double t : times) {
    if (t < 0.0 || t >= duration_s) continue;
    const auto w = std::min(windows - 1, static_cast<std::size_t>(t / cfg.dt));
    ++counts[w];
  }
  std::vector<Slice> out;
  for (std::size_t w = 0; w < windows; ++w) {
    const bool dense = counts[w] > cfg.n_nsp;
    const double start = static_cast<double>(w) * cfg.dt;
    const double stop = std::min(duration_s, static_cast<double>(w + 1) * cfg.dt);
    if (!out.empty() && out.back().non_sparse == dense) {
      out.back().stop = stop;
    } else {
      out.push_back({start, stop, dense});
    }
  }
  return out;
}

ResampledSeries resample(std::span<const double> times, std::span<const double> values,
                         const std::vector<Slice>& slices, double duration_s, const SraConfig& cfg) {
  cfg.validate();
  if (times.size() != values.size()) throw std::invalid_argument("resample: times and values differ in length");
  const auto n = static_cast<std::size_t>(std::ceil(duration_s * cfg.f_rs - 1e-9));
  ResampledSeries out;
  out.rate = cfg.f_rs;
  out.values.assign(n, 0.0);
  out.no_data.assign(n, true);
  if (n == 0) return out;

  // Outlier rejection inside each dense slice.
  std::vector<double> cleaned(values.begin(), values.end());
  std::size_t i = 0;
  for (const Slice& s : slices) {
    while (i < times.size() && times[i] < s.start) ++i;
    std::size_t j = i;
    while (j < times.size() && times[j] < s.stop) ++j;
    if (s.non_sparse && j > i) {
      const std::vector<double> fixed =
          dsp::hampel(std::span<const double>(values).subspan(i, j - i), cfg.hampel_half_width, cfg.hampel_sigma);
      std::copy(fixed.begin(), fixed.end(), cleaned.begin() + static_cast<std::ptrdiff_t>(i));
    }
    i = j;
  }

  std::vector<double> grid(n);
  for (std::size_t g = 0; g < n; ++g) grid[g] = static_cast<double>(g) / cfg.f_rs;

  std::vector<double> known_value(n, 0.0);
  std::vector<bool> known(n, false);
  std::vector<int> snap_count(n, 0);
  auto slice_of = [&](double t) -> const Slice* {
    auto it = std::upper_bound(slices.begin(), slices.end(), t, [](double x, const Slice& s) { return x < s.stop; });
    return it == slices.end() ? nullptr : &*it;
  };

  // Dense instants: interpolation through all cleaned samples.
  if (!times.empty()) {
    const std::vector<double> interp = dsp::interp_linear(times, cleaned, grid);
    for (std::size_t g = 0; g < n; ++g) {
      const Slice* s = slice_of(grid[g]);
      if (s && s->non_sparse) {
        known_value[g] = interp[g];
        known[g] = true;
      }
    }
  }
  // Sparse slices: snap each raw sample to its nearest grid instant.
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Slice* s = slice_of(times[k]);
    if (!s || s->non_sparse) continue;
    const auto g = static_cast<std::size_t>(std::llround(times[k] * cfg.f_rs));
    if (g >= n) continue;
    const Slice* sg = slice_of(grid[g]);
    if (sg && sg->non_sparse) continue;
    known_value[g] = (known_value[g] * snap_count[g] + cleaned[k]) / (snap_count[g] + 1);
    ++snap_count[g];
    known[g] = true;
  }

  std::vector<double> kt, kv;
  for (std::size_t g = 0; g < n; ++g) {
    if (known[g]) {
      kt.push_back(grid[g]);
      kv.push_back(known_value[g]);
    }
  }
  if (kt.empty()) return out;
  std::vector<double> bridged = dsp::interp_linear(kt, kv, grid);
  for (std::size_t g = 0; g < n; ++g) {
    if (known[g]) bridged[g] = known_value[g];
    out.no_data[g] = !known[g];
  }
  if (n > 1) {
    const std::vector<double> h = dsp::fir_lowpass(cfg.fir_taps, cfg.f_cut, cfg.f_rs);
    out.values = dsp::filtfilt(h, bridged);
  } else {
    out.values = bridged;
  }
  return out;
}

RawSpectrogram stft(const ResampledSeries& rs, const SraConfig& cfg) {
  cfg.validate();
  const std::size_t n = rs.values.size();
  if (n < cfg.fft_len) throw std::invalid_argument("series shorter than one STFT window");
  RawSpectrogram out;
  out.n_f = cfg.n_f;
  out.n_t = (n - cfg.fft_len) / cfg.hop + 1;
  out.bin_hz = rs.rate / static_cast<double>(cfg.fft_len);
  out.mag.assign(out.n_f * out.n_t, 0.0);
  out.no_data_cols.assign(out.n_t, false);
  const std::vector<double> w = dsp::hann(cfg.fft_len);
  dsp::RealFft fft(cfg.fft_len);
  std::vector<double> buf(cfg.fft_len);
  for (std::size_t t = 0; t < out.n_t; ++t) {
    const std::size_t s = t * cfg.hop;
    std::size_t missing = 0;
    for (std::size_t k = 0; k < cfg.fft_len; ++k) missing += rs.no_data[s + k] ? 1 : 0;
    out.no_data_cols[t] = 2 * missing > cfg.fft_len;
    const double m = dsp::mean(std::span<const double>(rs.values).subspan(s, cfg.fft_len));
    for (std::size_t k = 0; k < cfg.fft_len; ++k) buf[k] = (rs.values[s + k] - m) * w[k];
    const std::vector<double> mag = fft.magnitude(buf);
    for (std::size_t f = 0; f < out.n_f; ++f) out.mag[f * out.n_t + t] = mag[f];
    out.frame_start.push_back(s);
    out.frame_times.push_back((static_cast<double>(s) + cfg.fft_len / 2.0) / rs.rate);
  }
  return out;
}

Spectrogram normalize(const RawSpectrogram& raw) {
  Spectrogram s;
  s.n_f = raw.n_f;
  s.n_t = raw.n_t;
  s.no_data_cols = raw.no_data_cols;
  s.frame_times = raw.frame_times;
  s.bin_hz = raw.bin_hz;
  s.data.assign(raw.n_f * raw.n_t, -1.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t f = 0; f < raw.n_f; ++f) {
    for (std::size_t t = 0; t < raw.n_t; ++t) {
      if (raw.no_data_cols[t]) continue;
      const double v = raw.mag[f * raw.n_t + t];
      if (!std::isfinite(v)) throw std::invalid_argument("normalize: non-finite magnitude");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double span = hi - lo;
  for (std::size_t f = 0; f < raw.n_f; ++f) {
    for (std::size_t t = 0; t < raw.n_t; ++t) {
      if (raw.no_data_cols[t]) continue;
      const double v = raw.mag[f * raw.n_t + t];
      s.data[f * raw.n_t + t] = span > 0.0 ? std::clamp((v - lo) / span, 0.0, 1.0) : 0.0;
    }
  }
  return s;
}

Spectrogram spectrogram(const ResampledSeries& rs, const SraConfig& cfg) { return normalize(stft(rs, cfg)); }

std::vector<bool> make_mask(std::size_t n_t, double fraction, double mean_run, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("mask fraction must lie in [0, 1]");
  if (!(mean_run > 0.0)) throw std::invalid_argument("mean_run must be > 0");
  if (fraction == 0.0) return std::vector<bool>(n_t, false);
  if (fraction == 1.0) return std::vector<bool>(n_t, true);
  const double p_leave = 1.0 / mean_run;
  const double p_enter = fraction * p_leave / (1.0 - fraction);
  if (p_leave > 1.0 || p_enter > 1.0) {
    throw std::invalid_argument("mask fraction and mean run length are not jointly attainable");
  }
  Rng rng(derive_seed(seed, {0x6d61736b}));
  std::vector<bool> mask(n_t);
  bool missing = uniform01(rng) < fraction;
  for (std::size_t t = 0; t < n_t; ++t) {
    if (t > 0) missing = missing ? !(uniform01(rng) < p_leave) : uniform01(rng) < p_enter;
    mask[t] = missing;
  }
  return mask;
}

Spectrogram apply_mask(const Spectrogram& label, const std::vector<bool>& mask) {
  if (mask.size() != label.n_t) throw std::invalid_argument("mask length differs from frame count");
  Spectrogram x = label;
  for (std::size_t t = 0; t < x.n_t; ++t) {
    if (!mask[t]) continue;
    x.no_data_cols[t] = true;
    for (std::size_t f = 0; f < x.n_f; ++f) x.at(f, t) = -1.0;
  }
  return x;
}

std::vector<Spectrogram> label_chunks(const RawSpectrogram& raw, const std::vector<Slice>& slices,
                                      const SraConfig& cfg, std::size_t chunk_frames) {
  if (chunk_frames == 0) throw std::invalid_argument("chunk_frames must be positive");
  std::vector<Spectrogram> out;
  const double window_s = static_cast<double>(cfg.fft_len) / cfg.f_rs;
  for (const Slice& s : slices) {
    if (!s.non_sparse || s.stop - s.start < cfg.min_label_slice_s) continue;
    std::vector<std::size_t> frames;
    for (std::size_t t = 0; t < raw.n_t; ++t) {
      const double begin = static_cast<double>(raw.frame_start[t]) / cfg.f_rs;
      if (begin >= s.start - 1e-9 && begin + window_s <= s.stop + 1e-9 && !raw.no_data_cols[t]) frames.push_back(t);
    }
    for (std::size_t c = 0; c + chunk_frames <= frames.size(); c += chunk_frames) {
      RawSpectrogram part;
      part.n_f = raw.n_f;
      part.n_t = chunk_frames;
      part.bin_hz = raw.bin_hz;
      part.mag.resize(raw.n_f * chunk_frames);
      part.no_data_cols.assign(chunk_frames, false);
      for (std::size_t k = 0; k < chunk_frames; ++k) {
        const std::size_t t = frames[c + k];
        part.frame_times.push_back(raw.frame_times[t]);
        part.frame_start.push_back(raw.frame_start[t]);
        for (std::size_t f = 0; f < raw.n_f; ++f) part.mag[f * chunk_frames + k] = raw.mag[f * raw.n_t + t];
      }
      out.push_back(normalize(part));
    }
  }
  return out;
}

std::vector<Spectrogram> labels_from_series(const CsiSeries& series, double duration_s, const SraConfig& cfg,
                                            std::size_t chunk_frames) {
  const std::vector<double> phase = csi_phase(series);
  const std::vector<Slice> slices = segment(series.t, duration_s, cfg);
  const ResampledSeries rs = resample(series.t, phase, slices, duration_s, cfg);
  return label_chunks(stft(rs, cfg), slices, cfg, chunk_frames);
}

Dataset build_dataset(const std::vector<Spectrogram>& labels, std::size_t masks_per_label, const MaskParams& mask,
                      double split_fraction, std::uint64_t seed) {
  if (labels.empty()) throw std::invalid_argument("build_dataset: no eligible label slices");
  if (!(split_fraction >= 0.0 && split_fraction <= 1.0)) throw std::invalid_argument("split fraction must lie in [0, 1]");
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, {0x73706c6974}));
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(split_fraction * static_cast<double>(labels.size())));
  Dataset ds;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Spectrogram& y = labels[order[rank]];
    auto& bucket = rank < n_train ? ds.train : ds.test;
    for (std::size_t m = 0; m < masks_per_label; ++m) {
      const std::vector<bool> cols = make_mask(y.n_t, mask.fraction, mask.mean_run, derive_seed(seed, {order[rank], m}));
      bucket.push_back({apply_mask(y, cols), y});
    }
  }
  return ds;
}

void write_spectrogram(std::ostream& os, const Spectrogram& s) {
  const double t0 = s.frame_times.empty() ? 0.0 : s.frame_times.front();
  const double fdt = s.frame_times.size() > 1 ? s.frame_times[1] - s.frame_times[0] : 0.0;
  os << s.n_f << ' ' << s.n_t << ' ' << format_double(t0) << ' ' << format_double(fdt) << '\n';
  os << "# bin_hz " << format_double(s.bin_hz) << '\n';
  for (std::size_t f = 0; f < s.n_f; ++f) {
    for (std::size_t t = 0; t < s.n_t; ++t) os << (t ? " " : "") << format_double(s.at(f, t));
    os << '\n';
  }
  for (std::size_t t = 0; t < s.n_t; ++t) os << (t ? " " : "") << (s.no_data_cols[t] ? 1 : 0);
  os << '\n';
}

Spectrogram read_spectrogram(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> rows;
  double bin_hz = 0.0;
  while (std::getline(in, line)) {
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      const auto parts = split_ws(body.substr(1));
      if (parts.size() == 2 && parts[0] == "bin_hz") bin_hz = parse_double(parts[1]);
      continue;
    }
    rows.emplace_back(body);
  }
  if (rows.empty()) throw std::invalid_argument("spectrogram file is empty");
  const auto head = split_ws(rows[0]);
  if (head.size() != 4) throw std::invalid_argument("spectrogram header must be 'N_F N_T t0_s frame_dt_s'");
  Spectrogram s;
  s.n_f = static_cast<std::size_t>(parse_int(head[0]));
  s.n_t = static_cast<std::size_t>(parse_int(head[1]));
  const double t0 = parse_double(head[2]);
  const double fdt = parse_double(head[3]);
  s.bin_hz = bin_hz;
  if (rows.size() != s.n_f + 2) {
    throw std::invalid_argument("spectrogram file: expected " + std::to_string(s.n_f + 2) + " rows, found " +
                                std::to_string(rows.size()));
  }
  s.data.resize(s.n_f * s.n_t);
  for (std::size_t f = 0; f < s.n_f; ++f) {
    const auto vals = split_ws(rows[f + 1]);
    if (vals.size() != s.n_t) throw std::invalid_argument("spectrogram row " + std::to_string(f) + " has wrong length");
    for (std::size_t t = 0; t < s.n_t; ++t) s.at(f, t) = parse_double(vals[t]);
  }
  const auto flags = split_ws(rows[s.n_f + 1]);
  if (flags.size() != s.n_t) throw std::invalid_argument("spectrogram flag row has wrong length");
  for (const std::string& f : flags) s.no_data_cols.push_back(f == "1");
  for (std::size_t t = 0; t < s.n_t; ++t) s.frame_times.push_back(t0 + fdt * static_cast<double>(t));
  return s;
}

namespace {

std::string pair_stem(std::size_t i) {
  std::ostringstream os;
  os << std::setw(4) << std::setfill('0') << i;
  return os.str();
}

void write_split(const std::filesystem::path& dir, const std::vector<TrainingPair>& pairs) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::ostringstream x, y;
    write_spectrogram(x, pairs[i].x);
    write_spectrogram(y, pairs[i].y);
    write_text_file(dir / (pair_stem(i) + ".x"), x.str());
    write_text_file(dir / (pair_stem(i) + ".y"), y.str());
  }
}

std::vector<TrainingPair> read_split(const std::filesystem::path& dir) {
  std::vector<TrainingPair> out;
  if (!std::filesystem::exists(dir)) throw std::runtime_error("dataset directory missing: " + dir.string());
  for (std::size_t i = 0;; ++i) {
    const auto xp = dir / (pair_stem(i) + ".x");
    if (!std::filesystem::exists(xp)) break;
    out.push_back({read_spectrogram(read_text_file(xp)), read_spectrogram(read_text_file(dir / (pair_stem(i) + ".y")))});
  }
  return out;
}

}  // namespace

void write_dataset(const std::filesystem::path& dir, const Dataset& ds) {
  write_split(dir / "train", ds.train);
  write_split(dir / "test", ds.test);
}

Dataset read_dataset(const std::filesystem::path& dir) { return {read_split(dir / "train"), read_split(dir / "test")}; }

}  // namespace nfsense
