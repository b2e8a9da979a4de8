// SPDX-License-Identifier: Apache-2.0
#include "nfsense/traffic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "nfsense/rng.hpp"
#include "nfsense/text_io.hpp"

namespace nfsense {

std::string_view to_string(TrafficKind kind) {
  switch (kind) {
    case TrafficKind::ul_csi: return "ul-csi";
    case TrafficKind::dl_csi: return "dl-csi";
    case TrafficKind::ul_bfi: return "ul-bfi";
  }
  return "dl-csi";
}

TrafficKind parse_traffic_kind(std::string_view s) {
  std::string k(s);
  std::replace(k.begin(), k.end(), '_', '-');
  for (TrafficKind kind : {TrafficKind::ul_csi, TrafficKind::dl_csi, TrafficKind::ul_bfi}) {
    if (to_string(kind) == k) return kind;
  }
  throw std::invalid_argument("unknown traffic kind '" + std::string(s) + "' (expected ul-csi, dl-csi or ul-bfi)");
}

void TrafficModel::validate() const {
  if (!(mean_burst_s > 0.0)) throw std::invalid_argument("mean_burst_s must be > 0");
  if (!(mean_gap_s > 0.0)) throw std::invalid_argument("mean_gap_s must be > 0");
  if (!(rate_in_burst_hz > 0.0)) throw std::invalid_argument("rate_in_burst_hz must be > 0");
  if (contention_users < 1) throw std::invalid_argument("contention_users must be >= 1");
}

TrafficModel TrafficModel::defaults(TrafficKind kind, std::uint64_t seed) {
  TrafficModel m;
  m.kind = kind;
  m.seed = seed;
  switch (kind) {
    case TrafficKind::dl_csi:
      m.mean_burst_s = 5.0;
      m.mean_gap_s = 1.0;
      m.rate_in_burst_hz = 1000.0;
      break;
    case TrafficKind::ul_csi:
      m.mean_burst_s = 2.0;
      m.mean_gap_s = 2.0;
      m.rate_in_burst_hz = 300.0;
      break;
    case TrafficKind::ul_bfi:
      m.mean_burst_s = 5.0;
      m.mean_gap_s = 1.0;
      m.rate_in_burst_hz = 1000.0;
      break;
  }
  return m;
}

std::vector<double> generate_arrivals(const TrafficModel& model, double duration_s) {
  model.validate();
  if (!(duration_s > 0.0)) throw std::invalid_argument("duration must be > 0");
  Rng rng(derive_seed(model.seed, {static_cast<std::uint64_t>(model.kind)}));
  const double on_fraction = model.mean_burst_s / (model.mean_burst_s + model.mean_gap_s * model.contention_users);
  bool on = uniform01(rng) < on_fraction;
  double t = 0.0;
  std::vector<double> times;
  while (t < duration_s) {
    const double dwell = on ? exponential(rng, model.mean_burst_s)
                            : exponential(rng, model.mean_gap_s * model.contention_users);
    const double end = std::min(duration_s, t + dwell);
    if (on) {
      double a = t + exponential(rng, 1.0 / model.rate_in_burst_hz);
      while (a < end) {
        // Microsecond grid: the 6-decimal file format must stay strictly increasing.
        const double q = std::round(a * 1e6) / 1e6;
        if (q < duration_s && (times.empty() || q > times.back())) times.push_back(q);
        a += exponential(rng, 1.0 / model.rate_in_burst_hz);
      }
    }
    t += dwell;
    on = !on;
  }
  if (model.kind == TrafficKind::ul_bfi) {
    Rng thin(derive_seed(model.seed, {static_cast<std::uint64_t>(model.kind), 0x7417}));
    std::vector<double> kept;
    for (double a : times) {
      if (uniform01(thin) * kBfiThinning < 1.0) kept.push_back(a);
    }
    return cap_rate(kept, kBfiCapPerSecond, 1.0);
  }
  return times;
}

std::vector<double> cap_rate(std::span<const double> times, int cap, double window_s) {
  std::vector<double> kept;
  std::deque<double> recent;
  for (double t : times) {
    while (!recent.empty() && recent.front() <= t - window_s) recent.pop_front();
    if (static_cast<int>(recent.size()) < cap) {
      kept.push_back(t);
      recent.push_back(t);
    }
  }
  return kept;
}

int max_window_count(std::span<const double> times, double window_s) {
  // The densest half-open window can be taken to start at a sample.
  int best = 0;
  std::size_t hi = 0;
  for (std::size_t lo = 0; lo < times.size(); ++lo) {
    if (hi < lo) hi = lo;
    while (hi < times.size() && times[hi] < times[lo] + window_s) ++hi;
    best = std::max(best, static_cast<int>(hi - lo));
  }
  return best;
}

double burstiness_index(std::span<const double> times, double duration_s, double window_s) {
  const auto windows = static_cast<std::size_t>(std::floor(duration_s / window_s));
  if (windows == 0) return 0.0;
  std::vector<double> counts(windows, 0.0);
  for (double t : times) {
    const auto w = static_cast<std::size_t>(t / window_s);
    if (w < windows) counts[w] += 1.0;
  }
  double m = 0.0;
  for (double c : counts) m += c;
  m /= static_cast<double>(windows);
  if (m == 0.0) return 0.0;
  double var = 0.0;
  for (double c : counts) var += (c - m) * (c - m);
  var /= static_cast<double>(windows);
  return var / m;
}

void write_sample_times(std::ostream& os, std::span<const double> times) {
  for (double t : times) os << format_fixed(t, 6) << '\n';
}

std::vector<double> read_sample_times(std::string_view text) {
  std::vector<double> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const std::string first = split(body, ',').front();
    if (line_no == 1 && !first.empty() && std::isalpha(static_cast<unsigned char>(first.front()))) continue;
    const double t = parse_double(first);
    if (!out.empty() && !(t > out.back())) {
      throw std::invalid_argument("sample times line " + std::to_string(line_no) + ": not strictly increasing");
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace nfsense
