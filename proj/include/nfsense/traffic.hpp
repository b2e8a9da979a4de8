// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace nfsense {

enum class TrafficKind { ul_csi, dl_csi, ul_bfi };

std::string_view to_string(TrafficKind kind);
/// Accepts both `ul-csi` and `ul_csi` spellings.
TrafficKind parse_traffic_kind(std::string_view s);

/// Two-state Markov-modulated Poisson process. Off-state dwell means are
/// multiplied by contention_users.
struct TrafficModel {
  TrafficKind kind = TrafficKind::dl_csi;
  double mean_burst_s = 5.0;
  double mean_gap_s = 1.0;
  double rate_in_burst_hz = 1000.0;
  int contention_users = 1;
  std::uint64_t seed = 0;

  void validate() const;
  /// Per-kind defaults.
  static TrafficModel defaults(TrafficKind kind, std::uint64_t seed = 0);
};

/// UL-BFI streams keep one arrival in `kBfiThinning` and at most
/// `kBfiCapPerSecond` samples in any half-open one-second window.
inline constexpr int kBfiThinning = 10;
inline constexpr int kBfiCapPerSecond = 10;

/// Strictly increasing times in [0, duration_s) on a 1 us grid.
std::vector<double> generate_arrivals(const TrafficModel& model, double duration_s);

/// Greedy sliding-window cap: keeps t iff fewer than `cap` kept samples lie in
/// [t - window_s, t).
std::vector<double> cap_rate(std::span<const double> times, int cap, double window_s);

/// Largest number of samples inside any half-open window of length window_s.
int max_window_count(std::span<const double> times, double window_s);

/// Fano factor of counts in consecutive windows of length window_s over
/// [0, duration_s); 0 when the mean count is 0.
double burstiness_index(std::span<const double> times, double duration_s, double window_s);

/// One timestamp per line with 6 decimals.
void write_sample_times(std::ostream& os, std::span<const double> times);
/// Parses that format (also CSV traces whose first column is a timestamp);
/// rejects non-increasing input.
std::vector<double> read_sample_times(std::string_view text);

}  // namespace nfsense
