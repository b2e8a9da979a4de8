// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "nfsense/traffic.hpp"

using namespace nfsense;

TEST_CASE("kind names") {
  CHECK(parse_traffic_kind("ul-csi") == TrafficKind::ul_csi);
  CHECK(parse_traffic_kind("dl_csi") == TrafficKind::dl_csi);
  CHECK(to_string(TrafficKind::ul_bfi) == "ul-bfi");
  CHECK_THROWS(parse_traffic_kind("wifi7"));
}

TEST_CASE("arrivals are strictly increasing, bounded and deterministic") {
  for (TrafficKind k : {TrafficKind::ul_csi, TrafficKind::dl_csi, TrafficKind::ul_bfi}) {
    const TrafficModel m = TrafficModel::defaults(k, 11);
    const auto a = generate_arrivals(m, 30.0);
    CHECK(a == generate_arrivals(m, 30.0));
    CHECK(std::adjacent_find(a.begin(), a.end(), [](double x, double y) { return !(y > x); }) == a.end());
    if (!a.empty()) {
      CHECK(a.front() >= 0.0);
      CHECK(a.back() < 30.0);
    }
  }
  CHECK_THROWS(generate_arrivals(TrafficModel::defaults(TrafficKind::dl_csi), 0.0));
}

TEST_CASE("near-zero gaps recover the in-burst rate") {
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    TrafficModel m;
    m.kind = TrafficKind::dl_csi;
    m.mean_burst_s = 5.0;
    m.mean_gap_s = 1e-9;
    m.rate_in_burst_hz = 200.0;
    m.seed = seed;
    const double rate = static_cast<double>(generate_arrivals(m, 100.0).size()) / 100.0;
    if (std::abs(rate / 200.0 - 1.0) < 0.05) ++ok;
  }
  CHECK(ok == 20);
}

TEST_CASE("degenerate duration may be empty") {
  TrafficModel m;
  m.mean_gap_s = 1.0;
  m.seed = 3;
  const auto a = generate_arrivals(m, 1e-4);
  CHECK(a.size() < 10);
}

TEST_CASE("BFI streams respect the per-second cap") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    TrafficModel m = TrafficModel::defaults(TrafficKind::ul_bfi, seed);
    m.rate_in_burst_hz = 200.0;
    const auto a = generate_arrivals(m, 60.0);
    CHECK(max_window_count(a, 1.0) <= 10);
  }
}

TEST_CASE("cap_rate and window counting") {
  const std::vector<double> t{0.0, 0.1, 0.2, 0.3, 1.05, 1.1};
  CHECK(max_window_count(t, 1.0) == 4);
  const auto capped = cap_rate(t, 2, 1.0);
  CHECK(capped == std::vector<double>{0.0, 0.1, 1.05, 1.1});
}

TEST_CASE("default DL traffic is bursty") {
  const TrafficModel m = TrafficModel::defaults(TrafficKind::dl_csi, 5);
  CHECK(burstiness_index(generate_arrivals(m, 200.0), 200.0, 1.0) > 1.0);
  TrafficModel gappy = m;
  gappy.mean_gap_s = gappy.mean_burst_s;
  CHECK(burstiness_index(generate_arrivals(gappy, 200.0), 200.0, 1.0) > 1.0);
}

TEST_CASE("contention reduces the expected sample count") {
  std::vector<double> counts[3];
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (int u = 1; u <= 3; ++u) {
      TrafficModel m = TrafficModel::defaults(TrafficKind::dl_csi, seed);
      m.contention_users = u * 2;
      counts[u - 1].push_back(static_cast<double>(generate_arrivals(m, 60.0).size()));
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[9] + v[10]);
  };
  CHECK(median(counts[1]) < median(counts[0]));
  CHECK(median(counts[2]) < median(counts[1]));
}

TEST_CASE("sample-time file round trip") {
  const auto a = generate_arrivals(TrafficModel::defaults(TrafficKind::ul_csi, 2), 5.0);
  std::ostringstream os;
  write_sample_times(os, a);
  const auto b = read_sample_times(os.str());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-12));
  CHECK_THROWS(read_sample_times("0.5\n0.4\n"));
}
