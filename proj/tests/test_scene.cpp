// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "nfsense/scene.hpp"

using namespace nfsense;

namespace {

Scene one_user(MotionProfile motion, double noise = 0.0) {
  Scene s;
  s.ap = {0.0, 0.0};
  s.users.push_back({{2.0, 0.0}, {2.15, 0.0}, std::move(motion)});
  s.noise_std = noise;
  s.seed = 7;
  return s;
}

/// Frequency in [lo, hi] maximising a Hann-windowed direct DFT of the
/// mean-removed series, scanned at `step` Hz.
double dft_peak(const std::vector<double>& t, const std::vector<double>& x, double lo, double hi, double step) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  const double span = t.back() - t.front();
  double best_f = lo, best_p = -1.0;
  for (double f = lo; f <= hi + 1e-12; f += step) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t n = 0; n < x.size(); ++n) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (t[n] - t.front()) / span);
      acc += w * (x[n] - m) * std::polar(1.0, -2.0 * std::numbers::pi * f * t[n]);
    }
    if (std::norm(acc) > best_p) {
      best_p = std::norm(acc);
      best_f = f;
    }
  }
  return best_f;
}

}  // namespace

TEST_CASE("displacement profiles") {
  CHECK(displacement(MotionProfile::still(), 3.7) == 0.0);
  CHECK(displacement(MotionProfile::respiration(15.0, 0.005), 1.0) == doctest::Approx(0.005).epsilon(1e-12));
  const MotionProfile g1 = MotionProfile::gesture(42), g2 = MotionProfile::gesture(42);
  for (double t = 0.0; t < 5.0; t += 0.37) CHECK(displacement(g1, t) == displacement(g2, t));
  const MotionProfile h = MotionProfile::breath_holds(15.0, {{2.0, 4.0}}, 0.005);
  CHECK(displacement(h, 2.5) == displacement(h, 3.9));
}

TEST_CASE("motion and scene validation") {
  CHECK_THROWS(MotionProfile::respiration(50.0).validate());
  CHECK_THROWS(MotionProfile::breath_holds(15.0, {{3.0, 4.0}, {3.5, 5.0}}).validate());
  Scene far = one_user(MotionProfile::still());
  far.users[0].subject = {2.5, 0.0};
  CHECK_THROWS_AS(far.validate(), std::invalid_argument);
  Scene clash = one_user(MotionProfile::still());
  clash.users[0].ue = clash.ap;
  CHECK_THROWS_AS(clash.validate(), std::invalid_argument);
  CHECK(parse_motion_kind("hold_segments") == MotionKind::hold_segments);
  CHECK_THROWS(parse_motion_kind("dance"));
}

TEST_CASE("still subject without noise renders a constant channel") {
  const Scene s = [] {
    Scene x = one_user(MotionProfile::still());
    x.cfg.eta = 0.0;
    return x;
  }();
  const CsiSeries c = render_csi(s, 0, uniform_times(2.0, 50.0));
  for (const Complex& h : c.h) CHECK(std::abs(h - c.h.front()) == 0.0);
  CHECK_THROWS_AS(render_csi(s, 1, uniform_times(1.0, 10.0)), std::out_of_range);
  CHECK_THROWS(render_baseline(s, uniform_times(1.0, 10.0)));
}

TEST_CASE("respiring subject: phase peak at the breathing rate") {
  Scene s = one_user(MotionProfile::respiration(18.0, 0.005));
  s.cfg.eta = 0.0;
  const std::vector<double> t = uniform_times(60.0, 20.0);
  const CsiSeries c = render_csi(s, 0, t);
  const double f = dft_peak(c.t, csi_phase(c), 0.1, 0.6, 0.005);
  CHECK(std::abs(f - 0.3) < 1.0 / 60.0);
}

TEST_CASE("render is deterministic and the sum of its components") {
  const Scene s = four_user_scene(FourUserOptions{});
  const std::vector<double> t = uniform_times(10.0, 50.0);
  for (std::size_t u = 0; u < 4; ++u) {
    const CsiSeries a = render_csi(s, u, t);
    const CsiSeries b = render_csi(s, u, t);
    CHECK(a.h == b.h);
    const CsiComponents parts = render_components(s, u, t);
    for (std::size_t n = 0; n < t.size(); ++n) {
      Complex sum = parts.static_path[n];
      for (const auto& sub : parts.subjects) sum += sub[n];
      sum += parts.dynamic_path[n];
      sum += parts.noise[n];
      CHECK(sum == a.h[n]);
    }
  }
}

TEST_CASE("baseline observer senses the subjects") {
  FourUserOptions opt;
  opt.noise_std = 0.0;
  opt.eta = 0.0;
  opt.duration_s = 60.0;
  opt.hold_s = 1.0;
  Scene s = four_user_scene(opt);
  for (SceneUser& u : s.users) u.motion.holds.clear();
  const std::vector<double> t = uniform_times(60.0, 20.0);

  // One subject only: the baseline peak sits at that subject's rate.
  Scene single = s;
  for (std::size_t i = 1; i < 4; ++i) single.users[i].motion = MotionProfile::still();
  const CsiSeries b1 = render_baseline(single, t);
  CHECK(std::abs(dft_peak(b1.t, csi_phase(b1), 0.1, 0.6, 0.005) - 0.2) < 1.0 / 60.0);

  // No subject moving: constant.
  Scene quiet = s;
  for (SceneUser& u : quiet.users) u.motion = MotionProfile::still();
  const CsiSeries b0 = render_baseline(quiet, t);
  for (const Complex& h : b0.h) CHECK(std::abs(h - b0.h.front()) == 0.0);
}

TEST_CASE("near-field domination across 20 seeds") {
  int wrong = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    FourUserOptions opt;
    opt.seed = seed;
    opt.duration_s = 60.0;
    const Scene s = four_user_scene(opt);
    const std::vector<double> t = uniform_times(opt.duration_s, 10.0);
    for (std::size_t u = 0; u < 4; ++u) {
      const CsiSeries c = render_csi(s, u, t);
      const double f = 60.0 * dft_peak(c.t, csi_phase(c), 0.1, 0.5, 0.005);
      std::size_t nearest = 0;
      for (std::size_t k = 1; k < 4; ++k)
        if (std::abs(f - opt.rates_bpm[k]) < std::abs(f - opt.rates_bpm[nearest])) nearest = k;
      if (nearest != u) ++wrong;
    }
  }
  CHECK(wrong == 0);
}

TEST_CASE("scene text round trip") {
  const Scene s = four_user_scene(FourUserOptions{});
  const std::string text = format_scene(s);
  CHECK(format_scene(parse_scene(text)) == text);
  CHECK_THROWS(parse_scene("ap=0,0\nbogus=1\n"));
  CHECK_THROWS(parse_scene("ap=0,0\nuser.1.ue=1,0\n"));
}

TEST_CASE("CSI CSV round trip") {
  const Scene s = four_user_scene(FourUserOptions{});
  const CsiSeries c = render_csi(s, 2, uniform_times(1.0, 100.0));
  std::ostringstream os;
  write_csi_csv(os, c);
  CHECK(os.str().rfind("t_s,re,im\n", 0) == 0);
  const CsiSeries back = read_csi_csv(os.str());
  REQUIRE(back.h.size() == c.h.size());
  for (std::size_t n = 0; n < c.h.size(); ++n) CHECK(back.h[n] == c.h[n]);
}
