// SPDX-License-Identifier: Apache-2.0
#include "nfsense/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nfsense/dsp.hpp"
#include "nfsense/rng.hpp"
#include "nfsense/text_io.hpp"

namespace nfsense {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kBandComponents = 32;
constexpr std::uint64_t kBaselineLink = 0xba5e;
constexpr std::uint64_t kStreamDynamic = 1;
constexpr std::uint64_t kStreamNoise = 2;

}  // namespace

std::string_view to_string(MotionKind kind) {
  switch (kind) {
    case MotionKind::respiration: return "respiration";
    case MotionKind::hold_segments: return "hold_segments";
    case MotionKind::gesture_like: return "gesture_like";
    case MotionKind::activity_like: return "activity_like";
    case MotionKind::still: return "still";
  }
  return "still";
}

MotionKind parse_motion_kind(std::string_view s) {
  for (MotionKind k : {MotionKind::respiration, MotionKind::hold_segments, MotionKind::gesture_like,
                       MotionKind::activity_like, MotionKind::still}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown motion kind '" + std::string(s) + "'");
}

void MotionProfile::validate() const {
  if (kind == MotionKind::respiration || kind == MotionKind::hold_segments) {
    if (!(rate_bpm >= 6.0 && rate_bpm <= 40.0)) throw std::invalid_argument("respiration rate must lie in [6, 40] bpm");
    if (!(amplitude_m >= 0.0)) throw std::invalid_argument("amplitude must be >= 0");
  }
  if (kind == MotionKind::gesture_like || kind == MotionKind::activity_like) {
    if (!(rms_speed >= 0.0)) throw std::invalid_argument("rms speed must be >= 0");
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
  }
  double prev_stop = -std::numeric_limits<double>::infinity();
  for (const auto& [start, stop] : holds) {
    if (!(start >= 0.0) || !(stop > start)) throw std::invalid_argument("hold interval must satisfy 0 <= start < stop");
    if (start < prev_stop) throw std::invalid_argument("hold intervals must be ordered and non-overlapping");
    prev_stop = stop;
  }
}

MotionProfile MotionProfile::still() { return {}; }

MotionProfile MotionProfile::respiration(double rate_bpm, double amplitude_m) {
  MotionProfile p;
  p.kind = MotionKind::respiration;
  p.rate_bpm = rate_bpm;
  p.amplitude_m = amplitude_m;
  return p;
}

MotionProfile MotionProfile::breath_holds(double rate_bpm, std::vector<std::pair<double, double>> holds,
                                          double amplitude_m) {
  MotionProfile p = respiration(rate_bpm, amplitude_m);
  p.kind = MotionKind::hold_segments;
  p.holds = std::move(holds);
  return p;
}

MotionProfile MotionProfile::gesture(std::uint64_t seed, double rms_speed, double bandwidth_hz) {
  MotionProfile p;
  p.kind = MotionKind::gesture_like;
  p.seed = seed;
  p.rms_speed = rms_speed;
  p.bandwidth_hz = bandwidth_hz;
  return p;
}

MotionProfile MotionProfile::activity(std::uint64_t seed, double rms_speed, double bandwidth_hz) {
  MotionProfile p = gesture(seed, rms_speed, bandwidth_hz);
  p.kind = MotionKind::activity_like;
  return p;
}

namespace {

double breathing(const MotionProfile& p, double t) {
  return p.amplitude_m * std::sin(2.0 * kPi * (p.rate_bpm / 60.0) * t);
}

// Sum of sinusoids with amplitudes proportional to 1/f: every component
// contributes the same velocity amplitude, so the speed spectrum is flat over
// [bandwidth / 32, bandwidth] and its RMS equals rms_speed.
double band_limited(const MotionProfile& p, double t) {
  Rng rng(derive_seed(p.seed, {static_cast<std::uint64_t>(p.kind)}));
  const double velocity_amp = p.rms_speed / std::sqrt(kBandComponents / 2.0);
  const double f_lo = p.bandwidth_hz / kBandComponents;
  double x = 0.0;
  for (int k = 0; k < kBandComponents; ++k) {
    const double f = f_lo + (p.bandwidth_hz - f_lo) * uniform01(rng);
    const double phase = 2.0 * kPi * uniform01(rng);
    x += velocity_amp / (2.0 * kPi * f) * std::sin(2.0 * kPi * f * t + phase);
  }
  return x;
}

}  // namespace

double displacement(const MotionProfile& profile, double t) {
  switch (profile.kind) {
    case MotionKind::still:
      return 0.0;
    case MotionKind::respiration:
    case MotionKind::hold_segments: {
      for (const auto& [start, stop] : profile.holds) {
        if (t >= start && t < stop) return breathing(profile, start);
      }
      return breathing(profile, t);
    }
    case MotionKind::gesture_like:
    case MotionKind::activity_like:
      return band_limited(profile, t);
  }
  return 0.0;
}

void Scene::validate() const {
  cfg.validate();
  if (!(noise_std >= 0.0)) throw std::invalid_argument("noise_std must be >= 0");
  if (!(g_los >= 0.0)) throw std::invalid_argument("g_los must be >= 0");
  if (!(dynamic_tau_s > 0.0)) throw std::invalid_argument("dynamic_tau_s must be > 0");
  std::vector<Point2D> points{ap};
  for (const SceneUser& u : users) {
    u.motion.validate();
    if (distance(u.ue, u.subject) > 0.3) throw std::invalid_argument("every subject must lie within 0.3 m of its UE");
    points.push_back(u.ue);
    points.push_back(u.subject);
  }
  if (baseline_observer) points.push_back(*baseline_observer);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (points[i] == points[j]) throw std::invalid_argument("scene positions must be distinct");
    }
  }
}

namespace {

void check_times(std::span<const double> times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0) throw std::invalid_argument("sample times must be finite and >= 0");
    if (i > 0 && !(times[i] > times[i - 1])) throw std::invalid_argument("sample times must be strictly increasing");
  }
}

CsiComponents render_at(const Scene& scene, Point2D rx, std::uint64_t link, std::span<const double> times) {
  check_times(times);
  const RadioConfig& cfg = scene.cfg;
  const std::size_t n = times.size();
  CsiComponents c;

  const double d_ae = distance(scene.ap, rx);
  const double los_mag = std::sqrt(scene.g_los) * std::pow(d_ae, -cfg.alpha / 2.0);
  const Complex los = std::polar(los_mag, -2.0 * kPi * std::fmod(d_ae, cfg.lambda) / cfg.lambda);
  c.static_path.assign(n, los);

  for (const SceneUser& u : scene.users) {
    const double d_as0 = distance(scene.ap, u.subject);
    const double d_se0 = distance(u.subject, rx);
    std::vector<Complex> track(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double disp = displacement(u.motion, times[i]);
      track[i] = reflection_gain(cfg, d_as0 + disp, d_se0 + disp).value;
    }
    c.subjects.push_back(std::move(track));
  }

  // Exact OU discretisation: stationary at the first sample.
  c.dynamic_path.assign(n, Complex{});
  const double dyn_std = std::sqrt(cfg.eta * cfg.lambda * cfg.lambda * std::pow(d_ae, -cfg.alpha));
  if (dyn_std > 0.0) {
    Rng rng(derive_seed(scene.seed, {link, kStreamDynamic}));
    const double comp = dyn_std / std::sqrt(2.0);
    Complex state;
    for (std::size_t i = 0; i < n; ++i) {
      const Complex xi{standard_normal(rng), standard_normal(rng)};
      if (i == 0) {
        state = comp * xi;
      } else {
        const double rho = std::exp(-(times[i] - times[i - 1]) / scene.dynamic_tau_s);
        state = rho * state + comp * std::sqrt(1.0 - rho * rho) * xi;
      }
      c.dynamic_path[i] = state;
    }
  }

  c.noise.assign(n, Complex{});
  if (scene.noise_std > 0.0) {
    Rng rng(derive_seed(scene.seed, {link, kStreamNoise}));
    const double comp = scene.noise_std / std::sqrt(2.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      c.noise[i] = {comp * re, comp * im};
    }
  }
  return c;
}

CsiSeries sum_components(const CsiComponents& c, std::span<const double> times, std::string link_id) {
  CsiSeries s;
  s.t.assign(times.begin(), times.end());
  s.link_id = std::move(link_id);
  s.h = c.static_path;
  for (const auto& track : c.subjects) {
    for (std::size_t i = 0; i < s.h.size(); ++i) s.h[i] += track[i];
  }
  for (std::size_t i = 0; i < s.h.size(); ++i) {
    s.h[i] += c.dynamic_path[i];
    s.h[i] += c.noise[i];
  }
  return s;
}

}  // namespace

CsiComponents render_components(const Scene& scene, std::size_t user, std::span<const double> times) {
  if (user >= scene.users.size()) {
    throw std::out_of_range("unknown link: scene has " + std::to_string(scene.users.size()) + " users, asked for " +
                            std::to_string(user));
  }
  return render_at(scene, scene.users[user].ue, user, times);
}

CsiComponents render_baseline_components(const Scene& scene, std::span<const double> times) {
  if (!scene.baseline_observer) throw std::invalid_argument("scene has no baseline observer");
  return render_at(scene, *scene.baseline_observer, kBaselineLink, times);
}

CsiSeries render_csi(const Scene& scene, std::size_t user, std::span<const double> times) {
  return sum_components(render_components(scene, user, times), times, "ue" + std::to_string(user));
}

CsiSeries render_baseline(const Scene& scene, std::span<const double> times) {
  return sum_components(render_baseline_components(scene, times), times, "baseline");
}

std::vector<double> csi_phase(const CsiSeries& series) {
  std::vector<double> wrapped(series.h.size());
  for (std::size_t i = 0; i < wrapped.size(); ++i) wrapped[i] = std::arg(series.h[i]);
  return dsp::unwrap(wrapped);
}

void write_csi_csv(std::ostream& os, const CsiSeries& series) {
  os << "t_s,re,im\n";
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    os << format_fixed(series.t[i], 6) << ',' << format_double(series.h[i].real()) << ','
       << format_double(series.h[i].imag()) << '\n';
  }
}

CsiSeries read_csi_csv(std::string_view text, std::string link_id) {
  CsiSeries s;
  s.link_id = std::move(link_id);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (body.starts_with("t_s")) continue;
    const auto parts = split(body, ',');
    if (parts.size() != 3) throw std::invalid_argument("CSI CSV line " + std::to_string(line_no) + ": expected 3 fields");
    s.t.push_back(parse_double(parts[0]));
    s.h.emplace_back(parse_double(parts[1]), parse_double(parts[2]));
  }
  check_times(s.t);
  return s;
}

namespace {

Point2D parse_point(std::string_view v, const std::string& key) {
  const auto parts = split(v, ',');
  if (parts.size() != 2) throw std::invalid_argument("scene key '" + key + "' expects x,y");
  return {parse_double(parts[0]), parse_double(parts[1])};
}

std::string format_point(Point2D p) { return format_double(p.x) + "," + format_double(p.y); }

std::vector<std::pair<double, double>> parse_holds(std::string_view v) {
  std::vector<std::pair<double, double>> out;
  if (trim(v).empty()) return out;
  for (const std::string& item : split(v, ';')) {
    const auto ab = split(item, ':');
    if (ab.size() != 2) throw std::invalid_argument("hold interval '" + item + "' expects start:stop");
    out.emplace_back(parse_double(ab[0]), parse_double(ab[1]));
  }
  return out;
}

}  // namespace

Scene parse_scene(std::string_view text) {
  Scene scene;
  std::map<std::size_t, SceneUser> users;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("scene line without '=': " + std::string(body));
    const std::string key(trim(body.substr(0, eq)));
    const std::string_view value = trim(body.substr(eq + 1));

    if (key.starts_with("user.")) {
      const auto parts = split(key, '.');
      if (parts.size() != 3) throw std::invalid_argument("unknown scene key '" + key + "'");
      SceneUser& u = users[static_cast<std::size_t>(parse_int(parts[1]))];
      const std::string& field = parts[2];
      if (field == "ue") u.ue = parse_point(value, key);
      else if (field == "subject") u.subject = parse_point(value, key);
      else if (field == "motion") u.motion.kind = parse_motion_kind(value);
      else if (field == "rate_bpm") u.motion.rate_bpm = parse_double(value);
      else if (field == "amplitude_m") u.motion.amplitude_m = parse_double(value);
      else if (field == "holds") u.motion.holds = parse_holds(value);
      else if (field == "rms_speed") u.motion.rms_speed = parse_double(value);
      else if (field == "bandwidth_hz") u.motion.bandwidth_hz = parse_double(value);
      else if (field == "seed") u.motion.seed = static_cast<std::uint64_t>(parse_int(value));
      else throw std::invalid_argument("unknown scene key '" + key + "'");
      continue;
    }
    if (key == "ap") scene.ap = parse_point(value, key);
    else if (key == "observer") scene.baseline_observer = parse_point(value, key);
    else if (key == "lambda") scene.cfg.lambda = parse_double(value);
    else if (key == "alpha") scene.cfg.alpha = parse_double(value);
    else if (key == "eta") scene.cfg.eta = parse_double(value);
    else if (key == "b") scene.cfg.b = parse_double(value);
    else if (key == "g_tilde") scene.cfg.g_tilde = parse_double(value);
    else if (key == "g_los") scene.g_los = parse_double(value);
    else if (key == "dynamic_tau_s") scene.dynamic_tau_s = parse_double(value);
    else if (key == "noise_std") scene.noise_std = parse_double(value);
    else if (key == "seed") scene.seed = static_cast<std::uint64_t>(parse_int(value));
    else throw std::invalid_argument("unknown scene key '" + key + "'");
  }
  std::size_t expected = 0;
  for (auto& [index, user] : users) {
    if (index != expected++) throw std::invalid_argument("scene user indices must be contiguous from 0");
    scene.users.push_back(user);
  }
  scene.validate();
  return scene;
}

std::string format_scene(const Scene& scene) {
  std::ostringstream os;
  os << "ap=" << format_point(scene.ap) << '\n';
  if (scene.baseline_observer) os << "observer=" << format_point(*scene.baseline_observer) << '\n';
  os << "lambda=" << format_double(scene.cfg.lambda) << '\n'
     << "alpha=" << format_double(scene.cfg.alpha) << '\n'
     << "eta=" << format_double(scene.cfg.eta) << '\n'
     << "b=" << format_double(scene.cfg.b) << '\n'
     << "g_tilde=" << format_double(scene.cfg.g_tilde) << '\n'
     << "g_los=" << format_double(scene.g_los) << '\n'
     << "dynamic_tau_s=" << format_double(scene.dynamic_tau_s) << '\n'
     << "noise_std=" << format_double(scene.noise_std) << '\n'
     << "seed=" << scene.seed << '\n';
  for (std::size_t i = 0; i < scene.users.size(); ++i) {
    const SceneUser& u = scene.users[i];
    const std::string p = "user." + std::to_string(i) + ".";
    os << p << "ue=" << format_point(u.ue) << '\n'
       << p << "subject=" << format_point(u.subject) << '\n'
       << p << "motion=" << to_string(u.motion.kind) << '\n'
       << p << "rate_bpm=" << format_double(u.motion.rate_bpm) << '\n'
       << p << "amplitude_m=" << format_double(u.motion.amplitude_m) << '\n';
    if (!u.motion.holds.empty()) {
      os << p << "holds=";
      for (std::size_t h = 0; h < u.motion.holds.size(); ++h) {
        if (h) os << ';';
        os << format_double(u.motion.holds[h].first) << ':' << format_double(u.motion.holds[h].second);
      }
      os << '\n';
    }
    os << p << "rms_speed=" << format_double(u.motion.rms_speed) << '\n'
       << p << "bandwidth_hz=" << format_double(u.motion.bandwidth_hz) << '\n'
       << p << "seed=" << u.motion.seed << '\n';
  }
  return os.str();
}

std::vector<std::pair<double, double>> four_user_holds(const FourUserOptions& opt, std::size_t index) {
  const std::size_t n = opt.rates_bpm.size();
  const double margin = 0.1 * opt.duration_s;
  const double slot = (opt.duration_s - 2.0 * margin) / static_cast<double>(n);
  const double start = margin + slot * static_cast<double>(index);
  return {{start, start + std::min(opt.hold_s, slot)}};
}

Scene four_user_scene(const FourUserOptions& opt) {
  Scene scene;
  scene.cfg.lambda = 0.06;
  scene.cfg.alpha = 4.0;
  scene.cfg.eta = opt.eta;
  scene.cfg.b = 0.0;
  scene.cfg.g_tilde = 1.0;
  scene.noise_std = opt.noise_std;
  scene.seed = opt.seed;
  const double h = opt.spacing / 2.0;
  const Point2D corners[4] = {{h, h}, {-h, h}, {-h, -h}, {h, -h}};
  for (std::size_t i = 0; i < opt.rates_bpm.size(); ++i) {
    const Point2D ue = corners[i % 4];
    const double norm = std::hypot(ue.x, ue.y);
    const Point2D subject{ue.x * (1.0 + opt.subject_offset / norm), ue.y * (1.0 + opt.subject_offset / norm)};
    scene.users.push_back({ue, subject, MotionProfile::breath_holds(opt.rates_bpm[i], four_user_holds(opt, i))});
  }
  scene.baseline_observer = Point2D{corners[0].x * opt.observer_fraction, corners[0].y * opt.observer_fraction};
  scene.validate();
  return scene;
}

std::vector<double> uniform_times(double duration_s, double rate_hz) {
  if (!(rate_hz > 0.0)) throw std::invalid_argument("rate must be > 0");
  std::vector<double> t;
  const auto n = static_cast<std::size_t>(std::ceil(duration_s * rate_hz - 1e-9));
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back(static_cast<double>(i) / rate_hz);
  return t;
}

}  // namespace nfsense
