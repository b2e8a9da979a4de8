// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nfsense/geometry.hpp"

namespace nfsense {

enum class MotionKind { respiration, hold_segments, gesture_like, activity_like, still };

std::string_view to_string(MotionKind kind);
MotionKind parse_motion_kind(std::string_view s);

/// Radial displacement model of one reflecting body.
///
/// respiration / hold_segments use rate_bpm and amplitude_m; hold_segments
/// additionally freezes the displacement over each [start, stop) in `holds`.
/// gesture_like / activity_like use rms_speed, bandwidth_hz and seed.
struct MotionProfile {
  MotionKind kind = MotionKind::still;
  double rate_bpm = 15.0;
  double amplitude_m = 0.005;
  std::vector<std::pair<double, double>> holds;
  double rms_speed = 0.3;
  double bandwidth_hz = 5.0;
  std::uint64_t seed = 0;

  void validate() const;

  static MotionProfile still();
  static MotionProfile respiration(double rate_bpm, double amplitude_m = 0.005);
  static MotionProfile breath_holds(double rate_bpm, std::vector<std::pair<double, double>> holds,
                                    double amplitude_m = 0.005);
  static MotionProfile gesture(std::uint64_t seed, double rms_speed = 0.3, double bandwidth_hz = 5.0);
  static MotionProfile activity(std::uint64_t seed, double rms_speed = 1.0, double bandwidth_hz = 15.0);
};

/// Signed displacement in meters at time t >= 0.
double displacement(const MotionProfile& profile, double t);

struct SceneUser {
  Point2D ue;
  Point2D subject;
  MotionProfile motion;
};

/// Every subject's motion changes its AP distance and its distance to any
/// receiver by the same displacement. The static AP-receiver path has gain
/// sqrt(g_los) d^-alpha/2 with free-space phase; the dynamic path is a complex
/// Ornstein-Uhlenbeck process of power eta lambda^2 d^-alpha and correlation
/// time dynamic_tau_s.
struct Scene {
  Point2D ap;
  std::vector<SceneUser> users;
  std::optional<Point2D> baseline_observer;
  RadioConfig cfg;
  double g_los = 1.0;
  double dynamic_tau_s = 0.5;
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

struct CsiSeries {
  std::vector<double> t;
  std::vector<Complex> h;
  std::string link_id;
};

/// Additive terms of one rendered link, kept separate.
struct CsiComponents {
  std::vector<Complex> static_path;
  std::vector<std::vector<Complex>> subjects;
  std::vector<Complex> dynamic_path;
  std::vector<Complex> noise;
};

CsiComponents render_components(const Scene& scene, std::size_t user, std::span<const double> times);
CsiComponents render_baseline_components(const Scene& scene, std::span<const double> times);

/// Sum of render_components in the order static, subjects, dynamic, noise.
CsiSeries render_csi(const Scene& scene, std::size_t user, std::span<const double> times);
CsiSeries render_baseline(const Scene& scene, std::span<const double> times);

/// Unwrapped phase of the series.
std::vector<double> csi_phase(const CsiSeries& series);

void write_csi_csv(std::ostream& os, const CsiSeries& series);
CsiSeries read_csi_csv(std::string_view text, std::string link_id = {});

/// key=value scene description with repeated `user.N.*` groups.
Scene parse_scene(std::string_view text);
std::string format_scene(const Scene& scene);

/// Four users at the corners of a square of side `spacing` around a central
/// AP, each subject `subject_offset` radially outside its UE, breathing at
/// its own rate and holding breath in turn. The baseline observer sits on the
/// AP-UE0 line at `observer_fraction` of the way to UE0.
struct FourUserOptions {
  double spacing = 2.0;
  double subject_offset = 0.15;
  std::vector<double> rates_bpm{12.0, 15.0, 18.0, 21.0};
  double duration_s = 120.0;
  double hold_s = 15.0;
  double observer_fraction = 0.3;
  double noise_std = 0.05;
  double eta = 1.0;
  std::uint64_t seed = 1;
};
Scene four_user_scene(const FourUserOptions& opt);

/// Hold intervals assigned to user `index` by four_user_scene.
std::vector<std::pair<double, double>> four_user_holds(const FourUserOptions& opt, std::size_t index);

/// Uniform sample instants on [0, duration) at `rate_hz`.
std::vector<double> uniform_times(double duration_s, double rate_hz);

}  // namespace nfsense
