// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace nfsense {

using Complex = std::complex<double>;

/// Radio constants shared by the channel model and the capacity bounds.
///
/// `g_tilde` is the combined gain G~ = (lambda / 4 pi)^2 G, with the reflection
/// coefficient folded in. `eta` and `b` parameterise the dynamic-channel power
/// P_d = eta * lambda^2 * d_AE^-alpha + b.
struct RadioConfig {
  double lambda = 0.06;
  double alpha = 4.0;
  double eta = 1.0;
  double b = 1.0;
  double g_tilde = 1.0;

  /// Raw antenna/reflection product G recovered from g_tilde.
  double antenna_gain() const;
  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  /// Constants with G = 1 (i.e. g_tilde = (lambda / 4 pi)^2).
  static RadioConfig unit_antenna_gain(double lambda, double alpha);
};

struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2D&, const Point2D&) = default;
};

double distance(Point2D a, Point2D b);

/// A reflecting body and its motion intensity (speed, m/s).
struct Mover {
  Point2D position;
  double intensity = 1.0;
};

struct PathGain {
  Complex value;
};

/// Single-bounce AP -> subject -> receiver channel gain.
PathGain reflection_gain(const RadioConfig& cfg, double d_as, double d_se);

/// Variation power G~ v^2 (d_as d_se)^-alpha, i.e. the phase-dominated
/// approximation of |dh/dt|^2.
double variation_power(const RadioConfig& cfg, double d_as, double d_se, double v);

/// Full |dh/dt|^2 including the amplitude-variation term.
double variation_power_exact(const RadioConfig& cfg, double d_as, double d_se, double v);

/// Dynamic-channel interference power for an AP-UE separation.
double dynamic_power(const RadioConfig& cfg, double d_ae);

/// Variation-to-interference ratio of `subject` at `ue`, with every mover in
/// `interferers` contributing interference.
double vir(const RadioConfig& cfg, Point2D ap, Point2D ue, const Mover& subject,
           std::span<const Mover> interferers);

struct GridSpec {
  double x0 = 0.0;
  double y0 = 0.0;
  double dx = 0.1;
  double dy = 0.1;
  std::size_t nx = 0;
  std::size_t ny = 0;

  Point2D cell(std::size_t ix, std::size_t iy) const {
    return {x0 + static_cast<double>(ix) * dx, y0 + static_cast<double>(iy) * dy};
  }
};

/// Row-major (iy outer, ix inner) rasters over a GridSpec. Singular cells hold
/// +infinity in both VIR rasters and are infeasible.
struct VirMap {
  GridSpec grid;
  std::vector<double> vir_subject;
  std::vector<double> vir_interferer;
  std::vector<bool> feasible;
};

/// Treats every grid cell as a candidate interferer position. The interferer's
/// own UE sits at the same offset from it as `ue` does from `subject`.
VirMap vir_map(const RadioConfig& cfg, Point2D ap, Point2D ue, const Mover& subject,
               double interferer_intensity, const GridSpec& grid, double beta);

void write_raster(std::ostream& os, const GridSpec& grid, std::span<const double> values);
void write_feasibility(std::ostream& os, const GridSpec& grid, const std::vector<bool>& feasible);

}  // namespace nfsense
