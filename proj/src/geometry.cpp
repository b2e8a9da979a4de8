// SPDX-License-Identifier: Apache-2.0
#include "nfsense/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "nfsense/text_io.hpp"

namespace nfsense {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive_distance(double d, const char* name) {
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw std::domain_error(std::string(name) + " must be a positive finite distance");
  }
}

}  // namespace

double RadioConfig::antenna_gain() const {
  const double scale = 4.0 * kPi / lambda;
  return g_tilde * scale * scale;
}

void RadioConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!(alpha >= 2.0 && alpha <= 4.0)) throw std::invalid_argument("alpha must lie in [2, 4]");
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be >= 0");
  if (!(b >= 0.0)) throw std::invalid_argument("b must be >= 0");
  if (!(g_tilde > 0.0)) throw std::invalid_argument("g_tilde must be > 0");
}

RadioConfig RadioConfig::unit_antenna_gain(double lambda, double alpha) {
  RadioConfig cfg;
  cfg.lambda = lambda;
  cfg.alpha = alpha;
  const double s = lambda / (4.0 * kPi);
  cfg.g_tilde = s * s;
  return cfg;
}

double distance(Point2D a, Point2D b) { return std::hypot(a.x - b.x, a.y - b.y); }

PathGain reflection_gain(const RadioConfig& cfg, double d_as, double d_se) {
  require_positive_distance(d_as, "d_as");
  require_positive_distance(d_se, "d_se");
  const double four_pi = 4.0 * kPi;
  const double magnitude = cfg.lambda * cfg.lambda * std::sqrt(cfg.antenna_gain()) /
                           (four_pi * four_pi * std::pow(d_as * d_se, cfg.alpha / 2.0));
  // Reduce the path length modulo lambda first so that adding a whole
  // wavelength leaves the phase argument unchanged.
  const double cycles = std::fmod(d_as + d_se, cfg.lambda) / cfg.lambda;
  return {std::polar(magnitude, -2.0 * kPi * cycles)};
}

double variation_power(const RadioConfig& cfg, double d_as, double d_se, double v) {
  require_positive_distance(d_as, "d_as");
  require_positive_distance(d_se, "d_se");
  return cfg.g_tilde * v * v * std::pow(d_as * d_se, -cfg.alpha);
}

double variation_power_exact(const RadioConfig& cfg, double d_as, double d_se, double v) {
  require_positive_distance(d_as, "d_as");
  require_positive_distance(d_se, "d_se");
  const double lam = cfg.lambda;
  const double four_pi = 4.0 * kPi;
  const double prefactor = cfg.antenna_gain() * std::pow(lam, 4) * v * v /
                           (std::pow(four_pi, 4) * std::pow(d_as * d_se, cfg.alpha));
  const double amp = (d_as + d_se) / (d_as * d_se);
  const double amplitude_term = cfg.alpha * cfg.alpha / 4.0 * amp * amp;
  const double phase_term = 16.0 * kPi * kPi / (lam * lam);
  return prefactor * (amplitude_term + phase_term);
}

double dynamic_power(const RadioConfig& cfg, double d_ae) {
  require_positive_distance(d_ae, "d_ae");
  return cfg.eta * cfg.lambda * cfg.lambda * std::pow(d_ae, -cfg.alpha) + cfg.b;
}

double vir(const RadioConfig& cfg, Point2D ap, Point2D ue, const Mover& subject,
           std::span<const Mover> interferers) {
  const double p_s = variation_power(cfg, distance(ap, subject.position),
                                     distance(subject.position, ue), subject.intensity);
  double denom = dynamic_power(cfg, distance(ap, ue));
  for (const Mover& m : interferers) {
    denom += variation_power(cfg, distance(ap, m.position), distance(m.position, ue),
                             m.intensity);
  }
  if (denom == 0.0) {
    throw std::domain_error("VIR denominator is zero (eta = b = 0 and no interference)");
  }
  return p_s / denom;
}

VirMap vir_map(const RadioConfig& cfg, Point2D ap, Point2D ue, const Mover& subject,
               double interferer_intensity, const GridSpec& grid, double beta) {
  if (!(grid.dx > 0.0) || !(grid.dy > 0.0)) {
    throw std::invalid_argument("grid resolution must be positive");
  }
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");

  const double inf = std::numeric_limits<double>::infinity();
  const Point2D offset{ue.x - subject.position.x, ue.y - subject.position.y};

  VirMap out;
  out.grid = grid;
  const std::size_t n = grid.nx * grid.ny;
  out.vir_subject.assign(n, inf);
  out.vir_interferer.assign(n, inf);
  out.feasible.assign(n, false);

  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      const std::size_t idx = iy * grid.nx + ix;
      const Point2D p = grid.cell(ix, iy);
      const Point2D p_ue{p.x + offset.x, p.y + offset.y};
      const bool singular = p == ap || p == ue || p == subject.position || p_ue == ap ||
                            p_ue == subject.position;
      if (singular) continue;

      const Mover interferer{p, interferer_intensity};
      const double v_s = vir(cfg, ap, ue, subject, std::span<const Mover>(&interferer, 1));
      const double v_i = vir(cfg, ap, p_ue, interferer, std::span<const Mover>(&subject, 1));
      out.vir_subject[idx] = v_s;
      out.vir_interferer[idx] = v_i;
      out.feasible[idx] = v_s > beta && v_i > beta;
    }
  }
  return out;
}

namespace {

void write_header(std::ostream& os, const GridSpec& g) {
  os << "# " << format_double(g.x0) << ' ' << format_double(g.y0) << ' '
     << format_double(g.dx) << ' ' << format_double(g.dy) << ' ' << g.nx << ' ' << g.ny
     << '\n';
}

}  // namespace

void write_raster(std::ostream& os, const GridSpec& grid, std::span<const double> values) {
  write_header(os, grid);
  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      if (ix) os << ' ';
      os << format_double(values[iy * grid.nx + ix]);
    }
    os << '\n';
  }
}

void write_feasibility(std::ostream& os, const GridSpec& grid, const std::vector<bool>& feasible) {
  write_header(os, grid);
  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      if (ix) os << ' ';
      os << (feasible[iy * grid.nx + ix] ? '1' : '0');
    }
    os << '\n';
  }
}

}  // namespace nfsense
