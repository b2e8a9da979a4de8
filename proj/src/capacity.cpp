// SPDX-License-Identifier: Apache-2.0
#include "nfsense/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "nfsense/text_io.hpp"

namespace nfsense {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxSearchN = 100000;

// G~ dr^-a / beta - eta lambda^2 - b r^a: the budget left for interference,
// divided by beta.
double interference_budget(const CapacityQuery& q) {
  const RadioConfig& c = q.cfg;
  return (c.g_tilde * std::pow(q.delta_r, -c.alpha) - c.eta * c.lambda * c.lambda * q.beta -
          c.b * std::pow(q.r, c.alpha) * q.beta) /
         (c.g_tilde * q.beta);
}

double mirror_phi_max(int k) { return kPi / (2.0 * k + 1.0); }

}  // namespace

void FitParams::validate() const {
  if (!(p1 >= 0.0)) throw std::invalid_argument("p1 must be >= 0");
  if (!(q1 > 0.0)) throw std::invalid_argument("q1 must be > 0");
  if (!(q2 < 0.0)) throw std::invalid_argument("q2 must be < 0");
}

void CapacityQuery::validate() const {
  cfg.validate();
  if (!(delta_r > 0.0) || !(r > delta_r)) throw std::invalid_argument("need r > delta_r > 0");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (K < 1) throw std::invalid_argument("K must be >= 1");
}

double radial_series(int n, double alpha) {
  if (n < 3) throw std::domain_error("radial_series needs N >= 3");
  double sum = 0.0;
  for (int j = 1; j < n; ++j) sum += std::pow(std::sin(j * kPi / n), -alpha);
  return sum;
}

double radial_fit(int n, const FitParams& params) {
  if (n < 3) throw std::domain_error("radial_fit needs N >= 3");
  return params.p1 * std::pow(static_cast<double>(n), params.p2) + params.p3;
}

double mirror_series(int k, double phi, double alpha) {
  if (k < 1) throw std::domain_error("mirror_series needs K >= 1");
  if (!(phi > 0.0) || phi > mirror_phi_max(k) * (1.0 + 1e-12)) {
    throw std::domain_error("mirror_series needs 0 < phi <= pi/(2K+1)");
  }
  double sum = 0.0;
  for (int j = 1; j <= k; ++j) sum += std::pow(std::sin(j * phi / 2.0), -alpha);
  return sum;
}

double mirror_fit(double phi, const FitParams& params) {
  return params.q1 * std::pow(std::sin(phi / 2.0), params.q2) + params.q3;
}

int n_max(const CapacityQuery& q, const FitParams& params) {
  const double a = q.cfg.alpha;
  const double inner = std::pow(2.0 * q.r, a) / params.p1 * interference_budget(q) -
                       params.p3 / params.p1;
  if (!(inner > 0.0)) return 0;
  const double n = std::floor(std::pow(inner, 1.0 / params.p2));
  if (n < 3.0) return 0;
  return n > kMaxSearchN ? kMaxSearchN : static_cast<int>(n);
}

int n_max_exact(const CapacityQuery& q) {
  const double allowed = std::pow(2.0 * q.r, q.cfg.alpha) * interference_budget(q);
  int best = 0;
  for (int n = 3; n <= kMaxSearchN; ++n) {
    if (radial_series(n, q.cfg.alpha) > allowed) break;
    best = n;
  }
  return best;
}

Spacing delta_d_min(const CapacityQuery& q, const FitParams& params) {
  const double a = q.cfg.alpha;
  const double inner = std::pow(2.0 * q.r, a) / params.q1 * interference_budget(q) / 2.0 -
                       params.q3 / params.q1;
  if (!(inner > 0.0)) return {kInf, false};
  const double dd = 2.0 * q.r * std::pow(inner, 1.0 / params.q2);
  if (!(dd <= 2.0 * q.r * std::sin(mirror_phi_max(q.K)))) return {kInf, false};
  return {dd, true};
}

Spacing delta_d_min_exact(const CapacityQuery& q) {
  const double a = q.cfg.alpha;
  const double allowed = std::pow(2.0 * q.r, a) * interference_budget(q) / 2.0;
  const double phi_hi = mirror_phi_max(q.K);
  if (!(allowed > 0.0) || mirror_series(q.K, phi_hi, a) > allowed) return {kInf, false};
  // mirror_series is decreasing in phi on (0, pi/(2K+1)].
  double lo = 0.0;
  double hi = phi_hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= 0.0 || mirror_series(q.K, mid, a) > allowed) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {2.0 * q.r * std::sin(hi / 2.0), true};
}

namespace {

struct PowerLawFit {
  double scale = 0.0;
  double exponent = 0.0;
  double offset = 0.0;
  double sse = kInf;
};

// Linear least squares for (scale, offset) at a fixed exponent.
PowerLawFit fit_at_exponent(const std::vector<double>& x, const std::vector<double>& y,
                            double exponent) {
  double s_uu = 0, s_u = 0, s_uy = 0, s_y = 0;
  const double n = static_cast<double>(x.size());
  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    u[i] = std::pow(x[i], exponent);
    s_uu += u[i] * u[i];
    s_u += u[i];
    s_uy += u[i] * y[i];
    s_y += y[i];
  }
  const double det = n * s_uu - s_u * s_u;
  PowerLawFit f;
  f.exponent = exponent;
  if (det == 0.0) return f;
  f.scale = (n * s_uy - s_u * s_y) / det;
  f.offset = (s_y - f.scale * s_u) / n;
  f.sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = f.scale * u[i] + f.offset - y[i];
    f.sse += e * e;
  }
  return f;
}

// Coarse scan followed by golden-section refinement of the exponent.
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y,
                          double e_lo, double e_hi) {
  PowerLawFit best;
  const int steps = 400;
  double best_e = e_lo;
  for (int i = 0; i <= steps; ++i) {
    const double e = e_lo + (e_hi - e_lo) * i / steps;
    const PowerLawFit f = fit_at_exponent(x, y, e);
    if (f.sse < best.sse) {
      best = f;
      best_e = e;
    }
  }
  const double h = (e_hi - e_lo) / steps;
  double a = std::max(e_lo, best_e - h);
  double b = std::min(e_hi, best_e + h);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 100; ++it) {
    const double c = b - g * (b - a);
    const double d = a + g * (b - a);
    if (fit_at_exponent(x, y, c).sse < fit_at_exponent(x, y, d).sse) {
      b = d;
    } else {
      a = c;
    }
  }
  const PowerLawFit refined = fit_at_exponent(x, y, 0.5 * (a + b));
  return refined.sse < best.sse ? refined : best;
}

}  // namespace

FitParams fit_radial(double alpha, FitParams base) {
  std::vector<double> x, y;
  for (int n = 3; n <= 60; ++n) {
    x.push_back(n);
    y.push_back(radial_series(n, alpha));
  }
  const PowerLawFit f = fit_power_law(x, y, 0.5, 6.0);
  base.p1 = f.scale;
  base.p2 = f.exponent;
  base.p3 = f.offset;
  return base;
}

FitParams fit_mirror(double alpha, int k, FitParams base) {
  std::vector<double> x, y;
  const int samples = 400;
  const double lo = kPi / 180.0;
  const double hi = mirror_phi_max(k);
  for (int i = 0; i < samples; ++i) {
    const double phi = lo + (hi - lo) * i / (samples - 1);
    x.push_back(std::sin(phi / 2.0));
    y.push_back(mirror_series(k, phi, alpha));
  }
  const PowerLawFit f = fit_power_law(x, y, -6.0, -0.5);
  base.q1 = f.scale;
  base.q2 = f.exponent;
  base.q3 = f.offset;
  return base;
}

FitParams fit_params_for(double alpha, int k) {
  FitParams p = FitParams::alpha4_k2();
  if (alpha != 4.0) p = fit_radial(alpha, p);
  if (alpha != 4.0 || k != 2) p = fit_mirror(alpha, k, p);
  return p;
}

RadiusRange mirror_feasible_range(const CapacityQuery& tmpl, const FitParams& params) {
  auto feasible_at = [&](double r) {
    CapacityQuery q = tmpl;
    q.r = r;
    return delta_d_min(q, params).feasible;
  };
  // Scan for a feasible seed, then bisect each edge.
  const double scan_lo = tmpl.delta_r * (1.0 + 1e-9);
  double scan_hi = scan_lo;
  while (scan_hi < 1e4 && interference_budget(CapacityQuery{scan_hi, tmpl.delta_r, tmpl.beta,
                                                            tmpl.cfg, tmpl.K}) > 0.0) {
    scan_hi *= 1.05;
  }
  const int steps = 20000;
  double seed = -1.0;
  double first = -1.0;
  double last = -1.0;
  for (int i = 0; i <= steps; ++i) {
    const double r = scan_lo + (scan_hi - scan_lo) * i / steps;
    if (feasible_at(r)) {
      if (seed < 0) first = r;
      seed = r;
      last = r;
    }
  }
  if (seed < 0) return {};
  auto bisect = [&](double feasible_r, double infeasible_r) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (feasible_r + infeasible_r);
      if (feasible_at(mid)) {
        feasible_r = mid;
      } else {
        infeasible_r = mid;
      }
    }
    return feasible_r;
  };
  const double step = (scan_hi - scan_lo) / steps;
  RadiusRange out;
  out.lo = first > scan_lo ? bisect(first, std::max(scan_lo, first - step)) : first;
  out.hi = last < scan_hi ? bisect(last, std::min(scan_hi, last + step)) : last;
  return out;
}

std::vector<CapacityRow> capacity_curve(const CapacityQuery& tmpl, const FitParams& params,
                                        double r_lo, double r_hi, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("capacity sweep step must be positive");
  std::vector<double> radii;
  if (r_hi < r_lo) return {};
  const auto count = static_cast<long long>(std::floor((r_hi - r_lo) / step + 1e-9));
  for (long long i = 0; i <= count; ++i) radii.push_back(r_lo + static_cast<double>(i) * step);

  const RadiusRange range = mirror_feasible_range(tmpl, params);
  if (!range.empty()) {
    for (double edge : {range.lo, range.hi}) {
      if (edge > r_lo && edge < r_hi) radii.push_back(edge);
    }
  }
  std::sort(radii.begin(), radii.end());

  std::vector<CapacityRow> rows;
  rows.reserve(radii.size());
  for (double r : radii) {
    if (!(r > tmpl.delta_r)) continue;
    CapacityQuery q = tmpl;
    q.r = r;
    CapacityRow row;
    row.r = r;
    row.n_max_fit = n_max(q, params);
    row.n_max_exact = n_max_exact(q);
    row.dd_fit = delta_d_min(q, params);
    row.dd_exact = delta_d_min_exact(q);
    row.feasible = row.n_max_fit >= 3 && row.dd_fit.feasible;
    rows.push_back(row);
  }
  return rows;
}

void write_capacity_csv(std::ostream& os, const std::vector<CapacityRow>& rows) {
  os << "r_m,n_max_fit,n_max_exact,dd_min_fit_m,dd_min_exact_m,feasible\n";
  for (const CapacityRow& row : rows) {
    os << format_fixed(row.r, 6) << ',' << row.n_max_fit << ',' << row.n_max_exact << ','
       << format_fixed(row.dd_fit.meters, 6) << ',' << format_fixed(row.dd_exact.meters, 6)
       << ',' << (row.feasible ? 1 : 0) << '\n';
  }
}

}  // namespace nfsense
