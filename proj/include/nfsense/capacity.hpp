// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <vector>

#include "nfsense/geometry.hpp"

namespace nfsense {

/// Coefficients of the two series fits:
///   radial  sum_{j=1}^{N-1} sin^-a(j pi / N)  ~ p1 N^p2 + p3
///   mirror  sum_{j=1}^{K}   sin^-a(j phi / 2) ~ q1 sin(phi/2)^q2 + q3
struct FitParams {
  double p1 = 0.0230;
  double p2 = 3.99;
  double p3 = 38.0;
  double q1 = 1.06;
  double q2 = -4.0;
  double q3 = 6.57;

  void validate() const;
  /// Published coefficients (alpha = 4, K = 2).
  static FitParams alpha4_k2() { return {}; }
};

struct CapacityQuery {
  double r = 1.0;
  double delta_r = 0.1;
  double beta = 50.0;
  RadioConfig cfg;
  int K = 2;

  void validate() const;
};

/// Result of a spacing bound: `feasible == false` carries meters = +inf.
struct Spacing {
  double meters = 0.0;
  bool feasible = false;
};

double radial_series(int n, double alpha);
double radial_fit(int n, const FitParams& params);
double mirror_series(int k, double phi, double alpha);
double mirror_fit(double phi, const FitParams& params);

/// Fitted upper bound on subject count; 0 when fewer than 3 fit.
int n_max(const CapacityQuery& q, const FitParams& params);
/// Largest N >= 3 whose exact radial series satisfies the VIR threshold; 0 if none.
int n_max_exact(const CapacityQuery& q);

Spacing delta_d_min(const CapacityQuery& q, const FitParams& params);
/// Bisection on phi against the exact mirror series.
Spacing delta_d_min_exact(const CapacityQuery& q);

/// Fits p1 N^p2 + p3 over N in [3, 60] by least squares.
FitParams fit_radial(double alpha, FitParams base = {});
/// Fits q1 s^q2 + q3 over phi in [pi/180, pi/(2K+1)], s = sin(phi/2).
FitParams fit_mirror(double alpha, int k, FitParams base = {});
/// Published values for alpha = 4 and K = 2, recomputed fits otherwise.
FitParams fit_params_for(double alpha, int k);

struct CapacityRow {
  double r = 0.0;
  int n_max_fit = 0;
  int n_max_exact = 0;
  Spacing dd_fit;
  Spacing dd_exact;
  bool feasible = false;
};

/// Feasible radius interval of the mirror case: where the fitted spacing bound
/// exists and stays below 2 r sin(pi / (2K + 1)). Empty when lo > hi.
struct RadiusRange {
  double lo = 0.0;
  double hi = -1.0;
  bool empty() const { return lo > hi; }
};
RadiusRange mirror_feasible_range(const CapacityQuery& tmpl, const FitParams& params);

/// Sweeps r over [r_lo, r_hi] with `step`; the mirror-case feasibility
/// boundaries inside the range are inserted as extra rows. Rows sorted by r.
std::vector<CapacityRow> capacity_curve(const CapacityQuery& tmpl, const FitParams& params,
                                        double r_lo, double r_hi, double step);

void write_capacity_csv(std::ostream& os, const std::vector<CapacityRow>& rows);

}  // namespace nfsense
