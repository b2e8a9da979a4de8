// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nfsense/geometry.hpp"
#include "nfsense/scene.hpp"

namespace nfsense {

/// Dense row-major complex matrix for the small (<= 8 x 8) MIMO sizes.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols);

  static CMatrix identity(std::size_t n);
  static CMatrix diagonal(std::span<const Complex> d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  CMatrix adjoint() const;
  /// First `n` columns.
  CMatrix left_columns(std::size_t n) const;
  double max_abs() const;
  double frobenius() const;

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b);
  friend CMatrix operator-(const CMatrix& a, const CMatrix& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

using ChannelMatrix = CMatrix;

/// ||M* M - I||_max for the columns of m.
double unitarity_error(const CMatrix& m);

/// H = U S V* with U (rows x rows) and V (cols x cols) unitary and the
/// non-increasing singular values in `s` (min(rows, cols) entries).
struct Svd {
  CMatrix u;
  std::vector<double> s;
  CMatrix v;
};

/// One-sided (Hestenes) Jacobi: at most 100 sweeps, a pair is rotated while
/// its normalised off-diagonal magnitude exceeds 1e-15 and a sweep stops the
/// iteration once the total normalised off-diagonal mass is below 1e-12.
Svd svd_decompose(const CMatrix& h);

/// Rectangular diagonal S as a matrix of the given shape.
CMatrix singular_matrix(const std::vector<double>& s, std::size_t rows, std::size_t cols);

struct NormalizedV {
  CMatrix v;
  /// Columns whose last-row entry was exactly zero and were left unchanged.
  std::vector<bool> phase_undefined;
};

/// Multiplies each column by a unit phase making its last-row entry real and
/// non-negative.
NormalizedV phase_normalize(const CMatrix& v);

/// Continuous Givens angles of a phase-normalised N x Nc matrix, in the order
/// of the decomposition: for i = 1..min(Nc, N-1), phi(k, i) for k = i..N-1
/// followed (in their own list) by psi(l, i) for l = i+1..N.
struct GivensAngles {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> phi;
  std::vector<double> psi;
};

/// Number of phi (equivalently psi) angles for an n_rows x n_cols matrix.
std::size_t givens_angle_count(std::size_t n_rows, std::size_t n_cols);

GivensAngles extract_angles(const CMatrix& v_normalized);
/// Reconstructs D_1 G_21^T ... G_N1^T D_2 ... I~ from the angles.
CMatrix reconstruct(const GivensAngles& angles);

/// Quantised compressed beamforming feedback.
struct BfiReport {
  std::size_t n_tx = 0;
  std::size_t n_cols = 0;
  int b_phi = 6;
  int b_psi = 4;
  std::vector<std::uint32_t> phi_codes;
  std::vector<std::uint32_t> psi_codes;

  /// Cell-midpoint angles.
  std::vector<double> phi_angles() const;
  std::vector<double> psi_angles() const;
  void validate() const;
};

std::uint32_t quantize_phi(double phi, int bits);
std::uint32_t quantize_psi(double psi, int bits);
double dequantize_phi(std::uint32_t code, int bits);
double dequantize_psi(std::uint32_t code, int bits);

/// Input must be unitary within 1e-6 and phase-normalised; only the first
/// n_cols columns are encoded.
BfiReport compress(const CMatrix& v_normalized, std::size_t n_cols, int b_phi, int b_psi);
CMatrix decompress(const BfiReport& report);

void write_bfi_report(std::ostream& os, const BfiReport& report);
BfiReport read_bfi_report(std::string_view text);

struct MotionUpdate {
  double delta_theta = 0.0;
  double delta_d_t = 0.0;
  std::vector<double> delta_d_r;
  std::vector<double> rho;
  double ell = 0.03;
  double theta = 0.0;

  void validate() const;
};

/// Q_rx H0 Q_tx with Q_rx = diag(rho_j e^{-i 2 pi dd_Rj / lambda}) and
/// Q_tx = diag(e^{-i 2 pi [dd_T - (k-1) ell dtheta sin theta] / lambda}).
ChannelMatrix apply_motion(const ChannelMatrix& h0, const MotionUpdate& m, double lambda);

/// The normalised steering matrix of H after motion predicted from that of
/// H0: row k (1-based) of `v_tilde` times e^{+i 2 pi (N-k) ell dtheta sin theta / lambda}.
/// Holds whenever all rho_j are equal.
CMatrix predicted_normalized_after_motion(const CMatrix& v_tilde, const MotionUpdate& m, double lambda);

/// Normalised steering columns (first min(rows, cols)) of a channel.
CMatrix steering_matrix(const ChannelMatrix& h);

/// Seeded complex Gaussian channel whose singular values are separated by at
/// least `min_gap` (redrawn otherwise).
ChannelMatrix random_channel(std::size_t n_rx, std::size_t n_tx, std::uint64_t seed, double min_gap = 1e-6);

struct Quantization {
  int b_phi = 6;
  int b_psi = 4;
};

struct SensitivityRow {
  double t = 0.0;
  /// Unwrapped phase change of H[0][0] relative to the first step.
  double csi_phase_variation = 0.0;
  /// ||V~(t) - V~(0)||_F of the reconstructed steering matrix.
  double bfi_variation = 0.0;
};

struct MotionStep {
  double t = 0.0;
  MotionUpdate motion;
};

/// Each step applies its motion to h0 directly (motions are cumulative
/// displacements, not increments). Without quantisation the continuous
/// angles are used.
std::vector<SensitivityRow> bfi_sensitivity_demo(const ChannelMatrix& h0, std::span<const MotionStep> steps,
                                                 double lambda, std::optional<Quantization> bits);

void write_sensitivity_csv(std::ostream& os, std::span<const SensitivityRow> rows);

/// Uniform linear arrays at the AP (spacing `ell_tx`) and UE (spacing
/// `ell_rx`), both along x and centred on their node, for MIMO rendering of a
/// scene link.
struct ArrayGeometry {
  std::size_t n_tx = 3;
  std::size_t n_rx = 2;
  double ell_tx = 0.03;
  double ell_rx = 0.03;
};

/// Per-antenna-pair CSI matrices (n_rx x n_tx) of a scene link: static LoS,
/// every subject's single-bounce path and observation noise of
/// scene.noise_std per entry. Each subject is displaced along its own
/// UE-subject axis; the dynamic path is omitted.
std::vector<ChannelMatrix> render_mimo(const Scene& scene, std::size_t user, std::span<const double> times,
                                       const ArrayGeometry& array);

}  // namespace nfsense
