// SPDX-License-Identifier: Apache-2.0
#include "nfsense/bfi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "nfsense/dsp.hpp"
#include "nfsense/rng.hpp"
#include "nfsense/text_io.hpp"

namespace nfsense {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxSweeps = 100;
constexpr std::uint64_t kStreamMimoNoise = 3;

}  // namespace

CMatrix::CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::diagonal(std::span<const Complex> d) {
  CMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

CMatrix CMatrix::adjoint() const {
  CMatrix m(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) m(c, r) = std::conj((*this)(r, c));
  }
  return m;
}

CMatrix CMatrix::left_columns(std::size_t n) const {
  if (n > cols_) throw std::invalid_argument("left_columns: not enough columns");
  CMatrix m(rows_, n);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < n; ++c) m(r, c) = (*this)(r, c);
  }
  return m;
}

double CMatrix::max_abs() const {
  double m = 0.0;
  for (const Complex& v : data_) m = std::max(m, std::abs(v));
  return m;
}

double CMatrix::frobenius() const {
  double s = 0.0;
  for (const Complex& v : data_) s += std::norm(v);
  return std::sqrt(s);
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product dimension mismatch");
  CMatrix m(a.rows_, b.cols_);
  for (std::size_t r = 0; r < a.rows_; ++r) {
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Complex x = a(r, k);
      for (std::size_t c = 0; c < b.cols_; ++c) m(r, c) += x * b(k, c);
    }
  }
  return m;
}

CMatrix operator-(const CMatrix& a, const CMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("matrix difference dimension mismatch");
  CMatrix m = a;
  for (std::size_t i = 0; i < m.data_.size(); ++i) m.data_[i] -= b.data_[i];
  return m;
}

double unitarity_error(const CMatrix& m) {
  const CMatrix g = m.adjoint() * m;
  return (g - CMatrix::identity(g.rows())).max_abs();
}

namespace {

double column_norm2(const CMatrix& a, std::size_t c) {
  double s = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) s += std::norm(a(r, c));
  return s;
}

// Fills columns [first, cols) of q with an orthonormal completion of the
// columns before them, drawing candidates from the standard basis.
void complete_orthonormal(CMatrix& q, std::size_t first) {
  const std::size_t n = q.rows();
  std::size_t next = first;
  for (std::size_t e = 0; e < n && next < q.cols(); ++e) {
    std::vector<Complex> v(n);
    v[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t c = 0; c < next; ++c) {
        Complex dot = 0.0;
        for (std::size_t r = 0; r < n; ++r) dot += std::conj(q(r, c)) * v[r];
        for (std::size_t r = 0; r < n; ++r) v[r] -= dot * q(r, c);
      }
    }
    double norm = 0.0;
    for (const Complex& x : v) norm += std::norm(x);
    norm = std::sqrt(norm);
    if (norm < 1e-8) continue;
    for (std::size_t r = 0; r < n; ++r) q(r, next) = v[r] / norm;
    ++next;
  }
}

}  // namespace

Svd svd_decompose(const CMatrix& h) {
  const std::size_t m = h.rows();
  const std::size_t n = h.cols();
  if (m == 0 || n == 0) throw std::invalid_argument("SVD of an empty matrix");
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (!std::isfinite(h(r, c).real()) || !std::isfinite(h(r, c).imag())) {
        throw std::invalid_argument("SVD input has non-finite entries");
      }
    }
  }
  CMatrix a = h;
  CMatrix v = CMatrix::identity(n);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off_mass = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = column_norm2(a, p);
        const double beta = column_norm2(a, q);
        if (alpha == 0.0 || beta == 0.0) continue;
        Complex gamma = 0.0;
        for (std::size_t r = 0; r < m; ++r) gamma += std::conj(a(r, p)) * a(r, q);
        const double g = std::abs(gamma);
        const double off = g / std::sqrt(alpha * beta);
        off_mass += off;
        if (off <= 1e-15) continue;
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const Complex ph = gamma / g;
        // [a_p a_q] <- [a_p a_q] [[c, s e^{i phi}], [-s e^{-i phi}, c]]
        auto rotate = [&](CMatrix& x) {
          for (std::size_t r = 0; r < x.rows(); ++r) {
            const Complex xp = x(r, p);
            const Complex xq = x(r, q);
            x(r, p) = c * xp - s * std::conj(ph) * xq;
            x(r, q) = s * ph * xp + c * xq;
          }
        };
        rotate(a);
        rotate(v);
      }
    }
    if (off_mass < 1e-12) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t c = 0; c < n; ++c) sigma[c] = std::sqrt(column_norm2(a, c));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  const std::size_t k = std::min(m, n);
  Svd out;
  out.v = CMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t r = 0; r < n; ++r) out.v(r, j) = v(r, order[j]);
  }
  out.s.resize(k);
  out.u = CMatrix(m, m);
  const double tiny = std::max(sigma[order[0]], 1e-300) * 1e-13;
  std::size_t filled = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const double sj = sigma[order[j]];
    out.s[j] = sj;
    if (sj <= tiny) break;
    for (std::size_t r = 0; r < m; ++r) out.u(r, j) = a(r, order[j]) / sj;
    filled = j + 1;
  }
  complete_orthonormal(out.u, filled);
  return out;
}

CMatrix singular_matrix(const std::vector<double>& s, std::size_t rows, std::size_t cols) {
  CMatrix m(rows, cols);
  for (std::size_t i = 0; i < s.size() && i < rows && i < cols; ++i) m(i, i) = s[i];
  return m;
}

NormalizedV phase_normalize(const CMatrix& v) {
  NormalizedV out{v, std::vector<bool>(v.cols(), false)};
  if (v.rows() == 0) return out;
  const std::size_t last = v.rows() - 1;
  for (std::size_t c = 0; c < v.cols(); ++c) {
    const Complex e = v(last, c);
    const double mag = std::abs(e);
    if (mag == 0.0) {
      out.phase_undefined[c] = true;
      continue;
    }
    const Complex rot = std::conj(e) / mag;
    for (std::size_t r = 0; r < last; ++r) out.v(r, c) = v(r, c) * rot;
    out.v(last, c) = mag;
  }
  return out;
}

std::size_t givens_angle_count(std::size_t n_rows, std::size_t n_cols) {
  std::size_t count = 0;
  const std::size_t steps = n_rows == 0 ? 0 : std::min(n_cols, n_rows - 1);
  for (std::size_t i = 0; i < steps; ++i) count += n_rows - 1 - i;
  return count;
}

GivensAngles extract_angles(const CMatrix& v_normalized) {
  const std::size_t n = v_normalized.rows();
  const std::size_t nc = v_normalized.cols();
  GivensAngles out{n, nc, {}, {}};
  CMatrix w = v_normalized;
  const std::size_t steps = n == 0 ? 0 : std::min(nc, n - 1);
  for (std::size_t i = 0; i < steps; ++i) {
    for (std::size_t k = i; k + 1 < n; ++k) {
      double phi = std::arg(w(k, i));
      if (phi < 0.0) phi += kTwoPi;
      if (phi >= kTwoPi) phi -= kTwoPi;
      out.phi.push_back(phi);
      const Complex rot = std::polar(1.0, -phi);
      for (std::size_t c = 0; c < nc; ++c) w(k, c) *= rot;
    }
    for (std::size_t l = i + 1; l < n; ++l) {
      const double a = std::abs(w(i, i));
      const double b = std::abs(w(l, i));
      const double psi = std::atan2(b, a);
      out.psi.push_back(psi);
      const double c = std::cos(psi);
      const double s = std::sin(psi);
      for (std::size_t col = 0; col < nc; ++col) {
        const Complex ri = w(i, col);
        const Complex rl = w(l, col);
        w(i, col) = c * ri + s * rl;
        w(l, col) = -s * ri + c * rl;
      }
    }
  }
  return out;
}

CMatrix reconstruct(const GivensAngles& angles) {
  const std::size_t n = angles.n_rows;
  const std::size_t nc = angles.n_cols;
  if (nc > n) throw std::invalid_argument("reconstruct: more columns than rows");
  const std::size_t expected = givens_angle_count(n, nc);
  if (angles.phi.size() != expected || angles.psi.size() != expected) {
    throw std::invalid_argument("angle count mismatch: expected " + std::to_string(expected) + " phi and psi, got " +
                                std::to_string(angles.phi.size()) + " and " + std::to_string(angles.psi.size()));
  }
  CMatrix m(n, nc);
  for (std::size_t i = 0; i < nc; ++i) m(i, i) = 1.0;
  const std::size_t steps = n == 0 ? 0 : std::min(nc, n - 1);
  // Offsets of each step's angles, so the product can be applied right to left.
  std::vector<std::size_t> offset(steps + 1, 0);
  for (std::size_t i = 0; i < steps; ++i) offset[i + 1] = offset[i] + (n - 1 - i);
  for (std::size_t ii = steps; ii-- > 0;) {
    for (std::size_t l = n; l-- > ii + 1;) {
      const double psi = angles.psi[offset[ii] + (l - ii - 1)];
      const double c = std::cos(psi);
      const double s = std::sin(psi);
      for (std::size_t col = 0; col < nc; ++col) {
        const Complex ri = m(ii, col);
        const Complex rl = m(l, col);
        m(ii, col) = c * ri - s * rl;
        m(l, col) = s * ri + c * rl;
      }
    }
    for (std::size_t k = ii; k + 1 < n; ++k) {
      const Complex rot = std::polar(1.0, angles.phi[offset[ii] + (k - ii)]);
      for (std::size_t col = 0; col < nc; ++col) m(k, col) *= rot;
    }
  }
  return m;
}

namespace {

void check_bits(int bits) {
  if (bits < 1 || bits > 24) throw std::invalid_argument("quantizer bit width must lie in [1, 24]");
}

std::uint32_t quantize_uniform(double x, double range, int bits) {
  check_bits(bits);
  const double levels = std::ldexp(1.0, bits);
  const double k = std::floor(x / range * levels);
  return static_cast<std::uint32_t>(std::clamp(k, 0.0, levels - 1.0));
}

double dequantize_uniform(std::uint32_t code, double range, int bits) {
  check_bits(bits);
  return (static_cast<double>(code) + 0.5) * range / std::ldexp(1.0, bits);
}

}  // namespace

std::uint32_t quantize_phi(double phi, int bits) { return quantize_uniform(phi, kTwoPi, bits); }
std::uint32_t quantize_psi(double psi, int bits) { return quantize_uniform(psi, kPi / 2.0, bits); }
double dequantize_phi(std::uint32_t code, int bits) { return dequantize_uniform(code, kTwoPi, bits); }
double dequantize_psi(std::uint32_t code, int bits) { return dequantize_uniform(code, kPi / 2.0, bits); }

std::vector<double> BfiReport::phi_angles() const {
  std::vector<double> out;
  for (std::uint32_t c : phi_codes) out.push_back(dequantize_phi(c, b_phi));
  return out;
}

std::vector<double> BfiReport::psi_angles() const {
  std::vector<double> out;
  for (std::uint32_t c : psi_codes) out.push_back(dequantize_psi(c, b_psi));
  return out;
}

void BfiReport::validate() const {
  check_bits(b_phi);
  check_bits(b_psi);
  if (n_tx == 0 || n_cols == 0 || n_cols > n_tx) throw std::invalid_argument("BFI dims must satisfy 1 <= N_cols <= N_tx");
  const std::size_t expected = givens_angle_count(n_tx, n_cols);
  if (phi_codes.size() != expected || psi_codes.size() != expected) {
    throw std::invalid_argument("BFI angle count mismatch: expected " + std::to_string(expected) + ", got " +
                                std::to_string(phi_codes.size()) + " phi and " + std::to_string(psi_codes.size()) +
                                " psi");
  }
  const auto max_phi = static_cast<std::uint32_t>((1ULL << b_phi) - 1);
  const auto max_psi = static_cast<std::uint32_t>((1ULL << b_psi) - 1);
  for (std::uint32_t c : phi_codes) {
    if (c > max_phi) throw std::invalid_argument("phi code out of range");
  }
  for (std::uint32_t c : psi_codes) {
    if (c > max_psi) throw std::invalid_argument("psi code out of range");
  }
}

BfiReport compress(const CMatrix& v_normalized, std::size_t n_cols, int b_phi, int b_psi) {
  check_bits(b_phi);
  check_bits(b_psi);
  const std::size_t n = v_normalized.rows();
  if (n_cols == 0 || n_cols > v_normalized.cols()) throw std::invalid_argument("compress: bad column count");
  const CMatrix cols = v_normalized.left_columns(n_cols);
  if (unitarity_error(cols) > 1e-6) throw std::invalid_argument("compress: input columns are not orthonormal");
  for (std::size_t c = 0; c < n_cols; ++c) {
    const Complex e = cols(n - 1, c);
    if (std::abs(e.imag()) > 1e-9 || e.real() < -1e-9) {
      throw std::invalid_argument("compress: input is not phase-normalized");
    }
  }
  const GivensAngles angles = extract_angles(cols);
  BfiReport r;
  r.n_tx = n;
  r.n_cols = n_cols;
  r.b_phi = b_phi;
  r.b_psi = b_psi;
  for (double p : angles.phi) r.phi_codes.push_back(quantize_phi(p, b_phi));
  for (double p : angles.psi) r.psi_codes.push_back(quantize_psi(p, b_psi));
  return r;
}

CMatrix decompress(const BfiReport& report) {
  report.validate();
  return reconstruct({report.n_tx, report.n_cols, report.phi_angles(), report.psi_angles()});
}

void write_bfi_report(std::ostream& os, const BfiReport& report) {
  report.validate();
  os << report.n_tx << ' ' << report.n_cols << ' ' << report.b_phi << ' ' << report.b_psi << '\n';
  for (std::size_t i = 0; i < report.phi_codes.size(); ++i) os << (i ? " " : "") << report.phi_codes[i];
  os << '\n';
  for (std::size_t i = 0; i < report.psi_codes.size(); ++i) os << (i ? " " : "") << report.psi_codes[i];
  os << '\n';
}

BfiReport read_bfi_report(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  while (lines.size() < 3) lines.emplace_back();
  const auto head = split_ws(lines[0]);
  if (head.size() != 4) throw std::invalid_argument("BFI header must be 'N_tx N_cols b_phi b_psi'");
  BfiReport r;
  r.n_tx = static_cast<std::size_t>(parse_int(head[0]));
  r.n_cols = static_cast<std::size_t>(parse_int(head[1]));
  r.b_phi = static_cast<int>(parse_int(head[2]));
  r.b_psi = static_cast<int>(parse_int(head[3]));
  for (const std::string& t : split_ws(lines[1])) r.phi_codes.push_back(static_cast<std::uint32_t>(parse_int(t)));
  for (const std::string& t : split_ws(lines[2])) r.psi_codes.push_back(static_cast<std::uint32_t>(parse_int(t)));
  r.validate();
  return r;
}

void MotionUpdate::validate() const {
  if (!(ell > 0.0)) throw std::invalid_argument("antenna spacing ell must be > 0");
  for (double r : rho) {
    if (!(r > 0.0)) throw std::invalid_argument("amplitude ratios rho must be > 0");
  }
}

ChannelMatrix apply_motion(const ChannelMatrix& h0, const MotionUpdate& m, double lambda) {
  m.validate();
  const std::size_t n_rx = h0.rows();
  const std::size_t n_tx = h0.cols();
  if (!m.delta_d_r.empty() && m.delta_d_r.size() != n_rx) {
    throw std::invalid_argument("delta_d_r has " + std::to_string(m.delta_d_r.size()) + " entries, H has " +
                                std::to_string(n_rx) + " rows");
  }
  if (!m.rho.empty() && m.rho.size() != n_rx) {
    throw std::invalid_argument("rho has " + std::to_string(m.rho.size()) + " entries, H has " +
                                std::to_string(n_rx) + " rows");
  }
  std::vector<Complex> q_rx(n_rx);
  for (std::size_t j = 0; j < n_rx; ++j) {
    const double dd = m.delta_d_r.empty() ? 0.0 : m.delta_d_r[j];
    const double rho = m.rho.empty() ? 1.0 : m.rho[j];
    q_rx[j] = std::polar(rho, -kTwoPi * dd / lambda);
  }
  std::vector<Complex> q_tx(n_tx);
  const double steer = m.ell * m.delta_theta * std::sin(m.theta);
  for (std::size_t k = 0; k < n_tx; ++k) {
    q_tx[k] = std::polar(1.0, -kTwoPi * (m.delta_d_t - static_cast<double>(k) * steer) / lambda);
  }
  ChannelMatrix h1 = h0;
  for (std::size_t j = 0; j < n_rx; ++j) {
    for (std::size_t k = 0; k < n_tx; ++k) h1(j, k) = q_rx[j] * h0(j, k) * q_tx[k];
  }
  return h1;
}

CMatrix predicted_normalized_after_motion(const CMatrix& v_tilde, const MotionUpdate& m, double lambda) {
  const std::size_t n = v_tilde.rows();
  const double steer = m.ell * m.delta_theta * std::sin(m.theta);
  CMatrix out = v_tilde;
  for (std::size_t r = 0; r < n; ++r) {
    const Complex f = std::polar(1.0, kTwoPi * static_cast<double>(n - 1 - r) * steer / lambda);
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) *= f;
  }
  return out;
}

CMatrix steering_matrix(const ChannelMatrix& h) {
  const Svd svd = svd_decompose(h);
  return phase_normalize(svd.v.left_columns(std::min(h.rows(), h.cols()))).v;
}

ChannelMatrix random_channel(std::size_t n_rx, std::size_t n_tx, std::uint64_t seed, double min_gap) {
  Rng rng(derive_seed(seed, {n_rx, n_tx}));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    ChannelMatrix h(n_rx, n_tx);
    for (std::size_t r = 0; r < n_rx; ++r) {
      for (std::size_t c = 0; c < n_tx; ++c) {
        const double re = standard_normal(rng);
        const double im = standard_normal(rng);
        h(r, c) = Complex(re, im) / std::sqrt(2.0);
      }
    }
    const Svd svd = svd_decompose(h);
    bool ok = svd.s.back() >= min_gap;
    for (std::size_t i = 0; i + 1 < svd.s.size(); ++i) ok = ok && svd.s[i] - svd.s[i + 1] >= min_gap;
    if (ok) return h;
  }
  throw std::runtime_error("random_channel: could not draw a non-degenerate channel");
}

namespace {

CMatrix reconstructed_steering(const ChannelMatrix& h, const std::optional<Quantization>& bits) {
  const CMatrix v = steering_matrix(h);
  if (!bits) return reconstruct(extract_angles(v));
  return decompress(compress(v, v.cols(), bits->b_phi, bits->b_psi));
}

}  // namespace

std::vector<SensitivityRow> bfi_sensitivity_demo(const ChannelMatrix& h0, std::span<const MotionStep> steps,
                                                 double lambda, std::optional<Quantization> bits) {
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (!(steps[i].t > steps[i - 1].t)) throw std::invalid_argument("motion step times must be increasing");
  }
  const CMatrix v0 = reconstructed_steering(h0, bits);
  const double phase0 = std::arg(h0(0, 0));
  std::vector<double> wrapped;
  std::vector<SensitivityRow> rows;
  for (const MotionStep& step : steps) {
    const ChannelMatrix h1 = apply_motion(h0, step.motion, lambda);
    const CMatrix v1 = reconstructed_steering(h1, bits);
    wrapped.push_back(std::arg(h1(0, 0)));
    rows.push_back({step.t, 0.0, (v1 - v0).frobenius()});
  }
  // Continuation from the unmoved channel.
  wrapped.insert(wrapped.begin(), phase0);
  const std::vector<double> unwrapped = dsp::unwrap(wrapped);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].csi_phase_variation = unwrapped[i + 1] - unwrapped[0];
  return rows;
}

void write_sensitivity_csv(std::ostream& os, std::span<const SensitivityRow> rows) {
  os << "t_s,csi_phase_variation_rad,bfi_variation\n";
  for (const SensitivityRow& r : rows) {
    os << format_fixed(r.t, 6) << ',' << format_double(r.csi_phase_variation) << ','
       << format_double(r.bfi_variation) << '\n';
  }
}

std::vector<ChannelMatrix> render_mimo(const Scene& scene, std::size_t user, std::span<const double> times,
                                       const ArrayGeometry& array) {
  if (user >= scene.users.size()) throw std::out_of_range("unknown link for MIMO rendering");
  if (array.n_tx == 0 || array.n_rx == 0) throw std::invalid_argument("array sizes must be positive");
  const RadioConfig& cfg = scene.cfg;
  std::vector<Point2D> tx(array.n_tx);
  std::vector<Point2D> rx(array.n_rx);
  for (std::size_t k = 0; k < array.n_tx; ++k) {
    tx[k] = {scene.ap.x + (static_cast<double>(k) - (array.n_tx - 1) / 2.0) * array.ell_tx, scene.ap.y};
  }
  const Point2D ue = scene.users[user].ue;
  for (std::size_t j = 0; j < array.n_rx; ++j) {
    rx[j] = {ue.x + (static_cast<double>(j) - (array.n_rx - 1) / 2.0) * array.ell_rx, ue.y};
  }
  ChannelMatrix base(array.n_rx, array.n_tx);
  for (std::size_t j = 0; j < array.n_rx; ++j) {
    for (std::size_t k = 0; k < array.n_tx; ++k) {
      const double d = distance(tx[k], rx[j]);
      base(j, k) = std::polar(std::sqrt(scene.g_los) * std::pow(d, -cfg.alpha / 2.0),
                              -kTwoPi * std::fmod(d, cfg.lambda) / cfg.lambda);
    }
  }
  Rng rng(derive_seed(scene.seed, {user, kStreamMimoNoise}));
  const double comp = scene.noise_std / std::sqrt(2.0);
  std::vector<ChannelMatrix> out;
  out.reserve(times.size());
  for (double t : times) {
    ChannelMatrix h = base;
    for (const SceneUser& u : scene.users) {
      // The body moves along its UE-subject axis, so the per-antenna path
      // differences (and with them the AP-side direction) change as well.
      const double disp = displacement(u.motion, t);
      const double norm = distance(u.ue, u.subject);
      const Point2D s{u.subject.x + disp * (u.subject.x - u.ue.x) / norm,
                      u.subject.y + disp * (u.subject.y - u.ue.y) / norm};
      for (std::size_t j = 0; j < array.n_rx; ++j) {
        for (std::size_t k = 0; k < array.n_tx; ++k) {
          h(j, k) += reflection_gain(cfg, distance(tx[k], s), distance(s, rx[j])).value;
        }
      }
    }
    if (comp > 0.0) {
      for (std::size_t j = 0; j < array.n_rx; ++j) {
        for (std::size_t k = 0; k < array.n_tx; ++k) {
          const double re = standard_normal(rng);
          const double im = standard_normal(rng);
          h(j, k) += Complex(comp * re, comp * im);
        }
      }
    }
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace nfsense
