#include "gkp/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gkp/parallel.hpp"

namespace gkp {

using cd = std::complex<double>;
using std::numbers::pi;

namespace {

const double sqrt_pi = std::sqrt(pi);
const double kernel_norm = 1.0 / (std::sqrt(2.0) * std::pow(pi, 0.75));

double captured_norm(const Wavefunction2D& psi) {
  const Eigen::VectorXd w1 = psi.x1_grid.weights();
  const Eigen::VectorXd w2 = psi.x2_grid.weights();
  return (w1.transpose() * psi.values.cwiseAbs2() * w2)(0, 0);
}

// Evaluates f(x1, x2) on the grid, rows in parallel.
template <typename Fn>
Wavefunction2D tabulate(const Grid2D& grid, Fn&& f) {
  grid.x1.validate();
  grid.x2.validate();
  Wavefunction2D out;
  out.x1_grid = grid.x1;
  out.x2_grid = grid.x2;
  out.values.resize(grid.x1.n, grid.x2.n);
  parallel_for(grid.x1.n, [&](int i) {
    const double x1 = grid.x1.at(i);
    for (int j = 0; j < grid.x2.n; ++j) out.values(i, j) = f(x1, grid.x2.at(j));
  });
  out.captured_norm = captured_norm(out);
  return out;
}

double wrap_phase(double d) {
  while (d > pi) d -= 2 * pi;
  while (d <= -pi) d += 2 * pi;
  return d;
}

// theta = result * exp(log_scale), with the dominant term's magnitude pulled
// into log_scale so callers can merge it with their own exponents.
cd theta_scaled(const ThetaSpec& spec, cd z, double& log_scale) {
  if (!(spec.tau.imag() > 0.0)) throw BadTau("theta needs Im(tau) > 0");
  // |term(n)| = exp(-pi Im(tau) (n+a)^2 - 2 pi (n+a) Im(z)), largest at n + a = -Im z / Im tau.
  const long long n0 = std::llround(-z.imag() / spec.tau.imag() - spec.a);
  const double m0 = static_cast<double>(n0) + spec.a;
  log_scale = -pi * spec.tau.imag() * m0 * m0 - 2.0 * pi * m0 * z.imag();
  const int width = spec.terms();
  cd sum = 0.0;
  for (long long n = n0 - width; n <= n0 + width; ++n) {
    const double m = static_cast<double>(n) + spec.a;
    const cd exponent = cd(0.0, pi) * m * m * spec.tau + cd(0.0, 2.0 * pi) * m * (z + spec.b);
    sum += std::exp(exponent - log_scale);
  }
  return sum;
}

}  // namespace

Grid2D Grid2D::square(double half_width, int n) {
  Grid1D g{-half_width, half_width, n};
  g.validate();
  return {g, g};
}

Grid2D Grid2D::standard() { return square(4.0 * sqrt_pi, 256); }

Grid2D Grid2D::shifted(double d1, double d2) const {
  Grid2D out = *this;
  out.x1.lo += d1;
  out.x1.hi += d1;
  out.x2.lo += d2;
  out.x2.hi += d2;
  return out;
}

cd kernel_k0(double x1, double x2, double x) {
  const double d = x - x1;
  return kernel_norm * std::exp(-d * d / 2.0) * std::polar(1.0, -x2 * x + x1 * x2 / 2.0);
}

Wavefunction2D lift_to_2d(const SampledWavefunction& psi, const Grid2D& grid, bool require_norm) {
  grid.x1.validate();
  grid.x2.validate();
  const Grid1D& g = psi.grid;
  const Eigen::VectorXd xs = g.points();
  const Eigen::VectorXd w = g.weights();

  // Psi = e^{i x1 x2 / 2} * (A B)(x1, x2) with
  // A(x1, X) = e^{-(X - x1)^2 / 2},  B(X, x2) = e^{-i x2 X} w(X) psi(X).
  Eigen::MatrixXd a(grid.x1.n, g.n);
  for (int i = 0; i < grid.x1.n; ++i) {
    const double x1 = grid.x1.at(i);
    a.row(i) = (-(xs.array() - x1).square() / 2.0).exp().matrix().transpose();
  }
  MatrixXc b(g.n, grid.x2.n);
  for (int j = 0; j < grid.x2.n; ++j) {
    const double x2 = grid.x2.at(j);
    for (int k = 0; k < g.n; ++k) {
      b(k, j) = std::polar(w(k), -x2 * xs(k)) * psi.values(k);
    }
  }
  Wavefunction2D out;
  out.x1_grid = grid.x1;
  out.x2_grid = grid.x2;
  out.values = a.cast<cd>() * b;
  for (int i = 0; i < grid.x1.n; ++i) {
    for (int j = 0; j < grid.x2.n; ++j) {
      out.values(i, j) *= kernel_norm * std::polar(1.0, grid.x1.at(i) * grid.x2.at(j) / 2.0);
    }
  }
  out.captured_norm = captured_norm(out);
  if (require_norm) {
    const double input = psi.values.cwiseAbs2().dot(w);
    if (std::abs(out.captured_norm - input) > 0.01 * input) {
      throw GridTooCoarse("lift captures norm " + std::to_string(out.captured_norm) +
                          " of " + std::to_string(input));
    }
  }
  return out;
}

Eigen::MatrixXd husimi(const SampledWavefunction& psi, const Grid2D& grid) {
  return lift_to_2d(psi, grid).values.cwiseAbs2();
}

int ThetaSpec::terms() const {
  if (n_terms > 0) return n_terms;
  // exp(-pi Im(tau) n^2) < 1e-16
  return static_cast<int>(std::ceil(std::sqrt(16.0 * std::log(10.0) / (pi * tau.imag())))) + 1;
}

cd theta(const ThetaSpec& spec, cd z) {
  double log_scale = 0.0;
  const cd sum = theta_scaled(spec, z, log_scale);
  return sum * std::exp(log_scale);
}

Wavefunction2D zak_wavefunction_2d(double k1, double k2, const Grid2D& grid) {
  ThetaSpec spec;
  spec.a = k2 / (2.0 * sqrt_pi);
  spec.b = -k1 / sqrt_pi;
  spec.tau = cd(0.0, 2.0);
  return tabulate(grid, [&](double x1, double x2) {
    const cd w(x1, -x2);
    double log_scale = 0.0;
    const cd t = theta_scaled(spec, cd(0.0, -1.0) * w / sqrt_pi, log_scale);
    return kernel_norm * std::exp(-x1 * w / 2.0 + log_scale) * t;
  });
}

Wavefunction2D confined_wavefunction_2d(int j, double delta, const Grid2D& grid) {
  if (j != 0 && j != 1) throw ValidationError("codeword index must be 0 or 1");
  if (!(delta > 0.0 && delta <= 0.5)) throw ValidationError("delta must lie in (0, 0.5]");
  const double d2 = delta * delta;
  const double s = 1.0 + d2 + d2 * d2;
  ThetaSpec spec;
  spec.a = j / 2.0;
  spec.tau = cd(0.0, 2.0 * (1.0 + d2) / s);
  const double prefactor = std::sqrt(2.0 * d2 / (pi * s));
  return tabulate(grid, [&](double x1, double x2) {
    const cd w(x1, -x2);
    double log_scale = 0.0;
    const cd t = theta_scaled(spec, cd(0.0, -1.0) * w / (sqrt_pi * s), log_scale);
    return prefactor * std::exp(d2 * w * w / (2.0 * s) - x1 * w / 2.0 + log_scale) * t;
  });
}

Wavefunction2D combine(cd a, const Wavefunction2D& first, cd b, const Wavefunction2D& second) {
  if (!(first.x1_grid == second.x1_grid) || !(first.x2_grid == second.x2_grid)) {
    throw GridMismatch("wavefunctions live on different grids");
  }
  Wavefunction2D out = first;
  out.values = a * first.values + b * second.values;
  out.captured_norm = captured_norm(out);
  return out;
}

double rotation_fourier_check(const Wavefunction2D& psi, int n) {
  const Grid1D& g = psi.x1_grid;
  if (!(g == psi.x2_grid) || std::abs(g.lo + g.hi) > 1e-12 * std::max(1.0, g.hi)) {
    throw NonSquareGrid("rotation check needs identical axes symmetric about zero");
  }
  const cd phase = std::pow(cd(0.0, 1.0), n);
  const int size = g.n;
  double worst = 0.0;
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      // Psi(x2, -x1): first argument x2 = g[j], second -x1 = g[size-1-i].
      const cd rotated = psi.values(j, size - 1 - i);
      worst = std::max(worst, std::abs(rotated - phase * psi.values(i, j)));
    }
  }
  const double scale = psi.values.cwiseAbs().maxCoeff();
  return scale > 0.0 ? worst / scale : worst;
}

ShiftRelation shift_relation(const Wavefunction2D& plus, const Wavefunction2D& minus_shifted) {
  if (plus.values.rows() != minus_shifted.values.rows() ||
      plus.values.cols() != minus_shifted.values.cols()) {
    throw GridMismatch("shift relation needs grids of equal shape");
  }
  MatrixXc mapped(plus.values.rows(), plus.values.cols());
  for (int i = 0; i < plus.x1_grid.n; ++i) {
    for (int j = 0; j < plus.x2_grid.n; ++j) {
      const double x1 = plus.x1_grid.at(i), x2 = plus.x2_grid.at(j);
      mapped(i, j) = minus_shifted.values(i, j) * std::polar(1.0, -sqrt_pi * (x1 - x2) / 2.0);
    }
  }
  ShiftRelation out;
  const cd overlap = (mapped.conjugate().array() * plus.values.array()).sum();
  out.constant = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cd(1.0, 0.0);
  const double scale = plus.values.cwiseAbs().maxCoeff();
  out.defect = (plus.values - out.constant * mapped).cwiseAbs().maxCoeff() / scale;
  return out;
}

int count_zeros(const Wavefunction2D& psi) {
  const MatrixXc& v = psi.values;
  int total = 0;
  for (Eigen::Index i = 0; i + 1 < v.rows(); ++i) {
    for (Eigen::Index j = 0; j + 1 < v.cols(); ++j) {
      const double p00 = std::arg(v(i, j)), p10 = std::arg(v(i + 1, j));
      const double p11 = std::arg(v(i + 1, j + 1)), p01 = std::arg(v(i, j + 1));
      const double winding = wrap_phase(p10 - p00) + wrap_phase(p11 - p10) +
                             wrap_phase(p01 - p11) + wrap_phase(p00 - p01);
      total += static_cast<int>(std::lround(winding / (2.0 * pi)));
    }
  }
  return total;
}

}  // namespace gkp
