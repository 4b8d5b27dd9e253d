#include "gkp/states.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace gkp {

using cd = std::complex<double>;
using std::numbers::pi;

namespace {

const double sqrt_pi = std::sqrt(pi);

void require_same_grid(const SampledWavefunction& a, const SampledWavefunction& b) {
  if (!(a.grid == b.grid) || a.values.size() != b.values.size()) {
    throw GridMismatch("wavefunctions live on different grids");
  }
}

// Least-squares fit of log|psi| = c0 + c1 x + c2 x^2.
GaussianFit fit_log_quadratic(const std::vector<double>& x, const std::vector<double>& log_abs) {
  const int n = static_cast<int>(x.size());
  if (n < 3) throw ConvergenceError("Gaussian fit needs at least three samples");
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = x[i];
    a(i, 2) = x[i] * x[i];
    y(i) = log_abs[i];
  }
  const Eigen::Vector3d c = a.colPivHouseholderQr().solve(y);
  if (!(c(2) < 0.0)) throw ConvergenceError("log|psi| is not concave on the fitted samples");
  GaussianFit fit;
  fit.width = std::sqrt(-1.0 / (2.0 * c(2)));
  fit.center = -c(1) / (2.0 * c(2));
  fit.amplitude = std::exp(c(0) - c(1) * c(1) / (4.0 * c(2)));
  return fit;
}

}  // namespace

Eigen::VectorXd Grid1D::weights() const {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, dx());
  w(0) *= 0.5;
  w(n - 1) *= 0.5;
  return w;
}

void Grid1D::validate() const {
  if (n < 2) throw EmptyGrid("grid needs at least two points");
  if (!(hi > lo)) throw ValidationError("grid needs hi > lo");
}

int GridStateParams::peaks() const {
  if (n_peaks > 0) return n_peaks;
  return static_cast<int>(std::ceil(3.0 / (sqrt_pi * delta * delta))) + 2;
}

void GridStateParams::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  if (n_peaks < 0) throw ValidationError("n_peaks must be non-negative");
}

cd inner_product(const SampledWavefunction& a, const SampledWavefunction& b) {
  require_same_grid(a, b);
  const Eigen::VectorXd w = a.grid.weights();
  return (a.values.conjugate().array() * b.values.array() * w.array().cast<cd>()).sum();
}

SampledWavefunction normalized(SampledWavefunction psi) {
  const double norm2 = inner_product(psi, psi).real();
  if (!(norm2 > 0.0)) throw ValidationError("cannot normalize a zero wavefunction");
  Eigen::Index peak = 0;
  psi.values.cwiseAbs().maxCoeff(&peak);
  const cd phase = std::conj(psi.values(peak)) / std::abs(psi.values(peak));
  psi.values *= phase / std::sqrt(norm2);
  psi.norm_defect = std::abs(inner_product(psi, psi).real() - 1.0);
  return psi;
}

SampledWavefunction approx_grid_state(int j, const GridStateParams& params, const Grid1D& grid) {
  if (j != 0 && j != 1) throw ValidationError("codeword index must be 0 or 1");
  params.validate();
  grid.validate();
  const double delta = params.delta;
  if (grid.lo > -4.0 / delta || grid.hi < 4.0 / delta) {
    throw GridTooNarrow("grid must span [-4/delta, 4/delta]");
  }
  const int peaks = params.peaks();
  SampledWavefunction psi;
  psi.grid = grid;
  psi.values.resize(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.at(i);
    double comb = 0.0;
    for (int n = -peaks; n <= peaks; ++n) {
      const double d = x - 2.0 * sqrt_pi * n - j * sqrt_pi;
      comb += std::exp(-d * d / (2.0 * delta * delta));
    }
    psi.values(i) = std::exp(-x * x * delta * delta / 2.0) * comb;
  }
  return normalized(std::move(psi));
}

std::pair<SampledWavefunction, SampledWavefunction> hadamard_pair(
    const SampledWavefunction& psi0, const SampledWavefunction& psi1) {
  require_same_grid(psi0, psi1);
  const double c = std::cos(pi / 8), s = std::sin(pi / 8);
  SampledWavefunction plus = psi0, minus = psi0;
  plus.values = c * psi0.values + s * psi1.values;
  minus.values = -s * psi0.values + c * psi1.values;
  return {normalized(std::move(plus)), normalized(std::move(minus))};
}

SampledWavefunction fourier_1d(const SampledWavefunction& psi) {
  const Grid1D& g = psi.grid;
  g.validate();
  if (std::abs(g.lo + g.hi) > 1e-12 * std::max(1.0, g.hi)) {
    throw ValidationError("fourier_1d needs a grid symmetric about zero");
  }
  const Eigen::VectorXd w = g.weights();
  VectorXc weighted(g.n);
  for (int j = 0; j < g.n; ++j) weighted(j) = w(j) * psi.values(j);

  SampledWavefunction out;
  out.grid = g;
  out.values.resize(g.n);
  const double norm = 1.0 / std::sqrt(2.0 * pi);
  for (int k = 0; k < g.n; ++k) {
    const double p = g.at(k);
    const cd step = std::polar(1.0, -g.dx() * p);
    cd phase = std::polar(1.0, -g.lo * p);
    cd sum = 0.0;
    for (int j = 0; j < g.n; ++j) {
      sum += weighted(j) * phase;
      phase *= step;
    }
    out.values(k) = norm * sum;
  }
  out.norm_defect =
      std::abs(inner_product(out, out).real() - inner_product(psi, psi).real());
  return out;
}

SampledWavefunction sample_fock_state(const VectorXc& coefficients, const Grid1D& grid) {
  grid.validate();
  const int m_max = static_cast<int>(coefficients.size()) - 1;
  if (m_max < 0) throw ValidationError("empty Fock vector");
  SampledWavefunction psi;
  psi.grid = grid;
  psi.values.resize(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    const auto h = hermite_functions(std::max(m_max, 1), grid.at(i));
    cd sum = 0.0;
    for (int m = 0; m <= m_max; ++m) sum += coefficients(m) * h[m];
    psi.values(i) = sum;
  }
  psi.norm_defect = std::abs(inner_product(psi, psi).real() - coefficients.squaredNorm());
  return psi;
}

VectorXc fock_coefficients(const SampledWavefunction& psi, int m_max) {
  if (m_max < 0) throw ValidationError("m_max must be non-negative");
  const Eigen::VectorXd w = psi.grid.weights();
  VectorXc out = VectorXc::Zero(m_max + 1);
  for (int i = 0; i < psi.grid.n; ++i) {
    const auto h = hermite_functions(std::max(m_max, 1), psi.grid.at(i));
    for (int m = 0; m <= m_max; ++m) out(m) += w(i) * h[m] * psi.values(i);
  }
  return out;
}

double fidelity(const SampledWavefunction& a, const SampledWavefunction& b) {
  const double aa = inner_product(a, a).real(), bb = inner_product(b, b).real();
  return std::norm(inner_product(a, b)) / (aa * bb);
}

double fidelity(const VectorXc& a, const VectorXc& b) {
  if (a.size() != b.size()) throw GridMismatch("Fock vectors of different length");
  return std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm());
}

double fidelity(const VectorXc& a, const SampledWavefunction& b) {
  return fidelity(sample_fock_state(a, b.grid), b);
}

GaussianFit fit_central_peak(const SampledWavefunction& psi) {
  const Grid1D& g = psi.grid;
  const Eigen::VectorXd mag = psi.values.cwiseAbs();
  // Local maximum nearest X = 0.
  int best = -1;
  for (int i = 1; i + 1 < g.n; ++i) {
    if (mag(i) >= mag(i - 1) && mag(i) >= mag(i + 1) && mag(i) > 1e-3 * mag.maxCoeff()) {
      if (best < 0 || std::abs(g.at(i)) < std::abs(g.at(best))) best = i;
    }
  }
  if (best < 0) throw ConvergenceError("no peak found");
  std::vector<double> x, y;
  const double half = 0.5 * mag(best);
  int lo = best, hi = best;
  while (lo > 0 && mag(lo - 1) > half) --lo;
  while (hi + 1 < g.n && mag(hi + 1) > half) ++hi;
  for (int i = lo; i <= hi; ++i) {
    x.push_back(g.at(i));
    y.push_back(std::log(mag(i)));
  }
  return fit_log_quadratic(x, y);
}

GaussianFit fit_envelope(const SampledWavefunction& psi) {
  const Grid1D& g = psi.grid;
  const Eigen::VectorXd mag = psi.values.cwiseAbs();
  const double floor = 1e-8 * mag.maxCoeff();
  std::vector<double> x, y;
  for (int i = 1; i + 1 < g.n; ++i) {
    if (mag(i) > floor && mag(i) >= mag(i - 1) && mag(i) > mag(i + 1)) {
      x.push_back(g.at(i));
      y.push_back(std::log(mag(i)));
    }
  }
  return fit_log_quadratic(x, y);
}

}  // namespace gkp
