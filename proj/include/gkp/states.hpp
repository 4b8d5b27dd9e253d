#pragma once

// Approximate GKP codewords on a 1-D grid, the Hadamard-eigenstate pair,
// Fourier transform and fidelities against Fock-basis eigenvectors.
//
// All integrals use the trapezoid rule on a uniform grid.

#include <utility>

#include "gkp/operators.hpp"

namespace gkp {

/// n uniform points from lo to hi inclusive.
struct Grid1D {
  double lo = -24.0;
  double hi = 24.0;
  int n = 4096;

  double dx() const { return (hi - lo) / (n - 1); }
  double at(int i) const { return lo + i * dx(); }
  Eigen::VectorXd points() const { return Eigen::VectorXd::LinSpaced(n, lo, hi); }
  /// Trapezoid weights.
  Eigen::VectorXd weights() const;
  void validate() const;

  friend bool operator==(const Grid1D&, const Grid1D&) = default;
};

struct SampledWavefunction {
  Grid1D grid;
  VectorXc values;
  /// |integral |psi|^2 dx - 1| as computed by the producer.
  double norm_defect = 0.0;
};

struct GridStateParams {
  double delta = 0.25;
  /// Comb terms on each side of n = 0; 0 picks ceil(3/(sqrt(pi) delta^2)) + 2.
  int n_peaks = 0;

  int peaks() const;
  void validate() const;
};

/// <a|b> by the trapezoid rule. Throws GridMismatch on different grids.
std::complex<double> inner_product(const SampledWavefunction& a, const SampledWavefunction& b);

/// Unit trapezoid norm, largest-magnitude sample real positive.
SampledWavefunction normalized(SampledWavefunction psi);

/// psi_j(X) ~ exp(-X^2 delta^2 / 2) sum_n exp(-(X - 2 sqrt(pi) n - j sqrt(pi))^2 / (2 delta^2)),
/// j in {0, 1}. Throws GridTooNarrow unless the grid spans [-4/delta, 4/delta].
SampledWavefunction approx_grid_state(int j, const GridStateParams& params,
                                      const Grid1D& grid = {});

/// (cos(pi/8) psi0 + sin(pi/8) psi1, -sin(pi/8) psi0 + cos(pi/8) psi1), renormalized.
std::pair<SampledWavefunction, SampledWavefunction> hadamard_pair(
    const SampledWavefunction& psi0, const SampledWavefunction& psi1);

/// (2 pi)^{-1/2} integral psi(X) exp(-i X P) dX by direct quadrature, sampled
/// on the same (symmetric) grid. norm_defect holds the Parseval defect.
SampledWavefunction fourier_1d(const SampledWavefunction& psi);

/// sum_m c_m psi_m(X) with the Hermite functions psi_m.
SampledWavefunction sample_fock_state(const VectorXc& coefficients, const Grid1D& grid = {});

/// <m|psi> for m = 0..m_max by quadrature.
VectorXc fock_coefficients(const SampledWavefunction& psi, int m_max);

/// |<a|b>|^2 / (<a|a><b|b>).
double fidelity(const SampledWavefunction& a, const SampledWavefunction& b);
double fidelity(const VectorXc& a, const VectorXc& b);
/// Fock vector against a sampled state; the vector is rendered on b's grid.
double fidelity(const VectorXc& a, const SampledWavefunction& b);

/// Gaussian exp(-(X - center)^2 / (2 width^2)) fitted to log|psi|.
struct GaussianFit {
  double center = 0.0;
  double width = 0.0;
  double amplitude = 0.0;
};

/// Fit to the samples of the peak nearest X = 0 with |psi| above half its
/// maximum.
GaussianFit fit_central_peak(const SampledWavefunction& psi);

/// Fit to the local maxima of |psi| (the envelope of a comb).
GaussianFit fit_envelope(const SampledWavefunction& psi);

}  // namespace gkp
