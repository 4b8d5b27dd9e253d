#pragma once

// Lifts of lowest-Landau-level wavefunctions psi(X) to the plane,
//   Psi(x1, x2) = integral dX K0(x1, x2; X) psi(X),
// in the symmetric gauge and magnetic units, plus closed forms through
// generalized theta functions.

#include <complex>

#include "gkp/states.hpp"

namespace gkp {

/// Samples on x1_grid x x2_grid; values(i, j) = Psi(x1_i, x2_j).
struct Wavefunction2D {
  Grid1D x1_grid;
  Grid1D x2_grid;
  MatrixXc values;
  /// Trapezoid integral of |Psi|^2 over the window.
  double captured_norm = 0.0;
};

/// Square window [-half_width, half_width]^2 with n points per axis.
/// Default: [-4 sqrt(pi), 4 sqrt(pi)]^2, 256^2 points.
struct Grid2D {
  Grid1D x1;
  Grid1D x2;

  static Grid2D square(double half_width, int n);
  static Grid2D standard();
  /// The same window moved by (d1, d2).
  Grid2D shifted(double d1, double d2) const;
};

/// (1 / (sqrt2 pi^{3/4})) exp(-(X - x1)^2 / 2) exp(-i x2 X) exp(i x1 x2 / 2).
std::complex<double> kernel_k0(double x1, double x2, double x);

/// Trapezoid quadrature of the lift. With require_norm set, throws
/// GridTooCoarse when the captured norm differs from the input norm by
/// more than 1%.
Wavefunction2D lift_to_2d(const SampledWavefunction& psi, const Grid2D& grid,
                          bool require_norm = false);

/// |Psi|^2 of the lift: the Husimi Q function of psi.
Eigen::MatrixXd husimi(const SampledWavefunction& psi, const Grid2D& grid);

/// theta[a; b](z, tau) = sum_n exp(i pi (n + a)^2 tau) exp(i 2 pi (n + a)(z + b)).
struct ThetaSpec {
  double a = 0.0;
  double b = 0.0;
  std::complex<double> tau{0.0, 1.0};
  /// Terms kept on each side of the dominant index; 0 derives it from Im(tau)
  /// so that dropped terms are below 1e-16 of the largest.
  int n_terms = 0;

  int terms() const;
};

/// Throws BadTau when Im(tau) <= 0. The sum is centred on the dominant term,
/// so large Im(z) does not cost accuracy.
std::complex<double> theta(const ThetaSpec& spec, std::complex<double> z);

/// Lift of the ideal comb exp(-i k1 X) sum_n delta(X - 2 sqrt(pi) n - k2) at
/// flux 1/2, in closed form.
Wavefunction2D zak_wavefunction_2d(double k1, double k2, const Grid2D& grid);

/// Closed-form lift of the approximate codeword psi_j with squeezing delta in
/// (0, 0.5], taken with the fixed prefactor sqrt(2)/pi^{1/4}; that prefactor
/// is unit norm up to O(exp(-pi/(4 delta^2))).
Wavefunction2D confined_wavefunction_2d(int j, double delta, const Grid2D& grid);

/// a * A + b * B on the same grid.
Wavefunction2D combine(std::complex<double> a, const Wavefunction2D& first,
                       std::complex<double> b, const Wavefunction2D& second);

/// max |Psi(x2, -x1) - i^n Psi(x1, x2)| / max |Psi| over the grid. Needs a
/// square grid symmetric about the origin (NonSquareGrid otherwise).
double rotation_fourier_check(const Wavefunction2D& psi, int n);

/// Compares Psi_plus(x1, x2) with Psi_minus(x1 + sqrt(pi), x2 + sqrt(pi))
/// exp(-i sqrt(pi) (x1 - x2) / 2) c for the best constant c of unit modulus.
/// `minus_shifted` must be sampled on plus's grid shifted by (sqrt(pi), sqrt(pi)).
struct ShiftRelation {
  double defect = 0.0;             ///< max relative deviation
  std::complex<double> constant;  ///< fitted c
};
ShiftRelation shift_relation(const Wavefunction2D& plus, const Wavefunction2D& minus_shifted);

/// Number of phase vortices (net winding +-1 around a grid plaquette) in the
/// window, each counted with its sign.
int count_zeros(const Wavefunction2D& psi);

}  // namespace gkp
