#pragma once

// Hamiltonians of the electron-in-a-crystal model in truncated bases,
// dense eigensolves and the parameter sweeps built on top of them.
//
// Energies are in units of hbar*omega_c unless a function says V0.

#include <map>
#include <string>
#include <vector>

#include "gkp/core.hpp"
#include "gkp/operators.hpp"

namespace gkp {

/// Lowest eigenpairs, values ascending, vectors as orthonormal columns.
struct EigenSolution {
  Eigen::VectorXd values;
  MatrixXc vectors;
  BasisTag basis;
  /// Symmetry sector of each pair; empty when the solve was not blocked.
  std::vector<int> sectors;
  /// max_i ||H v_i - lambda_i v_i|| / ||H||.
  double max_residual = 0.0;
  /// max_ij |<v_i|v_j> - delta_ij|.
  double orthonormality_defect = 0.0;
};

/// Dense self-adjoint solve. count <= 0 keeps every pair.
/// Throws NonHermitianInput when the Hermiticity check fails.
EigenSolution eigensolve(const HermitianMatrix& h, int count = 0);

/// A Hamiltonian that is block diagonal over symmetry sectors. Block s acts
/// on the basis indices `indices[s]`, written in the rephased basis
/// gauge[i] |i>, in which the C4-symmetric builders below are real.
struct BlockHamiltonian {
  BasisTag basis;
  std::vector<std::vector<int>> indices;
  std::vector<MatrixXc> blocks;
  VectorXc gauge;
  double truncation_defect = 0.0;
  bool truncation_warning = false;

  int dim() const { return basis.dim(); }
  /// Dense matrix in the original (un-rephased) basis.
  HermitianMatrix assemble() const;
};

/// Solves every block and merges the `count` lowest pairs (all if <= 0).
/// Vectors are returned in the original basis and each carries its sector,
/// which fixes the basis inside degenerate pairs from different sectors.
EigenSolution eigensolve(const BlockHamiltonian& h, int count = 0);

/// -(v0/2)[T1(qL0/p) + T2(qL0/p) + h.c.] on the p Bloch states |k, l>.
HermitianMatrix harper_hamiltonian(const FluxRatio& flux, double k1, double k2, double v0);

/// (a^dag a + 1/2) - (V/2)[D_a(i lambda) T1 + D_a(-lambda) T2 + h.c.] on
/// |n; k, l>, n <= n_max. Requires an unconfined model.
HermitianMatrix crystal_hamiltonian(const ModelParams& model, double k1, double k2, int n_max);

/// Extra phases on the two cosine terms: exp(i 2 pi x_j / L0) is replaced by
/// exp(-i phase_j) exp(i 2 pi x_j / L0). Both zero keeps the C4 symmetry.
struct CosinePhases {
  double x1 = 0.0;
  double x2 = 0.0;

  bool trivial() const { return x1 == 0.0 && x2 == 0.0; }
};

/// a^dag a + kappa (a^dag a + b^dag b + ab + a^dag b^dag)
///   - (V/2)[D_a(lambda) D_b(-lambda) + D_a(i lambda) D_b(i lambda) + h.c.]
/// on |n, m>, kappa = (omega_0 / omega_c)^2. Blocks are the four values of
/// (m - n) mod 4 when the phases are trivial, one block otherwise; that block
/// is real when only the x1 phase is set.
BlockHamiltonian confined_blocks(const ModelParams& model, int n_max, int m_max,
                                 CosinePhases phases = {});
HermitianMatrix confined_hamiltonian(const ModelParams& model, int n_max, int m_max);

/// kappa b^dag b - (V0/2)[D_b(i lambda) + D_b(-i lambda) + D_b(lambda) + D_b(-lambda)],
/// the lowest-Landau-level projection, blocked over m mod 4.
BlockHamiltonian lll_confined_blocks(const ModelParams& model, int m_max);
HermitianMatrix lll_confined_hamiltonian(const ModelParams& model, int m_max);

/// The same operator divided by V0:
///   r b^dag b - (1/2)[D_b(i lambda) + D_b(-i lambda) + D_b(lambda) + D_b(-lambda)],
/// with r = hbar omega_0^2 / (omega_c V0) (zero allowed).
BlockHamiltonian lll_grid_blocks(double confinement_over_v0, int m_max,
                                 const FluxRatio& flux = FluxRatio(1, 2));

/// Weight of a FockProduct state on the n = 0 stratum.
double lll_weight(const VectorXc& state, const BasisTag& basis);

struct SweepResult {
  std::string axis;
  std::vector<double> grid;
  /// energies[i]: ascending levels at grid[i].
  std::vector<std::vector<double>> energies;
  /// sectors[i][j]: symmetry sector of energies[i][j]; empty if unused.
  std::vector<std::vector<int>> sectors;
  std::map<std::string, double> metadata;
};

/// Coprime p/q with p, q <= max_denominator and 0 < q/p <= max_inverse,
/// ordered by q/p.
std::vector<FluxRatio> farey_fluxes(int max_denominator, double max_inverse = 4.0);

/// n1 x n2 points k_i = j * span_i / n_i, j = 0..n_i-1, over the magnetic
/// Brillouin zone [0, 2pi/qL0) x [0, 2pi/L0); the upper edges are excluded.
struct KGrid {
  int n1 = 32;
  int n2 = 32;
};

std::vector<std::pair<double, double>> k_points(const FluxRatio& flux, const KGrid& grid);

/// Harper spectra over the k-grid for each flux; axis q/p. With v0 = 1 the
/// energies are in units of V0.
SweepResult butterfly(const std::vector<FluxRatio>& fluxes, const KGrid& grid, double v0 = 1.0);

/// Lowest `levels` crystal bands per k-point, union over the k-grid, for
/// each flux; axis q/p, units hbar omega_c.
SweepResult crystal_bands(double v_over_hwc, const std::vector<FluxRatio>& fluxes,
                          const KGrid& grid, int n_max, int levels);

/// Lowest `levels` eigenvalues of the confined Hamiltonian against
/// hbar omega_0 / V; sectors recorded.
SweepResult confined_sweep(double v_over_hwc, const std::vector<double>& hw0_over_v,
                           const FluxRatio& flux, int n_max, int m_max, int levels);

/// log(E1 - E0) = log_prefactor - alpha * V / (hbar omega_0), least squares.
struct GapFit {
  double alpha = 0.0;
  double log_prefactor = 0.0;
  double r_squared = 0.0;
  std::vector<double> inverse_confinement;  ///< V / hbar omega_0
  std::vector<double> log_gap;
};

/// Fits the two lowest levels of a confined_sweep. Grid points whose gap is
/// not positive are skipped.
GapFit fit_gap_law(const SweepResult& sweep);

/// Adjacent grid points between which levels `level` and `level + 1`
/// exchange their symmetry sectors.
struct LevelCrossing {
  int level = 0;
  double lower = 0.0;  ///< grid value before the crossing
  double upper = 0.0;  ///< grid value after the crossing
};
std::vector<LevelCrossing> find_crossings(const SweepResult& sweep, int level);

/// Eigenvalue shift of the lowest `levels` confined levels when both
/// truncations are doubled.
struct ConvergenceReport {
  int n_max = 0;
  int m_max = 0;
  std::vector<double> values;
  std::vector<double> doubled;
  double max_shift = 0.0;
};
ConvergenceReport confined_convergence(const ModelParams& model, int n_max, int m_max,
                                       int levels);

}  // namespace gkp
