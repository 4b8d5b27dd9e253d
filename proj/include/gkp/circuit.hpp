#pragma once

// Circuit-level Hamiltonians with external fluxes, flux sweeps, noise-operator
// matrix elements and the current-source logical gate.
//
// Flux convention: the reduced flux phi_i^ext shifts the Josephson cosine on
// port i, cos(phi_i - phi_i^ext), and the gyrator-loop flux phi_Gi^ext enters
// the same cosine as cos(phi_i + phi_Gi^ext). In the electron picture both are
// phases on exp(i 2 pi x_i / L0).

#include <optional>
#include <string>
#include <vector>

#include "gkp/spectra.hpp"

namespace gkp {

/// Fock truncations of the two modes (Landau level index n, guiding center m).
struct Truncation {
  int n_max = 16;
  int m_max = 40;
};

/// Circuit with E_J = ej_over_ec E_C and E_L = el_over_ec E_C, E_C = e^2/2C,
/// at the gyration conductance that puts the model at flux 1/2.
CircuitParams circuit_from_energy_ratios(double ej_over_ec, double el_over_ec,
                                         double capacitance = 1.434e-15);

/// The confined two-mode Hamiltonian of the circuit in units of hbar omega_c,
/// external fluxes included. Blocked over (m - n) mod 4 when every flux is
/// zero. Throws MissingInductance without an inductance.
BlockHamiltonian flux_biased_blocks(const CircuitParams& circ, const Truncation& trunc = {});
HermitianMatrix flux_biased_hamiltonian(const CircuitParams& circ, const Truncation& trunc = {});

enum class FluxAxis { phi1, phi2, phi_g1, phi_g2 };

/// "phi1", "phi2", "phi_g1", "phi_g2"; ValidationError otherwise.
FluxAxis parse_flux_axis(const std::string& name);
std::string to_string(FluxAxis axis);

/// circ with the flux on `axis` replaced by `value` (rad).
CircuitParams with_flux(CircuitParams circ, FluxAxis axis, double value);

/// Lowest `levels` energies (hbar omega_c) against the flux on `axis`.
SweepResult flux_sweep(const CircuitParams& circ, FluxAxis axis, const std::vector<double>& grid,
                       int levels, const Truncation& trunc = {});

/// Central-difference slopes dE_i/dphi at `points`, each divided by the
/// spread of level i over `sweep`.
struct SweetSpotReport {
  std::vector<double> points;
  /// slopes[p][i] for point p and level i.
  std::vector<std::vector<double>> slopes;
  double worst = 0.0;
};
SweetSpotReport sweet_spot_check(const CircuitParams& circ, FluxAxis axis,
                                 const SweepResult& sweep, const std::vector<double>& points,
                                 const Truncation& trunc = {}, double step = 1e-3);

/// max_i |E_i(phi + 2 pi) - E_i(phi)| over `points`.
double flux_periodicity_defect(const CircuitParams& circ, FluxAxis axis,
                               const std::vector<double>& points, int levels,
                               const Truncation& trunc = {});

/// Spectrum shift when static charges q1, q2 (C) are added to the port
/// charges, pi -> pi + Q_g. The offset shifts the cyclotron ladder operator,
/// a -> a + (q1 + i q2) / sqrt(2 C hbar omega_c), and is a unitary change of
/// frame in the untruncated model.
double charge_offset_shift(const CircuitParams& circ, double q1, double q2, int levels,
                           const Truncation& trunc = {});

/// |<psi_H-| P O P |psi_H+>| for the noise operators O, with P the projector
/// on the lowest Landau level (n = 0) and psi_H+ / psi_H- the lowest states
/// in sectors 0 and 2. The control pairs psi_H+ with the lowest state of the
/// odd sector 1 instead.
struct NoiseReport {
  std::string label;
  double magnitude = 0.0;
  double control = 0.0;
  bool vanishes = false;  ///< magnitude < 1e-8
};

/// Needs zero external fluxes (ValidationError otherwise).
std::vector<NoiseReport> noise_matrix_elements(const CircuitParams& circ,
                                               const Truncation& trunc = {});

/// Energy-ordered positions of psi_H+ and psi_H- among the lowest levels at
/// zero flux, {-1, -1} when absent from the lowest `levels`.
std::pair<int, int> hadamard_level_positions(const CircuitParams& circ, int levels,
                                             const Truncation& trunc = {});

/// hbar pi / (I1 Phi_0s), seconds. Throws ZeroCurrent unless I1 > 0.
double gate_time_z(double current);

/// Piecewise-constant current on one port of the gyrator.
struct DriveSegment {
  double current = 0.0;   ///< A
  double duration = 0.0;  ///< s
};

struct DriveProtocol {
  std::vector<DriveSegment> segments;
  int port = 1;

  /// Constant current I1 for `repeats` gate times.
  static DriveProtocol z_gate(double current, int repeats = 1, int port = 1);
  double duration() const;
  void validate() const;
};

struct GateOptions {
  int m_max = 200;
  /// Keep the confinement r b^dag b, r = 4 pi delta^4 (in V0); otherwise the
  /// bare lowest-Landau-level Hamiltonian.
  bool confined = false;
  /// Initial logical amplitudes on (psi_0, psi_1).
  std::complex<double> c0{1.0, 0.0};
  std::complex<double> c1{0.0, 0.0};
  /// Replaces the codeword superposition when set (m_max + 1 Fock amplitudes).
  std::optional<VectorXc> initial;
};

struct GateResult {
  VectorXc initial;
  VectorXc final_state;
  /// |<psi_in| (L^k)^dag U |psi_in>|^2, k the elapsed gate periods rounded,
  /// with L = exp(i sqrt(pi) X) on port 1 and exp(i sqrt(pi) P) on port 2.
  double fidelity = 0.0;
  /// |<psi_in| U |psi_in>|^2.
  double return_fidelity = 0.0;
  /// Weight of U psi_in on span{psi_0, psi_1}.
  double code_space_weight = 0.0;
  /// Overlap of the normalized code-space part of U psi_in with the logical
  /// target (Z or X applied once per elapsed gate time).
  double logical_fidelity = 0.0;
  /// Elapsed time in gate times.
  double gate_periods = 0.0;
  double max_norm_defect = 0.0;
  /// Largest weight on the top tenth of the Fock levels during the run.
  double edge_weight = 0.0;
  bool truncation_warning = false;
};

/// Evolves the approximate codeword superposition under
///   H / V0 = H_GKP / V0 - (I Phi_0s / (sqrt(pi) V0)) X
/// (P on port 2) with exact per-segment exponentials from eigendecompositions.
GateResult simulate_z_gate(double v0_joules, double delta, const DriveProtocol& protocol,
                           const GateOptions& options = {});

}  // namespace gkp
