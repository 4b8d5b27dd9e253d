#pragma once

// Units, parameter containers and the circuit <-> electron parameter mapping.
//
// Inside the library hbar = 1, energies are measured in units of hbar*omega_c
// and lengths in units of the magnetic length l_B. SI values only appear in
// CircuitParams and DerivedQuantities.

#include <numbers>
#include <optional>

#include "gkp/errors.hpp"

namespace gkp {

namespace si {
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double planck = 6.62607015e-34;              // J s
inline constexpr double hbar = planck / (2.0 * std::numbers::pi);
/// Superconducting flux quantum h/2e.
inline constexpr double flux_quantum_sc = planck / (2.0 * elementary_charge);
/// Superconducting conductance quantum (2e)^2/h.
inline constexpr double conductance_quantum_sc =
    4.0 * elementary_charge * elementary_charge / planck;
/// The gyration conductance 2e^2/h that puts the circuit at flux 1/2.
inline constexpr double gkp_gyration_conductance =
    2.0 * elementary_charge * elementary_charge / planck;
}  // namespace si

/// Magnetic flux per lattice cell in units of the flux quantum, p/q in
/// lowest terms.
class FluxRatio {
 public:
  FluxRatio(int p, int q);

  int p() const { return p_; }
  int q() const { return q_; }
  double value() const { return static_cast<double>(p_) / q_; }
  double inverse() const { return static_cast<double>(q_) / p_; }

  /// Lattice constant L0 / l_B = sqrt(2 pi p / q).
  double lattice_constant() const;
  /// |alpha| of the ladder-operator displacements, sqrt(pi q / p).
  double displacement_length() const;

  friend bool operator==(const FluxRatio&, const FluxRatio&) = default;

 private:
  int p_;
  int q_;
};

/// Continued-fraction approximation of `x` by p/q with q <= max_denominator.
/// Throws NonRationalFlux unless |x - p/q| <= tolerance * max(1, |x|).
FluxRatio rational_approximation(double x, int max_denominator = 64,
                                 double tolerance = 1e-9);

struct ModelParams {
  FluxRatio flux{1, 2};
  double v_over_hwc = 0.25;  ///< V / hbar omega_c
  double hw0_over_v = 0.0;   ///< hbar omega_0 / V; zero disables confinement

  void validate() const;
};

struct ExternalFluxes {
  double phi1 = 0.0;   ///< junction/inductor loop, port 1 (rad)
  double phi2 = 0.0;   ///< junction/inductor loop, port 2 (rad)
  double phi_g1 = 0.0; ///< gyrator loop, port 1 (rad)
  double phi_g2 = 0.0; ///< gyrator loop, port 2 (rad)
};

struct CircuitParams {
  double capacitance = 0.0;               ///< F
  std::optional<double> inductance;       ///< H
  double josephson_energy = 0.0;          ///< J
  double gyration_conductance = 0.0;      ///< S
  ExternalFluxes ext;

  void validate() const;
};

struct DerivedQuantities {
  double omega_c = 0.0;               ///< G / C, rad/s
  std::optional<double> omega_lc;     ///< 1 / sqrt(LC), rad/s
  double e_c = 0.0;                   ///< e^2 / 2C, J
  std::optional<double> e_l;          ///< Phi_0s^2 / (4 pi^2 L), J
  FluxRatio flux{1, 2};
  double v0_over_v = 0.0;             ///< exp(-pi q / 2p)
  std::optional<double> delta;        ///< squeezing parameter
};

struct CircuitMapping {
  DerivedQuantities derived;
  ModelParams model;
};

CircuitMapping map_circuit_to_model(const CircuitParams& params);

/// V0 / hbar omega_c = (V / hbar omega_c) exp(-pi q / 2p).
double v0(const ModelParams& model);

/// hbar omega_0^2 / (omega_c V0), the confinement in units of V0.
double confinement_over_v0(const ModelParams& model);

/// hbar omega_0^2 / (omega_c * hbar omega_c) = (omega_0 / omega_c)^2.
double confinement_over_hwc(const ModelParams& model);

/// Delta = (hbar omega_0^2 / (4 pi omega_c V0))^(1/4).
double squeeze_delta(const ModelParams& model);

/// Delta from the ratio r = hbar omega_0^2 / (omega_c V0).
double squeeze_delta_from_ratio(double confinement_over_v0);

/// Inverse of squeeze_delta_from_ratio: r = 4 pi Delta^4.
double confinement_ratio_from_delta(double delta);

/// Model with the given flux and V/hbar omega_c whose confinement in units
/// of V0 equals `confinement_over_v0`.
ModelParams model_from_confinement_ratio(const FluxRatio& flux, double v_over_hwc,
                                         double confinement_over_v0);

}  // namespace gkp
