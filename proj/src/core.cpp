#include "gkp/core.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace gkp {

using std::numbers::pi;

FluxRatio::FluxRatio(int p, int q) : p_(p), q_(q) {
  if (p < 1 || q < 1) {
    throw ValidationError("flux ratio needs p >= 1 and q >= 1, got " +
                          std::to_string(p) + "/" + std::to_string(q));
  }
  if (std::gcd(p, q) != 1) {
    throw ValidationError("flux ratio " + std::to_string(p) + "/" +
                          std::to_string(q) + " is not in lowest terms");
  }
}

double FluxRatio::lattice_constant() const { return std::sqrt(2.0 * pi * value()); }

double FluxRatio::displacement_length() const { return std::sqrt(pi * inverse()); }

FluxRatio rational_approximation(double x, int max_denominator, double tolerance) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw NonRationalFlux("flux ratio must be positive and finite");
  }
  // Convergents h_k / k_k of the continued fraction of x.
  long long h_prev = 1, h = static_cast<long long>(std::floor(x));
  long long k_prev = 0, k = 1;
  double rest = x - std::floor(x);
  long long best_p = h, best_q = k;
  for (int iter = 0; iter < 64 && rest > 1e-15; ++iter) {
    const double inv = 1.0 / rest;
    const auto a = static_cast<long long>(std::floor(inv));
    rest = inv - static_cast<double>(a);
    const long long h_next = a * h + h_prev;
    const long long k_next = a * k + k_prev;
    if (k_next > max_denominator) break;
    h_prev = h;
    k_prev = k;
    h = h_next;
    k = k_next;
    best_p = h;
    best_q = k;
    if (std::abs(x - static_cast<double>(h) / static_cast<double>(k)) <=
        tolerance * std::max(1.0, std::abs(x)))
      break;
  }
  const double err = std::abs(x - static_cast<double>(best_p) / static_cast<double>(best_q));
  if (best_p < 1 || err > tolerance * std::max(1.0, std::abs(x))) {
    throw NonRationalFlux("no p/q with q <= " + std::to_string(max_denominator) +
                          " within " + std::to_string(tolerance) + " of " +
                          std::to_string(x));
  }
  return FluxRatio(static_cast<int>(best_p), static_cast<int>(best_q));
}

void ModelParams::validate() const {
  if (!(v_over_hwc > 0.0) || !std::isfinite(v_over_hwc)) {
    throw ValidationError("v_over_hwc must be positive");
  }
  if (!(hw0_over_v >= 0.0) || !std::isfinite(hw0_over_v)) {
    throw ValidationError("hw0_over_v must be non-negative");
  }
}

void CircuitParams::validate() const {
  if (!(capacitance > 0.0)) throw ValidationError("capacitance must be positive");
  if (!(josephson_energy > 0.0)) throw ValidationError("Josephson energy must be positive");
  if (!(gyration_conductance > 0.0)) {
    throw ValidationError("gyration conductance must be positive");
  }
  if (inductance && !(*inductance > 0.0)) {
    throw ValidationError("inductance must be positive when present");
  }
}

CircuitMapping map_circuit_to_model(const CircuitParams& params) {
  params.validate();
  DerivedQuantities d;
  const double e = si::elementary_charge;
  d.omega_c = params.gyration_conductance / params.capacitance;
  d.e_c = e * e / (2.0 * params.capacitance);
  d.flux = rational_approximation(params.gyration_conductance / si::conductance_quantum_sc);
  d.v0_over_v = std::exp(-pi * d.flux.inverse() / 2.0);

  ModelParams model;
  model.flux = d.flux;
  model.v_over_hwc = params.josephson_energy / (si::hbar * d.omega_c);
  model.hw0_over_v = 0.0;
  if (params.inductance) {
    const double L = *params.inductance;
    d.omega_lc = 1.0 / std::sqrt(L * params.capacitance);
    d.e_l = si::flux_quantum_sc * si::flux_quantum_sc / (4.0 * pi * pi * L);
    model.hw0_over_v = si::hbar * *d.omega_lc / params.josephson_energy;
    d.delta = squeeze_delta(model);
  }
  return {d, model};
}

double v0(const ModelParams& model) {
  return model.v_over_hwc * std::exp(-pi * model.flux.inverse() / 2.0);
}

double confinement_over_v0(const ModelParams& model) {
  model.validate();
  return model.hw0_over_v * model.hw0_over_v * model.v_over_hwc *
         std::exp(pi * model.flux.inverse() / 2.0);
}

double confinement_over_hwc(const ModelParams& model) {
  const double w = model.hw0_over_v * model.v_over_hwc;
  return w * w;
}

double squeeze_delta(const ModelParams& model) {
  if (model.hw0_over_v == 0.0) {
    throw ZeroConfinement("squeezing parameter needs hw0_over_v > 0");
  }
  return squeeze_delta_from_ratio(confinement_over_v0(model));
}

double squeeze_delta_from_ratio(double ratio) {
  if (!(ratio > 0.0)) throw ZeroConfinement("confinement ratio must be positive");
  return std::pow(ratio / (4.0 * pi), 0.25);
}

double confinement_ratio_from_delta(double delta) {
  if (!(delta > 0.0)) throw ValidationError("delta must be positive");
  return 4.0 * pi * std::pow(delta, 4);
}

ModelParams model_from_confinement_ratio(const FluxRatio& flux, double v_over_hwc,
                                         double ratio) {
  ModelParams m;
  m.flux = flux;
  m.v_over_hwc = v_over_hwc;
  m.hw0_over_v = std::sqrt(ratio / (v_over_hwc * std::exp(pi * flux.inverse() / 2.0)));
  m.validate();
  return m;
}

}  // namespace gkp
