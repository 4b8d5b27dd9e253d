#include "gkp/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gkp/parallel.hpp"
#include "gkp/states.hpp"

namespace gkp {

using cd = std::complex<double>;
using std::numbers::pi;

namespace {

const double sqrt_pi = std::sqrt(pi);

bool fluxes_zero(const ExternalFluxes& f) {
  return f.phi1 == 0.0 && f.phi2 == 0.0 && f.phi_g1 == 0.0 && f.phi_g2 == 0.0;
}

std::vector<double> lowest(const CircuitParams& circ, int levels, const Truncation& trunc) {
  const auto sol = eigensolve(flux_biased_blocks(circ, trunc), levels);
  return {sol.values.data(), sol.values.data() + sol.values.size()};
}

int first_in_sector(const EigenSolution& sol, int sector) {
  for (std::size_t i = 0; i < sol.sectors.size(); ++i) {
    if (sol.sectors[i] == sector) return static_cast<int>(i);
  }
  return -1;
}

// Lowest-Landau-level block <0_a| A (x) B |0_a> = A(0, 0) B of a product operator.
MatrixXc n0_block(const MatrixXc& a, const MatrixXc& b) { return a(0, 0) * b; }

// (D - D^dag) / 2i for D = D_a(alpha) D_b(alpha_b), reduced to n = 0.
MatrixXc sine_block(cd alpha_a, cd alpha_b, int n_max, int m_max) {
  const MatrixXc d = n0_block(displacement_matrix(alpha_a, n_max).entries,
                              displacement_matrix(alpha_b, m_max).entries);
  return (d - d.adjoint()) / cd(0.0, 2.0);
}

}  // namespace

CircuitParams circuit_from_energy_ratios(double ej_over_ec, double el_over_ec,
                                         double capacitance) {
  if (!(ej_over_ec > 0.0) || !(el_over_ec > 0.0)) {
    throw ValidationError("energy ratios must be positive");
  }
  if (!(capacitance > 0.0)) throw ValidationError("capacitance must be positive");
  const double e = si::elementary_charge;
  const double ec = e * e / (2.0 * capacitance);
  CircuitParams c;
  c.capacitance = capacitance;
  c.josephson_energy = ej_over_ec * ec;
  c.inductance = si::flux_quantum_sc * si::flux_quantum_sc / (4.0 * pi * pi * el_over_ec * ec);
  c.gyration_conductance = si::gkp_gyration_conductance;
  return c;
}

BlockHamiltonian flux_biased_blocks(const CircuitParams& circ, const Truncation& trunc) {
  if (!circ.inductance) throw MissingInductance("the confined circuit needs an inductance");
  const auto mapping = map_circuit_to_model(circ);
  CosinePhases phases;
  phases.x1 = circ.ext.phi1 - circ.ext.phi_g1;
  phases.x2 = circ.ext.phi2 - circ.ext.phi_g2;
  return confined_blocks(mapping.model, trunc.n_max, trunc.m_max, phases);
}

HermitianMatrix flux_biased_hamiltonian(const CircuitParams& circ, const Truncation& trunc) {
  return flux_biased_blocks(circ, trunc).assemble();
}

FluxAxis parse_flux_axis(const std::string& name) {
  if (name == "phi1") return FluxAxis::phi1;
  if (name == "phi2") return FluxAxis::phi2;
  if (name == "phi_g1") return FluxAxis::phi_g1;
  if (name == "phi_g2") return FluxAxis::phi_g2;
  throw ValidationError("unknown flux axis '" + name + "'");
}

std::string to_string(FluxAxis axis) {
  switch (axis) {
    case FluxAxis::phi1: return "phi1";
    case FluxAxis::phi2: return "phi2";
    case FluxAxis::phi_g1: return "phi_g1";
    case FluxAxis::phi_g2: return "phi_g2";
  }
  return "";
}

CircuitParams with_flux(CircuitParams circ, FluxAxis axis, double value) {
  switch (axis) {
    case FluxAxis::phi1: circ.ext.phi1 = value; break;
    case FluxAxis::phi2: circ.ext.phi2 = value; break;
    case FluxAxis::phi_g1: circ.ext.phi_g1 = value; break;
    case FluxAxis::phi_g2: circ.ext.phi_g2 = value; break;
  }
  return circ;
}

SweepResult flux_sweep(const CircuitParams& circ, FluxAxis axis, const std::vector<double>& grid,
                       int levels, const Truncation& trunc) {
  if (grid.empty()) throw EmptyGrid("flux_sweep needs at least one grid point");
  if (levels < 1) throw ValidationError("levels must be positive");
  const auto mapping = map_circuit_to_model(circ);
  SweepResult out;
  out.axis = to_string(axis);
  out.grid = grid;
  out.energies.resize(grid.size());
  out.sectors.resize(grid.size());
  std::vector<double> residuals(grid.size());
  parallel_for(static_cast<int>(grid.size()), [&](int i) {
    const auto sol = eigensolve(flux_biased_blocks(with_flux(circ, axis, grid[i]), trunc), levels);
    out.energies[i].assign(sol.values.data(), sol.values.data() + sol.values.size());
    out.sectors[i] = sol.sectors;
    residuals[i] = sol.max_residual;
  });
  out.metadata["v_over_hwc"] = mapping.model.v_over_hwc;
  out.metadata["hw0_over_v"] = mapping.model.hw0_over_v;
  out.metadata["hbar_omega_c_ghz"] = mapping.derived.omega_c / (2.0 * pi) * 1e-9;
  out.metadata["n_max"] = trunc.n_max;
  out.metadata["m_max"] = trunc.m_max;
  out.metadata["max_residual"] = *std::max_element(residuals.begin(), residuals.end());
  return out;
}

SweetSpotReport sweet_spot_check(const CircuitParams& circ, FluxAxis axis,
                                 const SweepResult& sweep, const std::vector<double>& points,
                                 const Truncation& trunc, double step) {
  if (sweep.energies.empty()) throw EmptyGrid("sweet_spot_check needs a sweep");
  if (!(step > 0.0)) throw ValidationError("step must be positive");
  const int levels = static_cast<int>(sweep.energies.front().size());
  std::vector<double> range(levels);
  for (int l = 0; l < levels; ++l) {
    double lo = sweep.energies[0][l], hi = lo;
    for (const auto& e : sweep.energies) {
      lo = std::min(lo, e[l]);
      hi = std::max(hi, e[l]);
    }
    range[l] = hi - lo;
  }
  SweetSpotReport out;
  out.points = points;
  out.slopes.resize(points.size());
  parallel_for(static_cast<int>(points.size()), [&](int p) {
    const auto up = lowest(with_flux(circ, axis, points[p] + step), levels, trunc);
    const auto down = lowest(with_flux(circ, axis, points[p] - step), levels, trunc);
    for (int l = 0; l < levels; ++l) {
      const double slope = (up[l] - down[l]) / (2.0 * step);
      out.slopes[p].push_back(range[l] > 0.0 ? slope / range[l] : slope);
    }
  });
  for (const auto& s : out.slopes) {
    for (double v : s) out.worst = std::max(out.worst, std::abs(v));
  }
  return out;
}

double flux_periodicity_defect(const CircuitParams& circ, FluxAxis axis,
                               const std::vector<double>& points, int levels,
                               const Truncation& trunc) {
  std::vector<double> worst(points.size());
  parallel_for(static_cast<int>(points.size()), [&](int p) {
    const auto a = lowest(with_flux(circ, axis, points[p]), levels, trunc);
    const auto b = lowest(with_flux(circ, axis, points[p] + 2.0 * pi), levels, trunc);
    for (int l = 0; l < levels; ++l) worst[p] = std::max(worst[p], std::abs(a[l] - b[l]));
  });
  return points.empty() ? 0.0 : *std::max_element(worst.begin(), worst.end());
}

double charge_offset_shift(const CircuitParams& circ, double q1, double q2, int levels,
                           const Truncation& trunc) {
  const auto mapping = map_circuit_to_model(circ);
  const double scale =
      std::sqrt(2.0 * circ.capacitance * si::hbar * mapping.derived.omega_c);
  const cd beta = cd(q1, q2) / scale;

  HermitianMatrix h = flux_biased_hamiltonian(circ, trunc);
  // a^dag a -> (a + beta)^dag (a + beta) on |n, m>.
  const int mb = trunc.m_max + 1;
  for (int n = 1; n <= trunc.n_max; ++n) {
    for (int m = 0; m < mb; ++m) {
      const int hi = n * mb + m, lo = (n - 1) * mb + m;
      h.entries(lo, hi) += std::conj(beta) * std::sqrt(double(n));
      h.entries(hi, lo) += beta * std::sqrt(double(n));
    }
  }
  h.entries.diagonal().array() += std::norm(beta);

  const auto base = lowest(circ, levels, trunc);
  const auto shifted = eigensolve(h, levels);
  double worst = 0.0;
  for (int l = 0; l < levels; ++l) worst = std::max(worst, std::abs(shifted.values(l) - base[l]));
  return worst;
}

std::vector<NoiseReport> noise_matrix_elements(const CircuitParams& circ, const Truncation& trunc) {
  if (!fluxes_zero(circ.ext)) {
    throw ValidationError("noise matrix elements are defined at zero external flux");
  }
  const auto sol = eigensolve(flux_biased_blocks(circ, trunc));
  const int plus = first_in_sector(sol, 0), minus = first_in_sector(sol, 2);
  const int odd = first_in_sector(sol, 1);
  if (plus < 0 || minus < 0 || odd < 0) throw ConvergenceError("missing symmetry sector");
  const int mb = trunc.m_max + 1;
  // n = 0 components sit at the first m_max + 1 basis indices.
  const VectorXc vp = sol.vectors.col(plus).head(mb);
  const VectorXc vm = sol.vectors.col(minus).head(mb);
  const VectorXc vo = sol.vectors.col(odd).head(mb);

  const double lambda = map_circuit_to_model(circ).model.flux.displacement_length();
  const MatrixXc b = ladder_matrix(trunc.m_max);
  const MatrixXc a = ladder_matrix(std::max(trunc.n_max, 1));
  const MatrixXc id_a = MatrixXc::Identity(a.rows(), a.cols());
  const MatrixXc id_b = MatrixXc::Identity(mb, mb);
  const int n_max = trunc.n_max, m_max = trunc.m_max;
  const cd i(0.0, 1.0);

  // phi1 = lambda (a + a^dag + b + b^dag), phi2 = -i lambda [(a^dag - a) - (b^dag - b)].
  const MatrixXc phi1 = lambda * (n0_block(a + a.adjoint(), id_b) + n0_block(id_a, b + b.adjoint()));
  const MatrixXc phi2 =
      -i * lambda * (n0_block(a.adjoint() - a, id_b) - n0_block(id_a, b.adjoint() - b));

  const std::vector<std::pair<std::string, MatrixXc>> ops = {
      {"phi1", phi1},
      {"phi2", phi2},
      {"sin_phi1", sine_block(cd(0, lambda), cd(0, lambda), n_max, m_max)},
      {"sin_phi2", sine_block(cd(lambda, 0), cd(-lambda, 0), n_max, m_max)},
      {"sin_phi1_half", sine_block(cd(0, lambda / 2), cd(0, lambda / 2), n_max, m_max)},
      {"sin_phi2_half", sine_block(cd(lambda / 2, 0), cd(-lambda / 2, 0), n_max, m_max)},
  };
  std::vector<NoiseReport> out;
  for (const auto& [label, op] : ops) {
    NoiseReport r;
    r.label = label;
    r.magnitude = std::abs(vm.dot(op * vp));
    r.control = std::abs(vo.dot(op * vp));
    r.vanishes = r.magnitude < 1e-8;
    out.push_back(r);
  }
  return out;
}

std::pair<int, int> hadamard_level_positions(const CircuitParams& circ, int levels,
                                             const Truncation& trunc) {
  if (!fluxes_zero(circ.ext)) throw ValidationError("level positions need zero external flux");
  const auto sol = eigensolve(flux_biased_blocks(circ, trunc), levels);
  return {first_in_sector(sol, 0), first_in_sector(sol, 2)};
}

double gate_time_z(double current) {
  if (!(current > 0.0)) throw ZeroCurrent("gate time needs I1 > 0");
  return si::hbar * pi / (current * si::flux_quantum_sc);
}

DriveProtocol DriveProtocol::z_gate(double current, int repeats, int port) {
  if (repeats < 1) throw ValidationError("repeats must be positive");
  DriveProtocol p;
  p.port = port;
  p.segments.push_back({current, repeats * gate_time_z(current)});
  p.validate();
  return p;
}

double DriveProtocol::duration() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

void DriveProtocol::validate() const {
  if (port != 1 && port != 2) throw ValidationError("port must be 1 or 2");
  if (segments.empty()) throw ValidationError("protocol needs at least one segment");
  for (const auto& s : segments) {
    if (!(s.duration > 0.0) || !std::isfinite(s.duration)) {
      throw ValidationError("segment durations must be positive and finite");
    }
    if (!std::isfinite(s.current)) throw ValidationError("segment currents must be finite");
  }
}

GateResult simulate_z_gate(double v0_joules, double delta, const DriveProtocol& protocol,
                           const GateOptions& options) {
  if (!(v0_joules > 0.0)) throw ValidationError("V0 must be positive");
  if (!(delta > 0.0 && delta <= 0.5)) throw ValidationError("delta must lie in (0, 0.5]");
  if (options.m_max < 8) throw ValidationError("m_max must be at least 8");
  protocol.validate();
  const int m_max = options.m_max;

  // Codewords in the Fock basis.
  const double half = std::max(24.0, 5.0 / delta);
  const Grid1D grid{-half, half, std::max(4096, static_cast<int>(16.0 * half / delta) + 1)};
  GridStateParams params;
  params.delta = delta;
  VectorXc code[2];
  for (int j = 0; j < 2; ++j) {
    code[j] = fock_coefficients(approx_grid_state(j, params, grid), m_max);
    code[j].normalize();
  }
  GateResult out;
  if (options.initial && options.initial->size() != m_max + 1) {
    throw ValidationError("initial state must have m_max + 1 amplitudes");
  }
  out.initial = options.initial ? *options.initial : VectorXc(options.c0 * code[0] + options.c1 * code[1]);
  if (!(out.initial.norm() > 0.0)) throw ValidationError("initial amplitudes vanish");
  out.initial.normalize();

  const double r = options.confined ? confinement_ratio_from_delta(delta) : 0.0;
  const MatrixXc h0 = lll_grid_blocks(r, m_max).assemble().entries;
  const auto quad = quadrature_matrices(m_max);
  const MatrixXc& drive = protocol.port == 1 ? quad.x.entries : quad.p.entries;

  const int edge = std::max(1, (m_max + 1) / 10);
  VectorXc state = out.initial;
  double periods = 0.0;
  for (const auto& seg : protocol.segments) {
    // H / V0 = H_GKP / V0 - f Q with f = I Phi_0s / (sqrt(pi) V0), time in hbar / V0.
    const double f = seg.current * si::flux_quantum_sc / (sqrt_pi * v0_joules);
    const double tau = seg.duration * v0_joules / si::hbar;
    HermitianMatrix h;
    h.basis = BasisTag::fock_single(m_max);
    h.entries = h0 - f * drive;
    const auto sol = eigensolve(h);
    const VectorXc phases =
        (sol.values.array() * -tau).unaryExpr([](double x) { return std::polar(1.0, x); });
    const double before = state.norm();
    state = sol.vectors * (phases.asDiagonal() * (sol.vectors.adjoint() * state));
    out.max_norm_defect = std::max(out.max_norm_defect, std::abs(state.norm() - before));
    out.edge_weight = std::max(out.edge_weight, state.tail(edge).squaredNorm());
    periods += f * tau / sqrt_pi;
  }
  out.final_state = state;
  out.gate_periods = periods;
  out.truncation_warning = out.edge_weight > 1e-6;

  // Logical operator exp(i sqrt(pi) X) = D(i sqrt(pi/2)), exp(i sqrt(pi) P) = D(-sqrt(pi/2)).
  const int k = static_cast<int>(std::llround(periods));
  const double s = std::sqrt(pi / 2.0);
  const cd alpha = protocol.port == 1 ? cd(0.0, s * k) : cd(-s * k, 0.0);
  const MatrixXc logical = displacement_matrix(alpha, m_max).entries;
  out.fidelity = std::norm(out.initial.dot(logical.adjoint() * state));
  out.return_fidelity = std::norm(out.initial.dot(state));

  // Code space: orthonormalized span of the two codewords.
  MatrixXc basis(m_max + 1, 2);
  basis << code[0], code[1];
  const Eigen::HouseholderQR<MatrixXc> qr(basis);
  const MatrixXc q = qr.householderQ() * MatrixXc::Identity(m_max + 1, 2);
  const VectorXc projected = q * (q.adjoint() * state);
  out.code_space_weight = projected.squaredNorm();
  cd t0 = options.c0, t1 = options.c1;
  if (k % 2 != 0) {
    if (protocol.port == 1) {
      t1 = -t1;
    } else {
      std::swap(t0, t1);
    }
  }
  const VectorXc target = q * (q.adjoint() * (t0 * code[0] + t1 * code[1]));
  out.logical_fidelity =
      std::norm(target.dot(projected)) / (target.squaredNorm() * projected.squaredNorm());
  return out;
}

}  // namespace gkp
