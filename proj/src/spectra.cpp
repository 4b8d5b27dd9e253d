#include "gkp/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "gkp/parallel.hpp"

namespace gkp {

using cd = std::complex<double>;
using std::numbers::pi;

namespace {

constexpr cd I(0.0, 1.0);

double hermiticity_tolerance(const MatrixXc& m) {
  const double scale = m.size() == 0 ? 1.0 : std::max(1.0, m.cwiseAbs().maxCoeff());
  return 1e-12 * scale;
}

// i^k for any integer k.
cd i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

struct RawPairs {
  Eigen::VectorXd values;
  MatrixXc vectors;
};

// Full dense solve; a block with vanishing imaginary part goes through the
// real solver.
RawPairs solve_dense(const MatrixXc& h) {
  RawPairs out;
  const double imag = h.size() == 0 ? 0.0 : h.imag().cwiseAbs().maxCoeff();
  if (imag == 0.0) {
    const Eigen::MatrixXd real = h.real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(real);
    if (solver.info() != Eigen::Success) throw ConvergenceError("eigensolver did not converge");
    out.values = solver.eigenvalues();
    out.vectors = solver.eigenvectors().cast<cd>();
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixXc> solver(h);
    if (solver.info() != Eigen::Success) throw ConvergenceError("eigensolver did not converge");
    out.values = solver.eigenvalues();
    out.vectors = solver.eigenvectors();
  }
  return out;
}

// Lowest `count` eigenvalues over all blocks, without eigenvectors.
std::vector<double> lowest_values(const BlockHamiltonian& h, int count) {
  std::vector<Eigen::VectorXd> per_block(h.blocks.size());
  parallel_for(static_cast<int>(h.blocks.size()), [&](int s) {
    const MatrixXc& block = h.blocks[s];
    const double imag = block.size() == 0 ? 0.0 : block.imag().cwiseAbs().maxCoeff();
    if (imag == 0.0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block.real(), Eigen::EigenvaluesOnly);
      if (solver.info() != Eigen::Success) throw ConvergenceError("eigensolver did not converge");
      per_block[s] = solver.eigenvalues();
    } else {
      Eigen::SelfAdjointEigenSolver<MatrixXc> solver(block, Eigen::EigenvaluesOnly);
      if (solver.info() != Eigen::Success) throw ConvergenceError("eigensolver did not converge");
      per_block[s] = solver.eigenvalues();
    }
  });
  std::vector<double> all;
  for (const auto& v : per_block) all.insert(all.end(), v.data(), v.data() + v.size());
  std::sort(all.begin(), all.end());
  if (count > 0 && count < static_cast<int>(all.size())) all.resize(count);
  return all;
}

double orthonormality_defect(const MatrixXc& v) {
  if (v.cols() == 0) return 0.0;
  const MatrixXc gram = v.adjoint() * v;
  return (gram - MatrixXc::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff();
}

// Splits a matrix into blocks over `sector_of` with rephasing `gauge`.
BlockHamiltonian split(const BasisTag& basis, const MatrixXc& h, const VectorXc& gauge,
                       const std::vector<int>& sector_of, int sector_count) {
  BlockHamiltonian out;
  out.basis = basis;
  out.gauge = gauge;
  out.indices.assign(sector_count, {});
  for (int i = 0; i < static_cast<int>(sector_of.size()); ++i) {
    out.indices[sector_of[i]].push_back(i);
  }
  for (const auto& idx : out.indices) {
    const int d = static_cast<int>(idx.size());
    MatrixXc block(d, d);
    for (int c = 0; c < d; ++c) {
      for (int r = 0; r < d; ++r) {
        block(r, c) = std::conj(gauge(idx[r])) * h(idx[r], idx[c]) * gauge(idx[c]);
      }
    }
    out.blocks.push_back(std::move(block));
  }
  return out;
}

// Rounds entries that are zero up to rounding, so real blocks stay real.
void clean_block(MatrixXc& block) {
  const double tol = 1e-15 * std::max(1.0, block.cwiseAbs().maxCoeff());
  for (Eigen::Index c = 0; c < block.cols(); ++c) {
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
      cd& z = block(r, c);
      if (std::abs(z.imag()) < tol) z = cd(z.real(), 0.0);
      if (std::abs(z.real()) < tol) z = cd(0.0, z.imag());
    }
  }
}

}  // namespace

EigenSolution eigensolve(const HermitianMatrix& h, int count) {
  h.check(hermiticity_tolerance(h.entries));
  const int dim = h.dim();
  if (count <= 0 || count > dim) count = dim;
  auto raw = solve_dense(h.entries);

  EigenSolution out;
  out.basis = h.basis;
  out.values = raw.values.head(count);
  out.vectors = raw.vectors.leftCols(count);
  const double norm =
      dim == 0 ? 1.0 : std::max(std::abs(raw.values(0)), std::abs(raw.values(dim - 1)));
  const MatrixXc residual = h.entries * out.vectors - out.vectors * out.values.asDiagonal();
  for (int j = 0; j < count; ++j) {
    out.max_residual = std::max(out.max_residual, residual.col(j).norm() / std::max(norm, 1e-300));
  }
  out.orthonormality_defect = orthonormality_defect(out.vectors);
  return out;
}

HermitianMatrix BlockHamiltonian::assemble() const {
  HermitianMatrix out;
  out.basis = basis;
  out.truncation_defect = truncation_defect;
  out.truncation_warning = truncation_warning;
  out.entries = MatrixXc::Zero(dim(), dim());
  for (std::size_t s = 0; s < blocks.size(); ++s) {
    const auto& idx = indices[s];
    for (std::size_t c = 0; c < idx.size(); ++c) {
      for (std::size_t r = 0; r < idx.size(); ++r) {
        out.entries(idx[r], idx[c]) =
            gauge(idx[r]) * blocks[s](r, c) * std::conj(gauge(idx[c]));
      }
    }
  }
  return out;
}

EigenSolution eigensolve(const BlockHamiltonian& h, int count) {
  const int sectors = static_cast<int>(h.blocks.size());
  std::vector<RawPairs> raw(sectors);
  for (const auto& block : h.blocks) {
    if (max_hermiticity_defect(block) > hermiticity_tolerance(block)) {
      throw NonHermitianInput("block is not self-adjoint");
    }
  }
  parallel_for(sectors, [&](int s) { raw[s] = solve_dense(h.blocks[s]); });

  // (value, sector, column) ordered by value; ties by sector for determinism.
  std::vector<std::tuple<double, int, int>> order;
  double norm = 0.0;
  for (int s = 0; s < sectors; ++s) {
    for (int j = 0; j < raw[s].values.size(); ++j) {
      order.emplace_back(raw[s].values(j), s, j);
      norm = std::max(norm, std::abs(raw[s].values(j)));
    }
  }
  std::sort(order.begin(), order.end());
  const int dim = h.dim();
  if (count <= 0 || count > dim) count = dim;

  EigenSolution out;
  out.basis = h.basis;
  out.values.resize(count);
  out.vectors = MatrixXc::Zero(dim, count);
  out.sectors.resize(count);
  for (int k = 0; k < count; ++k) {
    const auto [value, s, j] = order[k];
    out.values(k) = value;
    out.sectors[k] = s;
    const auto& idx = h.indices[s];
    const VectorXc local = raw[s].vectors.col(j);
    const VectorXc r = h.blocks[s] * local - value * local;
    out.max_residual = std::max(out.max_residual, r.norm() / std::max(norm, 1e-300));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      out.vectors(idx[i], k) = h.gauge(idx[i]) * local(static_cast<Eigen::Index>(i));
    }
  }
  out.orthonormality_defect = orthonormality_defect(out.vectors);
  return out;
}

HermitianMatrix harper_hamiltonian(const FluxRatio& flux, double k1, double k2, double v0) {
  const auto t = mto_pair(flux, k1, k2);
  HermitianMatrix out;
  out.basis = BasisTag::bloch_lll(flux.p());
  const MatrixXc sum = t.t1 + t.t2;
  out.entries = (-v0 / 2.0) * (sum + sum.adjoint());
  return out;
}

HermitianMatrix crystal_hamiltonian(const ModelParams& model, double k1, double k2, int n_max) {
  model.validate();
  if (model.hw0_over_v != 0.0) {
    throw ValidationError("crystal_hamiltonian takes an unconfined model (hw0_over_v = 0)");
  }
  if (n_max < 0) throw ValidationError("n_max must be non-negative");
  const int p = model.flux.p();
  const double lambda = model.flux.displacement_length();
  const double v = model.v_over_hwc;
  const auto t = mto_pair(model.flux, k1, k2);
  const auto d1 = displacement_matrix(cd(0.0, lambda), n_max);
  const auto d2 = displacement_matrix(cd(-lambda, 0.0), n_max);

  const int nb = n_max + 1;
  MatrixXc coupling = MatrixXc::Zero(nb * p, nb * p);
  for (int n = 0; n < nb; ++n) {
    for (int np = 0; np < nb; ++np) {
      coupling.block(np * p, n * p, p, p) = d1.entries(np, n) * t.t1 + d2.entries(np, n) * t.t2;
    }
  }
  HermitianMatrix out;
  out.basis = BasisTag::bloch_ll(n_max, p);
  out.entries = (-v / 2.0) * (coupling + coupling.adjoint());
  for (int n = 0; n < nb; ++n) {
    for (int l = 0; l < p; ++l) out.entries(n * p + l, n * p + l) += n + 0.5;
  }
  out.truncation_defect =
      v * std::max(std::abs(d1.entries(n_max, 0)), std::abs(d2.entries(n_max, 0)));
  out.truncation_warning = out.truncation_defect > 1e-6;
  return out;
}

BlockHamiltonian confined_blocks(const ModelParams& model, int n_max, int m_max,
                                 CosinePhases phases) {
  model.validate();
  if (model.hw0_over_v <= 0.0) {
    throw ZeroConfinement("confined_hamiltonian needs hw0_over_v > 0");
  }
  if (n_max < 0 || m_max < 0) throw ValidationError("truncations must be non-negative");
  const double lambda = model.flux.displacement_length();
  const double v = model.v_over_hwc;
  const double kappa = confinement_over_hwc(model);

  // exp(i 2pi x2 / L0) = D_a(lambda) D_b(-lambda), exp(i 2pi x1 / L0) = D_a(i lambda) D_b(i lambda)
  const auto a2 = displacement_matrix(cd(lambda, 0.0), n_max);
  const auto b2 = displacement_matrix(cd(-lambda, 0.0), m_max);
  const auto a1 = displacement_matrix(cd(0.0, lambda), n_max);
  const auto b1 = displacement_matrix(cd(0.0, lambda), m_max);
  const cd w1 = std::polar(1.0, -phases.x1);
  const cd w2 = std::polar(1.0, -phases.x2);

  const BasisTag basis = BasisTag::fock_product(n_max, m_max);
  const int mb = m_max + 1;
  const int dim = basis.dim();
  const bool symmetric = phases.trivial();

  BlockHamiltonian out;
  out.basis = basis;
  out.gauge.resize(dim);
  std::vector<int> sector_of(dim);
  for (int n = 0; n <= n_max; ++n) {
    for (int m = 0; m <= m_max; ++m) {
      const int i = n * mb + m;
      out.gauge(i) = symmetric ? i_power(n + m) : cd(1.0, 0.0);
      sector_of[i] = symmetric ? ((m - n) % 4 + 4) % 4 : 0;
    }
  }
  out.indices.assign(symmetric ? 4 : 1, {});
  for (int i = 0; i < dim; ++i) out.indices[sector_of[i]].push_back(i);

  auto entry = [&](int np, int mp, int n, int m) {
    const cd forward = w2 * a2.entries(np, n) * b2.entries(mp, m) +
                       w1 * a1.entries(np, n) * b1.entries(mp, m);
    const cd backward = w2 * a2.entries(n, np) * b2.entries(m, mp) +
                        w1 * a1.entries(n, np) * b1.entries(m, mp);
    cd h = (-v / 2.0) * (forward + std::conj(backward));
    if (np == n && mp == m) h += n + kappa * (n + m);
    // kappa (ab + a^dag b^dag)
    if (np == n - 1 && mp == m - 1) h += kappa * std::sqrt(double(n) * m);
    if (np == n + 1 && mp == m + 1) h += kappa * std::sqrt(double(n + 1) * (m + 1));
    return h;
  };

  for (const auto& idx : out.indices) {
    const int d = static_cast<int>(idx.size());
    MatrixXc block(d, d);
    for (int c = 0; c < d; ++c) {
      const int n = idx[c] / mb, m = idx[c] % mb;
      for (int r = 0; r < d; ++r) {
        const int np = idx[r] / mb, mp = idx[r] % mb;
        block(r, c) = std::conj(out.gauge(idx[r])) * entry(np, mp, n, m) * out.gauge(idx[c]);
      }
    }
    if (symmetric) {
      clean_block(block);
    } else if (phases.x2 == 0.0) {
      // conj D(i lambda) = D(i lambda)^dag, so a phase on the x1 term alone
      // leaves the matrix real in the plain Fock basis.
      block = block.real().cast<cd>();
    }
    out.blocks.push_back(std::move(block));
  }
  out.truncation_defect =
      v * std::max(std::abs(a1.entries(n_max, 0)), std::abs(b1.entries(m_max, 0)));
  out.truncation_warning = out.truncation_defect > 1e-6;
  return out;
}

HermitianMatrix confined_hamiltonian(const ModelParams& model, int n_max, int m_max) {
  return confined_blocks(model, n_max, m_max).assemble();
}

namespace {

BlockHamiltonian lll_blocks(double quadratic, double amplitude, const FluxRatio& flux,
                            int m_max) {
  if (m_max < 1) throw ValidationError("m_max must be at least 1");
  const double lambda = flux.displacement_length();
  const auto dp = displacement_matrix(cd(lambda, 0.0), m_max);
  const auto di = displacement_matrix(cd(0.0, lambda), m_max);
  MatrixXc h = dp.entries + di.entries;
  h = (-amplitude / 2.0) * (h + h.adjoint()).eval();
  for (int m = 0; m <= m_max; ++m) h(m, m) += quadratic * m;

  VectorXc gauge(m_max + 1);
  std::vector<int> sector_of(m_max + 1);
  for (int m = 0; m <= m_max; ++m) {
    gauge(m) = i_power(m);
    sector_of[m] = m % 4;
  }
  auto out = split(BasisTag::fock_single(m_max), h, gauge, sector_of, 4);
  for (auto& block : out.blocks) clean_block(block);
  out.truncation_defect = amplitude * std::abs(dp.entries(m_max, 0));
  out.truncation_warning = out.truncation_defect > 1e-6;
  return out;
}

}  // namespace

BlockHamiltonian lll_confined_blocks(const ModelParams& model, int m_max) {
  model.validate();
  return lll_blocks(confinement_over_hwc(model), v0(model), model.flux, m_max);
}

HermitianMatrix lll_confined_hamiltonian(const ModelParams& model, int m_max) {
  return lll_confined_blocks(model, m_max).assemble();
}

BlockHamiltonian lll_grid_blocks(double confinement_over_v0, int m_max, const FluxRatio& flux) {
  if (!(confinement_over_v0 >= 0.0)) {
    throw ValidationError("confinement ratio must be non-negative");
  }
  return lll_blocks(confinement_over_v0, 1.0, flux, m_max);
}

double lll_weight(const VectorXc& state, const BasisTag& basis) {
  if (basis.kind != BasisKind::FockProduct || state.size() != basis.dim()) {
    throw ValidationError("lll_weight needs a FockProduct state");
  }
  return state.head(basis.m_max + 1).squaredNorm() / state.squaredNorm();
}

std::vector<FluxRatio> farey_fluxes(int max_denominator, double max_inverse) {
  if (max_denominator < 1) throw ValidationError("max_denominator must be positive");
  std::vector<FluxRatio> out;
  for (int p = 1; p <= max_denominator; ++p) {
    for (int q = 1; q <= max_denominator; ++q) {
      if (std::gcd(p, q) == 1 && static_cast<double>(q) / p <= max_inverse + 1e-12) {
        out.emplace_back(p, q);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const FluxRatio& a, const FluxRatio& b) {
    return static_cast<long long>(a.q()) * b.p() < static_cast<long long>(b.q()) * a.p();
  });
  return out;
}

std::vector<std::pair<double, double>> k_points(const FluxRatio& flux, const KGrid& grid) {
  if (grid.n1 < 1 || grid.n2 < 1) throw EmptyGrid("k-grid needs at least one point per axis");
  const double l0 = flux.lattice_constant();
  const double span1 = 2.0 * pi / (flux.q() * l0);
  const double span2 = 2.0 * pi / l0;
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(grid.n1) * grid.n2);
  for (int i = 0; i < grid.n1; ++i) {
    for (int j = 0; j < grid.n2; ++j) {
      out.emplace_back(span1 * i / grid.n1, span2 * j / grid.n2);
    }
  }
  return out;
}

SweepResult butterfly(const std::vector<FluxRatio>& fluxes, const KGrid& grid, double v0) {
  if (fluxes.empty()) throw EmptyGrid("butterfly needs at least one flux");
  SweepResult out;
  out.axis = "q_over_p";
  out.grid.resize(fluxes.size());
  out.energies.resize(fluxes.size());
  parallel_for(static_cast<int>(fluxes.size()), [&](int f) {
    const auto& flux = fluxes[f];
    out.grid[f] = flux.inverse();
    std::vector<double> levels;
    for (const auto& [k1, k2] : k_points(flux, grid)) {
      const auto h = harper_hamiltonian(flux, k1, k2, v0);
      Eigen::SelfAdjointEigenSolver<MatrixXc> solver(h.entries, Eigen::EigenvaluesOnly);
      for (int j = 0; j < flux.p(); ++j) levels.push_back(solver.eigenvalues()(j));
    }
    std::sort(levels.begin(), levels.end());
    out.energies[f] = std::move(levels);
  });
  out.metadata["k_grid_n1"] = grid.n1;
  out.metadata["k_grid_n2"] = grid.n2;
  out.metadata["v0"] = v0;
  return out;
}

SweepResult crystal_bands(double v_over_hwc, const std::vector<FluxRatio>& fluxes,
                          const KGrid& grid, int n_max, int levels) {
  if (fluxes.empty()) throw EmptyGrid("crystal_bands needs at least one flux");
  SweepResult out;
  out.axis = "q_over_p";
  out.grid.resize(fluxes.size());
  out.energies.resize(fluxes.size());
  double defect = 0.0;
  std::vector<double> defects(fluxes.size());
  parallel_for(static_cast<int>(fluxes.size()), [&](int f) {
    ModelParams model;
    model.flux = fluxes[f];
    model.v_over_hwc = v_over_hwc;
    out.grid[f] = fluxes[f].inverse();
    std::vector<double> values;
    for (const auto& [k1, k2] : k_points(fluxes[f], grid)) {
      const auto h = crystal_hamiltonian(model, k1, k2, n_max);
      defects[f] = h.truncation_defect;
      Eigen::SelfAdjointEigenSolver<MatrixXc> solver(h.entries, Eigen::EigenvaluesOnly);
      const int keep = std::min<int>(levels, static_cast<int>(solver.eigenvalues().size()));
      for (int j = 0; j < keep; ++j) values.push_back(solver.eigenvalues()(j));
    }
    std::sort(values.begin(), values.end());
    out.energies[f] = std::move(values);
  });
  for (double d : defects) defect = std::max(defect, d);
  out.metadata["v_over_hwc"] = v_over_hwc;
  out.metadata["n_max"] = n_max;
  out.metadata["levels_per_k"] = levels;
  out.metadata["k_grid_n1"] = grid.n1;
  out.metadata["k_grid_n2"] = grid.n2;
  out.metadata["truncation_defect"] = defect;
  return out;
}

SweepResult confined_sweep(double v_over_hwc, const std::vector<double>& hw0_over_v,
                           const FluxRatio& flux, int n_max, int m_max, int levels) {
  if (hw0_over_v.empty()) throw EmptyGrid("confined_sweep needs at least one grid point");
  SweepResult out;
  out.axis = "hw0_over_v";
  out.grid = hw0_over_v;
  out.energies.resize(hw0_over_v.size());
  out.sectors.resize(hw0_over_v.size());
  std::vector<double> residuals(hw0_over_v.size());
  for (std::size_t i = 0; i < hw0_over_v.size(); ++i) {
    ModelParams model;
    model.flux = flux;
    model.v_over_hwc = v_over_hwc;
    model.hw0_over_v = hw0_over_v[i];
    const auto sol = eigensolve(confined_blocks(model, n_max, m_max), levels);
    out.energies[i].assign(sol.values.data(), sol.values.data() + sol.values.size());
    out.sectors[i] = sol.sectors;
    residuals[i] = sol.max_residual;
  }
  out.metadata["v_over_hwc"] = v_over_hwc;
  out.metadata["n_max"] = n_max;
  out.metadata["m_max"] = m_max;
  out.metadata["max_residual"] = *std::max_element(residuals.begin(), residuals.end());
  return out;
}

GapFit fit_gap_law(const SweepResult& sweep) {
  GapFit fit;
  for (std::size_t i = 0; i < sweep.grid.size(); ++i) {
    const auto& e = sweep.energies[i];
    if (e.size() < 2) continue;
    const double gap = e[1] - e[0];
    if (!(gap > 0.0)) continue;
    fit.inverse_confinement.push_back(1.0 / sweep.grid[i]);
    fit.log_gap.push_back(std::log(gap));
  }
  const int n = static_cast<int>(fit.log_gap.size());
  if (n < 3) throw ConvergenceError("gap fit needs at least three resolved gaps");
  const Eigen::Map<const Eigen::VectorXd> x(fit.inverse_confinement.data(), n);
  const Eigen::Map<const Eigen::VectorXd> y(fit.log_gap.data(), n);
  const double mx = x.mean(), my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  const double syy = (y.array() - my).square().sum();
  const double slope = sxy / sxx;
  fit.alpha = -slope;
  fit.log_prefactor = my - slope * mx;
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

std::vector<LevelCrossing> find_crossings(const SweepResult& sweep, int level) {
  std::vector<LevelCrossing> out;
  for (std::size_t i = 0; i + 1 < sweep.sectors.size(); ++i) {
    const auto& a = sweep.sectors[i];
    const auto& b = sweep.sectors[i + 1];
    if (static_cast<int>(std::min(a.size(), b.size())) < level + 2) continue;
    if (a[level] != a[level + 1] && a[level] == b[level + 1] && a[level + 1] == b[level]) {
      out.push_back({level, sweep.grid[i], sweep.grid[i + 1]});
    }
  }
  return out;
}

ConvergenceReport confined_convergence(const ModelParams& model, int n_max, int m_max,
                                       int levels) {
  ConvergenceReport out;
  out.n_max = n_max;
  out.m_max = m_max;
  const auto base = lowest_values(confined_blocks(model, n_max, m_max), levels);
  const auto fine = lowest_values(confined_blocks(model, 2 * n_max, 2 * m_max), levels);
  for (std::size_t j = 0; j < base.size(); ++j) {
    out.values.push_back(base[j]);
    out.doubled.push_back(fine[j]);
    out.max_shift = std::max(out.max_shift, std::abs(base[j] - fine[j]));
  }
  return out;
}

}  // namespace gkp
