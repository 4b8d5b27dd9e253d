#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "gkp/spectra.hpp"

using namespace gkp;
using cd = std::complex<double>;
using std::numbers::pi;

namespace {

HermitianMatrix wrap(const MatrixXc& m) {
  HermitianMatrix h;
  h.basis = BasisTag::fock_single(static_cast<int>(m.rows()) - 1);
  h.entries = m;
  return h;
}

// Independent two-mode build: explicit Kronecker products of the one-mode
// operators.
MatrixXc kron(const MatrixXc& a, const MatrixXc& b) {
  MatrixXc out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

MatrixXc confined_by_kron(const ModelParams& model, int n_max, int m_max, double phi1 = 0,
                          double phi2 = 0) {
  const double lambda = model.flux.displacement_length();
  const double kappa = confinement_over_hwc(model);
  const MatrixXc a = ladder_matrix(n_max), b = ladder_matrix(m_max);
  const MatrixXc ia = MatrixXc::Identity(n_max + 1, n_max + 1);
  const MatrixXc ib = MatrixXc::Identity(m_max + 1, m_max + 1);
  const MatrixXc na = a.adjoint() * a, nb = b.adjoint() * b;
  const MatrixXc ab = kron(a, b);
  MatrixXc h = kron(na, ib) + kappa * (kron(na, ib) + kron(ia, nb) + ab + ab.adjoint());
  const MatrixXc e2 = kron(displacement_matrix(cd(lambda, 0), n_max).entries,
                           displacement_matrix(cd(-lambda, 0), m_max).entries);
  const MatrixXc e1 = kron(displacement_matrix(cd(0, lambda), n_max).entries,
                           displacement_matrix(cd(0, lambda), m_max).entries);
  const MatrixXc cosines = std::polar(1.0, -phi1) * e1 + std::polar(1.0, -phi2) * e2;
  h -= (model.v_over_hwc / 2) * (cosines + cosines.adjoint());
  return h;
}

}  // namespace

TEST_CASE("eigensolve basics") {
  const auto id = eigensolve(wrap(MatrixXc::Identity(4, 4)));
  CHECK((id.values.array() - 1.0).abs().maxCoeff() < 1e-15);

  MatrixXc d = MatrixXc::Zero(3, 3);
  d.diagonal() << 3, 1, 2;
  const auto s = eigensolve(wrap(d));
  CHECK(s.values(0) == doctest::Approx(1));
  CHECK(s.values(1) == doctest::Approx(2));
  CHECK(s.values(2) == doctest::Approx(3));

  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  MatrixXc r(50, 50);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) r(i, j) = cd(g(rng), g(rng));
  const MatrixXc h = r + r.adjoint();
  const auto sol = eigensolve(wrap(h), 10);
  CHECK(sol.values.size() == 10);
  CHECK(sol.max_residual < 1e-9);
  CHECK(sol.orthonormality_defect < 1e-10);
  for (int i = 1; i < 10; ++i) CHECK(sol.values(i) >= sol.values(i - 1));

  MatrixXc bad = h;
  bad(0, 1) += 1e-6;
  CHECK_THROWS_AS(eigensolve(wrap(bad)), NonHermitianInput);
}

TEST_CASE("Harper hand oracles") {
  const auto h11 = harper_hamiltonian(FluxRatio(1, 1), 0, 0, 1.0);
  CHECK(h11.dim() == 1);
  CHECK(std::abs(h11.entries(0, 0) - cd(-2, 0)) < 1e-14);

  const auto s = eigensolve(harper_hamiltonian(FluxRatio(2, 1), 0, 0, 1.0));
  CHECK(std::abs(s.values(0) + std::sqrt(2.0)) < 1e-10);
  CHECK(std::abs(s.values(1) - std::sqrt(2.0)) < 1e-10);

  // Code space at flux 1/2: minimal energy -2 V0 at k = (0,0) and (0, pi/L0).
  const FluxRatio half(1, 2);
  const double l0 = half.lattice_constant();
  const auto e0 = eigensolve(harper_hamiltonian(half, 0, 0, 1.0)).values(0);
  const auto e1 = eigensolve(harper_hamiltonian(half, 0, pi / l0, 1.0)).values(0);
  CHECK(std::abs(e0 + 2.0) < 1e-12);
  CHECK(std::abs(e0 - e1) < 1e-10);
}

TEST_CASE("butterfly bounds and the p = 1 closed form") {
  const auto sweep = butterfly({FluxRatio(1, 2)}, {16, 16});
  for (double e : sweep.energies[0]) {
    CHECK(e >= -2.0 - 1e-12);
    CHECK(e <= 2.0 + 1e-12);
  }
  CHECK(sweep.energies[0].front() == doctest::Approx(-2.0).epsilon(1e-12));

  const FluxRatio one(1, 1);
  const double l0 = one.lattice_constant();
  for (const auto& [k1, k2] : k_points(one, {8, 8})) {
    const double e = eigensolve(harper_hamiltonian(one, k1, k2, 0.7)).values(0);
    CHECK(std::abs(e + 0.7 * (std::cos(k1 * l0) + std::cos(k2 * l0))) < 1e-12);
  }
}

TEST_CASE("Harper spectra: q-fold degeneracy and E -> -E") {
  for (auto [p, q] : {std::pair{3, 1}, std::pair{5, 2}, std::pair{4, 3}, std::pair{7, 5}}) {
    const FluxRatio f(p, q);
    const double l0 = f.lattice_constant();
    const double k1 = 0.13, k2 = 0.41;
    const auto base = eigensolve(harper_hamiltonian(f, k1, k2, 1.0)).values;
    const auto shifted =
        eigensolve(harper_hamiltonian(f, k1, k2 + 2 * pi / (q * l0), 1.0)).values;
    CHECK((base - shifted).cwiseAbs().maxCoeff() < 1e-12);
    // Half-period offsets in both directions flip the sign of T1 and T2.
    const double off = pi * p / (q * l0);
    Eigen::VectorXd flipped = -eigensolve(harper_hamiltonian(f, k1 + off, k2 + off, 1.0)).values;
    std::sort(flipped.data(), flipped.data() + flipped.size());
    CHECK((base - flipped).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("Farey flux list") {
  const auto list = farey_fluxes(12);
  CHECK(list.front() == FluxRatio(12, 1));
  CHECK(list.back() == FluxRatio(1, 4));
  for (std::size_t i = 1; i < list.size(); ++i) CHECK(list[i].inverse() > list[i - 1].inverse());
  for (const auto& f : list) CHECK(f.inverse() <= 4.0);
  CHECK_THROWS_AS(butterfly({}, {4, 4}), EmptyGrid);
  CHECK_THROWS_AS(k_points(FluxRatio(1, 2), {0, 4}), EmptyGrid);
}

TEST_CASE("crystal Hamiltonian") {
  ModelParams m;
  m.flux = FluxRatio(3, 2);
  m.v_over_hwc = 1e-14;
  const auto free = eigensolve(crystal_hamiltonian(m, 0.1, 0.2, 4));
  for (int j = 0; j < free.values.size(); ++j) {
    CHECK(std::abs(free.values(j) - (j / 3 + 0.5)) < 1e-12);
  }

  // Weak coupling: the lowest band follows the Harper ground state.
  m.flux = FluxRatio(1, 2);
  for (double v : {0.01, 0.02, 0.04}) {
    m.v_over_hwc = v;
    const double e = eigensolve(crystal_hamiltonian(m, 0, 0, 30)).values(0);
    const double harper = 0.5 - 2.0 * v0(m);
    CHECK(std::abs(e - harper) < 2.0 * v * v);
  }
  m.hw0_over_v = 0.5;
  CHECK_THROWS_AS(crystal_hamiltonian(m, 0, 0, 4), ValidationError);
}

TEST_CASE("confined Hamiltonian matches the Kronecker construction") {
  ModelParams m;
  m.v_over_hwc = 0.3;
  m.hw0_over_v = 0.7;
  const int n_max = 5, m_max = 14;
  const MatrixXc oracle = confined_by_kron(m, n_max, m_max);
  const auto h = confined_hamiltonian(m, n_max, m_max);
  CHECK((h.entries - oracle).cwiseAbs().maxCoeff() < 1e-13);

  const auto phased = confined_blocks(m, n_max, m_max, {0.4, -1.1});
  CHECK(phased.blocks.size() == 1);
  CHECK((phased.assemble().entries - confined_by_kron(m, n_max, m_max, 0.4, -1.1))
            .cwiseAbs()
            .maxCoeff() < 1e-13);

  // The blocked solve reproduces the dense one.
  const auto dense = eigensolve(HermitianMatrix{h.basis, oracle}, 8);
  const auto blocked = eigensolve(confined_blocks(m, n_max, m_max), 8);
  CHECK((dense.values - blocked.values).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(blocked.max_residual < 1e-9);
  CHECK(blocked.orthonormality_defect < 1e-10);

  m.hw0_over_v = 0.0;
  CHECK_THROWS_AS(confined_hamiltonian(m, 2, 2), ZeroConfinement);
}

TEST_CASE("C4 sectors decouple exactly") {
  ModelParams m;
  m.v_over_hwc = 0.25;
  m.hw0_over_v = 0.5;
  const int m_max = 10;
  const MatrixXc oracle = confined_by_kron(m, 4, m_max);
  for (int i = 0; i < oracle.rows(); ++i) {
    for (int j = 0; j < oracle.cols(); ++j) {
      const int si = ((i % (m_max + 1)) - i / (m_max + 1) + 400) % 4;
      const int sj = ((j % (m_max + 1)) - j / (m_max + 1) + 400) % 4;
      if (si != sj) CHECK(std::abs(oracle(i, j)) < 1e-14);
    }
  }
  const auto blocks = confined_blocks(m, 4, m_max);
  for (const auto& b : blocks.blocks) CHECK(b.imag().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("quadratic limit matches the normal-mode oracle") {
  ModelParams m;
  m.v_over_hwc = 1e-12;
  const double kappa = 0.1;
  m.hw0_over_v = std::sqrt(kappa) / m.v_over_hwc;
  const auto s = eigensolve(confined_blocks(m, 30, 30), 3);
  const double root = std::sqrt(1 + 4 * kappa);
  const double e0 = (root - 1 - 2 * kappa) / 2;  // zero point relative to a^dag a + kappa(...)
  const double plus = (root + 1) / 2, minus = (root - 1) / 2;
  CHECK(std::abs(s.values(0) - e0) < 1e-9);
  CHECK(std::abs(s.values(1) - (e0 + minus)) < 1e-9);
  CHECK(std::abs(s.values(2) - (e0 + std::min(2 * minus, plus))) < 1e-9);
}

TEST_CASE("LLL operator: projection, sparsity and the unconfined limit") {
  ModelParams m;
  m.v_over_hwc = 0.3;
  m.hw0_over_v = 0.6;
  const int m_max = 24;
  const auto lll = lll_confined_hamiltonian(m, m_max);
  const auto full = confined_hamiltonian(m, 6, m_max);
  CHECK((lll.entries - full.entries.topLeftCorner(m_max + 1, m_max + 1)).cwiseAbs().maxCoeff() <
        1e-13);
  for (int i = 0; i <= m_max; ++i)
    for (int j = 0; j <= m_max; ++j)
      if ((i - j) % 4 != 0) CHECK(lll.entries(i, j) == cd(0, 0));

  // Unconfined ground energy approaches -2 V0 roughly as 1/m_max; Aitken
  // extrapolation over m_max = 100, 200, 400.
  std::vector<double> e;
  for (int mm : {100, 200, 400}) e.push_back(eigensolve(lll_grid_blocks(0.0, mm), 1).values(0));
  CHECK(e[2] < e[1]);
  CHECK(e[1] < e[0]);
  const double d1 = e[1] - e[0], d2 = e[2] - e[1];
  const double limit = e[2] - d2 * d2 / (d2 - d1);
  MESSAGE("E0(400) = " << e[2] << ", extrapolated " << limit);
  CHECK(std::abs(limit + 2.0) < 2e-3);
}

TEST_CASE("LLL weight") {
  ModelParams m;
  m.v_over_hwc = 0.4;
  m.hw0_over_v = 0.8;
  const auto s = eigensolve(confined_blocks(m, 12, 160), 1);
  CHECK(std::abs(lll_weight(s.vectors.col(0), s.basis) - 0.981) < 0.005);

  double previous = 1.0;
  for (double v : {0.1, 0.25, 0.4}) {
    m.v_over_hwc = v;
    const auto g = eigensolve(confined_blocks(m, 16, 80), 1);
    const double w = lll_weight(g.vectors.col(0), g.basis);
    CHECK(w < previous);
    previous = w;
  }

  m.v_over_hwc = 1e-12;
  m.hw0_over_v = 1e-3 / m.v_over_hwc;
  const auto vac = eigensolve(confined_blocks(m, 4, 8), 1);
  CHECK(std::abs(lll_weight(vac.vectors.col(0), vac.basis) - 1.0) < 1e-12);
}

TEST_CASE("gap law and level crossing") {
  std::vector<double> h;
  for (int i = 0; i < 7; ++i) h.push_back(0.08 + 0.02 * i);
  const auto sweep = confined_sweep(0.25, h, FluxRatio(1, 2), 12, 200, 2);
  for (const auto& e : sweep.energies) CHECK(e[1] > e[0]);
  for (const auto& s : sweep.sectors) {
    CHECK(s[0] == 0);
    CHECK(s[1] == 2);
  }
  const auto fit = fit_gap_law(sweep);
  CHECK(fit.alpha > 0);
  CHECK(fit.r_squared > 0.99);

  std::vector<double> wide;
  for (int i = 0; i < 20; ++i) wide.push_back(0.3 + 0.02 * i);
  const auto fig = confined_sweep(0.25, wide, FluxRatio(1, 2), 10, 120, 4);
  CHECK_FALSE(find_crossings(fig, 1).empty());
}

TEST_CASE("truncation doubling report") {
  ModelParams m;
  m.v_over_hwc = 0.3;
  m.hw0_over_v = 0.8;
  const auto r = confined_convergence(m, 4, 10, 5);
  const auto base = eigensolve(confined_hamiltonian(m, 4, 10), 5);
  const auto fine = eigensolve(confined_hamiltonian(m, 8, 20), 5);
  REQUIRE(r.values.size() == 5);
  double shift = 0.0;
  for (int j = 0; j < 5; ++j) {
    CHECK(std::abs(r.values[j] - base.values(j)) < 1e-10);
    CHECK(std::abs(r.doubled[j] - fine.values(j)) < 1e-10);
    shift = std::max(shift, std::abs(base.values(j) - fine.values(j)));
  }
  CHECK(r.max_shift == doctest::Approx(shift).epsilon(1e-6));
}
