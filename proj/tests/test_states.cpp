#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gkp/spectra.hpp"
#include "gkp/states.hpp"

using namespace gkp;
using cd = std::complex<double>;
using std::numbers::pi;

namespace {

double l2_distance(const SampledWavefunction& a, const VectorXc& b) {
  SampledWavefunction d = a;
  d.values = a.values - b;
  return std::sqrt(inner_product(d, d).real());
}

SampledWavefunction gaussian(const Grid1D& g) {
  SampledWavefunction psi;
  psi.grid = g;
  psi.values.resize(g.n);
  for (int i = 0; i < g.n; ++i) psi.values(i) = std::exp(-g.at(i) * g.at(i) / 2);
  return normalized(psi);
}

}  // namespace

TEST_CASE("grid and normalization") {
  const Grid1D g;
  CHECK(g.n == 4096);
  CHECK(g.weights().sum() == doctest::Approx(48.0));
  const auto psi = gaussian(g);
  CHECK(psi.norm_defect < 1e-8);
  CHECK_THROWS_AS(Grid1D({0, 1, 1}).validate(), EmptyGrid);

  SampledWavefunction rotated = psi;
  rotated.values *= cd(0, -3);
  const auto back = normalized(rotated);
  CHECK(back.values.cwiseAbs().maxCoeff() == doctest::Approx(back.values.real().maxCoeff()));
}

TEST_CASE("approximate grid states") {
  GridStateParams p;
  p.delta = 0.25;
  CHECK(p.peaks() == static_cast<int>(std::ceil(3 / (std::sqrt(pi) * 0.0625))) + 2);
  const auto psi0 = approx_grid_state(0, p);
  const auto psi1 = approx_grid_state(1, p);
  CHECK(psi0.norm_defect < 1e-8);
  CHECK(psi1.norm_defect < 1e-8);

  // Both are even in X on the symmetric grid.
  const int n = psi0.grid.n;
  for (int i = 0; i < n; i += 37) {
    CHECK(std::abs(psi0.values(i) - psi0.values(n - 1 - i)) < 1e-12);
    CHECK(std::abs(psi1.values(i) - psi1.values(n - 1 - i)) < 1e-12);
  }
  // Nearest-neighbour peaks sit sqrt(pi) apart: overlap ~ 2 exp(-pi / (4 delta^2)).
  const double overlap = std::abs(inner_product(psi0, psi1));
  CHECK(std::abs(overlap / (2 * std::exp(-pi / (4 * p.delta * p.delta))) - 1) < 0.1);

  // Peaks at multiples of 2 sqrt(pi) for j = 0, shifted by sqrt(pi) for j = 1.
  const auto peak0 = fit_central_peak(psi0);
  CHECK(std::abs(peak0.center) < 1e-6);
  const auto peak1 = fit_central_peak(psi1);
  CHECK(std::abs(std::abs(peak1.center) - std::sqrt(pi)) < 1e-2);

  GridStateParams narrow;
  narrow.delta = 0.1;
  CHECK_THROWS_AS(approx_grid_state(0, narrow), GridTooNarrow);
  CHECK_THROWS_AS(approx_grid_state(2, p), ValidationError);
}

TEST_CASE("small delta concentrates on the comb") {
  GridStateParams p;
  p.delta = 0.05;
  const Grid1D g{-80, 80, 16001};
  const auto psi = approx_grid_state(0, p, g);
  const Eigen::VectorXd w = g.weights();
  double near = 0.0;
  for (int i = 0; i < g.n; ++i) {
    const double x = g.at(i);
    const double offset = x - 2 * std::sqrt(pi) * std::round(x / (2 * std::sqrt(pi)));
    if (std::abs(offset) < 0.2) near += w(i) * std::norm(psi.values(i));
  }
  CHECK(near > 1 - 1e-6);
}

TEST_CASE("width law") {
  for (double delta : {0.2, 0.25, 0.3}) {
    GridStateParams p;
    p.delta = delta;
    const auto psi0 = approx_grid_state(0, p, Grid1D{-30, 30, 6001});
    CHECK(std::abs(fit_central_peak(psi0).width / delta - 1) < 0.02);
    CHECK(std::abs(fit_envelope(psi0).width * delta - 1) < 0.05);
  }
}

TEST_CASE("Fourier transform") {
  const Grid1D g;
  const auto psi = gaussian(g);
  const auto f = fourier_1d(psi);
  CHECK(f.norm_defect < 1e-8);
  CHECK(l2_distance(f, psi.values) < 1e-10);

  VectorXc one = VectorXc::Zero(2);
  one(1) = 1;
  const auto fock1 = sample_fock_state(one, g);
  CHECK(l2_distance(fourier_1d(fock1), cd(0, -1) * fock1.values) < 1e-10);

  CHECK_THROWS_AS(fourier_1d(sample_fock_state(one, Grid1D{-10, 12, 200})), ValidationError);
}

TEST_CASE("Hadamard pair") {
  GridStateParams p;
  p.delta = 0.25;
  const auto psi0 = approx_grid_state(0, p);
  const auto psi1 = approx_grid_state(1, p);
  CHECK(std::cos(pi / 8) == doctest::Approx(0.92388).epsilon(1e-5));
  CHECK(std::sin(pi / 8) == doctest::Approx(0.38268).epsilon(1e-5));

  const auto [plus, minus] = hadamard_pair(psi0, psi1);
  CHECK(std::abs(inner_product(plus, minus)) < std::abs(inner_product(psi0, psi1)) + 1e-10);

  const double bound = 5 * p.delta * p.delta;
  CHECK(l2_distance(fourier_1d(plus), plus.values) < bound);
  CHECK(l2_distance(fourier_1d(minus), -minus.values) < bound);
  CHECK(l2_distance(fourier_1d(psi0), (psi0.values + psi1.values) / std::sqrt(2.0)) < bound);

  // Even functions: no weight on odd Hermite functions.
  const VectorXc c = fock_coefficients(plus, 200);
  double odd = 0.0, total = 0.0;
  for (int m = 0; m <= 200; ++m) {
    total += std::norm(c(m));
    if (m % 2 == 1) odd += std::norm(c(m));
  }
  CHECK(odd < 1e-8 * total);

  SampledWavefunction other = psi1;
  other.grid.n = 4095;
  other.values.conservativeResize(4095);
  CHECK_THROWS_AS(hadamard_pair(psi0, other), GridMismatch);
}

TEST_CASE("fidelity") {
  VectorXc a = VectorXc::Zero(3), b = VectorXc::Zero(3);
  a(0) = 1;
  b(1) = 1;
  CHECK(fidelity(a, a) == doctest::Approx(1.0));
  CHECK(fidelity(a, b) == 0.0);
  CHECK(fidelity(VectorXc(cd(0, 1) * a), a) == doctest::Approx(1.0));
  const Grid1D g;
  CHECK(fidelity(a, sample_fock_state(b, g)) < 1e-20);
  CHECK(fidelity(a, gaussian(g)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("numerical LLL pair against the analytic combinations") {
  const double ratio = 0.05;
  const double delta = squeeze_delta_from_ratio(ratio);
  const auto s = eigensolve(lll_grid_blocks(ratio, 160), 3);
  REQUIRE(s.sectors[0] == 0);
  REQUIRE(s.sectors[1] == 2);

  GridStateParams p;
  p.delta = delta;
  const auto [plus, minus] = hadamard_pair(approx_grid_state(0, p), approx_grid_state(1, p));
  const double f_plus = fidelity(VectorXc(s.vectors.col(0)), plus);
  const double f_minus = fidelity(VectorXc(s.vectors.col(1)), minus);
  MESSAGE("fidelities " << f_plus << " " << f_minus);
  CHECK(f_plus > 0.99);
  CHECK(f_minus > 0.99);

  // Rayleigh quotients of the analytic states straddle a splitting of the
  // same order as the exact gap.
  const HermitianMatrix h = lll_grid_blocks(ratio, 160).assemble();
  const VectorXc cp = fock_coefficients(plus, 160);
  const VectorXc cm = fock_coefficients(minus, 160);
  const double ep = (cp.adjoint() * h.entries * cp)(0).real() / cp.squaredNorm();
  const double em = (cm.adjoint() * h.entries * cm)(0).real() / cm.squaredNorm();
  const double gap = s.values(1) - s.values(0);
  MESSAGE("Rayleigh splitting " << em - ep << ", exact gap " << gap);
  CHECK(std::abs(em - ep) < 3 * gap);
}
