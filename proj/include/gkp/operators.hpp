#pragma once

// Ladder, quadrature, displacement and magnetic-translation operators in
// truncated bases. Everything here is a template on the real scalar type so
// that the builders compose with Eigen expressions of either precision.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include "gkp/core.hpp"

namespace gkp {

template <typename Real>
using ComplexMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using MatrixXc = ComplexMatrix<double>;
using VectorXc = ComplexVector<double>;

enum class BasisKind { FockSingle, FockProduct, BlochLL, BlochLLL };

/// Labels the truncated basis a matrix is written in.
///
///  - FockSingle(m_max):        |m>, m = 0..m_max
///  - FockProduct(n_max, m_max): |n, m> = |n>_a (x) |m>_b, index n * (m_max+1) + m
///  - BlochLL(n_max, p):        |n; k, l>, index n * p + l
///  - BlochLLL(p):              |k, l>, l = 0..p-1
struct BasisTag {
  BasisKind kind = BasisKind::FockSingle;
  int n_max = 0;
  int m_max = 0;
  int p = 1;

  static BasisTag fock_single(int m_max) { return {BasisKind::FockSingle, 0, m_max, 1}; }
  static BasisTag fock_product(int n_max, int m_max) {
    return {BasisKind::FockProduct, n_max, m_max, 1};
  }
  static BasisTag bloch_ll(int n_max, int p) { return {BasisKind::BlochLL, n_max, 0, p}; }
  static BasisTag bloch_lll(int p) { return {BasisKind::BlochLLL, 0, 0, p}; }

  int dim() const {
    switch (kind) {
      case BasisKind::FockSingle: return m_max + 1;
      case BasisKind::FockProduct: return (n_max + 1) * (m_max + 1);
      case BasisKind::BlochLL: return (n_max + 1) * p;
      case BasisKind::BlochLLL: return p;
    }
    return 0;
  }

  friend bool operator==(const BasisTag&, const BasisTag&) = default;
};

template <typename Real>
Real max_hermiticity_defect(const ComplexMatrix<Real>& m) {
  if (m.size() == 0) return Real(0);
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Dense self-adjoint operator with its basis. `truncation_defect` is the
/// quality scalar of the truncation that produced it (0 when exact).
template <typename Real>
struct HermitianMatrixT {
  BasisTag basis;
  ComplexMatrix<Real> entries;
  Real truncation_defect = Real(0);
  bool truncation_warning = false;

  int dim() const { return static_cast<int>(entries.rows()); }

  /// Throws NonHermitianInput unless the invariants hold.
  void check(Real tolerance = Real(1e-12)) const {
    if (entries.rows() != entries.cols() || entries.rows() != basis.dim()) {
      throw NonHermitianInput("matrix shape does not match its basis");
    }
    if (max_hermiticity_defect(entries) > tolerance) {
      throw NonHermitianInput("matrix is not self-adjoint");
    }
  }
};

template <typename Real>
struct UnitaryMatrixT {
  BasisTag basis;
  ComplexMatrix<Real> entries;
  /// max |(U^dagger U - 1)_ij| over the trusted block i, j < m_max / 2.
  Real unitarity_defect = Real(0);
  /// Set when |alpha|^2 > m_max: the displaced states leave the truncation.
  bool truncation_warning = false;
};

using HermitianMatrix = HermitianMatrixT<double>;
using UnitaryMatrix = UnitaryMatrixT<double>;

/// Annihilation operator b on |0>..|m_max>.
template <typename Real = double>
ComplexMatrix<Real> ladder_matrix(int m_max) {
  if (m_max < 1) throw ValidationError("ladder_matrix needs m_max >= 1");
  ComplexMatrix<Real> b = ComplexMatrix<Real>::Zero(m_max + 1, m_max + 1);
  for (int m = 1; m <= m_max; ++m) b(m - 1, m) = std::sqrt(static_cast<Real>(m));
  return b;
}

/// Generalized Laguerre polynomials L_n^k(x) for n = 0..n_max, upward
/// three-term recurrence.
template <typename Real>
std::vector<Real> laguerre_column(int n_max, int k, Real x) {
  std::vector<Real> out(static_cast<std::size_t>(n_max) + 1);
  out[0] = Real(1);
  if (n_max >= 1) out[1] = Real(1) + Real(k) - x;
  for (int n = 1; n < n_max; ++n) {
    out[n + 1] = ((Real(2 * n + 1 + k) - x) * out[n] - Real(n + k) * out[n - 1]) / Real(n + 1);
  }
  return out;
}

template <typename Real>
Real unitarity_defect_on_block(const ComplexMatrix<Real>& u, int block) {
  const auto head = u.leftCols(block);
  const ComplexMatrix<Real> gram = head.adjoint() * head;
  return (gram - ComplexMatrix<Real>::Identity(block, block)).cwiseAbs().maxCoeff();
}

/// Exact matrix elements <m|D(alpha)|n> of D(alpha) = exp(alpha b^dag - alpha^* b)
/// on |0>..|m_max>:
///   sqrt(n!/m!) alpha^(m-n) exp(-|alpha|^2/2) L_n^(m-n)(|alpha|^2),  m >= n,
/// and the m < n entries from D(alpha)^dag = D(-alpha).
template <typename Real = double>
UnitaryMatrixT<Real> displacement_matrix(std::complex<Real> alpha, int m_max) {
  if (m_max < 0) throw ValidationError("displacement_matrix needs m_max >= 0");
  const int dim = m_max + 1;
  UnitaryMatrixT<Real> out;
  out.basis = BasisTag::fock_single(m_max);
  out.entries = ComplexMatrix<Real>::Identity(dim, dim);
  const Real x = std::norm(alpha);
  out.truncation_warning = x > Real(m_max);
  if (x == Real(0)) return out;

  const Real log_abs = std::log(std::abs(alpha));
  const Real phase = std::arg(alpha);
  std::vector<Real> log_fact(dim);
  for (int i = 0; i < dim; ++i) log_fact[i] = std::lgamma(Real(i + 1));

  for (int k = 0; k <= m_max; ++k) {
    const auto lag = laguerre_column<Real>(m_max - k, k, x);
    // (-1)^k conj(alpha)^k / |alpha|^k = exp(i k (pi - arg alpha)) for the upper triangle.
    const std::complex<Real> lower_phase = std::polar(Real(1), Real(k) * phase);
    const std::complex<Real> upper_phase =
        std::polar(Real(1), Real(k) * (std::numbers::pi_v<Real> - phase));
    for (int n = 0; n + k <= m_max; ++n) {
      const int m = n + k;
      const Real magnitude =
          std::exp(Real(0.5) * (log_fact[n] - log_fact[m]) + Real(k) * log_abs - x / 2) * lag[n];
      out.entries(m, n) = magnitude * lower_phase;
      if (k > 0) out.entries(n, m) = magnitude * upper_phase;
    }
  }
  out.unitarity_defect = unitarity_defect_on_block(out.entries, std::max(1, m_max / 2));
  return out;
}

template <typename Real>
struct QuadraturesT {
  HermitianMatrixT<Real> x;
  HermitianMatrixT<Real> p;
  /// max |([X,P] - i)_ij| outside the last row/column.
  Real commutator_defect = Real(0);
};
using Quadratures = QuadraturesT<double>;

/// X = (b + b^dag)/sqrt2 and P = (b - b^dag)/(i sqrt2).
template <typename Real = double>
QuadraturesT<Real> quadrature_matrices(int m_max) {
  const ComplexMatrix<Real> b = ladder_matrix<Real>(m_max);
  const ComplexMatrix<Real> bd = b.adjoint();
  const Real s = Real(1) / std::sqrt(Real(2));
  const std::complex<Real> minus_i(0, -1);
  QuadraturesT<Real> out;
  out.x.basis = out.p.basis = BasisTag::fock_single(m_max);
  out.x.entries = s * (b + bd);
  out.p.entries = (minus_i * s) * (b - bd);
  const ComplexMatrix<Real> comm = out.x.entries * out.p.entries - out.p.entries * out.x.entries;
  const int inner = m_max;  // drop the last row/column
  out.commutator_defect =
      (comm.topLeftCorner(inner, inner) -
       std::complex<Real>(0, 1) * ComplexMatrix<Real>::Identity(inner, inner))
          .cwiseAbs()
          .maxCoeff();
  return out;
}

template <typename Real>
struct MtoPairT {
  ComplexMatrix<Real> t1;  ///< T1(q L0 / p)
  ComplexMatrix<Real> t2;  ///< T2(q L0 / p)
};
using MtoPair = MtoPairT<double>;

/// Wraps (k1, k2) into the magnetic Brillouin zone [0, 2pi/qL0) x [0, 2pi/L0).
inline std::pair<double, double> wrap_to_brillouin_zone(const FluxRatio& flux, double k1,
                                                        double k2) {
  const double l0 = flux.lattice_constant();
  const double span1 = 2.0 * std::numbers::pi / (flux.q() * l0);
  const double span2 = 2.0 * std::numbers::pi / l0;
  auto wrap = [](double k, double span) {
    double r = std::fmod(k, span);
    if (r < 0) r += span;
    // fmod leaves values within rounding of the upper edge
    if (r >= span * (1.0 - 1e-14)) r = 0.0;
    return r;
  };
  return {wrap(k1, span1), wrap(k2, span2)};
}

/// p x p representation of the magnetic translations T1(qL0/p), T2(qL0/p) on
/// the Bloch states |k, l>, l = 0..p-1, with k in units of 1/l_B:
///   T2 |k,l> = exp(i q (k2 L0 + 2 pi l) / p) |k,l>
///   T1 |k,l> = exp(i k1 q L0 / p) |k, (l+1) mod p>
template <typename Real = double>
MtoPairT<Real> mto_pair(const FluxRatio& flux, double k1, double k2) {
  const auto [w1, w2] = wrap_to_brillouin_zone(flux, k1, k2);
  const int p = flux.p();
  const int q = flux.q();
  const Real l0 = static_cast<Real>(flux.lattice_constant());
  const Real two_pi = 2 * std::numbers::pi_v<Real>;
  MtoPairT<Real> out;
  out.t1 = ComplexMatrix<Real>::Zero(p, p);
  out.t2 = ComplexMatrix<Real>::Zero(p, p);
  const std::complex<Real> hop = std::polar(Real(1), Real(w1) * q * l0 / p);
  for (int l = 0; l < p; ++l) {
    // q * 2 pi l / p reduced mod 2 pi keeps the phase argument small
    const int ql = static_cast<int>((static_cast<long long>(q) * l) % p);
    out.t2(l, l) = std::polar(Real(1), (q * Real(w2) * l0 + two_pi * ql) / p);
    out.t1((l + 1) % p, l) = hop;
  }
  return out;
}

/// Hermite functions psi_0(x)..psi_m_max(x), i.e. <x|m> for the Fock states
/// of b = (X + iP)/sqrt2, by the normalized upward recurrence.
template <typename Real = double>
std::vector<Real> hermite_functions(int m_max, Real x) {
  std::vector<Real> out(static_cast<std::size_t>(m_max) + 1);
  out[0] = std::exp(-x * x / 2) / std::pow(std::numbers::pi_v<Real>, Real(0.25));
  if (m_max >= 1) out[1] = std::sqrt(Real(2)) * x * out[0];
  for (int m = 1; m < m_max; ++m) {
    out[m + 1] = std::sqrt(Real(2) / Real(m + 1)) * x * out[m] -
                 std::sqrt(Real(m) / Real(m + 1)) * out[m - 1];
  }
  return out;
}

/// Discrete Fourier transform written in the Fock basis through the
/// Gauss-Hermite rule whose nodes are the eigenvalues of the truncated X on
/// |0>..|n_nodes-1> (default 2(m_max+1)):
///   F_{m'm} = sum_{kj} psi_m'(x_k) w_k e^{-i x_k x_j}/sqrt(2pi) w_j psi_m(x_j).
/// Columns with m well inside the truncation approach (-i)^m e_m.
template <typename Real = double>
ComplexMatrix<Real> hermite_fourier_matrix(int m_max, int n_nodes = 0) {
  using RealMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  const int dim = m_max + 1;
  if (n_nodes <= 0) n_nodes = 2 * dim;
  if (n_nodes < dim) throw ValidationError("hermite_fourier_matrix needs n_nodes > m_max");
  RealMatrix x = RealMatrix::Zero(n_nodes, n_nodes);
  for (int m = 1; m < n_nodes; ++m) {
    x(m - 1, m) = x(m, m - 1) = std::sqrt(Real(m) / 2);
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(x, Eigen::EigenvaluesOnly);
  const auto& nodes = solver.eigenvalues();

  // psi(j, m) = psi_m(x_j); Christoffel weights w_j = 1 / sum_m psi_m(x_j)^2.
  RealMatrix psi(n_nodes, dim);
  Eigen::Matrix<Real, Eigen::Dynamic, 1> w(n_nodes);
  for (int j = 0; j < n_nodes; ++j) {
    const auto h = hermite_functions<Real>(n_nodes - 1, nodes(j));
    Real sum = 0;
    for (Real v : h) sum += v * v;
    for (int m = 0; m < dim; ++m) psi(j, m) = h[m];
    w(j) = Real(1) / sum;
  }
  ComplexMatrix<Real> kernel(n_nodes, n_nodes);
  const Real norm = Real(1) / std::sqrt(2 * std::numbers::pi_v<Real>);
  for (int k = 0; k < n_nodes; ++k) {
    for (int j = 0; j < n_nodes; ++j) {
      kernel(k, j) = (norm * w(k) * w(j)) * std::polar(Real(1), -nodes(k) * nodes(j));
    }
  }
  const ComplexMatrix<Real> basis = psi.template cast<std::complex<Real>>();
  return basis.transpose() * kernel * basis;
}

}  // namespace gkp
