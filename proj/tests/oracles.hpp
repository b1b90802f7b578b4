#pragma once

// Brute-force reference implementations used to check the library. They
// share nothing with src/ beyond the public data types.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qens/qsim.hpp"

namespace oracle {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Mat one_qubit(qens::GateKind k, double t) {
  const cd i(0, 1);
  const double c = std::cos(t / 2), s = std::sin(t / 2);
  Mat m(2, 2);
  switch (k) {
    case qens::GateKind::H: m << 1, 1, 1, -1; m /= std::sqrt(2.0); break;
    case qens::GateKind::X: m << 0, 1, 1, 0; break;
    case qens::GateKind::Z: m << 1, 0, 0, -1; break;
    case qens::GateKind::RX: m << c, -i * s, -i * s, c; break;
    case qens::GateKind::RY: m << c, -s, s, c; break;
    case qens::GateKind::RZ: m << std::exp(-i * t / 2.0), 0, 0, std::exp(i * t / 2.0); break;
    case qens::GateKind::P: m << 1, 0, 0, std::exp(i * t); break;
    default: throw std::logic_error("not a one-qubit kind");
  }
  return m;
}

/// Operator on the whole register; qubit 0 is the rightmost Kronecker factor.
inline Mat lift(const Mat& u, int q, int n) {
  Mat out = Mat::Identity(1, 1);
  for (int k = n - 1; k >= 0; --k) out = kron(out, k == q ? u : Mat(Mat::Identity(2, 2)));
  return out;
}

inline Mat full_unitary(const qens::Gate& g, int n) {
  using qens::GateKind;
  const double t = g.angle;
  Mat p0(2, 2), p1(2, 2);
  p0 << 1, 0, 0, 0;
  p1 << 0, 0, 0, 1;
  auto controlled = [&](const Mat& u) {
    return Mat(lift(p0, g.qubits[0], n) + lift(p1, g.qubits[0], n) * lift(u, g.qubits[1], n));
  };
  switch (g.kind) {
    case GateKind::CNOT: return controlled(one_qubit(GateKind::X, 0));
    case GateKind::CZ: return controlled(one_qubit(GateKind::Z, 0));
    case GateKind::CRX: return controlled(one_qubit(GateKind::RX, t));
    case GateKind::CRZ: return controlled(one_qubit(GateKind::RZ, t));
    case GateKind::RZZ: {
      // exp(-i t/2 Z(x)Z): phase depends on whether the two bits agree.
      Mat m = Mat::Zero(1 << n, 1 << n);
      for (int b = 0; b < (1 << n); ++b) {
        const bool agree = ((b >> g.qubits[0]) & 1) == ((b >> g.qubits[1]) & 1);
        m(b, b) = std::exp(cd(0, agree ? -t / 2 : t / 2));
      }
      return m;
    }
    default: return lift(one_qubit(g.kind, t), g.qubits[0], n);
  }
}

/// Simulates a concrete (already bound) circuit by dense matrix products.
inline Vec run(const qens::CircuitSpec& c, Vec psi) {
  for (const auto& g : c.gates()) psi = full_unitary(g, c.n_qubits()) * psi;
  return psi;
}

inline Vec zero(int n) {
  Vec v = Vec::Zero(1 << n);
  v(0) = 1;
  return v;
}

inline Vec to_vec(const qens::StateVector& s) {
  Vec v(static_cast<Eigen::Index>(s.dim()));
  for (std::size_t i = 0; i < s.dim(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

/// Trace out everything but `keep` from the full density matrix.
inline Eigen::Matrix2cd partial_trace(const Vec& psi, int keep) {
  const Mat rho = psi * psi.adjoint();
  Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
  for (Eigen::Index a = 0; a < rho.rows(); ++a)
    for (Eigen::Index b = 0; b < rho.cols(); ++b) {
      if ((a & ~(Eigen::Index(1) << keep)) != (b & ~(Eigen::Index(1) << keep))) continue;
      out((a >> keep) & 1, (b >> keep) & 1) += rho(a, b);
    }
  return out;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

}  // namespace oracle
