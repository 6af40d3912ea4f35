#pragma once

#include <Eigen/SparseCore>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "vessel/types.hpp"

namespace vessel {

/// Compressed row storage: outer indices are row offsets, inner indices are
/// column indices (strictly increasing within a row after finalization).
template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

template <typename Scalar>
using Triplet = Eigen::Triplet<Scalar>;

template <typename Scalar>
struct SolverReport {
  int iterations = 0;
  Scalar final_residual = 0;  ///< ||Ax-b|| / ||b|| (absolute when b = 0)
  bool converged = false;
};

/// Sum triplets into canonical compressed form. Duplicate (row, col) entries
/// accumulate.
template <typename Scalar>
SparseMatrix<Scalar> assemble(Index rows, Index cols,
                              const std::vector<Triplet<Scalar>>& triplets) {
  for (const auto& t : triplets) {
    if (t.row() < 0 || t.row() >= rows || t.col() < 0 || t.col() >= cols)
      throw std::out_of_range("assemble: triplet index (" +
                              std::to_string(t.row()) + ", " +
                              std::to_string(t.col()) + ") outside " +
                              std::to_string(rows) + "x" + std::to_string(cols));
  }
  SparseMatrix<Scalar> A(rows, cols);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  return A;
}

namespace detail {

template <typename Scalar>
VectorX<Scalar> jacobi_diagonal(const SparseMatrix<Scalar>& A) {
  VectorX<Scalar> inv = VectorX<Scalar>::Ones(A.rows());
  for (Index i = 0; i < A.rows(); ++i) {
    const Scalar d = A.coeff(i, i);
    if (d != Scalar(0)) inv[i] = Scalar(1) / d;
  }
  return inv;
}

template <typename Scalar>
int default_cap(const SparseMatrix<Scalar>& A, int max_iterations) {
  if (max_iterations > 0) return max_iterations;
  return static_cast<int>(10 * A.rows());  // default iteration cap 10*n
}

}  // namespace detail

/// Preconditioned conjugate gradients (Jacobi) for symmetric positive
/// definite systems. Stops on the true relative residual ||Ax-b||/||b||;
/// a zero right-hand side is answered exactly by x = 0.
template <typename Scalar>
std::pair<VectorX<Scalar>, SolverReport<Scalar>> solve_spd(
    const SparseMatrix<Scalar>& A, const VectorX<Scalar>& b, Scalar tol,
    int max_iterations = -1) {
  const Index n = A.rows();
  VectorX<Scalar> x = VectorX<Scalar>::Zero(n);
  SolverReport<Scalar> report;

  const Scalar b_norm = b.norm();
  if (b_norm == Scalar(0)) {
    report.converged = true;
    return {x, report};
  }

  const int cap = detail::default_cap(A, max_iterations);
  const VectorX<Scalar> inv_diag = detail::jacobi_diagonal(A);

  VectorX<Scalar> r = b;  // x = 0
  VectorX<Scalar> z = inv_diag.cwiseProduct(r);
  VectorX<Scalar> p = z;
  Scalar rz = r.dot(z);

  while (report.iterations < cap) {
    const VectorX<Scalar> Ap = A * p;
    const Scalar pAp = p.dot(Ap);
    if (!(pAp > Scalar(0))) break;  // loss of positive definiteness or NaN
    const Scalar alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    ++report.iterations;

    if (r.norm() <= tol * b_norm) {
      // The recurrence residual can drift; confirm against the true one.
      r = b - A * x;
      if (r.norm() <= tol * b_norm) break;
      z = inv_diag.cwiseProduct(r);
      p = z;
      rz = r.dot(z);
      continue;
    }
    z = inv_diag.cwiseProduct(r);
    const Scalar rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }

  const Scalar res = (b - A * x).norm() / b_norm;
  report.final_residual = res;
  report.converged = std::isfinite(res) && res <= tol;
  return {x, report};
}

/// Restarted GMRES with incomplete-LU preconditioning (Jacobi fallback when
/// the factorization fails) for square nonsingular systems. Right
/// preconditioning keeps the iteration residual equal to the true residual.
/// Breakdown and iteration-cap exhaustion come back as converged = false.
template <typename Scalar>
std::pair<VectorX<Scalar>, SolverReport<Scalar>> solve_general(
    const SparseMatrix<Scalar>& A, const VectorX<Scalar>& b, Scalar tol,
    int max_iterations = -1, int restart = 60) {
  const Index n = A.rows();
  VectorX<Scalar> x = VectorX<Scalar>::Zero(n);
  SolverReport<Scalar> report;

  const Scalar b_norm = b.norm();
  if (b_norm == Scalar(0)) {
    report.converged = true;
    return {x, report};
  }

  Eigen::IncompleteLUT<Scalar> ilut;
  // Tight factorization: saddle-point blocks (momentum/continuity coupling
  // with zero pressure diagonal) need the Schur fill kept, and the 2D systems
  // here are small enough that a near-complete factor is cheap.
  ilut.setDroptol(Scalar(1e-8));
  ilut.setFillfactor(100);
  ilut.compute(A);
  const bool use_ilut = (ilut.info() == Eigen::Success);
  const VectorX<Scalar> inv_diag =
      use_ilut ? VectorX<Scalar>() : detail::jacobi_diagonal(A);
  const auto precondition = [&](const VectorX<Scalar>& v) -> VectorX<Scalar> {
    return use_ilut ? ilut.solve(v).eval() : inv_diag.cwiseProduct(v).eval();
  };

  const int cap = detail::default_cap(A, max_iterations);
  const int m = std::min<int>(restart, static_cast<int>(n));

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> H(m + 1, m);
  std::vector<VectorX<Scalar>> V(m + 1);
  VectorX<Scalar> cs(m), sn(m), g(m + 1);

  bool stop = false;
  while (!stop && report.iterations < cap) {
    VectorX<Scalar> r = b - A * x;
    const Scalar beta = r.norm();
    if (!std::isfinite(beta)) break;
    if (beta <= tol * b_norm) break;

    H.setZero();
    g.setZero();
    g[0] = beta;
    V[0] = r / beta;

    int k = 0;
    for (; k < m && report.iterations < cap; ++k) {
      ++report.iterations;
      VectorX<Scalar> w = A * precondition(V[k]);
      for (int i = 0; i <= k; ++i) {  // modified Gram-Schmidt
        H(i, k) = w.dot(V[i]);
        w -= H(i, k) * V[i];
      }
      H(k + 1, k) = w.norm();
      if (!std::isfinite(H(k + 1, k))) {
        stop = true;
        ++k;
        break;
      }
      const bool breakdown = H(k + 1, k) <= Scalar(1e-14) * beta;
      if (!breakdown) V[k + 1] = w / H(k + 1, k);

      for (int i = 0; i < k; ++i) {  // apply stored Givens rotations
        const Scalar t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const Scalar denom = std::hypot(H(k, k), H(k + 1, k));
      if (denom == Scalar(0)) {
        stop = true;
        ++k;
        break;
      }
      cs[k] = H(k, k) / denom;
      sn[k] = H(k + 1, k) / denom;
      H(k, k) = denom;
      H(k + 1, k) = Scalar(0);
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];

      if (std::abs(g[k + 1]) <= tol * b_norm || breakdown) {
        ++k;
        break;
      }
    }

    if (k > 0) {
      // Solve the k x k triangular system and expand the correction.
      VectorX<Scalar> y = g.head(k);
      for (int i = k - 1; i >= 0; --i) {
        for (int j = i + 1; j < k; ++j) y[i] -= H(i, j) * y[j];
        if (H(i, i) == Scalar(0)) {
          stop = true;
          y[i] = Scalar(0);
          continue;
        }
        y[i] /= H(i, i);
      }
      VectorX<Scalar> dz = VectorX<Scalar>::Zero(n);
      for (int i = 0; i < k; ++i) dz += y[i] * V[i];
      const VectorX<Scalar> dx = precondition(dz);
      if (!dx.allFinite()) break;
      x += dx;
    } else {
      break;
    }
  }

  const Scalar res = (b - A * x).norm() / b_norm;
  report.final_residual = res;
  report.converged = std::isfinite(res) && res <= tol;
  if (!report.converged && !x.allFinite()) x.setZero();
  return {x, report};
}

}  // namespace vessel
