/**
 * @file sdp.hpp
 * @brief Small dense semidefinite-program solver.
 *
 * Solves standard-form Hermitian SDPs
 *     min  Tr(C X)
 *     s.t. Tr(A_k X) = rhs_k   or   Tr(A_k X) >= rhs_k,
 *          X >= 0,
 * via a homogeneous self-dual primal-dual interior-point method with
 * Nesterov-Todd scaling. Complex Hermitian data is mapped onto the 2n x 2n
 * real symmetric embedding; inequality constraints get nonnegative slacks.
 * Designed for the tiny dense problems of the relay designs (n <= 9).
 */
#ifndef MIMOSWITCH_SDP_HPP
#define MIMOSWITCH_SDP_HPP

#include <utility>
#include <vector>

#include "mimoswitch/numerics.hpp"

namespace mimoswitch {

enum class ConstraintSense { Equal, GreaterEqual };

struct SdpConstraint {
  CMatrix A;  // Hermitian, same size as C
  ConstraintSense sense = ConstraintSense::Equal;
  double rhs = 0.0;
};

struct SdpProblem {
  CMatrix C;  // Hermitian objective
  std::vector<SdpConstraint> constraints;

  int dimension() const { return static_cast<int>(C.rows()); }
};

enum class SdpStatus { Optimal, Infeasible, MaxIter };

struct SdpSolution {
  CMatrix X;         // primal, Hermitian PSD
  RVector y;         // dual multipliers, one per constraint
  double objective = 0.0;
  double gap = 0.0;  // absolute duality gap <x, z> / tau^2
  SdpStatus status = SdpStatus::MaxIter;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

struct SdpOptions {
  int max_iter = 200;
  double tol = 1e-8;  // relative feasibility / gap tolerance
};

SdpSolution solve(const SdpProblem& prob, const SdpOptions& opts = {});

// Best rank-one approximation: returns the top eigenvector scaled by the
// square root of the top eigenvalue, plus ||X - vv^H||_F / ||X||_F.
std::pair<CVector, double> rank_one_extract(const CMatrix& x);

}  // namespace mimoswitch

#endif
