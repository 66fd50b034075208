#include "mimoswitch/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace mimoswitch {

bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

double condition_number(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& s = svd.singularValues();
  double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

CMatrix invert(const CMatrix& m, double condition_cap) {
  if (m.rows() != m.cols()) throw std::invalid_argument("invert: non-square");
  double cond = condition_number(m);
  if (!(cond < condition_cap)) throw SingularMatrixError(cond);
  return m.partialPivLu().inverse();
}

double QuarticCoefficients::max_abs_coeff() const {
  return std::max({std::abs(c4), std::abs(c3), std::abs(c2), std::abs(c1),
                   std::abs(c0)});
}

std::vector<double> real_roots(const QuarticCoefficients& q) {
  double coeffs[5] = {q.c4, q.c3, q.c2, q.c1, q.c0};  // descending powers
  double scale = q.max_abs_coeff();
  if (scale == 0.0) return {};

  // Deflate numerically vanishing leading coefficients (the N=2 equal-SNR
  // quartic degenerates to a quadratic when q_1 = q_2).
  int lead = 0;
  while (lead < 4 && std::abs(coeffs[lead]) <= 1e-14 * scale) ++lead;
  int degree = 4 - lead;
  if (degree == 0) return {};

  std::vector<double> roots;
  if (degree == 1) {
    roots.push_back(-coeffs[4] / coeffs[3]);
    return roots;
  }

  // Companion matrix of the monic polynomial.
  RMatrix comp = RMatrix::Zero(degree, degree);
  for (int i = 0; i < degree; ++i)
    comp(0, i) = -coeffs[lead + 1 + i] / coeffs[lead];
  for (int i = 1; i < degree; ++i) comp(i, i - 1) = 1.0;

  Eigen::EigenSolver<RMatrix> es(comp, false);
  for (int i = 0; i < degree; ++i) {
    Complex ev = es.eigenvalues()(i);
    if (std::abs(ev.imag()) <= 1e-8 * (1.0 + std::abs(ev.real())))
      roots.push_back(ev.real());
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

double largest_real_root(const QuarticCoefficients& q) {
  auto roots = real_roots(q);
  if (roots.empty()) throw NoRealRootError();
  return roots.back();
}

PsdResult psd_check(const CMatrix& m) {
  if (!is_hermitian(m, 1e-10)) throw NonHermitianError();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  double lambda_min = es.eigenvalues()(0);
  double norm2 = std::max(std::abs(es.eigenvalues()(0)),
                          std::abs(es.eigenvalues()(m.rows() - 1)));
  return {lambda_min >= -1e-9 * norm2, lambda_min};
}

}  // namespace mimoswitch
