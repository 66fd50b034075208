/**
 * @file numerics.hpp
 * @brief Complex dense matrix utilities and scalar root finding shared by all
 * solver modules.
 */
#ifndef MIMOSWITCH_NUMERICS_HPP
#define MIMOSWITCH_NUMERICS_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mimoswitch {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(double condition_estimate)
      : std::runtime_error("matrix is singular or ill-conditioned, cond ~ " +
                           std::to_string(condition_estimate)),
        condition(condition_estimate) {}
  double condition;
};

class NoRealRootError : public std::runtime_error {
 public:
  NoRealRootError() : std::runtime_error("polynomial has no real root") {}
};

class NonHermitianError : public std::runtime_error {
 public:
  NonHermitianError() : std::runtime_error("matrix is not Hermitian") {}
};

inline constexpr double kDefaultConditionCap = 1e12;

bool is_hermitian(const CMatrix& m, double tol = 1e-12);

// Inverse of a square complex matrix. Throws SingularMatrixError when the
// condition number exceeds the cap.
CMatrix invert(const CMatrix& m, double condition_cap = kDefaultConditionCap);

// Two-norm condition number (SVD based; intended for small dense matrices).
double condition_number(const CMatrix& m);

// Real coefficients of c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0.
struct QuarticCoefficients {
  double c4 = 0, c3 = 0, c2 = 0, c1 = 0, c0 = 0;

  double eval(double x) const {
    return (((c4 * x + c3) * x + c2) * x + c1) * x + c0;
  }
  double max_abs_coeff() const;
};

// All real roots, via companion-matrix eigenvalues. Leading near-zero
// coefficients are deflated first. An eigenvalue counts as real when its
// imaginary part is <= 1e-8 * (1 + |real part|).
std::vector<double> real_roots(const QuarticCoefficients& q);

// Maximum real root; throws NoRealRootError when none exists.
double largest_real_root(const QuarticCoefficients& q);

struct PsdResult {
  bool psd;
  double min_eigenvalue;
};

// Positive semidefiniteness test for a Hermitian matrix. Accepts eigenvalues
// down to -1e-9 * ||m||_2. Throws NonHermitianError on non-Hermitian input.
PsdResult psd_check(const CMatrix& m);

}  // namespace mimoswitch

#endif
