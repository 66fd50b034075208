#include "mimoswitch/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mimoswitch {
namespace {

// Cone element: one real symmetric PSD block plus a nonnegative orthant.
struct ConeVec {
  RMatrix S;
  RVector l;

  static ConeVec zero(int s, int nl) {
    return {RMatrix::Zero(s, s), RVector::Zero(nl)};
  }
  static ConeVec identity(int s, int nl) {
    return {RMatrix::Identity(s, s), RVector::Ones(nl)};
  }
  ConeVec operator+(const ConeVec& o) const { return {S + o.S, l + o.l}; }
  ConeVec operator-(const ConeVec& o) const { return {S - o.S, l - o.l}; }
  ConeVec operator*(double t) const { return {S * t, l * t}; }
  void axpy(double t, const ConeVec& o) {
    S += t * o.S;
    l += t * o.l;
  }
};

double dot(const ConeVec& a, const ConeVec& b) {
  return a.S.cwiseProduct(b.S).sum() + a.l.dot(b.l);
}

double norm(const ConeVec& a) { return std::sqrt(dot(a, a)); }

// Strict interiority plus a central-path neighbourhood bound: every
// complementarity eigenvalue must stay above a small fraction of mu,
// otherwise the NT scaling degenerates and the directions blow up.
bool in_neighbourhood(const ConeVec& vx, const ConeVec& vz, double vtau,
                      double vkappa, double nu, double gamma) {
  if (!(vtau > 0.0) || !(vkappa > 0.0)) return false;
  double mu = (dot(vx, vz) + vtau * vkappa) / (nu + 1.0);
  if (!(mu > 0.0)) return false;
  double lo = vtau * vkappa;
  if (vx.S.rows() > 0) {
    Eigen::LLT<RMatrix> llt(vx.S);
    if (llt.info() != Eigen::Success) return false;
    RMatrix l = llt.matrixL();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(l.transpose() * vz.S * l,
                                              Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues()(0));
  }
  if (vx.l.size() > 0) {
    if (!(vx.l.array() > 0.0).all() || !(vz.l.array() > 0.0).all())
      return false;
    lo = std::min(lo, (vx.l.array() * vz.l.array()).minCoeff());
  }
  return lo >= gamma * mu;
}

// Nesterov-Todd scaling data for the PSD block and the orthant.
struct NtScaling {
  RMatrix R, Rinv;  // R^-1 X R^-T = R^T Z R = diag(lambda)
  RVector lambda;   // PSD block scaled spectrum
  RMatrix Wnt;      // R R^T
  RVector wl;       // orthant scaling sqrt(x/z)
  RVector laml;     // orthant sqrt(x*z)
};

NtScaling make_scaling(const ConeVec& x, const ConeVec& z) {
  NtScaling sc;
  int s = static_cast<int>(x.S.rows());
  if (s > 0) {
    Eigen::LLT<RMatrix> lltx(x.S), lltz(z.S);
    RMatrix lx = lltx.matrixL();
    RMatrix lz = lltz.matrixL();
    Eigen::JacobiSVD<RMatrix> svd(lz.transpose() * lx,
                                  Eigen::ComputeFullU | Eigen::ComputeFullV);
    sc.lambda = svd.singularValues();
    RVector lam_isqrt = sc.lambda.cwiseSqrt().cwiseInverse();
    sc.R = lx * svd.matrixV() * lam_isqrt.asDiagonal();
    sc.Rinv = lam_isqrt.asDiagonal() * svd.matrixU().transpose() *
              lz.transpose();
    sc.Wnt = sc.R * sc.R.transpose();
  } else {
    sc.R = sc.Rinv = sc.Wnt = RMatrix::Zero(0, 0);
    sc.lambda = RVector::Zero(0);
  }
  sc.wl = (x.l.array() / z.l.array()).sqrt();
  sc.laml = (x.l.array() * z.l.array()).sqrt();
  return sc;
}

// F^-1(u) = Wnt U Wnt on the PSD block, w^2 u on the orthant.
ConeVec apply_Finv(const NtScaling& sc, const ConeVec& u) {
  ConeVec r = u;
  if (u.S.rows() > 0) r.S = sc.Wnt * u.S * sc.Wnt;
  r.l = sc.wl.array().square() * u.l.array();
  return r;
}

// Maximum step to the cone boundary, capped at `cap`.
double max_step(const ConeVec& x, const ConeVec& dx, double cap) {
  double alpha = cap;
  if (x.S.rows() > 0) {
    Eigen::LLT<RMatrix> llt(x.S);
    RMatrix l = llt.matrixL();
    RMatrix scaled = l.triangularView<Eigen::Lower>().solve(dx.S);
    scaled = l.triangularView<Eigen::Lower>()
                 .solve(scaled.transpose())
                 .transpose();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (scaled + scaled.transpose()),
                                              Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues()(0);
    if (lmin < 0) alpha = std::min(alpha, -1.0 / lmin);
  }
  for (int i = 0; i < x.l.size(); ++i)
    if (dx.l(i) < 0) alpha = std::min(alpha, -x.l(i) / dx.l(i));
  return alpha;
}

// Real symmetric embedding of a Hermitian matrix.
RMatrix embed(const CMatrix& m) {
  int n = static_cast<int>(m.rows());
  RMatrix t(2 * n, 2 * n);
  t.topLeftCorner(n, n) = m.real();
  t.topRightCorner(n, n) = -m.imag();
  t.bottomLeftCorner(n, n) = m.imag();
  t.bottomRightCorner(n, n) = m.real();
  return t;
}

CMatrix unembed(const RMatrix& y) {
  int n = static_cast<int>(y.rows()) / 2;
  CMatrix x(n, n);
  x.real() = 0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n));
  x.imag() = 0.5 * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n));
  return 0.5 * (x + x.adjoint()).eval();
}

}  // namespace

SdpSolution solve(const SdpProblem& prob, const SdpOptions& opts) {
  const int n = prob.dimension();
  const int s = 2 * n;  // real embedding size
  const int m = static_cast<int>(prob.constraints.size());

  // Scale data toward unit magnitude (outer searches can produce huge
  // right-hand sides); solutions are unscaled in finalize.
  double beta = 1.0, zeta = std::max(1.0, prob.C.cwiseAbs().maxCoeff());
  for (const SdpConstraint& ct : prob.constraints)
    beta = std::max(beta, std::abs(ct.rhs));

  // Slack layout: one orthant entry per inequality constraint.
  std::vector<int> slack_of(m, -1);
  int nl = 0;
  for (int k = 0; k < m; ++k)
    if (prob.constraints[k].sense == ConstraintSense::GreaterEqual)
      slack_of[k] = nl++;

  // Constraint k: <Ak_emb, Y> - slack_k = rhs_k  (factor 1/2 keeps the
  // embedded inner product equal to the complex one).
  std::vector<ConeVec> acons(m);
  RVector b(m);
  for (int k = 0; k < m; ++k) {
    acons[k] = ConeVec::zero(s, nl);
    acons[k].S = 0.5 * embed(prob.constraints[k].A);
    if (slack_of[k] >= 0) acons[k].l(slack_of[k]) = -1.0;
    b(k) = prob.constraints[k].rhs / beta;
  }
  ConeVec c = ConeVec::zero(s, nl);
  c.S = 0.5 * embed(prob.C) / zeta;

  auto apply_A = [&](const ConeVec& v) {
    RVector r(m);
    for (int k = 0; k < m; ++k) r(k) = dot(acons[k], v);
    return r;
  };
  auto apply_At = [&](const RVector& y) {
    ConeVec r = ConeVec::zero(s, nl);
    for (int k = 0; k < m; ++k) r.axpy(y(k), acons[k]);
    return r;
  };

  // Homogeneous self-dual state.
  ConeVec x = ConeVec::identity(s, nl);
  ConeVec z = ConeVec::identity(s, nl);
  RVector y = RVector::Zero(m);
  double tau = 1.0, kappa = 1.0;
  const double nu = s + nl;

  // Residuals and gaps are normalized in the *unscaled* problem's units so
  // the stopping test matches what the caller sees.
  double bnorm = 1.0 + beta * b.norm();
  double cnorm = 1.0 + zeta * norm(c);

  SdpSolution sol;
  auto finalize = [&](SdpStatus st) {
    sol.status = st;
    if (st == SdpStatus::Infeasible) return sol;
    double t = std::max(tau, 1e-300);
    RMatrix ys = x.S / t;
    sol.X = unembed(ys) * beta;
    sol.y = y * (zeta / t);
    sol.objective = dot(c, x) / t * beta * zeta;
    sol.gap = (dot(x, z) + tau * kappa) / (t * t) * beta * zeta;
    sol.primal_residual = beta * (apply_A(x) / t - b).norm() / bnorm;
    ConeVec dres = apply_At(y) + z - c * tau;
    sol.dual_residual = zeta * norm(dres) / t / cnorm;
    return sol;
  };

  // Best iterate by worst KKT measure; restored if the iteration stalls
  // near the cone boundary instead of hitting the tolerance exactly.
  struct Snapshot {
    ConeVec x, z;
    RVector y;
    double tau, kappa, merit;
  } best{x, z, y, tau, kappa, std::numeric_limits<double>::infinity()};
  auto finalize_best = [&](SdpStatus fallback) {
    x = best.x;
    z = best.z;
    y = best.y;
    tau = best.tau;
    kappa = best.kappa;
    return finalize(best.merit <= 10 * opts.tol ? SdpStatus::Optimal
                                                : fallback);
  };

  double step_alpha = 1.0;  // accepted fraction of the previous step
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    sol.iterations = iter;

    RVector rp = apply_A(x) - b * tau;
    ConeVec rd = (apply_At(y) * -1.0) + c * tau - z;
    double rg = b.dot(y) - dot(c, x) - kappa;
    double mu = (dot(x, z) + tau * kappa) / (nu + 1.0);

    // Optimality check on the de-homogenized, unscaled point.
    double pres = beta * (apply_A(x) / tau - b).norm() / bnorm;
    ConeVec dres_v = apply_At(y) + z - c * tau;
    double dres = zeta * norm(dres_v) / tau / cnorm;
    double pobj = dot(c, x) / tau * beta * zeta;
    double dobj = b.dot(y) / tau * beta * zeta;
    double relgap = (dot(x, z) + tau * kappa) / (tau * tau) * beta * zeta /
                    (1.0 + std::abs(pobj) + std::abs(dobj));
    double merit = std::max({pres, dres, relgap});
    if (merit < best.merit) best = {x, z, y, tau, kappa, merit};
    if (pres <= opts.tol && dres <= opts.tol && relgap <= opts.tol)
      return finalize(SdpStatus::Optimal);
    if (mu <= 0) break;  // corrupted iterate; fall back to the best one

    // Primal infeasibility certificate: A^T y + z ~ 0 with b^T y > 0 and
    // tau collapsing (a large finite optimum can mimic the ray otherwise).
    double by = b.dot(y);
    if (by > 0 && tau <= 1e-6 * std::max(1.0, kappa)) {
      ConeVec cert = apply_At(y) + z;
      if (norm(cert) <= 1e-9 * by)
        return finalize_best(SdpStatus::Infeasible);
    }
    if (tau <= 1e-10 * std::max(1.0, kappa) && mu <= 1e-10)
      return finalize_best(by > 0 ? SdpStatus::Infeasible
                                  : SdpStatus::MaxIter);

    NtScaling sc = make_scaling(x, z);

    // Schur complement M = A F^-1 A^T.
    RMatrix schur(m, m);
    std::vector<ConeVec> finv_a(m);
    for (int k = 0; k < m; ++k) finv_a[k] = apply_Finv(sc, acons[k]);
    for (int j = 0; j < m; ++j)
      for (int k = 0; k <= j; ++k)
        schur(j, k) = schur(k, j) = dot(acons[j], finv_a[k]);
    schur.diagonal().array() += 1e-13 * (1.0 + schur.diagonal().maxCoeff());
    Eigen::LDLT<RMatrix> schur_f(schur);
    // One pass of iterative refinement; the Schur complement squares the
    // scaling's condition number, and late iterations live off the extra
    // digits.
    auto schur_solve = [&](const RVector& rhs) {
      RVector v = schur_f.solve(rhs);
      for (int pass = 0; pass < 3; ++pass) v += schur_f.solve(rhs - schur * v);
      return v;
    };

    ConeVec finv_c = apply_Finv(sc, c);
    RVector y1 = schur_solve(apply_A(finv_c) + b);
    ConeVec x1 = apply_Finv(sc, apply_At(y1) - c);
    double denom_base = b.dot(y1) - dot(c, x1) + kappa / tau;

    // Near the optimum the dtau equation is noise over a gap-sized
    // denominator; freezing tau there turns the step into a plain
    // primal-dual iteration on the de-homogenized point, which converges
    // cleanly to full precision.
    const bool freeze_tau = merit < 1e-5;

    // One Newton solve for a given scaled complementarity target.
    auto direction = [&](const ConeVec& dtarget, double dtk, ConeVec& dx,
                         ConeVec& dz, RVector& dy, double& dtau,
                         double& dkappa) {
      ConeVec wzinv_d = dtarget;
      if (s > 0)
        wzinv_d.S = sc.Rinv.transpose() * dtarget.S * sc.Rinv;
      wzinv_d.l = dtarget.l.array() / sc.wl.array();
      ConeVec g = wzinv_d - rd;
      RVector y2 = schur_solve(-rp - apply_A(apply_Finv(sc, g)));
      ConeVec x2 = apply_Finv(sc, apply_At(y2) + g);
      dtau = freeze_tau
                 ? 0.0
                 : (-rg - b.dot(y2) + dot(c, x2) + dtk / tau) / denom_base;
      dy = y2 + dtau * y1;
      dx = x2 + x1 * dtau;
      // Correction pass on the primal row: the Schur elimination re-injects
      // ||A dx + rp|| ~ eps * cond(F) of error per iteration, which floors
      // the attainable primal residual well above the tolerance.
      for (int pass = 0; pass < 2; ++pass) {
        RVector res_p = apply_A(dx) - b * dtau + rp;
        RVector y2c = schur_solve(-res_p);
        ConeVec x2c = apply_Finv(sc, apply_At(y2c));
        double dtauc =
            freeze_tau ? 0.0
                       : (-b.dot(y2c) + dot(c, x2c)) / denom_base;
        dy += y2c + dtauc * y1;
        dx = dx + x2c + x1 * dtauc;
        dtau += dtauc;
      }
      dz = (apply_At(dy) * -1.0) + c * dtau + rd;
      dkappa = (dtk - kappa * dtau) / tau;
      // The scaled products above lose symmetry at the level of
      // eps * cond(R)^2, which the boundary-hugging endgame amplifies;
      // symmetrize explicitly so the iterates stay in the symmetric cone.
      if (s > 0) {
        dx.S = 0.5 * (dx.S + dx.S.transpose()).eval();
        dz.S = 0.5 * (dz.S + dz.S.transpose()).eval();
      }
    };

    // Affine (predictor) direction.
    ConeVec d_aff = ConeVec::zero(s, nl);
    if (s > 0) d_aff.S = (-sc.lambda).asDiagonal();
    d_aff.l = -sc.laml;
    ConeVec dxa, dza;
    RVector dya;
    double dtaua, dkappaa;
    direction(d_aff, -tau * kappa, dxa, dza, dya, dtaua, dkappaa);

    double alpha_a = max_step(x, dxa, 1.0);
    alpha_a = std::min(alpha_a, max_step(z, dza, 1.0));
    if (dtaua < 0) alpha_a = std::min(alpha_a, -tau / dtaua);
    if (dkappaa < 0) alpha_a = std::min(alpha_a, -kappa / dkappaa);

    double mu_aff = (dot(x + dxa * alpha_a, z + dza * alpha_a) +
                     (tau + alpha_a * dtaua) * (kappa + alpha_a * dkappaa)) /
                    (nu + 1.0);
    double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);
    // A collapsed previous step means the iterate lost centrality and the
    // predictor direction is untrustworthy; take a plain centering step.
    const bool centering = step_alpha < 0.05;
    if (centering) sigma = 0.8;

    // Combined direction with Mehrotra correction.
    ConeVec d = ConeVec::zero(s, nl);
    if (s > 0) {
      RMatrix dxh = sc.Rinv * dxa.S * sc.Rinv.transpose();
      RMatrix dzh = sc.R.transpose() * dza.S * sc.R;
      RMatrix t = centering ? RMatrix(RMatrix::Zero(s, s))
                            : RMatrix(-0.5 * (dxh * dzh + dzh * dxh));
      t.diagonal().array() += sigma * mu;
      t -= RMatrix(sc.lambda.array().square().matrix().asDiagonal());
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j)
          d.S(i, j) = 2.0 * t(i, j) / (sc.lambda(i) + sc.lambda(j));
    }
    if (nl > 0) {
      RVector dxh = dxa.l.array() / sc.wl.array();
      RVector dzh = dza.l.array() * sc.wl.array();
      RVector cross = centering ? RVector(RVector::Zero(nl))
                                : RVector(dxh.array() * dzh.array());
      d.l = (sigma * mu - cross.array() - sc.laml.array().square()) /
            sc.laml.array();
    }
    double dtk = sigma * mu - tau * kappa - (centering ? 0.0 : dtaua * dkappaa);

    ConeVec dx, dz;
    RVector dy;
    double dtau, dkappa;
    direction(d, dtk, dx, dz, dy, dtau, dkappa);

    double alpha = max_step(x, dx, 1.0 / 0.99);
    alpha = std::min(alpha, max_step(z, dz, alpha));
    if (dtau < 0) alpha = std::min(alpha, -tau / dtau);
    if (dkappa < 0) alpha = std::min(alpha, -kappa / dkappa);
    alpha = std::min(1.0, 0.99 * alpha);
    // The dtau equation degenerates near the optimum (its denominator is of
    // the order of the duality gap); keep tau from collapsing in one step.
    if (std::abs(alpha * dtau) > 0.5 * tau)
      alpha = 0.5 * tau / std::abs(dtau);
    if (alpha <= 1e-8) break;  // stalled against the boundary

    // The max_step fraction can land a hair outside the cone in floating
    // point, and even interior iterates pinned against the boundary poison
    // the NT scaling; backtrack until the trial point stays in a
    // neighbourhood of the central path.
    ConeVec xt, zt;
    double taut = tau, kappat = kappa;
    bool interior = false;
    for (int bt = 0; bt < 60 && alpha > 1e-8; ++bt) {
      xt = x;
      xt.axpy(alpha, dx);
      zt = z;
      zt.axpy(alpha, dz);
      taut = tau + alpha * dtau;
      kappat = kappa + alpha * dkappa;
      if (in_neighbourhood(xt, zt, taut, kappat, nu, 1e-3)) {
        interior = true;
        break;
      }
      alpha *= 0.8;
    }
    if (!interior) break;
    x = std::move(xt);
    z = std::move(zt);
    y += alpha * dy;
    tau = taut;
    kappa = kappat;
    step_alpha = alpha;
#ifdef MIMOSWITCH_SDP_TRACE
    std::fprintf(stderr,
                 "it=%d mu=%.3e tau=%.3e kappa=%.3e pres=%.3e dres=%.3e "
                 "gap=%.3e alpha=%.3e sigma=%.3e\n",
                 iter, mu, tau, kappa, pres, dres, relgap, alpha, sigma);
#endif
  }
  return finalize_best(SdpStatus::MaxIter);
}

std::pair<CVector, double> rank_one_extract(const CMatrix& x) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(x);
  int n = static_cast<int>(x.rows());
  double top = es.eigenvalues()(n - 1);
  CVector v = es.eigenvectors().col(n - 1) * std::sqrt(std::max(top, 0.0));
  double xnorm = x.norm();
  double residual = xnorm > 0 ? (x - v * v.adjoint()).norm() / xnorm : 0.0;
  return {v, residual};
}

}  // namespace mimoswitch
