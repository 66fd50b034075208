#include "mimoswitch/model.hpp"

#include <cmath>
#include <numbers>

namespace mimoswitch {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1) +
                    0xbf58476d1ce4e5b9ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t CscgSampler::next_u64() {
  // xorshift64* keeps the sampler self-contained and platform-stable.
  std::uint64_t x = state_;
  x ^= x >> 12;
  x ^= x << 25;
  x ^= x >> 27;
  state_ = x;
  return x * 0x2545f4914f6cdd1dULL;
}

double CscgSampler::next_uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

Complex CscgSampler::next() {
  double u1 = next_uniform();
  double u2 = next_uniform();
  // CSCG(0,1): real and imaginary parts N(0, 1/2) each.
  double r = std::sqrt(-std::log(u1));
  double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

SwitchSpec SwitchSpec::from_permutation(const std::vector<int>& perm,
                                        bool pnc) {
  int n = static_cast<int>(perm.size());
  SwitchSpec sw;
  sw.P = RMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) sw.P(i, perm[i]) = 1.0;
  sw.pnc = pnc;
  // Record pairs when the permutation is an involutive derangement.
  bool pairwise = true;
  for (int i = 0; i < n; ++i)
    if (perm[i] == i || perm[perm[i]] != i) pairwise = false;
  if (pairwise) {
    std::vector<std::pair<int, int>> pairs;
    std::vector<bool> seen(n, false);
    for (int i = 0; i < n; ++i) {
      if (seen[i]) continue;
      seen[i] = seen[perm[i]] = true;
      pairs.emplace_back(i, perm[i]);
    }
    sw.pairs = std::move(pairs);
  }
  return sw;
}

SwitchSpec SwitchSpec::pairwise(int n, bool pnc) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = n - 1 - i;
  return from_permutation(perm, pnc);
}

SwitchSpec SwitchSpec::non_pairwise4(bool pnc) {
  return from_permutation({2, 0, 3, 1}, pnc);
}

ChannelRealization ChannelRealization::from_matrix(const CMatrix& h,
                                                   double condition_cap) {
  ChannelRealization ch;
  ch.H = h;
  ch.Hinv = invert(h, condition_cap);
  ch.W = ch.Hinv * ch.Hinv.adjoint();
  ch.W = 0.5 * (ch.W + ch.W.adjoint()).eval();  // kill roundoff asymmetry
  ch.Wstar = ch.W.conjugate();
  return ch;
}

ChannelRealization sample_channel(int n, std::uint64_t rng_seed,
                                  double condition_cap) {
  if (n < 2) throw std::invalid_argument("sample_channel: n must be >= 2");
  CscgSampler rng(rng_seed);
  int rejections = 0;
  for (;;) {
    CMatrix h(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h(i, j) = rng.next();
    try {
      ChannelRealization ch = ChannelRealization::from_matrix(h, condition_cap);
      ch.rejections = rejections;
      return ch;
    } catch (const SingularMatrixError&) {
      ++rejections;
    }
  }
}

CMatrix compute_Q(const ChannelRealization& ch, const SwitchSpec& sw,
                  const NoiseParams& np) {
  int n = sw.size();
  CMatrix q = CMatrix::Identity(n, n) +
              np.gamma2 * sw.P * ch.W * sw.P.transpose();
  return 0.5 * (q + q.adjoint());
}

CMatrix compute_S(const ChannelRealization& ch, const SwitchSpec& sw,
                  const NoiseParams& np) {
  CMatrix q = compute_Q(ch, sw, np);
  return q.transpose().cwiseProduct(ch.Wstar);
}

CMatrix compute_R(const ChannelRealization& ch, const SwitchSpec& sw,
                  const NoiseParams& np, const CVector& b) {
  int n = sw.size();
  CMatrix pb = sw.P.cast<Complex>();
  pb.diagonal() += b;
  CMatrix r = CMatrix::Identity(n, n) + np.gamma2 * pb * ch.W * pb.adjoint();
  return 0.5 * (r + r.adjoint());
}

CMatrix compute_power_matrix(const ChannelRealization& ch,
                             const SwitchSpec& sw, const NoiseParams& np,
                             const CVector& b) {
  CMatrix r = compute_R(ch, sw, np, b);
  CMatrix bmat = CMatrix::Zero(sw.size(), sw.size());
  bmat.diagonal() = b;
  CMatrix k = r + bmat * sw.P.transpose().cast<Complex>() +
              sw.P.cast<Complex>() * bmat.adjoint() + bmat * bmat.adjoint();
  CMatrix s = k.transpose().cwiseProduct(ch.Wstar);
  return 0.5 * (s + s.adjoint());
}

double relay_power(const ChannelRealization& ch, const SwitchSpec& sw,
                   const NoiseParams& np, const CVector& a, const CVector& b) {
  CMatrix s = compute_power_matrix(ch, sw, np, b);
  return std::real(Complex(a.adjoint() * s * a));
}

CMatrix assemble_precoder(const ChannelRealization& ch, const SwitchSpec& sw,
                          const CVector& a, const CVector& b) {
  CMatrix pb = sw.P.cast<Complex>();
  pb.diagonal() += b;
  return ch.Hinv.transpose() * a.asDiagonal() * pb * ch.Hinv;
}

RVector post_noise(const ChannelRealization& ch, const SwitchSpec& sw,
                   const NoiseParams& np, const CVector& a, const CVector& b) {
  int n = sw.size();
  CMatrix r = compute_R(ch, sw, np, b);
  RVector eps(n);
  for (int i = 0; i < n; ++i) {
    double gain2 = std::norm(a(i));
    if (gain2 == 0.0)
      throw std::domain_error("post_noise: zero amplification gain");
    eps(i) = std::real(r(i, i)) - 1.0 + np.sigma2 / gain2;
  }
  return eps;
}

double throughput(double epsilon) {
  if (!(epsilon > 0.0))
    throw std::domain_error("throughput: epsilon must be positive");
  return 0.5 * std::log2(1.0 + 1.0 / epsilon);
}

SolveOutcome make_outcome(const ChannelRealization& ch, const SwitchSpec& sw,
                          const NoiseParams& np, const CVector& a,
                          const CVector& b) {
  SolveOutcome out;
  out.design.a = a;
  out.design.b = b;
  out.design.G = assemble_precoder(ch, sw, a, b);
  out.epsilon = post_noise(ch, sw, np, a, b);
  out.power_used = relay_power(ch, sw, np, a, b);
  out.throughput.resize(out.epsilon.size());
  for (int i = 0; i < out.epsilon.size(); ++i)
    out.throughput(i) = throughput(out.epsilon(i));
  return out;
}

RoundTripStats simulate_round(const ChannelRealization& ch,
                              const SwitchSpec& sw, const NoiseParams& np,
                              const RelayDesign& design, int n_symbols,
                              std::uint64_t rng_seed) {
  int n = sw.size();
  CscgSampler rng(rng_seed);
  CMatrix hdown = ch.H.transpose();
  RVector residual_power = RVector::Zero(n);
  double relay_power_acc = 0.0;
  double gamma = std::sqrt(np.gamma2);
  double sigma = std::sqrt(np.sigma2);

  CVector x(n), u(n), w(n);
  for (int t = 0; t < n_symbols; ++t) {
    for (int i = 0; i < n; ++i) x(i) = rng.next();
    for (int i = 0; i < n; ++i) u(i) = gamma * rng.next();
    for (int i = 0; i < n; ++i) w(i) = sigma * rng.next();
    CVector y = ch.H * x + u;
    CVector tx = design.G * y;
    relay_power_acc += tx.squaredNorm();
    CVector r = hdown * tx + w;
    CVector px = sw.P.cast<Complex>() * x;
    for (int i = 0; i < n; ++i) {
      Complex decoded = r(i) / design.a(i) - design.b(i) * x(i);
      residual_power(i) += std::norm(decoded - px(i));
    }
  }
  return {residual_power / n_symbols, relay_power_acc / n_symbols};
}

PairCoefficients pair_coefficients(const ChannelRealization& ch,
                                   std::pair<int, int> pair) {
  auto [i, j] = pair;
  return {std::real(ch.W(i, i)), ch.W(i, j), std::real(ch.W(j, j))};
}

}  // namespace mimoswitch
