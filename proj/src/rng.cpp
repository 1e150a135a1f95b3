#include "miximp/rng.hpp"

#include <cmath>
#include <limits>

#include "miximp/errors.hpp"

namespace miximp {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RandomStream::RandomStream(const StreamKey& key) {
  std::uint64_t h = key.master_seed;
  (void)splitmix64(h);
  for (const auto& [tag, index] : key.labels) {
    h ^= fnv1a(tag);
    (void)splitmix64(h);
    h ^= index;
    (void)splitmix64(h);
  }
  for (auto& w : state_) w = splitmix64(h);
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t RandomStream::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RandomStream::uniform01() {
  // 53-bit mantissa, centered so the result is strictly inside (0,1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() { return norm_quantile(uniform01()); }

double RandomStream::gamma(double shape) {
  if (!(shape > 0.0)) throw NumericError("gamma: shape must be positive");
  if (shape < 1.0) {
    const double u = uniform01();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

RandomStream derive_stream(const StreamKey& key) { return RandomStream(key); }

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw NumericError("norm_quantile: p outside (0,1)");
  if (p > 0.5) return -norm_quantile(1.0 - p);
  // Abramowitz & Stegun 26.2.23 initial guess (|error| < 4.5e-4), then
  // Halley refinement against the exact CDF; three steps reach full
  // double precision from that start.
  const double t = std::sqrt(-2.0 * std::log(p));
  double x = -(t - (2.515517 + t * (0.802853 + t * 0.010328)) /
                       (1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308))));
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  constexpr double inv_sqrt2pi = 0.39894228040143267794;
  for (int it = 0; it < 3; ++it) {
    const double cdf = 0.5 * std::erfc(-x * inv_sqrt2);
    const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
    const double u = (cdf - p) / pdf;
    x -= u / (1.0 + 0.5 * u * x);
  }
  return x;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw NumericError("psd_sqrt: eigendecomposition failed");
  Eigen::VectorXd evals = es.eigenvalues();
  const double max_ev = evals.size() ? evals.maxCoeff() : 0.0;
  if (evals.size() && evals.minCoeff() < -1e-6 * std::max(max_ev, 0.0))
    throw NumericError("psd_sqrt: matrix is indefinite beyond clip tolerance");
  evals = evals.cwiseMax(0.0);
  return es.eigenvectors() * evals.cwiseSqrt().asDiagonal();
}

Eigen::VectorXd draw_mvn(RandomStream& stream, const Eigen::VectorXd& mean,
                         const Eigen::MatrixXd& cov) {
  const Eigen::Index d = mean.size();
  if (cov.rows() != d || cov.cols() != d)
    throw NumericError("draw_mvn: covariance dimension mismatch");
  const Eigen::MatrixXd b = psd_sqrt(cov);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = stream.normal();
  return mean + b * z;
}

double draw_chi_square(RandomStream& stream, int df) {
  if (df < 1) throw NumericError("draw_chi_square: df must be >= 1");
  return 2.0 * stream.gamma(0.5 * df);
}

double draw_exponential(RandomStream& stream, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw NumericError("draw_exponential: rate must be positive and finite");
  return -std::log(stream.uniform01()) / rate;
}

int draw_bernoulli(RandomStream& stream, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw NumericError("draw_bernoulli: p outside [0,1]");
  return stream.uniform01() < p ? 1 : 0;
}

}  // namespace miximp
