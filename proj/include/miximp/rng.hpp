#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace miximp {

// Hierarchical stream addressing: a master seed plus an ordered list of
// (tag, index) labels. Distinct label paths give statistically independent
// streams; the same path always gives the same stream, regardless of how
// many workers are running or in what order streams are created.
struct StreamKey {
  std::uint64_t master_seed = 0;
  std::vector<std::pair<std::string, std::uint64_t>> labels;

  StreamKey child(std::string_view tag, std::uint64_t index) const {
    StreamKey k(*this);
    k.labels.emplace_back(std::string(tag), index);
    return k;
  }
};

// xoshiro256++ seeded from a StreamKey through a SplitMix64 absorb chain.
// Value-like; owns all of its state.
//
// Normal deviates use the inverse-CDF method: a rational initial guess
// refined by Halley steps on the exact CDF (erfc). The algorithm is fixed;
// changing it would change every downstream result bit for bit.
class RandomStream {
 public:
  explicit RandomStream(const StreamKey& key);

  std::uint64_t next_u64();

  // Uniform on the open interval (0,1); never returns 0 or 1.
  double uniform01();

  // Standard normal deviate (inverse CDF), one uniform consumed.
  double normal();

  // Gamma(shape, scale 1) via Marsaglia-Tsang; shape > 0.
  double gamma(double shape);

 private:
  std::array<std::uint64_t, 4> state_;
};

RandomStream derive_stream(const StreamKey& key);

// Square root B of a symmetric PSD matrix (B * B^T = cov) through an
// eigendecomposition. Negative eigenvalues from rounding noise are clipped
// at zero; a matrix with min eigenvalue < -1e-6 * max eigenvalue is
// rejected as indefinite.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov);

// Sample from N(mean, cov) via psd_sqrt; consumes dim(mean) normals.
Eigen::VectorXd draw_mvn(RandomStream& stream, const Eigen::VectorXd& mean,
                         const Eigen::MatrixXd& cov);

double draw_chi_square(RandomStream& stream, int df);
double draw_exponential(RandomStream& stream, double rate);
int draw_bernoulli(RandomStream& stream, double p);

// Standard normal quantile, full double precision. Exposed because the
// confidence-interval code needs z quantiles from the same routine the
// samplers use.
double norm_quantile(double p);

}  // namespace miximp
