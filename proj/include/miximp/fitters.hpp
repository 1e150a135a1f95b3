#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "miximp/rng.hpp"

namespace miximp {

struct DesignMatrix {
  Eigen::MatrixXd X;               // rows = subjects, cols = labeled terms
  std::vector<std::string> labels; // one per column
};

enum class ModelFamily { linear, logistic, exp_hazard, negbin };

// One interval-level regression fit. Coefficients and covariance are kept
// in the full column space of the design; aliased columns carry coefficient
// zero and zero covariance rows/cols so downstream dot products stay aligned
// with the design labels.
struct FittedModel {
  ModelFamily family = ModelFamily::linear;
  Eigen::VectorXd beta;
  Eigen::MatrixXd cov_beta;
  double sigma2 = 0.0;      // residual variance, linear family only
  double dispersion = 0.0;  // negbin alpha in Var = mu + alpha*mu^2
  int n = 0;                // rows used
  int p = 0;                // columns retained after aliasing
  double loglik = 0.0;      // family log-likelihood at the optimum
  std::vector<std::string> labels;
  std::vector<std::string> dropped_columns;
  std::vector<std::string> notes;  // "separation_fallback", "poisson_fallback"

  bool has_note(const std::string& note) const;
};

struct ParameterDraw {
  Eigen::VectorXd beta_tilde;
  std::optional<double> sigma2_tilde;  // linear family only
};

FittedModel fit_linear(const DesignMatrix& X, const Eigen::VectorXd& y);
FittedModel fit_logistic(const DesignMatrix& X, const Eigen::VectorXd& y);
FittedModel fit_exp_hazard(const DesignMatrix& X, const Eigen::VectorXd& time,
                           const Eigen::VectorXd& event);
FittedModel fit_negbin(const DesignMatrix& X, const Eigen::VectorXd& count,
                       const Eigen::VectorXd& offset);

// Deterministic cores used by the stream-driven draws below; tests feed
// fixed (z, xi) values to pin degenerate behaviour.
ParameterDraw make_linear_draw(const FittedModel& fit, const Eigen::VectorXd& z,
                               double xi);
ParameterDraw make_glm_draw(const FittedModel& fit, const Eigen::VectorXd& z);

// sigma2_tilde = sigma2 * (n-p-1) / xi with xi ~ chi^2_{n-p-1};
// beta_tilde ~ N(beta, sigma2_tilde/sigma2 * cov_beta). The chi-square is
// consumed first, then dim(beta) normals.
ParameterDraw draw_linear_params(const FittedModel& fit, RandomStream& stream);

// beta_tilde ~ N(beta, cov_beta); dispersion is not perturbed.
ParameterDraw draw_glm_params(const FittedModel& fit, RandomStream& stream);

// Log-likelihoods and analytic gradients on the retained design (used by the
// Newton solvers and checked against finite differences in the tests).
namespace glm_detail {
double loglik_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta);
Eigen::VectorXd grad_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& beta);
double loglik_exp_hazard(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                         const Eigen::VectorXd& event, const Eigen::VectorXd& beta);
Eigen::VectorXd grad_exp_hazard(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                                const Eigen::VectorXd& event,
                                const Eigen::VectorXd& beta);
double loglik_poisson(const Eigen::MatrixXd& X, const Eigen::VectorXd& count,
                      const Eigen::VectorXd& offset, const Eigen::VectorXd& beta);
Eigen::VectorXd grad_poisson(const Eigen::MatrixXd& X, const Eigen::VectorXd& count,
                             const Eigen::VectorXd& offset, const Eigen::VectorXd& beta);
double loglik_negbin(const Eigen::MatrixXd& X, const Eigen::VectorXd& count,
                     const Eigen::VectorXd& offset, const Eigen::VectorXd& beta,
                     double alpha);
Eigen::VectorXd grad_negbin_beta(const Eigen::MatrixXd& X, const Eigen::VectorXd& count,
                                 const Eigen::VectorXd& offset,
                                 const Eigen::VectorXd& beta, double alpha);
}  // namespace glm_detail

}  // namespace miximp
