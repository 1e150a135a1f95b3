#include "miximp/fitters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "miximp/errors.hpp"

namespace miximp {

namespace {

constexpr double kCoefTol = 1e-8;
constexpr int kMaxIter = 50;
constexpr double kRidge = 1e-4;       // separation fallback penalty
constexpr double kAliasTol = 1e-8;    // relative residual norm
constexpr double kBetaDiverged = 30.0;

double neg_inf() { return -std::numeric_limits<double>::infinity(); }

void check_finite(const DesignMatrix& d) {
  if (d.labels.size() != static_cast<std::size_t>(d.X.cols()))
    throw NumericError("design labels do not match column count");
  if (!d.X.allFinite()) throw NumericError("design matrix has non-finite entries");
}

// Columns are kept in order; a column is aliased when its residual after
// projection on the span of the retained columns is below kAliasTol times
// its own norm (modified Gram-Schmidt with one re-orthogonalization pass).
std::vector<int> retained_columns(const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows(), p = X.cols();
  std::vector<int> retained;
  Eigen::MatrixXd q(n, p);
  int r = 0;
  for (Eigen::Index c = 0; c < p; ++c) {
    Eigen::VectorXd v = X.col(c);
    const double orig = v.norm();
    if (!(orig > 0.0)) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (int k = 0; k < r; ++k) v -= q.col(k).dot(v) * q.col(k);
    if (v.norm() > kAliasTol * orig) {
      q.col(r) = v / v.norm();
      retained.push_back(static_cast<int>(c));
      ++r;
    }
  }
  return retained;
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& X, const std::vector<int>& cols) {
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = X.col(cols[i]);
  return out;
}

void scatter_into_full(FittedModel& fit, const DesignMatrix& design,
                       const std::vector<int>& retained, const Eigen::VectorXd& beta_r,
                       const Eigen::MatrixXd& cov_r) {
  const Eigen::Index p_full = design.X.cols();
  fit.beta = Eigen::VectorXd::Zero(p_full);
  fit.cov_beta = Eigen::MatrixXd::Zero(p_full, p_full);
  for (std::size_t i = 0; i < retained.size(); ++i) {
    fit.beta[retained[i]] = beta_r[static_cast<Eigen::Index>(i)];
    for (std::size_t k = 0; k < retained.size(); ++k)
      fit.cov_beta(retained[i], retained[k]) = cov_r(static_cast<Eigen::Index>(i),
                                                     static_cast<Eigen::Index>(k));
  }
  fit.labels = design.labels;
  std::vector<bool> kept(static_cast<std::size_t>(p_full), false);
  for (int c : retained) kept[static_cast<std::size_t>(c)] = true;
  for (Eigen::Index c = 0; c < p_full; ++c)
    if (!kept[static_cast<std::size_t>(c)])
      fit.dropped_columns.push_back(design.labels[static_cast<std::size_t>(c)]);
  fit.n = static_cast<int>(design.X.rows());
  fit.p = static_cast<int>(retained.size());
}

struct NewtonProblem {
  // Log-likelihood, gradient, and negative Hessian (information) at beta.
  virtual double loglik(const Eigen::VectorXd& beta) const = 0;
  virtual Eigen::VectorXd grad(const Eigen::VectorXd& beta) const = 0;
  virtual Eigen::MatrixXd info(const Eigen::VectorXd& beta) const = 0;
  virtual ~NewtonProblem() = default;
};

struct NewtonResult {
  Eigen::VectorXd beta;
  bool converged = false;
  bool diverged = false;
};

// Ascending Newton with step halving; ridge > 0 switches to the penalized
// objective loglik - ridge/2 * |beta|^2.
NewtonResult newton_maximize(const NewtonProblem& prob, Eigen::VectorXd beta,
                             double ridge) {
  const auto objective = [&](const Eigen::VectorXd& b) {
    const double ll = prob.loglik(b);
    if (!std::isfinite(ll)) return neg_inf();
    return ll - 0.5 * ridge * b.squaredNorm();
  };
  NewtonResult res;
  double obj = objective(beta);
  const Eigen::Index p = beta.size();
  for (int iter = 0; iter < kMaxIter; ++iter) {
    Eigen::VectorXd g = prob.grad(beta) - ridge * beta;
    Eigen::MatrixXd h = prob.info(beta);
    h.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success) break;
    Eigen::VectorXd delta = ldlt.solve(g);
    if (!delta.allFinite()) break;
    double step = 1.0;
    Eigen::VectorXd cand;
    double cand_obj = neg_inf();
    bool accepted = false;
    for (int h2 = 0; h2 < 40; ++h2) {
      cand = beta + step * delta;
      cand_obj = objective(cand);
      if (cand_obj >= obj - 1e-12) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    double rel = 0.0;
    for (Eigen::Index i = 0; i < p; ++i)
      rel = std::max(rel, std::abs(step * delta[i]) / (1.0 + std::abs(beta[i])));
    beta = cand;
    obj = cand_obj;
    if (beta.lpNorm<Eigen::Infinity>() > kBetaDiverged && ridge == 0.0) {
      res.diverged = true;
      break;
    }
    if (rel < kCoefTol) {
      res.converged = true;
      break;
    }
  }
  res.beta = beta;
  return res;
}

double digamma(double x) {
  double r = 0.0;
  while (x < 6.0) {
    r -= 1.0 / x;
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  return r + std::log(x) - 0.5 / x -
         f * (1.0 / 12 - f * (1.0 / 120 - f * (1.0 / 252 - f * (1.0 / 240))));
}

double trigamma(double x) {
  double r = 0.0;
  while (x < 6.0) {
    r += 1.0 / (x * x);
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  return r + 1.0 / x + 0.5 * f +
         (f / x) * (1.0 / 6 - f * (1.0 / 30 - f * (1.0 / 42 - f / 30.0)));
}

}  // namespace

bool FittedModel::has_note(const std::string& note) const {
  return std::find(notes.begin(), notes.end(), note) != notes.end();
}

namespace glm_detail {

double loglik_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    // y*eta - log(1 + exp(eta)), stable in both tails
    const double e = eta[i];
    ll += y[i] * e - (e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e)));
  }
  return ll;
}

Eigen::VectorXd grad_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd mu(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) mu[i] = 1.0 / (1.0 + std::exp(-eta[i]));
  return X.transpose() * (y - mu);
}

double loglik_exp_hazard(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                         const Eigen::VectorXd& event, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < time.size(); ++i)
    ll += event[i] * eta[i] - time[i] * std::exp(eta[i]);
  return ll;
}

Eigen::VectorXd grad_exp_hazard(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                                const Eigen::VectorXd& event,
                                const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    resid[i] = event[i] - time[i] * std::exp(eta[i]);
  return X.transpose() * resid;
}

double loglik_poisson(const Eigen::MatrixXd& X, const Eigen::VectorXd& count,
                      const Eigen::VectorXd& offset, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta + offset;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < count.size(); ++i)
    ll += count[i] * eta[i] - std::exp(eta[i]) - std::lgamma(count[i] + 1.0);
  return ll;
}

Eigen::VectorXd grad_poisson(const Eigen::MatrixXd& X, const Eigen::VectorXd& count,
                             const Eigen::VectorXd& offset, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta + offset;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = count[i] - std::exp(eta[i]);
  return X.transpose() * resid;
}

double loglik_negbin(const Eigen::MatrixXd& X, const Eigen::VectorXd& count,
                     const Eigen::VectorXd& offset, const Eigen::VectorXd& beta,
                     double alpha) {
  const double r = 1.0 / alpha;
  const Eigen::VectorXd eta = X * beta + offset;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < count.size(); ++i) {
    const double mu = std::exp(eta[i]);
    const double y = count[i];
    ll += std::lgamma(y + r) - std::lgamma(r) - std::lgamma(y + 1.0) -
          r * std::log1p(mu * alpha) + y * (eta[i] - std::log(r + mu));
  }
  return ll;
}

Eigen::VectorXd grad_negbin_beta(const Eigen::MatrixXd& X, const Eigen::VectorXd& count,
                                 const Eigen::VectorXd& offset,
                                 const Eigen::VectorXd& beta, double alpha) {
  const Eigen::VectorXd eta = X * beta + offset;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double mu = std::exp(eta[i]);
    resid[i] = (count[i] - mu) / (1.0 + alpha * mu);
  }
  return X.transpose() * resid;
}

}  // namespace glm_detail

FittedModel fit_linear(const DesignMatrix& design, const Eigen::VectorXd& y) {
  check_finite(design);
  if (y.size() != design.X.rows()) throw NumericError("fit_linear: length mismatch");
  const auto retained = retained_columns(design.X);
  if (retained.empty()) throw NumericError("fit_linear: all columns aliased");
  const int n = static_cast<int>(design.X.rows());
  const int p = static_cast<int>(retained.size());
  if (n <= p + 1) throw NumericError("fit_linear: insufficient rows (n <= p + 1)");

  const Eigen::MatrixXd xr = gather_columns(design.X, retained);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(xr);
  const Eigen::VectorXd beta = qr.solve(y);
  const double rss = (y - xr * beta).squaredNorm();
  const double sigma2 = rss / (n - p);
  const Eigen::MatrixXd xtx_inv =
      (xr.transpose() * xr).ldlt().solve(Eigen::MatrixXd::Identity(p, p));

  FittedModel fit;
  fit.family = ModelFamily::linear;
  fit.sigma2 = sigma2;
  scatter_into_full(fit, design, retained, beta, sigma2 * xtx_inv);
  fit.loglik = rss > 0.0
                   ? -0.5 * n * (std::log(2.0 * M_PI * rss / n) + 1.0)
                   : std::numeric_limits<double>::infinity();
  return fit;
}

FittedModel fit_logistic(const DesignMatrix& design, const Eigen::VectorXd& y) {
  check_finite(design);
  if (y.size() != design.X.rows()) throw NumericError("fit_logistic: length mismatch");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != 0.0 && y[i] != 1.0)
      throw NumericError("fit_logistic: response must be 0/1");
  const auto retained = retained_columns(design.X);
  if (retained.empty()) throw NumericError("fit_logistic: all columns aliased");
  const int n = static_cast<int>(design.X.rows());
  const int p = static_cast<int>(retained.size());
  if (n <= p) throw NumericError("fit_logistic: insufficient rows (n <= p)");
  const Eigen::MatrixXd xr = gather_columns(design.X, retained);

  struct Problem : NewtonProblem {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& y;
    Problem(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) : X(X), y(y) {}
    double loglik(const Eigen::VectorXd& b) const override {
      return glm_detail::loglik_logistic(X, y, b);
    }
    Eigen::VectorXd grad(const Eigen::VectorXd& b) const override {
      return glm_detail::grad_logistic(X, y, b);
    }
    Eigen::MatrixXd info(const Eigen::VectorXd& b) const override {
      const Eigen::VectorXd eta = X * b;
      Eigen::VectorXd w(eta.size());
      for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double mu = 1.0 / (1.0 + std::exp(-eta[i]));
        w[i] = mu * (1.0 - mu);
      }
      return X.transpose() * w.asDiagonal() * X;
    }
  } prob(xr, y);

  double ridge = 0.0;
  NewtonResult res = newton_maximize(prob, Eigen::VectorXd::Zero(p), ridge);
  FittedModel fit;
  if (!res.converged) {
    ridge = kRidge;
    res = newton_maximize(prob, Eigen::VectorXd::Zero(p), ridge);
    if (!res.converged)
      throw NumericError("fit_logistic: did not converge");
    fit.notes.push_back("separation_fallback");
  }
  Eigen::MatrixXd h = prob.info(res.beta);
  h.diagonal().array() += ridge;
  const Eigen::MatrixXd cov = h.ldlt().solve(Eigen::MatrixXd::Identity(p, p));

  fit.family = ModelFamily::logistic;
  scatter_into_full(fit, design, retained, res.beta, cov);
  fit.loglik = prob.loglik(res.beta);
  return fit;
}

FittedModel fit_exp_hazard(const DesignMatrix& design, const Eigen::VectorXd& time,
                           const Eigen::VectorXd& event) {
  check_finite(design);
  if (time.size() != design.X.rows() || event.size() != design.X.rows())
    throw NumericError("fit_exp_hazard: length mismatch");
  for (Eigen::Index i = 0; i < time.size(); ++i) {
    if (!(time[i] > 0.0)) throw NumericError("fit_exp_hazard: exposure must be positive");
    if (event[i] != 0.0 && event[i] != 1.0)
      throw NumericError("fit_exp_hazard: event must be 0/1");
  }
  if (event.sum() < 1.0) throw NumericError("fit_exp_hazard: zero events");
  const auto retained = retained_columns(design.X);
  if (retained.empty()) throw NumericError("fit_exp_hazard: all columns aliased");
  const int n = static_cast<int>(design.X.rows());
  const int p = static_cast<int>(retained.size());
  if (n <= p) throw NumericError("fit_exp_hazard: insufficient rows (n <= p)");
  const Eigen::MatrixXd xr = gather_columns(design.X, retained);

  struct Problem : NewtonProblem {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& time;
    const Eigen::VectorXd& event;
    Problem(const Eigen::MatrixXd& X, const Eigen::VectorXd& t, const Eigen::VectorXd& e)
        : X(X), time(t), event(e) {}
    double loglik(const Eigen::VectorXd& b) const override {
      return glm_detail::loglik_exp_hazard(X, time, event, b);
    }
    Eigen::VectorXd grad(const Eigen::VectorXd& b) const override {
      return glm_detail::grad_exp_hazard(X, time, event, b);
    }
    Eigen::MatrixXd info(const Eigen::VectorXd& b) const override {
      const Eigen::VectorXd eta = X * b;
      Eigen::VectorXd w(eta.size());
      for (Eigen::Index i = 0; i < eta.size(); ++i) w[i] = time[i] * std::exp(eta[i]);
      return X.transpose() * w.asDiagonal() * X;
    }
  } prob(xr, time, event);

  const NewtonResult res = newton_maximize(prob, Eigen::VectorXd::Zero(p), 0.0);
  if (!res.converged) throw NumericError("fit_exp_hazard: did not converge");
  const Eigen::MatrixXd cov =
      prob.info(res.beta).ldlt().solve(Eigen::MatrixXd::Identity(p, p));

  FittedModel fit;
  fit.family = ModelFamily::exp_hazard;
  scatter_into_full(fit, design, retained, res.beta, cov);
  fit.loglik = prob.loglik(res.beta);
  return fit;
}

namespace {

// 1-D Newton in log(alpha) with step halving on the NB log-likelihood.
double negbin_alpha_step(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& offset, const Eigen::VectorXd& beta,
                         double alpha) {
  const Eigen::VectorXd eta = X * beta + offset;
  const auto ll = [&](double a) {
    return glm_detail::loglik_negbin(X, y, offset, beta, a);
  };
  constexpr double kThetaMin = -23.0, kThetaMax = 23.0;  // alpha in ~[1e-10, 1e10]
  double theta = std::log(alpha);
  double cur = ll(alpha);
  for (int iter = 0; iter < kMaxIter; ++iter) {
    const double r = std::exp(-theta);
    double g = 0.0, h = 0.0;  // dl/dr, d2l/dr2
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double mu = std::exp(eta[i]);
      const double yi = y[i];
      g += digamma(yi + r) - digamma(r) + std::log(r / (r + mu)) + (mu - yi) / (r + mu);
      h += trigamma(yi + r) - trigamma(r) + 1.0 / r - 1.0 / (r + mu) -
           (mu - yi) / ((r + mu) * (r + mu));
    }
    const double d1 = -r * g;             // dl/dtheta
    const double d2 = r * g + r * r * h;  // d2l/dtheta2
    double delta = (d2 < 0.0) ? -d1 / d2 : (d1 > 0 ? 0.5 : -0.5);
    delta = std::clamp(delta, -2.0, 2.0);
    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      const double cand = std::clamp(theta + step * delta, kThetaMin, kThetaMax);
      const double cand_ll = ll(std::exp(cand));
      if (std::isfinite(cand_ll) && cand_ll >= cur - 1e-12) {
        if (std::abs(cand - theta) < kCoefTol) {
          return std::exp(cand);
        }
        theta = cand;
        cur = cand_ll;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    if (theta <= kThetaMin || theta >= kThetaMax) break;
  }
  return std::exp(theta);
}

}  // namespace

FittedModel fit_negbin(const DesignMatrix& design, const Eigen::VectorXd& count,
                       const Eigen::VectorXd& offset) {
  check_finite(design);
  if (count.size() != design.X.rows() || offset.size() != design.X.rows())
    throw NumericError("fit_negbin: length mismatch");
  for (Eigen::Index i = 0; i < count.size(); ++i) {
    if (!(count[i] >= 0.0) || count[i] != std::floor(count[i]))
      throw NumericError("fit_negbin: counts must be non-negative integers");
    if (!std::isfinite(offset[i])) throw NumericError("fit_negbin: non-finite offset");
  }
  if (count.sum() < 1.0) throw NumericError("fit_negbin: all counts zero");
  const auto retained = retained_columns(design.X);
  if (retained.empty()) throw NumericError("fit_negbin: all columns aliased");
  const int n = static_cast<int>(design.X.rows());
  const int p = static_cast<int>(retained.size());
  if (n <= p) throw NumericError("fit_negbin: insufficient rows (n <= p)");
  const Eigen::MatrixXd xr = gather_columns(design.X, retained);

  struct PoissonProblem : NewtonProblem {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& y;
    const Eigen::VectorXd& off;
    PoissonProblem(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& off)
        : X(X), y(y), off(off) {}
    double loglik(const Eigen::VectorXd& b) const override {
      return glm_detail::loglik_poisson(X, y, off, b);
    }
    Eigen::VectorXd grad(const Eigen::VectorXd& b) const override {
      return glm_detail::grad_poisson(X, y, off, b);
    }
    Eigen::MatrixXd info(const Eigen::VectorXd& b) const override {
      const Eigen::VectorXd eta = X * b + off;
      Eigen::VectorXd w(eta.size());
      for (Eigen::Index i = 0; i < eta.size(); ++i) w[i] = std::exp(eta[i]);
      return X.transpose() * w.asDiagonal() * X;
    }
  } pois(xr, count, offset);

  const NewtonResult pois_res = newton_maximize(pois, Eigen::VectorXd::Zero(p), 0.0);
  if (!pois_res.converged) throw NumericError("fit_negbin: Poisson start did not converge");

  // Moment estimate of the dispersion from the Poisson residuals.
  double num = 0.0, den = 0.0;
  {
    const Eigen::VectorXd eta = xr * pois_res.beta + offset;
    for (Eigen::Index i = 0; i < count.size(); ++i) {
      const double mu = std::exp(eta[i]);
      num += (count[i] - mu) * (count[i] - mu) - mu;
      den += mu * mu;
    }
  }
  double alpha = std::clamp(den > 0 ? num / den : 0.0, 1e-8, 1e8);

  struct NbBetaProblem : NewtonProblem {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& y;
    const Eigen::VectorXd& off;
    double alpha;
    NbBetaProblem(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& off, double a)
        : X(X), y(y), off(off), alpha(a) {}
    double loglik(const Eigen::VectorXd& b) const override {
      return glm_detail::loglik_negbin(X, y, off, b, alpha);
    }
    Eigen::VectorXd grad(const Eigen::VectorXd& b) const override {
      return glm_detail::grad_negbin_beta(X, y, off, b, alpha);
    }
    Eigen::MatrixXd info(const Eigen::VectorXd& b) const override {
      const Eigen::VectorXd eta = X * b + off;
      Eigen::VectorXd w(eta.size());
      for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double mu = std::exp(eta[i]);
        w[i] = mu / (1.0 + alpha * mu);
      }
      return X.transpose() * w.asDiagonal() * X;
    }
  } nb(xr, count, offset, alpha);

  Eigen::VectorXd beta = pois_res.beta;
  bool converged = false;
  for (int outer = 0; outer < 2 * kMaxIter; ++outer) {
    nb.alpha = alpha;
    const NewtonResult step = newton_maximize(nb, beta, 0.0);
    if (!step.converged) throw NumericError("fit_negbin: beta step did not converge");
    const double new_alpha = negbin_alpha_step(xr, count, offset, step.beta, alpha);
    double rel = std::abs(new_alpha - alpha) / (1.0 + alpha);
    for (Eigen::Index i = 0; i < beta.size(); ++i)
      rel = std::max(rel, std::abs(step.beta[i] - beta[i]) / (1.0 + std::abs(beta[i])));
    beta = step.beta;
    alpha = new_alpha;
    if (rel < kCoefTol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericError("fit_negbin: did not converge");

  FittedModel fit;
  fit.family = ModelFamily::negbin;
  if (alpha < 1e-6) {
    // Effectively Poisson-dispersed; keep the Poisson fit.
    const NewtonResult res = newton_maximize(pois, beta, 0.0);
    const Eigen::MatrixXd cov =
        pois.info(res.beta).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    fit.dispersion = 0.0;
    fit.notes.push_back("poisson_fallback");
    scatter_into_full(fit, design, retained, res.beta, cov);
    fit.loglik = pois.loglik(res.beta);
    return fit;
  }
  nb.alpha = alpha;
  const Eigen::MatrixXd cov = nb.info(beta).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.dispersion = alpha;
  scatter_into_full(fit, design, retained, beta, cov);
  fit.loglik = nb.loglik(beta);
  return fit;
}

ParameterDraw make_linear_draw(const FittedModel& fit, const Eigen::VectorXd& z,
                               double xi) {
  if (fit.family != ModelFamily::linear)
    throw NumericError("make_linear_draw: fit is not linear");
  if (!(fit.sigma2 > 0.0)) throw NumericError("make_linear_draw: sigma2 must be positive");
  const int nu = fit.n - fit.p - 1;
  if (nu < 1) throw NumericError("make_linear_draw: n - p - 1 < 1");
  if (!(xi > 0.0)) throw NumericError("make_linear_draw: xi must be positive");
  if (z.size() != fit.beta.size()) throw NumericError("make_linear_draw: z dimension mismatch");
  ParameterDraw draw;
  const double sigma2_tilde = fit.sigma2 * nu / xi;
  draw.sigma2_tilde = sigma2_tilde;
  const Eigen::MatrixXd b = psd_sqrt((sigma2_tilde / fit.sigma2) * fit.cov_beta);
  draw.beta_tilde = fit.beta + b * z;
  return draw;
}

ParameterDraw make_glm_draw(const FittedModel& fit, const Eigen::VectorXd& z) {
  if (fit.family == ModelFamily::linear)
    throw NumericError("make_glm_draw: use make_linear_draw for linear fits");
  if (z.size() != fit.beta.size()) throw NumericError("make_glm_draw: z dimension mismatch");
  ParameterDraw draw;
  draw.beta_tilde = fit.beta + psd_sqrt(fit.cov_beta) * z;
  return draw;
}

ParameterDraw draw_linear_params(const FittedModel& fit, RandomStream& stream) {
  const int nu = fit.n - fit.p - 1;
  if (nu < 1) throw NumericError("draw_linear_params: n - p - 1 < 1");
  const double xi = draw_chi_square(stream, nu);
  Eigen::VectorXd z(fit.beta.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = stream.normal();
  return make_linear_draw(fit, z, xi);
}

ParameterDraw draw_glm_params(const FittedModel& fit, RandomStream& stream) {
  Eigen::VectorXd z(fit.beta.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = stream.normal();
  return make_glm_draw(fit, z);
}

}  // namespace miximp
