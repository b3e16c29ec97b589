#pragma once

// Example models and closed-form oracles for them.

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "effinfer/distributions.hpp"
#include "effinfer/model.hpp"

namespace effinfer {

struct LinRegrData {
  std::vector<double> xs;
  std::vector<double> ys;
};

struct HMMData {
  std::vector<double> ys;
  double q_std = 1.0;  // transition noise
  double r_std = 1.0;  // observation noise
};

/// p ~ Uniform(0, 1) at "p", then `heads` observes of Bernoulli(p) at true
/// and `tails` at false, all tagged "y". Returns p.
Model<double> coin_flip(int heads, int tails);

/// m ~ Normal(0, 3) at "m", c ~ Normal(0, 2) at "c", then one observe of
/// Normal(m x + c, 1) per point, tagged "y". Returns (m, c).
Model<std::pair<double, double>> lin_regr(const LinRegrData& data);

/// Linear-Gaussian state space model. x0 ~ Normal(0, 1) at "x0" and y_0 is
/// observed at x0; for t >= 1, x_t ~ Normal(x_{t-1}, q) at "x" and y_t is
/// observed at x_t. Observations are Normal(x_t, r) tagged "y". Returns the
/// latent path.
Model<std::vector<double>> lin_gauss_hmm(const HMMData& data);

/// Latent columns of a model result, named "tag#occurrence".
std::vector<std::string> coin_flip_columns();
std::vector<double> coin_flip_values(double p);
std::vector<std::string> lin_regr_columns();
std::vector<double> lin_regr_values(const std::pair<double, double>& mc);
std::vector<std::string> hmm_columns(std::size_t observations);
std::vector<double> hmm_values(const std::vector<double>& path);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Beta(1 + heads, 1 + tails) posterior moments of p.
Moments oracle_beta_bernoulli(int heads, int tails);

struct Gaussian2 {
  std::array<double, 2> mean{};
  std::array<std::array<double, 2>, 2> cov{};
};

/// Conjugate posterior of (m, c) for lin_regr with independent Normal
/// priors of the given scales and Normal observation noise `noise`.
Gaussian2 oracle_bayes_linregr(const LinRegrData& data, double m_std = 3.0, double c_std = 2.0,
                               double noise = 1.0);

/// Exact log marginal likelihood of lin_gauss_hmm through the Kalman
/// filter's prediction-error decomposition.
LogP oracle_kalman_log_evidence(const HMMData& data);

}  // namespace effinfer
