#include "effinfer/models.hpp"

#include <fmt/core.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "effinfer/cons_list.hpp"

namespace effinfer {
namespace {

Model<double> coin_observations(double p, int heads, int tails) {
  if (heads == 0 && tails == 0) return Model<double>::pure(p);
  const bool outcome = heads > 0;
  return chain(observe(Bernoulli(p), outcome, "y"), [p, heads, tails, outcome](bool) {
    return outcome ? coin_observations(p, heads - 1, tails) : coin_observations(p, heads, tails - 1);
  });
}

using Pair = std::pair<double, double>;

Model<Pair> regression_points(std::shared_ptr<const LinRegrData> data, std::size_t i, double m,
                              double c) {
  if (i == data->xs.size()) return Model<Pair>::pure({m, c});
  return chain(observe(Normal(m * data->xs[i] + c, 1.0), data->ys[i], "y"),
               [data, i, m, c](double) { return regression_points(data, i + 1, m, c); });
}

using Path = std::vector<double>;

// Observes y_t at the head of `path`, then moves to t + 1.
Model<Path> hmm_from(std::shared_ptr<const HMMData> data, std::size_t t, ConsList<double> path) {
  auto next = [data, t, path](double) -> Model<Path> {
    if (t + 1 == data->ys.size()) return Model<Path>::pure(path.oldest_first());
    return chain(sample(Normal(path.front(), data->q_std), "x"), [data, t, path](double x) {
      return hmm_from(data, t + 1, path.push(x));
    });
  };
  return chain(observe(Normal(path.front(), data->r_std), data->ys[t], "y"), next);
}

}  // namespace

Model<double> coin_flip(int heads, int tails) {
  if (heads < 0 || tails < 0) throw std::invalid_argument("coin_flip: negative count");
  return chain(sample(Uniform(0.0, 1.0), "p"),
               [heads, tails](double p) { return coin_observations(p, heads, tails); });
}

Model<std::pair<double, double>> lin_regr(const LinRegrData& data) {
  if (data.xs.size() != data.ys.size()) {
    throw std::invalid_argument("lin_regr: xs and ys differ in length");
  }
  if (data.xs.empty()) throw std::invalid_argument("lin_regr: no data points");
  auto shared = std::make_shared<const LinRegrData>(data);
  return chain(sample(Normal(0.0, 3.0), "m"), [shared](double m) {
    return chain(sample(Normal(0.0, 2.0), "c"),
                 [shared, m](double c) { return regression_points(shared, 0, m, c); });
  });
}

Model<std::vector<double>> lin_gauss_hmm(const HMMData& data) {
  if (!(data.q_std > 0.0) || !(data.r_std > 0.0)) {
    throw std::invalid_argument("lin_gauss_hmm: noise scales must be positive");
  }
  auto shared = std::make_shared<const HMMData>(data);
  return chain(sample(Normal(0.0, 1.0), "x0"), [shared](double x0) {
    ConsList<double> path = ConsList<double>{}.push(x0);
    if (shared->ys.empty()) return Model<Path>::pure(path.oldest_first());
    return hmm_from(shared, 0, path);
  });
}

std::vector<std::string> coin_flip_columns() { return {"p#0"}; }

std::vector<double> coin_flip_values(double p) { return {p}; }

std::vector<std::string> lin_regr_columns() { return {"m#0", "c#0"}; }

std::vector<double> lin_regr_values(const std::pair<double, double>& mc) {
  return {mc.first, mc.second};
}

std::vector<std::string> hmm_columns(std::size_t observations) {
  std::vector<std::string> names{"x0#0"};
  for (std::size_t t = 1; t < observations; ++t) names.push_back(fmt::format("x#{}", t - 1));
  return names;
}

std::vector<double> hmm_values(const std::vector<double>& path) { return path; }

Moments oracle_beta_bernoulli(int heads, int tails) {
  if (heads < 0 || tails < 0) throw std::invalid_argument("oracle_beta_bernoulli: negative count");
  const double a = 1.0 + heads;
  const double b = 1.0 + tails;
  const double s = a + b;
  return {a / s, a * b / (s * s * (s + 1.0))};
}

Gaussian2 oracle_bayes_linregr(const LinRegrData& data, double m_std, double c_std,
                               double noise) {
  if (data.xs.size() != data.ys.size()) {
    throw std::invalid_argument("oracle_bayes_linregr: xs and ys differ in length");
  }
  const double prec_noise = 1.0 / (noise * noise);
  // Posterior precision: diag(1/m_std^2, 1/c_std^2) + X^T X / noise^2, with
  // design rows (x_i, 1).
  double a = 1.0 / (m_std * m_std);
  double b = 0.0;
  double d = 1.0 / (c_std * c_std);
  double xty0 = 0.0;
  double xty1 = 0.0;
  for (std::size_t i = 0; i < data.xs.size(); ++i) {
    const double x = data.xs[i];
    a += prec_noise * x * x;
    b += prec_noise * x;
    d += prec_noise;
    xty0 += prec_noise * x * data.ys[i];
    xty1 += prec_noise * data.ys[i];
  }
  const double det = a * d - b * b;
  Gaussian2 out;
  out.cov = {{{d / det, -b / det}, {-b / det, a / det}}};
  out.mean = {out.cov[0][0] * xty0 + out.cov[0][1] * xty1,
              out.cov[1][0] * xty0 + out.cov[1][1] * xty1};
  return out;
}

LogP oracle_kalman_log_evidence(const HMMData& data) {
  const double q2 = data.q_std * data.q_std;
  const double r2 = data.r_std * data.r_std;
  double mean = 0.0;
  double var = 1.0;
  LogP total = 0.0;
  for (std::size_t t = 0; t < data.ys.size(); ++t) {
    if (t > 0) var += q2;
    const double s = var + r2;
    const double e = data.ys[t] - mean;
    total += -0.5 * (std::log(2.0 * std::numbers::pi * s) + e * e / s);
    const double gain = var / s;
    mean += gain * e;
    var *= 1.0 - gain;
  }
  return total;
}

}  // namespace effinfer
