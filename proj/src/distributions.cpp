#include "effinfer/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace effinfer {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Horner evaluation of an eighth-degree polynomial, coefficients from the
// constant term upwards.
double poly8(const double (&c)[8], double x) {
  double acc = c[7];
  for (int i = 6; i >= 0; --i) acc = acc * x + c[i];
  return acc;
}

}  // namespace

void check_unit_interval(double r) {
  if (!(r >= 0.0 && r < 1.0)) {
    throw std::domain_error(fmt::format("draw: r = {} outside [0, 1)", r));
  }
}

double standard_normal_quantile(double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) {
    throw std::domain_error(fmt::format("normal quantile: p = {} outside [0, 1]", p));
  }
  if (p == 0.0) return -kInf;
  if (p == 1.0) return kInf;

  // AS241 coefficients.
  static constexpr double a[8] = {3.3871328727963666080e0, 1.3314166789178437745e2,
                                  1.9715909503065514427e3, 1.3731693765509461125e4,
                                  4.5921953931549871457e4, 6.7265770927008700853e4,
                                  3.3430575583588128105e4, 2.5090809287301226727e3};
  static constexpr double b[8] = {1.0,
                                  4.2313330701600911252e1, 6.8718700749205790830e2,
                                  5.3941960214247511077e3, 2.1213794301586595867e4,
                                  3.9307895800092710610e4, 2.8729085735721942674e4,
                                  5.2264952788528545610e3};
  static constexpr double c[8] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                  5.76949722146069140550e0, 3.64784832476320460504e0,
                                  1.27045825245236838258e0, 2.41780725177450611770e-1,
                                  2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[8] = {1.0,
                                  2.05319162663775882187e0, 1.67638483018380384940e0,
                                  6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                  1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                  1.05075007164441684324e-9};
  static constexpr double e[8] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                  1.78482653991729133580e0, 2.96560571828504891230e-1,
                                  2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                  2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[8] = {1.0,
                                  5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                  1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                  1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                  2.04426310338993978564e-15};

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly8(a, r) / poly8(b, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = poly8(c, r) / poly8(d, r);
  } else {
    r -= 5.0;
    x = poly8(e, r) / poly8(f, r);
  }
  return q < 0.0 ? -x : x;
}

Normal::Normal(double mean, double std_dev) : mean_(mean), std_dev_(std_dev) {
  if (!(std_dev > 0.0) || !std::isfinite(std_dev)) {
    throw std::invalid_argument(fmt::format("Normal: std_dev = {} must be > 0", std_dev));
  }
}

double Normal::draw(double r) const {
  check_unit_interval(r);
  return mean_ + std_dev_ * standard_normal_quantile(r);
}

LogP Normal::log_prob(double x) const {
  const double z = (x - mean_) / std_dev_;
  return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(std_dev_) - 0.5 * z * z;
}

double Normal::cdf(double x) const {
  return 0.5 * std::erfc(-(x - mean_) / (std_dev_ * std::numbers::sqrt2));
}

std::string Normal::name() const { return fmt::format("Normal({}, {})", mean_, std_dev_); }

Uniform::Uniform(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!(lo < hi)) {
    throw std::invalid_argument(fmt::format("Uniform: need lo < hi, got [{}, {}]", lo, hi));
  }
}

double Uniform::draw(double r) const {
  check_unit_interval(r);
  return lo_ + r * (hi_ - lo_);
}

LogP Uniform::log_prob(double x) const {
  if (x < lo_ || x > hi_) return -kInf;
  return std::log(1.0 / (hi_ - lo_));
}

double Uniform::cdf(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  return (x - lo_) / (hi_ - lo_);
}

std::string Uniform::name() const { return fmt::format("Uniform({}, {})", lo_, hi_); }

Bernoulli::Bernoulli(double p) : p_(p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(fmt::format("Bernoulli: p = {} outside [0, 1]", p));
  }
}

bool Bernoulli::draw(double r) const {
  check_unit_interval(r);
  return r <= p_;
}

LogP Bernoulli::log_prob(bool x) const { return x ? std::log(p_) : std::log1p(-p_); }

std::string Bernoulli::name() const { return fmt::format("Bernoulli({})", p_); }

}  // namespace effinfer
