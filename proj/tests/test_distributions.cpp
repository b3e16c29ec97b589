#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "effinfer/distributions.hpp"

using namespace effinfer;

namespace {

// Independent quantile: bisection on the complementary error function.
double quantile_by_bisection(double p) {
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::numbers::sqrt2) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Sup distance between the empirical CDF of draws on an equally spaced grid
// of r and the analytic CDF.
template <class D>
double ecdf_sup_distance(const D& d) {
  const int n = 100000;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = d.draw((i + 0.5) / n);
  std::sort(xs.begin(), xs.end());
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = d.cdf(xs[i]);
    worst = std::max({worst, std::abs(f - static_cast<double>(i + 1) / n),
                      std::abs(f - static_cast<double>(i) / n)});
  }
  return worst;
}

double trapezoid(const std::function<double(double)>& f, double a, double b, int steps) {
  const double h = (b - a) / steps;
  double sum = 0.5 * (f(a) + f(b));
  for (int i = 1; i < steps; ++i) sum += f(a + i * h);
  return sum * h;
}

}  // namespace

TEST_CASE("draw examples") {
  CHECK(Bernoulli(0.5).draw(0.3) == true);
  CHECK(Bernoulli(0.5).draw(0.7) == false);
  CHECK(Bernoulli(0.5).draw(0.5) == true);
  CHECK(Normal(0.0, 1.0).draw(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(Normal(0.0, 1.0).draw(0.975) == doctest::Approx(1.959964).epsilon(1e-5));
  CHECK(Normal(2.0, 3.0).draw(0.975) == doctest::Approx(2.0 + 3.0 * quantile_by_bisection(0.975)));
  CHECK(Uniform(-1.0, 3.0).draw(0.25) == doctest::Approx(0.0));
}

TEST_CASE("draw rejects r outside [0, 1)") {
  CHECK_THROWS_AS(Normal(0.0, 1.0).draw(1.0), std::domain_error);
  CHECK_THROWS_AS(Uniform(0.0, 1.0).draw(-0.1), std::domain_error);
  CHECK_THROWS_AS(Bernoulli(0.2).draw(std::nan("")), std::domain_error);
  CHECK_NOTHROW(Bernoulli(0.2).draw(0.0));
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(Normal(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Normal(0.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(Uniform(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Bernoulli(1.5), std::invalid_argument);
}

TEST_CASE("log_prob examples") {
  CHECK(Bernoulli(0.5).log_prob(true) == doctest::Approx(-0.693147).epsilon(1e-6));
  CHECK(Bernoulli(0.25).log_prob(false) == doctest::Approx(std::log(0.75)));
  CHECK(Normal(0.0, 1.0).log_prob(0.0) == doctest::Approx(-0.918939).epsilon(1e-6));
  CHECK(Normal(0.0, 1.0).log_prob(0.0) == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)));
  CHECK(std::isinf(Uniform(0.0, 1.0).log_prob(1.5)));
  CHECK(Uniform(0.0, 1.0).log_prob(1.5) < 0.0);
  CHECK(Uniform(0.0, 4.0).log_prob(1.0) == doctest::Approx(-std::log(4.0)));
  CHECK_FALSE(std::signbit(Uniform(0.0, 1.0).log_prob(0.5)));
}

TEST_CASE("normal quantile matches bisection on erfc") {
  for (double p : {1e-12, 1e-8, 1e-4, 0.01, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.9, 0.97575, 0.975, 0.999}) {
    CAPTURE(p);
    CHECK(std::abs(standard_normal_quantile(p) - quantile_by_bisection(p)) < 1e-9);
  }
  // The right tail by symmetry, where 1 - p loses precision in erfc.
  for (double p : {1e-12, 1e-6, 1e-3}) {
    CHECK(standard_normal_quantile(1.0 - p) ==
          doctest::Approx(-standard_normal_quantile(p)).epsilon(1e-6));
  }
  CHECK(std::isinf(standard_normal_quantile(0.0)));
  CHECK_THROWS_AS(standard_normal_quantile(1.5), std::domain_error);
}

TEST_CASE("draw is monotone in r") {
  Normal n(1.0, 2.0);
  Uniform u(-2.0, 5.0);
  Bernoulli b(0.3);
  double pn = n.draw(1e-9);
  double pu = u.draw(0.0);
  bool pb = b.draw(0.0);
  for (int i = 1; i < 10000; ++i) {
    const double r = i / 10000.0;
    CHECK(n.draw(r) >= pn);
    CHECK(u.draw(r) >= pu);
    CHECK(static_cast<int>(b.draw(r)) <= static_cast<int>(pb));
    pn = n.draw(r);
    pu = u.draw(r);
    pb = b.draw(r);
  }
}

TEST_CASE("inverse-CDF draws reproduce the CDF") {
  CHECK(ecdf_sup_distance(Normal(0.0, 1.0)) < 0.01);
  CHECK(ecdf_sup_distance(Normal(-3.0, 0.5)) < 0.01);
  CHECK(ecdf_sup_distance(Uniform(2.0, 7.0)) < 0.01);
  // Bernoulli: fraction of true draws on the grid.
  const int n = 100000;
  int trues = 0;
  for (int i = 0; i < n; ++i) trues += Bernoulli(0.3).draw((i + 0.5) / n);
  CHECK(std::abs(static_cast<double>(trues) / n - 0.3) < 0.01);
}

TEST_CASE("densities normalise") {
  Normal n(0.5, 1.5);
  CHECK(trapezoid([&](double x) { return std::exp(n.log_prob(x)); }, -15.0, 16.0, 20000) ==
        doctest::Approx(1.0).epsilon(1e-3));
  Uniform u(-1.0, 2.0);
  CHECK(trapezoid([&](double x) { return std::exp(u.log_prob(x)); }, -1.0, 2.0, 20000) ==
        doctest::Approx(1.0).epsilon(1e-3));
  Bernoulli b(0.37);
  CHECK(std::exp(b.log_prob(true)) + std::exp(b.log_prob(false)) == doctest::Approx(1.0));
}

TEST_CASE("AnyDist forwards to the wrapped distribution") {
  AnyDist d(Normal(1.0, 2.0));
  CHECK(std::any_cast<double>(d.draw(0.5)) == doctest::Approx(1.0));
  CHECK(d.log_prob(std::any(1.0)) == doctest::Approx(Normal(1.0, 2.0).log_prob(1.0)));
  CHECK(d.name() == Normal(1.0, 2.0).name());
  REQUIRE(d.as<Normal>() != nullptr);
  CHECK(d.as<Normal>()->std_dev() == 2.0);
  CHECK(d.as<Bernoulli>() == nullptr);
  AnyDist coin(Bernoulli(0.9));
  CHECK(std::any_cast<bool>(coin.draw(0.1)) == true);
}

namespace {

// A user-defined distribution needs only the four members.
struct Die {
  using value_type = int;
  int draw(double r) const { return 1 + static_cast<int>(r * 6.0); }
  LogP log_prob(int x) const { return (x >= 1 && x <= 6) ? -std::log(6.0) : -INFINITY; }
  std::string name() const { return "Die"; }
};

}  // namespace

TEST_CASE("the distribution interface is open") {
  static_assert(Distribution<Die>);
  AnyDist d(Die{});
  CHECK(std::any_cast<int>(d.draw(0.99)) == 6);
  CHECK(d.log_prob(std::any(3)) == doctest::Approx(-std::log(6.0)));
}
