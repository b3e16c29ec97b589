#pragma once

#include <any>
#include <concepts>
#include <memory>
#include <string>
#include <typeinfo>

namespace effinfer {

/// Natural-log probability or density. May be -infinity, never NaN on valid
/// inputs.
using LogP = double;

/// A primitive distribution: pure inverse-CDF sampling plus log density.
template <class D>
concept Distribution = requires(const D& d, double r, const typename D::value_type& x) {
  typename D::value_type;
  { d.draw(r) } -> std::same_as<typename D::value_type>;
  { d.log_prob(x) } -> std::convertible_to<LogP>;
  { d.name() } -> std::convertible_to<std::string>;
};

class Normal {
 public:
  using value_type = double;

  /// Throws std::invalid_argument unless std_dev > 0.
  Normal(double mean, double std_dev);

  double mean() const { return mean_; }
  double std_dev() const { return std_dev_; }

  /// Quantile at r; throws std::domain_error unless 0 <= r < 1.
  double draw(double r) const;
  LogP log_prob(double x) const;
  double cdf(double x) const;
  std::string name() const;

 private:
  double mean_;
  double std_dev_;
};

class Uniform {
 public:
  using value_type = double;

  /// Throws std::invalid_argument unless lo < hi.
  Uniform(double lo, double hi);

  double lo() const { return lo_; }
  double hi() const { return hi_; }

  double draw(double r) const;
  LogP log_prob(double x) const;
  double cdf(double x) const;
  std::string name() const;

 private:
  double lo_;
  double hi_;
};

class Bernoulli {
 public:
  using value_type = bool;

  /// Throws std::invalid_argument unless 0 <= p <= 1.
  explicit Bernoulli(double p);

  double p() const { return p_; }

  /// True iff r <= p.
  bool draw(double r) const;
  LogP log_prob(bool x) const;
  std::string name() const;

 private:
  double p_;
};

/// Standard normal quantile function (Wichura, AS241 / PPND16). Relative
/// accuracy about 1e-16 over (0, 1); returns -inf at 0 and +inf at 1.
double standard_normal_quantile(double p);

/// Throws std::domain_error unless 0 <= r < 1.
void check_unit_interval(double r);

/// Type-erased distribution handle carried by Sample and Observe requests.
/// Values cross the handle as std::any holding the distribution's value_type.
class AnyDist {
 public:
  template <Distribution D>
  AnyDist(D dist) : self_(std::make_shared<const Model<D>>(std::move(dist))) {}

  std::any draw(double r) const { return self_->draw(r); }
  LogP log_prob(const std::any& x) const { return self_->log_prob(x); }
  std::string name() const { return self_->name(); }

  template <Distribution D>
  const D* as() const {
    auto* m = dynamic_cast<const Model<D>*>(self_.get());
    return m ? &m->dist : nullptr;
  }

 private:
  struct Concept {
    virtual ~Concept() = default;
    virtual std::any draw(double r) const = 0;
    virtual LogP log_prob(const std::any& x) const = 0;
    virtual std::string name() const = 0;
  };

  template <class D>
  struct Model final : Concept {
    explicit Model(D d) : dist(std::move(d)) {}
    std::any draw(double r) const override { return std::any(dist.draw(r)); }
    LogP log_prob(const std::any& x) const override {
      return dist.log_prob(std::any_cast<const typename D::value_type&>(x));
    }
    std::string name() const override { return dist.name(); }
    D dist;
  };

  std::shared_ptr<const Concept> self_;
};

}  // namespace effinfer
