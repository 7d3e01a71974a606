#include "nljc/field_states.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nljc/errors.hpp"

namespace nljc {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

void check_nbar(double nbar) {
  if (!std::isfinite(nbar) || nbar < 0.0) {
    throw InvalidParameter("mean photon number must be finite and non-negative, got " +
                           std::to_string(nbar));
  }
}

void check_tail(double tail_eps) {
  if (!(tail_eps > 0.0 && tail_eps < 1.0)) {
    throw InvalidParameter("tail_eps must lie in (0,1), got " + std::to_string(tail_eps));
  }
}

// Neumaier compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Yields rho_nn(0) for n = 0, 1, 2, ...
class PopulationStream {
 public:
  PopulationStream(FieldKind kind, double nbar) : kind_(kind), nbar_(nbar) {
    if (kind_ == FieldKind::Thermal) {
      thermal_next_ = 1.0 / (1.0 + nbar_);
      thermal_ratio_ = nbar_ / (1.0 + nbar_);
    }
  }

  double next() {
    const std::size_t n = n_++;
    switch (kind_) {
      case FieldKind::Coherent: {
        if (nbar_ == 0.0) return n == 0 ? 1.0 : 0.0;
        const double nd = static_cast<double>(n);
        return std::exp(-nbar_ + nd * std::log(nbar_) - std::lgamma(nd + 1.0));
      }
      case FieldKind::SqueezedVacuum: {
        if (n % 2 == 1) return 0.0;
        if (nbar_ == 0.0) return n == 0 ? 1.0 : 0.0;
        const double m = static_cast<double>(n / 2);
        const double log_w = m * std::log(nbar_) + std::lgamma(2.0 * m + 1.0) -
                             2.0 * (m * kLn2 + std::lgamma(m + 1.0)) -
                             (m + 0.5) * std::log1p(nbar_);
        return std::exp(log_w);
      }
      case FieldKind::Thermal: {
        const double p = thermal_next_;
        thermal_next_ *= thermal_ratio_;
        return p;
      }
    }
    return 0.0;
  }

  std::size_t position() const { return n_; }

 private:
  FieldKind kind_;
  double nbar_;
  std::size_t n_ = 0;
  double thermal_next_ = 0.0;
  double thermal_ratio_ = 0.0;
};

PhotonDistribution build(FieldKind kind, double nbar, double tail_eps, unsigned k) {
  check_nbar(nbar);
  check_tail(tail_eps);
  PhotonDistribution dist;
  dist.kind = kind;
  dist.nbar = nbar;
  dist.tail_eps = tail_eps;
  const std::size_t n_cut = choose_truncation(kind, nbar, tail_eps, k);
  dist.probabilities.resize(n_cut + 1);
  PopulationStream stream(kind, nbar);
  CompensatedSum mass;
  for (auto& p : dist.probabilities) {
    p = stream.next();
    mass.add(p);
  }
  dist.captured_mass = mass.value();
  return dist;
}

}  // namespace

std::string_view to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::Coherent:
      return "coherent";
    case FieldKind::SqueezedVacuum:
      return "squeezed";
    case FieldKind::Thermal:
      return "thermal";
  }
  return "unknown";
}

double PhotonDistribution::mean() const {
  CompensatedSum acc;
  for (std::size_t n = 0; n < probabilities.size(); ++n) {
    acc.add(static_cast<double>(n) * probabilities[n]);
  }
  return acc.value();
}

std::size_t choose_truncation(FieldKind kind, double nbar, double tail_eps, unsigned k) {
  check_nbar(nbar);
  check_tail(tail_eps);
  if (k == 0) throw InvalidParameter("photon transition number k must be >= 1");
  PopulationStream stream(kind, nbar);
  CompensatedSum mass;
  const double target = 1.0 - tail_eps;
  // Past the mode the populations only decrease; once they underflow the
  // cumulative mass cannot grow any further.
  const auto mode = static_cast<std::size_t>(std::ceil(nbar)) + 2;
  for (;;) {
    const std::size_t n = stream.position();
    const double p = stream.next();
    mass.add(p);
    if (mass.value() >= target) return n + k + kTruncationSafetyMargin;
    if (n > 2 * mode && p == 0.0 && (kind != FieldKind::SqueezedVacuum || n % 2 == 0)) {
      return n + k + kTruncationSafetyMargin;
    }
  }
}

PhotonDistribution coherent_distribution(double nbar, double tail_eps, unsigned k) {
  return build(FieldKind::Coherent, nbar, tail_eps, k);
}

PhotonDistribution squeezed_distribution(double nbar, double tail_eps, unsigned k) {
  return build(FieldKind::SqueezedVacuum, nbar, tail_eps, k);
}

PhotonDistribution thermal_distribution(double nbar, double tail_eps, unsigned k) {
  return build(FieldKind::Thermal, nbar, tail_eps, k);
}

PhotonDistribution make_distribution(FieldKind kind, double nbar, double tail_eps, unsigned k) {
  return build(kind, nbar, tail_eps, k);
}

double thermal_nbar_from_temperature(double frequency, double temperature, double hbar_over_kB) {
  if (!(frequency > 0.0) || !std::isfinite(frequency)) {
    throw InvalidParameter("field frequency must be positive");
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InvalidParameter("temperature must be positive");
  }
  if (!(hbar_over_kB > 0.0) || !std::isfinite(hbar_over_kB)) {
    throw InvalidParameter("hbar/kB must be positive");
  }
  const double x = hbar_over_kB * frequency / temperature;
  // expm1 keeps the high-temperature limit accurate; exp overflow gives 0.
  return 1.0 / std::expm1(x);
}

double coherent_amplitude_from_nbar(double nbar) {
  check_nbar(nbar);
  return std::sqrt(nbar);
}

double squeeze_parameter_from_nbar(double nbar) {
  check_nbar(nbar);
  return std::asinh(std::sqrt(nbar));
}

}  // namespace nljc
