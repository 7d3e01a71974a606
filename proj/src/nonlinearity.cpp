#include "nljc/nonlinearity.hpp"

#include <cmath>
#include <memory>
#include <utility>

#include "nljc/errors.hpp"

namespace nljc {

NonlinearitySpec::NonlinearitySpec(Kind kind, Evaluator f, std::string label)
    : kind_(kind), custom_(std::move(f)), label_(std::move(label)) {}

NonlinearitySpec NonlinearitySpec::identity() { return {Kind::Identity, {}, "identity"}; }

NonlinearitySpec NonlinearitySpec::sqrt_n() { return {Kind::SqrtN, {}, "sqrt_n"}; }

NonlinearitySpec NonlinearitySpec::custom(Evaluator f, std::string label) {
  if (!f) throw InvalidNonlinearity("custom nonlinearity requires an evaluator");
  return {Kind::Custom, std::move(f), std::move(label)};
}

NonlinearitySpec NonlinearitySpec::table(std::vector<double> values) {
  if (values.empty()) throw InvalidNonlinearity("nonlinearity table is empty");
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!std::isfinite(values[j]) || values[j] <= 0.0) {
      throw InvalidNonlinearity("nonlinearity table entry f(" + std::to_string(j + 1) +
                                ") must be finite and positive");
    }
  }
  auto shared = std::make_shared<const std::vector<double>>(values);
  const auto size = values.size();
  NonlinearitySpec spec(
      Kind::Custom,
      [shared, size](std::size_t n) -> double {
        if (n == 0) return 1.0;
        if (n > size) {
          throw InvalidNonlinearity("nonlinearity table covers f(1.." + std::to_string(size) +
                                    "), f(" + std::to_string(n) + ") requested");
        }
        return (*shared)[n - 1];
      },
      "table");
  spec.table_values_ = std::move(values);
  return spec;
}

double NonlinearitySpec::eval(std::size_t n) const {
  switch (kind_) {
    case Kind::Identity:
      return 1.0;
    case Kind::SqrtN:
      return std::sqrt(static_cast<double>(n));
    case Kind::Custom:
      break;
  }
  const double v = custom_(n);
  if (!std::isfinite(v) || (n >= 1 && v < 0.0)) {
    throw InvalidNonlinearity("custom nonlinearity returned " + std::to_string(v) + " at n=" +
                              std::to_string(n));
  }
  return v;
}

double NonlinearitySpec::squared(std::size_t n) const {
  switch (kind_) {
    case Kind::Identity:
      return 1.0;
    case Kind::SqrtN:
      return static_cast<double>(n);
    case Kind::Custom:
      break;
  }
  const double v = eval(n);
  return v * v;
}

double NonlinearitySpec::checked_log(std::size_t j) const {
  if (kind_ == Kind::Identity) return 0.0;
  if (kind_ == Kind::SqrtN) return 0.5 * std::log(static_cast<double>(j));
  const double v = eval(j);
  if (!(v > 0.0)) {
    throw InvalidNonlinearity("f(" + std::to_string(j) + ") = " + std::to_string(v) +
                              " is not positive; [f(n)]! undefined");
  }
  return std::log(v);
}

void NonlinearitySpec::extend(std::size_t n_max) {
  log_table_.reserve(n_max + 1);
  while (log_table_.size() <= n_max) {
    const std::size_t j = log_table_.size();
    log_table_.push_back(log_table_.back() + checked_log(j));
  }
}

double NonlinearitySpec::factorial_log(std::size_t n) const {
  if (n < log_table_.size()) return log_table_[n];
  double acc = log_table_.back();
  for (std::size_t j = log_table_.size(); j <= n; ++j) acc += checked_log(j);
  return acc;
}

long double NonlinearitySpec::log_ratio(std::size_t n, unsigned k) const {
  if (k == 0) throw InvalidParameter("f_ratio requires k >= 1");
  long double acc = 0.0L;
  for (std::size_t j = n + 1; j <= n + k; ++j) {
    if (kind_ == Kind::SqrtN) {
      acc += 0.5L * std::log(static_cast<long double>(j));
    } else {
      acc += checked_log(j);
    }
  }
  return acc;
}

double NonlinearitySpec::ratio(std::size_t n, unsigned k) const {
  return static_cast<double>(std::exp(log_ratio(n, k)));
}

}  // namespace nljc
