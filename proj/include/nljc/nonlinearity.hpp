#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace nljc {

/// Intensity deformation f(n) entering A = a f(n).
///
/// Every coefficient of the model needs ratios of f-factorials
/// [f(n)]! = f(n) f(n-1) ... f(1), [f(0)]! = 1. These are kept as a table of
/// logarithms so that the ratios stay finite for Fock levels in the thousands.
/// The table grows through extend(); const lookups past its end are computed on
/// the fly without touching the cache, so a fully extended spec can be shared
/// across threads.
class NonlinearitySpec {
 public:
  enum class Kind { Identity, SqrtN, Custom };

  using Evaluator = std::function<double(std::size_t)>;

  static NonlinearitySpec identity();
  static NonlinearitySpec sqrt_n();
  /// Callable deformation; `label` is echoed into scenario metadata.
  static NonlinearitySpec custom(Evaluator f, std::string label = "custom");
  /// Tabulated deformation: values[j-1] = f(j) for j = 1..values.size().
  /// f(0) evaluates to 1; it only ever appears multiplied by zero.
  static NonlinearitySpec table(std::vector<double> values);

  Kind kind() const noexcept { return kind_; }
  const std::string& label() const noexcept { return label_; }
  /// Non-empty only for table-backed specs.
  std::span<const double> table_values() const noexcept { return table_values_; }

  /// f(n). Throws InvalidNonlinearity for a non-finite or negative custom value.
  double eval(std::size_t n) const;
  /// f(n)^2; exact integer n for SqrtN.
  double squared(std::size_t n) const;

  /// ln [f(n)]!
  double factorial_log(std::size_t n) const;
  /// f(n+1) f(n+2) ... f(n+k), evaluated in log space.
  double ratio(std::size_t n, unsigned k) const;
  /// ln of the same product, summed term by term rather than as a difference
  /// of two large factorial logs.
  long double log_ratio(std::size_t n, unsigned k) const;

  /// Populate the log-factorial cache through index n_max.
  void extend(std::size_t n_max);
  std::size_t cached_up_to() const noexcept { return log_table_.size() - 1; }

 private:
  NonlinearitySpec(Kind kind, Evaluator f, std::string label);

  double checked_log(std::size_t j) const;

  Kind kind_;
  Evaluator custom_;
  std::string label_;
  std::vector<double> table_values_;
  std::vector<double> log_table_{0.0};
};

// Free-function spellings of the member operations.
inline double eval_f(const NonlinearitySpec& spec, std::size_t n) { return spec.eval(n); }
inline double f_factorial_log(const NonlinearitySpec& spec, std::size_t n) {
  return spec.factorial_log(n);
}
inline double f_ratio(const NonlinearitySpec& spec, std::size_t n, unsigned k) {
  return spec.ratio(n, k);
}

}  // namespace nljc
