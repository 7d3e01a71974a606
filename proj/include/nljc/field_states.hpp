#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace nljc {

enum class FieldKind { Coherent, SqueezedVacuum, Thermal };

std::string_view to_string(FieldKind kind);

inline constexpr double kDefaultTailEps = 1e-12;

/// Initial photon-number populations rho_nn(0) on a truncated Fock basis.
struct PhotonDistribution {
  FieldKind kind = FieldKind::Coherent;
  double nbar = 0.0;
  double tail_eps = kDefaultTailEps;
  /// probabilities[n] = rho_nn(0), n = 0..n_cut
  std::vector<double> probabilities;
  /// Sum of `probabilities`; 1 - captured_mass <= tail_eps.
  double captured_mass = 0.0;

  std::size_t n_cut() const noexcept { return probabilities.empty() ? 0 : probabilities.size() - 1; }
  /// Sum n rho_nn over the truncated basis.
  double mean() const;
};

/// Poisson populations e^{-nbar} nbar^n / n! of the coherent state |alpha>, |alpha|^2 = nbar.
PhotonDistribution coherent_distribution(double nbar, double tail_eps = kDefaultTailEps,
                                         unsigned k = 1);

/// Squeezed vacuum with sinh^2 r = nbar: even levels
/// nbar^m (2m)! / ((2^m m!)^2 (1+nbar)^{m+1/2}), odd levels exactly zero.
PhotonDistribution squeezed_distribution(double nbar, double tail_eps = kDefaultTailEps,
                                         unsigned k = 1);

/// Bose-Einstein populations nbar^n / (1+nbar)^{n+1}.
PhotonDistribution thermal_distribution(double nbar, double tail_eps = kDefaultTailEps,
                                        unsigned k = 1);

PhotonDistribution make_distribution(FieldKind kind, double nbar,
                                     double tail_eps = kDefaultTailEps, unsigned k = 1);

/// 1 / (exp(hbar nu / kB T) - 1).
double thermal_nbar_from_temperature(double frequency, double temperature, double hbar_over_kB);

/// |alpha| of the coherent state with mean photon number nbar.
double coherent_amplitude_from_nbar(double nbar);
/// Squeeze parameter r with sinh^2 r = nbar.
double squeeze_parameter_from_nbar(double nbar);

/// Smallest N whose cumulative mass reaches 1 - tail_eps, padded by k + 10
/// levels so that the ground-state partners n+k of every populated level exist.
std::size_t choose_truncation(FieldKind kind, double nbar, double tail_eps, unsigned k);

inline constexpr std::size_t kTruncationSafetyMargin = 10;

}  // namespace nljc
