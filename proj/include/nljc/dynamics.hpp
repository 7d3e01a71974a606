#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "nljc/field_states.hpp"
#include "nljc/nonlinearity.hpp"

namespace nljc {

using Complex = std::complex<double>;

/// Scalar physics parameters of the k-photon model with hbar = 1.
/// The atomic frequency is implied: omega = detuning + k nu.
struct ModelParams {
  unsigned k = 1;          ///< photons exchanged per atomic transition
  double nu = 0.0;         ///< field frequency (only enters the optional free phase)
  double detuning = 0.0;   ///< omega - k nu
  double beta1 = 0.0;      ///< Stark coefficient of |g><g|
  double beta2 = 0.0;      ///< Stark coefficient of |e><e|
  double chi = 0.0;        ///< Kerr susceptibility
  double gamma = 1.0;      ///< coupling amplitude, lambda(t) = gamma cos(mu t)
  double mu = 0.0;         ///< coupling modulation frequency

  /// Throws ValidationError: k >= 1, Stark terms only for k = 2,
  /// gamma, mu, nu >= 0, everything finite.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

/// Per-doublet coefficients of the amplitude equations for |n,e> <-> |n+k,g>.
///
/// Held in long double: phi_n and Omega_n multiply times of order 1e2 and
/// reach 1e10 or more for Kerr media with f(n) = sqrt(n).
struct ModeCoefficients {
  std::size_t n = 0;
  long double R1 = 0;     ///< diagonal shift of c_{n,e}
  long double R2 = 0;     ///< diagonal shift of c_{n+k,g}
  long double Rn = 0;     ///< R1 - R2
  long double alpha = 0;  ///< coupling gamma [f(n+k)]!/[f(n)]! sqrt((n+k)!/n!)
  long double phi = 0;    ///< common phase rate
  long double Omega = 0;  ///< generalized Rabi frequency 1/2 sqrt((Rn - mu)^2 + alpha^2)
};

ModeCoefficients mode_coefficients(const ModelParams& params, const NonlinearitySpec& f,
                                   std::size_t n);

/// Amplitudes c_{n,e}(t) and c_{n+k,g}(t) over the truncated basis.
struct AmplitudeState {
  double time = 0.0;
  unsigned k = 1;
  std::vector<Complex> excited;  ///< excited[n] = c_{n,e}
  std::vector<Complex> ground;   ///< ground[n] = c_{n+k,g}
};

/// Sum over n of |c_{n,e}|^2 + |c_{n+k,g}|^2.
double norm(const AmplitudeState& state);

/// Largest |difference| over every excited and ground amplitude.
double max_amplitude_deviation(const AmplitudeState& a, const AmplitudeState& b);

/// Initial amplitudes with the atom excited: c_{n,e}(0) = sqrt(rho_nn(0)), c_{n+k,g}(0) = 0.
AmplitudeState initial_state(const PhotonDistribution& dist, unsigned k);

/// Closed-form propagation of every doublet. Coefficients are computed once
/// at construction; at() is a pure function of t and safe to call concurrently.
class ClosedFormEvolver {
 public:
  ClosedFormEvolver(const ModelParams& params, NonlinearitySpec f, const PhotonDistribution& dist);
  /// Arbitrary initial amplitudes (complex, any phase), excited and ground of equal length.
  ClosedFormEvolver(const ModelParams& params, NonlinearitySpec f, AmplitudeState initial);

  AmplitudeState at(double t) const;

  const std::vector<ModeCoefficients>& modes() const noexcept { return modes_; }
  const AmplitudeState& initial() const noexcept { return initial_; }
  const ModelParams& params() const noexcept { return params_; }

 private:
  ModelParams params_;
  NonlinearitySpec f_;
  AmplitudeState initial_;
  std::vector<ModeCoefficients> modes_;
};

AmplitudeState evolve_closed_form(const ModelParams& params, const NonlinearitySpec& f,
                                  const PhotonDistribution& dist, double t);

/// sin(x t) / x with its analytic limit t near x t = 0.
double sin_ratio(long double x, double t);

struct OracleOptions {
  /// Absolute error target per step on the physical amplitudes.
  double abs_tol = 1e-12;
  /// Error target for the one-period fundamental matrix (unit scale).
  double floquet_abs_tol = 1e-14;
  /// Use the stroboscopic propagation once the grid spans this many periods of e^{i(mu-Rn)t}.
  double min_floquet_periods = 4.0;
  /// Minimum number of steps across the single integrated period.
  double floquet_steps_per_period = 64.0;
  /// Attempted steps allowed per level before IntegrationFailure.
  std::size_t max_steps_per_level = 20'000'000;
  /// Threads sharing the Fock levels; 0 picks the hardware concurrency.
  unsigned workers = 1;
};

/// Integrates the slow-variable equations of every doublet numerically and
/// maps back to c amplitudes on `t_grid` (ascending, first entry 0).
///
/// Without the counter-rotating flag the rotating-wave system
///   dX/dt = -i alpha/2 e^{-i(mu-Rn)t} Y,   dY/dt = -i alpha/2 e^{i(mu-Rn)t} X
/// is solved; with it, both exponentials of the exact transform are kept.
/// X = c_e e^{i R1 t}, Y = c_g e^{i R2 t}.
std::vector<AmplitudeState> evolve_ode_oracle(const ModelParams& params,
                                              const NonlinearitySpec& f,
                                              const AmplitudeState& initial,
                                              std::span<const double> t_grid,
                                              bool include_counter_rotating,
                                              const OracleOptions& options = {});

std::vector<AmplitudeState> evolve_ode_oracle(const ModelParams& params,
                                              const NonlinearitySpec& f,
                                              const PhotonDistribution& dist,
                                              std::span<const double> t_grid,
                                              bool include_counter_rotating,
                                              const OracleOptions& options = {});

}  // namespace nljc
