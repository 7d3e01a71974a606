#pragma once

#include <complex>

#include "nljc/dynamics.hpp"

namespace nljc {

/// 2x2 atomic density matrix after tracing out the field; rho_ge = conj(rho_eg).
struct ReducedAtomDensity {
  double rho_ee = 0.0;
  double rho_gg = 0.0;
  Complex rho_eg{};
};

struct PauliEntropies {
  double H_x = 0.0;
  double H_y = 0.0;
  double H_z = 0.0;
};

struct EntropySqueezing {
  double E_x = 0.0;
  double E_y = 0.0;
};

struct ObservableRecord {
  double time = 0.0;
  double W = 0.0;
  ReducedAtomDensity rho;
  double H_x = 0.0, H_y = 0.0, H_z = 0.0;
  double dH_x = 0.0, dH_y = 0.0, dH_z = 0.0;
  double E_x = 0.0, E_y = 0.0;
  double norm = 0.0;

  bool operator==(const ObservableRecord& o) const {
    return time == o.time && W == o.W && rho.rho_ee == o.rho.rho_ee && rho.rho_gg == o.rho.rho_gg &&
           rho.rho_eg == o.rho.rho_eg && H_x == o.H_x && H_y == o.H_y && H_z == o.H_z &&
           dH_x == o.dH_x && dH_y == o.dH_y && dH_z == o.dH_z && E_x == o.E_x && E_y == o.E_y &&
           norm == o.norm;
  }
};

/// Sum over n of |c_{n,e}|^2 - |c_{n+k,g}|^2.
double atomic_inversion(const AmplitudeState& state);

/// Inversion straight from rho_nn(0) and the mode coefficients:
///   sum rho_nn(0) [cos(2 Omega t) + (Rn - mu)^2 sin^2(Omega t) / (2 Omega^2)].
double atomic_inversion_closed(const ModelParams& params, const NonlinearitySpec& f,
                               const PhotonDistribution& dist, double t);

/// Same sum with the coefficients already tabulated.
double atomic_inversion_closed(const ClosedFormEvolver& evolver, double t);

/// rho_eg pairs equal total excitation: excited level n+k with ground level n+k,
/// i.e. sum_n excited[n+k] conj(ground[n]).
ReducedAtomDensity reduced_density(const AmplitudeState& state);

/// Multiplies rho_eg by exp(-i nu k t), the free-evolution phase dropped by
/// the interaction-picture amplitudes.
ReducedAtomDensity attach_free_phase(ReducedAtomDensity rho, double nu, unsigned k, double t);

/// Shannon entropies (natural log) of the sigma_x, sigma_y, sigma_z
/// eigenvalue distributions. The probabilities are taken relative to the
/// trace rho_ee + rho_gg. Roundoff up to 1e-9 outside [0,1] is clamped; more
/// raises NumericalConsistencyError.
PauliEntropies pauli_entropies(const ReducedAtomDensity& rho);

/// E_a = exp(H_a) - 2 / sqrt(exp(H_z)); negative means squeezed in sigma_a.
EntropySqueezing entropy_squeezing(const ReducedAtomDensity& rho);

/// Every observable of one state. `reported_time` is stored in the record
/// (the scenario layer reports gamma t).
ObservableRecord make_record(const AmplitudeState& state, double reported_time,
                             const ReducedAtomDensity& rho);
ObservableRecord make_record(const AmplitudeState& state, double reported_time);

}  // namespace nljc
