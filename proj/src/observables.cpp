#include "nljc/observables.hpp"

#include <cmath>
#include <string>

#include "nljc/errors.hpp"
#include "nljc/phase.hpp"

namespace nljc {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kClampSlack = 1e-9;

// Binary entropy of (1/2 + x, 1/2 - x) written as ln 2 - D(x) with
//   D(x) = (1/2 + x) ln(1 + 2x) + (1/2 - x) ln(1 - 2x),
// so the maximally mixed case gives exactly ln 2 and a pure state exactly 0.
struct BinaryEntropy {
  double H;
  double deficit;
};

BinaryEntropy binary_entropy(double x, const char* axis) {
  if (!std::isfinite(x) || std::fabs(x) > 0.5 + kClampSlack) {
    throw NumericalConsistencyError(std::string("sigma_") + axis +
                                    " eigenvalue probability outside [0,1]: 1/2 + " + std::to_string(x));
  }
  x = std::fmin(0.5, std::fmax(-0.5, x));
  const double a = std::fabs(x);
  double d = (0.5 + a) * std::log1p(2.0 * a);
  if (a < 0.5) d += (0.5 - a) * std::log1p(-2.0 * a);
  return {kLn2 - d, d};
}

}  // namespace

double atomic_inversion(const AmplitudeState& state) {
  double w = 0.0;
  for (std::size_t n = 0; n < state.excited.size(); ++n) {
    w += std::norm(state.excited[n]) - std::norm(state.ground[n]);
  }
  return w;
}

double atomic_inversion_closed(const ClosedFormEvolver& evolver, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidParameter("evolution time must be finite and >= 0");
  const auto& modes = evolver.modes();
  const auto& init = evolver.initial();
  const long double mu = evolver.params().mu;
  double w = 0.0;
  for (std::size_t n = 0; n < modes.size(); ++n) {
    const double p = std::norm(init.excited[n]);
    if (p == 0.0) continue;
    const ModeCoefficients& m = modes[n];
    const double detune = static_cast<double>(m.Rn - mu);
    const double s = sin_ratio(m.Omega, t);
    const double c2 = std::cos(reduce_angle(2.0L * m.Omega * static_cast<long double>(t)));
    w += p * (c2 + detune * detune * s * s / 2.0);
  }
  return w;
}

double atomic_inversion_closed(const ModelParams& params, const NonlinearitySpec& f,
                               const PhotonDistribution& dist, double t) {
  return atomic_inversion_closed(ClosedFormEvolver(params, f, dist), t);
}

ReducedAtomDensity reduced_density(const AmplitudeState& state) {
  ReducedAtomDensity rho;
  const std::size_t levels = state.excited.size();
  for (std::size_t n = 0; n < levels; ++n) {
    rho.rho_ee += std::norm(state.excited[n]);
    rho.rho_gg += std::norm(state.ground[n]);
  }
  for (std::size_t n = 0; n + state.k < levels; ++n) {
    rho.rho_eg += state.excited[n + state.k] * std::conj(state.ground[n]);
  }
  return rho;
}

ReducedAtomDensity attach_free_phase(ReducedAtomDensity rho, double nu, unsigned k, double t) {
  rho.rho_eg *= phasor(-static_cast<long double>(nu) * k * static_cast<long double>(t));
  return rho;
}

namespace {

struct AxisEntropies {
  BinaryEntropy x, y, z;
};

AxisEntropies axis_entropies(const ReducedAtomDensity& rho) {
  const double trace = rho.rho_ee + rho.rho_gg;
  if (!(trace > 0.0) || !std::isfinite(trace)) {
    throw NumericalConsistencyError("reduced density matrix has non-positive trace");
  }
  return {binary_entropy(rho.rho_eg.real() / trace, "x"), binary_entropy(rho.rho_eg.imag() / trace, "y"),
          binary_entropy(0.5 * (rho.rho_ee - rho.rho_gg) / trace, "z")};
}

// exp(H) = 2 exp(-D); exact 2 and 1 at the two ends.
double exp_entropy(const BinaryEntropy& b) { return 2.0 * std::exp(-b.deficit); }

}  // namespace

PauliEntropies pauli_entropies(const ReducedAtomDensity& rho) {
  const AxisEntropies a = axis_entropies(rho);
  return {a.x.H, a.y.H, a.z.H};
}

EntropySqueezing entropy_squeezing(const ReducedAtomDensity& rho) {
  const AxisEntropies a = axis_entropies(rho);
  const double bound = 2.0 / std::sqrt(exp_entropy(a.z));
  return {exp_entropy(a.x) - bound, exp_entropy(a.y) - bound};
}

ObservableRecord make_record(const AmplitudeState& state, double reported_time,
                             const ReducedAtomDensity& rho) {
  ObservableRecord r;
  r.time = reported_time;
  r.W = atomic_inversion(state);
  r.rho = rho;
  const AxisEntropies a = axis_entropies(rho);
  r.H_x = a.x.H;
  r.H_y = a.y.H;
  r.H_z = a.z.H;
  r.dH_x = exp_entropy(a.x);
  r.dH_y = exp_entropy(a.y);
  r.dH_z = exp_entropy(a.z);
  const double bound = 2.0 / std::sqrt(r.dH_z);
  r.E_x = r.dH_x - bound;
  r.E_y = r.dH_y - bound;
  r.norm = norm(state);
  return r;
}

ObservableRecord make_record(const AmplitudeState& state, double reported_time) {
  return make_record(state, reported_time, reduced_density(state));
}

}  // namespace nljc
