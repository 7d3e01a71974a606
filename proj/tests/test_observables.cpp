#include <cmath>
#include <vector>

#include "doctest.h"
#include "nljc/errors.hpp"
#include "nljc/observables.hpp"

using namespace nljc;

namespace {

constexpr double kLn2 = 0.69314718055994530942;

ReducedAtomDensity rho(double ee, double gg, Complex eg) { return {ee, gg, eg}; }

}  // namespace

TEST_CASE("Pauli entropies") {
  auto h = pauli_entropies(rho(1.0, 0.0, 0.0));
  CHECK(h.H_x == kLn2);
  CHECK(h.H_y == kLn2);
  CHECK(h.H_z == 0.0);

  h = pauli_entropies(rho(0.5, 0.5, 0.5));
  CHECK(h.H_x == 0.0);
  CHECK(h.H_y == kLn2);
  CHECK(h.H_z == kLn2);

  const double s = 0.9;
  h = pauli_entropies(rho(0.5, 0.5, Complex(1.0, 1.0) / (2.0 * std::sqrt(2.0)) * s));
  CHECK(h.H_x == doctest::Approx(0.47411489595408112562).epsilon(1e-14));
  CHECK(h.H_y == doctest::Approx(0.47411489595408112562).epsilon(1e-14));
  CHECK(h.H_z == doctest::Approx(kLn2).epsilon(1e-15));
}

TEST_CASE("roundoff is clamped, larger violations are errors") {
  CHECK(pauli_entropies(rho(0.5, 0.5, 0.5 + 5e-10)).H_x == 0.0);
  CHECK_THROWS_AS(pauli_entropies(rho(0.5, 0.5, 0.5 + 1e-6)), NumericalConsistencyError);
  CHECK_THROWS_AS(pauli_entropies(rho(0.5, 0.5, Complex(0.0, -0.51))), NumericalConsistencyError);
  CHECK_THROWS_AS(pauli_entropies(rho(0.0, 0.0, 0.0)), NumericalConsistencyError);
}

TEST_CASE("entropy squeezing factors") {
  auto e = entropy_squeezing(rho(1.0, 0.0, 0.0));
  CHECK(e.E_x == 0.0);
  CHECK(e.E_y == 0.0);

  e = entropy_squeezing(rho(0.5, 0.5, 0.5));
  CHECK(e.E_x == doctest::Approx(1.0 - std::sqrt(2.0)).epsilon(1e-14));
  CHECK(e.E_y == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-14));

  e = entropy_squeezing(rho(0.5, 0.5, 0.0));
  CHECK(e.E_x == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-14));
  CHECK(e.E_y == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-14));

  e = entropy_squeezing(rho(0.5, 0.5, Complex(1.0, 1.0) / (2.0 * std::sqrt(2.0)) * 0.9));
  CHECK(e.E_x == doctest::Approx(0.19237800492134235789).epsilon(1e-13));
}

TEST_CASE("coherence pairs equal total excitation") {
  // k = 1, two doublets: excited = {c_{0,e}, c_{1,e}}, ground = {c_{1,g}, c_{2,g}}.
  AmplitudeState s;
  s.k = 1;
  s.excited = {Complex(0.6, 0.0), Complex(0.3, 0.2)};
  s.ground = {Complex(0.1, -0.5), Complex(0.0, 0.4)};
  const auto r = reduced_density(s);
  // Only |1,e> and |1,g> share a field state.
  const Complex expected = s.excited[1] * std::conj(s.ground[0]);
  CHECK(std::abs(r.rho_eg - expected) < 1e-16);
  const Complex misread = s.excited[0] * std::conj(s.ground[0]) + s.excited[1] * std::conj(s.ground[1]);
  CHECK(std::abs(r.rho_eg - misread) > 0.1);
  CHECK(r.rho_ee == doctest::Approx(0.36 + 0.13));
  CHECK(r.rho_gg == doctest::Approx(0.26 + 0.16));
}

TEST_CASE("reduced density against a dense full-basis integration") {
  // coherent nbar = 1, f = sqrt(n), k = 1, mu = 0.1, chi = 0.03; reference from
  // an 8th-order integration of the full (atom x Fock) state vector followed
  // by the partial trace over the field.
  ModelParams p;
  p.mu = 0.1;
  p.chi = 0.03;
  const ClosedFormEvolver ev(p, NonlinearitySpec::sqrt_n(), coherent_distribution(1.0));
  struct Ref {
    double t, re, im, W;
  };
  const Ref refs[] = {{0.5, 0.0082090928725313417, 0.23934217362179894, 0.54661931549845155},
                      {1.0, -0.10320676854526639, 0.22243656735033759, -0.043167262092241865},
                      {2.0, -0.31069193374370618, -0.18099398167148284, -0.17028984967776295}};
  for (const auto& ref : refs) {
    const auto s = ev.at(ref.t);
    const auto r = reduced_density(s);
    CHECK(std::abs(r.rho_eg.real() - ref.re) < 1e-9);
    CHECK(std::abs(r.rho_eg.imag() - ref.im) < 1e-9);
    CHECK(std::abs(atomic_inversion(s) - ref.W) < 1e-9);
  }
}

TEST_CASE("inversion routes") {
  ModelParams vac;
  const ClosedFormEvolver ev(vac, NonlinearitySpec::identity(), coherent_distribution(0.0));
  for (double t : {0.0, 0.7, 3.1, 25.0}) {
    CHECK(std::abs(atomic_inversion(ev.at(t)) - std::cos(t)) <= 1e-12);
    CHECK(std::abs(atomic_inversion_closed(ev, t) - std::cos(t)) <= 1e-12);
  }

  ModelParams p;
  p.k = 2;
  p.mu = 0.1;
  p.chi = 0.01;
  p.beta1 = p.beta2 = 0.1;
  p.detuning = 3.0;
  const auto dist = squeezed_distribution(4.0, 1e-12, 2);
  CHECK(atomic_inversion_closed(p, NonlinearitySpec::sqrt_n(), dist, 0.0) ==
        doctest::Approx(dist.captured_mass).epsilon(1e-15));
  const ClosedFormEvolver e2(p, NonlinearitySpec::sqrt_n(), dist);
  for (double t : {0.2, 1.9, 14.0, 49.5}) {
    const auto s = e2.at(t);
    const auto r = reduced_density(s);
    CHECK(std::abs(atomic_inversion(s) - atomic_inversion_closed(e2, t)) <= 1e-10);
    CHECK(std::abs(atomic_inversion(s) - (r.rho_ee - r.rho_gg)) <= 1e-10);
  }
}

TEST_CASE("records satisfy the entropic uncertainty relation") {
  ModelParams p;
  p.mu = 0.1;
  p.chi = 0.03;
  const ClosedFormEvolver ev(p, NonlinearitySpec::sqrt_n(), coherent_distribution(1.0));
  for (int j = 0; j <= 400; ++j) {
    const auto rec = make_record(ev.at(0.05 * j), 0.05 * j);
    CHECK(rec.dH_x * rec.dH_y >= 4.0 / rec.dH_z - 1e-9);
    CHECK(rec.H_x >= 0.0);
    CHECK(rec.H_x <= kLn2);
    CHECK(rec.H_z <= kLn2);
    CHECK(std::abs(rec.W - (rec.rho.rho_ee - rec.rho.rho_gg)) <= 1e-10);
    CHECK(std::norm(rec.rho.rho_eg) <= rec.rho.rho_ee * rec.rho.rho_gg + 1e-12);
  }
  const auto first = make_record(ev.at(0.0), 0.0);
  CHECK(first.E_x == 0.0);
  CHECK(first.E_y == 0.0);
  CHECK(first.H_z == 0.0);
}

TEST_CASE("free-evolution phase on the coherence") {
  const auto r = rho(0.5, 0.5, Complex(0.3, 0.1));
  const auto shifted = attach_free_phase(r, 2.0, 2, 0.25);  // phase -1 rad
  CHECK(std::abs(shifted.rho_eg - r.rho_eg * std::polar(1.0, -1.0)) < 1e-15);
  CHECK(shifted.rho_ee == r.rho_ee);
  CHECK(attach_free_phase(r, 0.0, 3, 10.0).rho_eg == r.rho_eg);
}
