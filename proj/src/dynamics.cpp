#include "nljc/dynamics.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <utility>

#include <boost/numeric/odeint.hpp>

#include "nljc/errors.hpp"
#include "nljc/phase.hpp"

namespace nljc {

namespace {

constexpr long double kTwoPi = 6.283185307179586476925286766559005768L;

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw ValidationError(std::string(name) + " must be finite");
}

// m(m-1) f^2(m) f^2(m-1); zero for m < 2 so f(-1) is never requested.
long double kerr_weight(const NonlinearitySpec& f, std::size_t m) {
  if (m < 2) return 0.0L;
  const long double mm = static_cast<long double>(m);
  return mm * (mm - 1.0L) * static_cast<long double>(f.squared(m)) *
         static_cast<long double>(f.squared(m - 1));
}

long double stark_weight(const NonlinearitySpec& f, std::size_t m) {
  if (m == 0) return 0.0L;
  return static_cast<long double>(m) * static_cast<long double>(f.squared(m));
}

}  // namespace

void ModelParams::validate() const {
  if (k < 1) throw ValidationError("photon transition number k must be >= 1");
  require_finite(nu, "nu");
  require_finite(detuning, "detuning");
  require_finite(beta1, "beta1");
  require_finite(beta2, "beta2");
  require_finite(chi, "chi");
  require_finite(gamma, "gamma");
  require_finite(mu, "mu");
  if (k != 2 && (beta1 != 0.0 || beta2 != 0.0)) {
    throw ValidationError("Stark coefficients require k=2 (beta1 = beta2 = 0 whenever k != 2), got k=" +
                          std::to_string(k));
  }
  if (gamma < 0.0) throw ValidationError("gamma must be >= 0");
  if (mu < 0.0) throw ValidationError("mu must be >= 0");
  if (nu < 0.0) throw ValidationError("nu must be >= 0");
}

ModeCoefficients mode_coefficients(const ModelParams& params, const NonlinearitySpec& f,
                                   std::size_t n) {
  const std::size_t m = n + params.k;
  const long double chi = params.chi;
  const long double b1 = params.beta1;
  const long double b2 = params.beta2;
  const long double half_detuning = 0.5L * static_cast<long double>(params.detuning);

  ModeCoefficients c;
  c.n = n;
  c.R1 = half_detuning + stark_weight(f, n) * b2 + chi * kerr_weight(f, n);
  c.R2 = -half_detuning + stark_weight(f, m) * b1 + chi * kerr_weight(f, m);
  c.Rn = c.R1 - c.R2;
  c.phi = 0.5L * chi * (kerr_weight(f, n) + kerr_weight(f, m)) +
          0.5L * (stark_weight(f, n) * b2 + stark_weight(f, m) * b1);

  long double log_ratio = f.log_ratio(n, params.k);
  for (std::size_t j = n + 1; j <= m; ++j) log_ratio += 0.5L * std::log(static_cast<long double>(j));
  c.alpha = static_cast<long double>(params.gamma) * std::exp(log_ratio);

  const long double detune = c.Rn - static_cast<long double>(params.mu);
  c.Omega = 0.5L * std::hypot(detune, c.alpha);
  return c;
}

double sin_ratio(long double x, double t) {
  const long double xt = x * static_cast<long double>(t);
  if (std::fabs(xt) < 1e-4L) {
    const long double xt2 = xt * xt;
    return static_cast<double>(static_cast<long double>(t) * (1.0L - xt2 / 6.0L + xt2 * xt2 / 120.0L));
  }
  return static_cast<double>(static_cast<long double>(std::sin(reduce_angle(xt))) / x);
}

double norm(const AmplitudeState& state) {
  double acc = 0.0;
  for (const auto& c : state.excited) acc += std::norm(c);
  for (const auto& c : state.ground) acc += std::norm(c);
  return acc;
}

double max_amplitude_deviation(const AmplitudeState& a, const AmplitudeState& b) {
  if (a.excited.size() != b.excited.size() || a.ground.size() != b.ground.size()) {
    throw InvalidParameter("amplitude states have different truncations");
  }
  double dev = 0.0;
  for (std::size_t i = 0; i < a.excited.size(); ++i) dev = std::max(dev, std::abs(a.excited[i] - b.excited[i]));
  for (std::size_t i = 0; i < a.ground.size(); ++i) dev = std::max(dev, std::abs(a.ground[i] - b.ground[i]));
  return dev;
}

AmplitudeState initial_state(const PhotonDistribution& dist, unsigned k) {
  AmplitudeState s;
  s.time = 0.0;
  s.k = k;
  s.excited.resize(dist.probabilities.size());
  s.ground.assign(dist.probabilities.size(), Complex{});
  std::transform(dist.probabilities.begin(), dist.probabilities.end(), s.excited.begin(),
                 [](double p) { return Complex(std::sqrt(p), 0.0); });
  return s;
}

ClosedFormEvolver::ClosedFormEvolver(const ModelParams& params, NonlinearitySpec f,
                                     const PhotonDistribution& dist)
    : ClosedFormEvolver(params, std::move(f), initial_state(dist, params.k)) {}

ClosedFormEvolver::ClosedFormEvolver(const ModelParams& params, NonlinearitySpec f,
                                     AmplitudeState initial)
    : params_(params), f_(std::move(f)), initial_(std::move(initial)) {
  params_.validate();
  if (initial_.excited.size() != initial_.ground.size()) {
    throw InvalidParameter("initial excited and ground amplitudes differ in length");
  }
  initial_.k = params_.k;
  initial_.time = 0.0;
  const std::size_t levels = initial_.excited.size();
  f_.extend(levels + params_.k);
  modes_.reserve(levels);
  for (std::size_t n = 0; n < levels; ++n) modes_.push_back(mode_coefficients(params_, f_, n));
}

AmplitudeState ClosedFormEvolver::at(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidParameter("evolution time must be finite and >= 0");
  AmplitudeState out;
  out.time = t;
  out.k = params_.k;
  const std::size_t levels = modes_.size();
  out.excited.assign(levels, Complex{});
  out.ground.assign(levels, Complex{});

  const long double tl = t;
  const long double mu = params_.mu;
  // Written-out complex products: std::complex multiplication takes the slow
  // NaN-recovering path, which dominates this loop.
  auto mul = [](Complex a, Complex b) {
    return Complex(a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real());
  };
  for (std::size_t n = 0; n < levels; ++n) {
    const Complex ce0 = initial_.excited[n];
    const Complex cg0 = initial_.ground[n];
    if (ce0 == Complex{} && cg0 == Complex{}) continue;
    const ModeCoefficients& m = modes_[n];
    const long double wt = m.Omega * tl;
    const double angle = reduce_angle(wt);
    const double cos_wt = std::cos(angle);
    const double s = std::fabs(wt) < 1e-4L ? sin_ratio(m.Omega, t)
                                           : static_cast<double>(static_cast<long double>(std::sin(angle)) / m.Omega);
    const double half_detune = static_cast<double>(0.5L * (m.Rn - mu));
    const double half_alpha = static_cast<double>(0.5L * m.alpha);
    const Complex diag_e(cos_wt, -half_detune * s);
    const Complex diag_g(cos_wt, half_detune * s);
    const Complex off(0.0, -half_alpha * s);
    // e^{-i phi t} e^{-+ i mu t/2}, each reduced as a single angle.
    const Complex phase_e = phasor(-(m.phi + 0.5L * mu) * tl);
    const Complex phase_g = phasor(-(m.phi - 0.5L * mu) * tl);
    out.excited[n] = mul(mul(ce0, diag_e) + mul(off, cg0), phase_e);
    out.ground[n] = mul(mul(cg0, diag_g) + mul(off, ce0), phase_g);
  }
  return out;
}

AmplitudeState evolve_closed_form(const ModelParams& params, const NonlinearitySpec& f,
                                  const PhotonDistribution& dist, double t) {
  return ClosedFormEvolver(params, f, dist).at(t);
}

// ---------------------------------------------------------------------------
// ODE oracle

namespace {

namespace odeint = boost::numeric::odeint;

using Pair = std::array<Complex, 2>;     // (X, Y)
using Fundamental = std::array<Complex, 4>;  // columns (X1, Y1), (X2, Y2)

struct Mat2 {
  Complex a, b, c, d;  // [[a, b], [c, d]]

  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Pair apply(const Pair& v) const { return {a * v[0] + b * v[1], c * v[0] + d * v[1]}; }
};

Mat2 to_mat(const Fundamental& u) { return {u[0], u[2], u[1], u[3]}; }

// Rotating-wave slow-variable equations of one doublet.
struct RwaSystem {
  double half_alpha;
  double w;  // mu - Rn

  // -i alpha/2 e^{-iwt}
  Complex drive(double t) const {
    const double a = -w * t;
    return {half_alpha * std::sin(a), -half_alpha * std::cos(a)};
  }
  void operator()(const Pair& s, Pair& d, double t) const {
    const Complex g = drive(t);
    d[0] = g * s[1];
    d[1] = Complex(-g.real(), g.imag()) * s[0];  // -conj(g) = -i alpha/2 e^{iwt}
  }
  void operator()(const Fundamental& s, Fundamental& d, double t) const {
    const Complex g = drive(t);
    const Complex h(-g.real(), g.imag());
    d[0] = g * s[1];
    d[1] = h * s[0];
    d[2] = g * s[3];
    d[3] = h * s[2];
  }
};

// Slow-variable equations without the rotating-wave approximation.
struct FullSystem {
  double half_alpha;
  long double sum_rate;   // mu + Rn
  long double diff_rate;  // mu - Rn

  void operator()(const Pair& s, Pair& d, double t) const {
    const long double tl = t;
    const Complex counter = phasor(sum_rate * tl);   // e^{i(mu+Rn)t}
    const Complex resonant = phasor(-diff_rate * tl);  // e^{-i(mu-Rn)t}
    const Complex drive_x = counter + resonant;
    const Complex drive_y = std::conj(drive_x);
    d[0] = Complex(0.0, -half_alpha) * drive_x * s[1];
    d[1] = Complex(0.0, -half_alpha) * drive_y * s[0];
  }
};

// Adaptive Runge-Kutta-Fehlberg 7(8) driven to exact target times.
template <class State, class System>
class Integrator {
 public:
  Integrator(System sys, double abs_tol, std::size_t level, std::size_t budget)
      : sys_(sys),
        stepper_(odeint::make_controlled(abs_tol, 0.0, odeint::runge_kutta_fehlberg78<State>())),
        level_(level),
        budget_(budget) {}

  void set_initial_step(double dt) { dt_ = dt; }
  void set_max_step(double dt) { max_dt_ = dt; }

  void advance(State& x, double& t, double target) {
    while (t < target) {
      const double remaining = target - t;
      dt_ = std::min(dt_, max_dt_);
      const bool clipped = dt_ >= remaining;
      double h = clipped ? remaining : dt_;
      const double t_before = t;
      if (++steps_ > budget_) throw IntegrationFailure("ODE oracle step budget exhausted", level_, t);
      const auto result = stepper_.try_step(sys_, x, t, h);
      if (result == odeint::success) {
        if (clipped) {
          t = target;
          dt_ = std::max(dt_, h);
        } else {
          dt_ = h;
        }
      } else {
        dt_ = h;
        if (dt_ < 1e-15 * std::max(1.0, std::abs(t_before))) {
          throw IntegrationFailure("ODE oracle step size underflow", level_, t_before);
        }
      }
    }
  }

 private:
  System sys_;
  odeint::controlled_runge_kutta<odeint::runge_kutta_fehlberg78<State>> stepper_;
  std::size_t level_;
  std::size_t budget_;
  std::size_t steps_ = 0;
  double dt_ = 1e-3;
  double max_dt_ = std::numeric_limits<double>::infinity();
};

// Direct integration of one doublet across the whole grid.
template <class System>
std::vector<Pair> integrate_direct(const System& sys, Pair x0, std::span<const double> grid,
                                   double initial_dt, const OracleOptions& opt, std::size_t level) {
  Integrator<Pair, System> integ(sys, opt.abs_tol, level, opt.max_steps_per_level);
  integ.set_initial_step(initial_dt);
  std::vector<Pair> out(grid.size());
  double t = 0.0;
  Pair x = x0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    integ.advance(x, t, grid[j]);
    out[j] = x;
  }
  return out;
}

// Stroboscopic propagation: the rotating-wave coefficients are periodic with
// P = 2 pi / |mu - Rn|, so U(mP + r) = U(r) M^m with M = U(P). The fundamental
// matrix is integrated over a single period only.
std::vector<Pair> integrate_floquet(const RwaSystem& sys, Pair x0, std::span<const double> grid,
                                    const OracleOptions& opt, std::size_t level) {
  const long double period = kTwoPi / std::fabs(static_cast<long double>(sys.w));
  const std::size_t count = grid.size();
  std::vector<std::uint64_t> cycles(count);
  std::vector<double> residue(count);
  for (std::size_t j = 0; j < count; ++j) {
    const long double tj = grid[j];
    long double m = std::floor(tj / period);
    long double r = tj - m * period;
    if (r < 0) {
      m -= 1;
      r += period;
    } else if (r >= period) {
      m += 1;
      r -= period;
    }
    cycles[j] = static_cast<std::uint64_t>(m);
    residue[j] = std::max(0.0, static_cast<double>(r));
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return residue[a] < residue[b]; });

  Integrator<Fundamental, RwaSystem> integ(sys, opt.floquet_abs_tol, level, opt.max_steps_per_level);
  const double omega_scale = std::max(std::abs(sys.w), 2.0 * std::abs(sys.half_alpha));
  integ.set_initial_step(0.1 / omega_scale);
  // The error estimate alone lets the step grow to a sizeable fraction of the
  // period; any per-period error is then raised to the power m.
  integ.set_max_step(static_cast<double>(period) / opt.floquet_steps_per_period);
  Fundamental u{Complex(1.0), Complex(0.0), Complex(0.0), Complex(1.0)};
  double t = 0.0;
  std::vector<Mat2> at_residue(count);
  for (std::size_t idx : order) {
    integ.advance(u, t, residue[idx]);
    at_residue[idx] = to_mat(u);
  }
  integ.advance(u, t, static_cast<double>(period));
  const Mat2 monodromy = to_mat(u);

  const std::uint64_t max_cycles = count ? *std::max_element(cycles.begin(), cycles.end()) : 0;
  std::vector<Mat2> powers{monodromy};  // M^(2^i)
  while ((std::uint64_t{1} << powers.size()) <= max_cycles && powers.size() < 63) {
    powers.push_back(powers.back() * powers.back());
  }
  std::vector<Pair> out(count);
  for (std::size_t j = 0; j < count; ++j) {
    Pair v = x0;
    std::uint64_t m = cycles[j];
    for (std::size_t bit = 0; m != 0; ++bit, m >>= 1) {
      if (m & 1u) v = powers[bit].apply(v);
    }
    out[j] = at_residue[j].apply(v);
  }
  return out;
}

}  // namespace

std::vector<AmplitudeState> evolve_ode_oracle(const ModelParams& params, const NonlinearitySpec& f,
                                              const AmplitudeState& initial,
                                              std::span<const double> t_grid,
                                              bool include_counter_rotating,
                                              const OracleOptions& options) {
  params.validate();
  if (t_grid.empty() || t_grid.front() != 0.0) {
    throw InvalidParameter("oracle time grid must start at t = 0");
  }
  for (std::size_t j = 1; j < t_grid.size(); ++j) {
    if (!(t_grid[j] >= t_grid[j - 1]) || !std::isfinite(t_grid[j])) {
      throw InvalidParameter("oracle time grid must be finite and ascending");
    }
  }
  if (initial.excited.size() != initial.ground.size()) {
    throw InvalidParameter("initial excited and ground amplitudes differ in length");
  }
  const std::size_t levels = initial.excited.size();
  NonlinearitySpec spec = f;
  spec.extend(levels + params.k);

  std::vector<AmplitudeState> out(t_grid.size());
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    out[j].time = t_grid[j];
    out[j].k = params.k;
    out[j].excited.assign(levels, Complex{});
    out[j].ground.assign(levels, Complex{});
  }
  const double t_max = t_grid.back();

  auto solve_level = [&](std::size_t n) {
    const Pair x0{initial.excited[n], initial.ground[n]};
    if (x0[0] == Complex{} && x0[1] == Complex{}) return;
    const ModeCoefficients m = mode_coefficients(params, spec, n);
    const double half_alpha = static_cast<double>(0.5L * m.alpha);
    const long double mu = params.mu;

    std::vector<Pair> slow;
    if (include_counter_rotating) {
      const FullSystem sys{half_alpha, mu + m.Rn, mu - m.Rn};
      const double scale = static_cast<double>(std::max({std::fabs(mu + m.Rn), std::fabs(mu - m.Rn), m.alpha})) + 1e-300;
      slow = integrate_direct(sys, x0, t_grid, 0.1 / scale, options, n);
    } else {
      const RwaSystem sys{half_alpha, static_cast<double>(mu - m.Rn)};
      const double periods = std::abs(sys.w) * t_max / static_cast<double>(kTwoPi);
      if (periods >= options.min_floquet_periods) {
        slow = integrate_floquet(sys, x0, t_grid, options, n);
      } else {
        const double scale = std::max(std::abs(sys.w), 2.0 * std::abs(half_alpha)) + 1e-300;
        slow = integrate_direct(sys, x0, t_grid, 0.1 / scale, options, n);
      }
    }

    for (std::size_t j = 0; j < t_grid.size(); ++j) {
      const long double tl = t_grid[j];
      out[j].excited[n] = slow[j][0] * phasor(-m.R1 * tl);
      out[j].ground[n] = slow[j][1] * phasor(-m.R2 * tl);
    }
  };

  // Levels are independent and write disjoint slots, so the result does not
  // depend on how they are shared out.
  unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(levels, 1)));
  if (workers <= 1) {
    for (std::size_t n = 0; n < levels; ++n) solve_level(n);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t n = next++; n < levels; n = next++) solve_level(n);
      } catch (...) {
        errors[w] = std::current_exception();
        next = levels;
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<AmplitudeState> evolve_ode_oracle(const ModelParams& params, const NonlinearitySpec& f,
                                              const PhotonDistribution& dist,
                                              std::span<const double> t_grid,
                                              bool include_counter_rotating,
                                              const OracleOptions& options) {
  return evolve_ode_oracle(params, f, initial_state(dist, params.k), t_grid,
                           include_counter_rotating, options);
}

}  // namespace nljc
