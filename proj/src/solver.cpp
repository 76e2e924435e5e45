#include "fracvort/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>

#include "fracvort/errors.hpp"
#include "fracvort/rng.hpp"

namespace fracvort {

namespace {

std::vector<double> sobolev_weights(int grid_n, double alpha) {
  const FourierField probe(grid_n);
  std::vector<double> w(probe.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(1.0 + probe.wavevector(i).norm_squared(), 2.0 * alpha);
  return w;
}

double weighted_distance(const FourierField& a, const FourierField& b, const std::vector<double>& weights) {
  const auto ca = a.coeffs();
  const auto cb = b.coeffs();
  double s = 0.0;
  for (std::size_t i = 0; i < ca.size(); ++i) s += weights[i] * std::norm(ca[i] - cb[i]);
  return std::sqrt(s);
}

double weighted_norm(const FourierField& a, const std::vector<double>& weights) {
  const auto ca = a.coeffs();
  double s = 0.0;
  for (std::size_t i = 0; i < ca.size(); ++i) s += weights[i] * std::norm(ca[i]);
  return std::sqrt(s);
}

// V norm of a - b on equally spaced points: sup in alpha plus the gamma-Hölder
// seminorm in alpha - gamma. Pairs are taken on at most 257 evenly strided points.
double v_distance(const std::vector<FourierField>& a, const std::vector<FourierField>* b, double dt, double alpha,
                  double gamma) {
  const int n = a.front().grid_n();
  const auto wa = sobolev_weights(n, alpha);
  const auto wg = sobolev_weights(n, alpha - gamma);
  auto diff = [&](std::size_t j) {
    FourierField d = a[j];
    if (b) d -= (*b)[j];
    return d;
  };
  double sup = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sup = std::max(sup, b ? weighted_distance(a[j], (*b)[j], wa) : weighted_norm(a[j], wa));
  std::size_t stride = 1;
  while ((a.size() - 1) / stride > 256) stride *= 2;
  std::vector<FourierField> pts;
  std::vector<double> ts;
  for (std::size_t j = 0; j < a.size(); j += stride) {
    pts.push_back(diff(j));
    ts.push_back(static_cast<double>(j) * dt);
  }
  double hol = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      hol = std::max(hol, weighted_distance(pts[i], pts[j], wg) / std::pow(ts[j] - ts[i], gamma));
  return std::max(sup, hol);
}

std::pair<FourierField, FourierField> evaluate(const OperatorHooks& hooks, const FourierField& w) {
  if (hooks.joint) return hooks.joint(w);
  return {hooks.drift.apply(w), hooks.diffusion.apply(w)};
}

bool finite_field(const FourierField& f) {
  for (const auto& c : f.coeffs())
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

// Streams solution points into the state: channels at every point, fields and
// norms at the store stride.
class Recorder {
 public:
  Recorder(SolverState& state, const ModelConfig& config)
      : state_(state), alpha_weights_(sobolev_weights(config.grid_n, config.alpha.alpha())),
        stride_(std::size_t{1} << (config.level - state.store_level)), ceiling_(config.norm_ceiling) {
    for (const auto& k : config.observe) state_.channels.push_back(ChannelRecord{k, {}, {}, {}});
  }

  // Returns false when the point breaks the norm ceiling or is not finite.
  bool record(std::size_t j, const FourierField& w, const FourierField& drift, const FourierField& diffusion) {
    for (auto& ch : state_.channels) {
      const complex x = pair(w, ch.mode);
      ch.values.push_back(x);
      ch.drift.push_back(-pair(drift, ch.mode) - static_cast<double>(ch.mode.norm_squared()) * x);
      ch.noise.push_back(-pair(diffusion, ch.mode));
    }
    state_.max_mean_mode = std::max(state_.max_mean_mode, std::abs(w.mean_mode()));
    const double norm = weighted_norm(w, alpha_weights_);
    if (j % stride_ == 0) {
      state_.omegas.push_back(w);
      state_.norm_history.push_back(norm);
    }
    if (!finite_field(w) || !std::isfinite(norm)) {
      state_.failure = "non-finite field at t = " + std::to_string(state_.times.time(j));
      return false;
    }
    if (norm > ceiling_) {
      state_.failure = "norm ceiling exceeded at t = " + std::to_string(state_.times.time(j)) +
                       " (|w|_alpha = " + std::to_string(norm) + ")";
      return false;
    }
    return true;
  }

 private:
  SolverState& state_;
  std::vector<double> alpha_weights_;
  std::size_t stride_;
  double ceiling_;
};

std::size_t steps_for_fraction(int level, double fraction) {
  const double steps = std::ldexp(fraction, level);
  if (steps <= 1.0) return 1;
  std::size_t p = 1;
  while (static_cast<double>(p * 2) <= steps + 1e-9) p *= 2;
  return p;
}

FourierField free_mode_field(int n, double alpha) {
  // Spectrum |c_k|^2 = (1+|k|^2)^{-2 alpha - 1.1}: just inside B_alpha.
  // Phases come from a fixed Philox stream.
  FourierField f(n);
  const GaussianStream stream(0x726f756768ULL);
  const int cut = dealias_cutoff(n);
  for (int k1 = 0; k1 <= cut; ++k1)
    for (int k2 = -cut; k2 <= cut; ++k2) {
      if (k1 == 0 && k2 <= 0) continue;
      const Wavevector k{k1, k2};
      const double amp = std::pow(1.0 + k.norm_squared(), -(2.0 * alpha + 1.1) / 2.0);
      const auto idx = static_cast<std::uint64_t>((k1 + n) * 4 * n + (k2 + n));
      const double phase = 2.0 * std::numbers::pi * stream.uniform(idx);
      const complex c = amp * std::polar(1.0, phase);
      f[k] = c;
      f[-k] = std::conj(c);
    }
  return f;
}

}  // namespace

std::string to_string(SolveMode mode) { return mode == SolveMode::picard ? "picard" : "stepper"; }

SolveMode parse_solve_mode(const std::string& text) {
  if (text == "picard") return SolveMode::picard;
  if (text == "stepper") return SolveMode::stepper;
  throw ConfigError("mode must be 'picard' or 'stepper', got '" + text + "'");
}

VectorField xi_preset(const std::string& name, int grid_n, double amplitude) {
  if (name == "zero") return {FourierField(grid_n), FourierField(grid_n)};
  if (name == "shear") {
    auto c1 = FourierField::from_function(grid_n, [amplitude](double, double x2) { return amplitude * std::cos(x2); });
    return {c1, FourierField(grid_n)};
  }
  throw ConfigError("unknown xi preset '" + name + "' (expected shear or zero)");
}

FourierField omega0_preset(const std::string& name, int grid_n, double alpha) {
  if (name == "default")
    return FourierField::from_function(grid_n, [](double x1, double x2) {
      return std::sin(x1) + std::cos(x2) + 0.5 * std::sin(x1 + x2) + 0.3 * std::cos(2 * x1 - x2);
    });
  if (name == "sin_x2") return FourierField::from_function(grid_n, [](double, double x2) { return std::sin(x2); });
  if (name == "sin_x1") return FourierField::from_function(grid_n, [](double x1, double) { return std::sin(x1); });
  if (name == "zero") return FourierField(grid_n);
  if (name == "rough") return free_mode_field(grid_n, alpha);
  throw ConfigError("unknown omega0 preset '" + name + "' (expected default, sin_x2, sin_x1, zero or rough)");
}

ModelConfig ModelConfig::defaults(int grid_n, double hurst) {
  ModelConfig c;
  c.grid_n = grid_n;
  c.hurst = HurstParam(hurst);
  c.gamma = hurst - 0.05;
  c.xi = xi_preset("shear", grid_n);
  c.omega0 = omega0_preset("default", grid_n);
  return c;
}

int ModelConfig::effective_store_level() const { return store_level < 0 ? std::min(level, 10) : store_level; }

void ModelConfig::validate() const {
  if (grid_n < 8 || grid_n % 2 != 0) throw ConfigError("grid_n must be even and >= 8");
  if (alpha.alpha() <= 1.0) throw ConfigError("alpha must exceed 1");
  if (hurst.value() <= 0.5) throw ConfigError("hurst must exceed 1/2");
  if (!(gamma > 0.5 && gamma < hurst.value())) throw ConfigError("gamma must lie in (1/2, hurst)");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive");
  if (level < 1 || level > 20) throw ConfigError("level must lie in [1, 20]");
  if (store_level > level) throw ConfigError("store_level must not exceed level");
  if (omega0.grid_n() != grid_n || xi.c1.grid_n() != grid_n || xi.c2.grid_n() != grid_n)
    throw ConfigError("omega0 and xi must live on the grid_n grid");
  const double scale = 1.0 + physical_l2_norm(omega0);
  if (std::abs(omega0.mean_mode()) > 1e-12 * scale) throw ConfigError("omega0 must have zero mean");
  if (omega0.hermitian_defect() > 1e-12 * scale) throw ConfigError("omega0 must be a real field");
  TransportOperator check(xi);
  (void)check;
  if (!(window.initial_fraction > 0.0 && window.initial_fraction <= 1.0))
    throw ConfigError("window.initial_fraction must lie in (0, 1]");
  if (!(window.floor_fraction > 0.0 && window.floor_fraction <= window.initial_fraction))
    throw ConfigError("window.floor_fraction must lie in (0, initial_fraction]");
  if (!(window.tol > 0.0)) throw ConfigError("window.tol must be positive");
  if (window.max_iter < 1 || window.contraction_check_iter < 1) throw ConfigError("window iteration limits must be >= 1");
  if (!(norm_ceiling > 0.0)) throw ConfigError("norm_ceiling must be positive");
  const FourierField probe(grid_n);
  for (const auto& k : observe)
    if (!probe.resolves(k))
      throw ConfigError("observed mode (" + std::to_string(k.k1) + ", " + std::to_string(k.k2) + ") is not resolved");
}

OperatorHooks builtin_hooks(const ModelConfig& config) {
  auto op = std::make_shared<const TransportOperator>(config.xi);
  OperatorHooks hooks;
  hooks.drift = DriftHook{[](const FourierField& w) { return advect(biot_savart(w), w); }, 0.5, 2.0, 1.0, "advection"};
  hooks.diffusion = DiffusionHook{[op](const FourierField& w) { return op->apply(w); }, 0.5, "transport"};
  hooks.joint = [op](const FourierField& w) { return op->apply_with_advection(biot_savart(w), w); };
  return hooks;
}

void check_hook_exponents(const OperatorHooks& hooks, const ModelConfig& config) {
  if (!hooks.drift.apply || !hooks.diffusion.apply) throw ConfigError("drift and diffusion hooks must be callable");
  if (!(hooks.drift.beta >= 0.0 && hooks.drift.beta < 1.0))
    throw ConfigError("drift hook '" + hooks.drift.name + "': beta must lie in [0, 1)");
  if (!(hooks.diffusion.theta >= 0.0)) throw ConfigError("diffusion hook '" + hooks.diffusion.name + "': theta must be >= 0");
  if (!(hooks.diffusion.theta + config.gamma < config.alpha.alpha()))
    throw ConfigError("diffusion hook '" + hooks.diffusion.name + "': theta + gamma must be below alpha");
}

double SolverState::v_norm() const {
  if (omegas.empty()) return 0.0;
  std::size_t stride = 1;
  while ((omegas.size() - 1) / stride > 128) stride *= 2;
  const double dt = stored_grid().mesh();
  // Sup over every stored field, Hölder part on the strided subset.
  const auto wa = sobolev_weights(omegas.front().grid_n(), alpha.alpha());
  double sup = 0.0;
  for (const auto& w : omegas) sup = std::max(sup, weighted_norm(w, wa));
  std::vector<FourierField> sub;
  for (std::size_t j = 0; j < omegas.size(); j += stride) sub.push_back(omegas[j]);
  return std::max(sup, v_distance(sub, nullptr, dt * static_cast<double>(stride), alpha.alpha(), gamma));
}

StepResult exponential_euler_step(const OperatorHooks& hooks, const FourierField& w, double dt, double dw,
                                  std::span<const double> heat_dt) {
  auto [d, f] = evaluate(hooks, w);
  FourierField next = w;
  next.axpy(-dt, d);
  next.axpy(-dw, f);
  apply_multipliers(next, heat_dt);
  return {std::move(next), std::move(d), std::move(f)};
}

std::vector<FourierField> lambda_map(const OperatorHooks& hooks, const std::vector<FourierField>& iterate,
                                     const FourierField& w_init, std::span<const double> dw, double dt) {
  if (iterate.size() != dw.size() + 1) throw DomainError("lambda_map: iterate needs one field per window point");
  const auto mult = heat_multipliers(w_init.grid_n(), dt);
  std::vector<FourierField> out;
  out.reserve(iterate.size());
  FourierField acc = w_init;
  out.push_back(acc);
  for (std::size_t n = 0; n < dw.size(); ++n) {
    const auto [d, f] = evaluate(hooks, iterate[n]);
    acc.axpy(-dt, d);
    acc.axpy(-dw[n], f);
    apply_multipliers(acc, mult);
    out.push_back(acc);
  }
  return out;
}

PicardResult picard_window(const OperatorHooks& hooks, const ModelConfig& config, double t0, double dt,
                           std::span<const double> dw, const FourierField& w_init) {
  const WindowPolicy& pol = config.window;
  const double alpha = config.alpha.alpha();
  PicardResult res;
  res.record.t0 = t0;
  res.record.t1 = t0 + dt * static_cast<double>(dw.size());

  // Start from the free heat evolution of the initial datum.
  const auto mult = heat_multipliers(w_init.grid_n(), dt);
  std::vector<FourierField> iterate{w_init};
  for (std::size_t n = 0; n < dw.size(); ++n) {
    FourierField next = iterate.back();
    apply_multipliers(next, mult);
    iterate.push_back(std::move(next));
  }

  for (int it = 1; it <= pol.max_iter; ++it) {
    auto next = lambda_map(hooks, iterate, w_init, dw, dt);
    const double d = v_distance(next, &iterate, dt, alpha, config.gamma);
    iterate = std::move(next);
    res.record.iterations = it;
    res.record.distances.push_back(d);
    if (!std::isfinite(d)) break;
    const double scale = std::max(1.0, v_distance(iterate, nullptr, dt, alpha, config.gamma));
    // Geometric mean ratio over the first check iterations. The first ratio alone
    // is set by short lags near t0 and barely depends on the window length.
    const double d1 = res.record.distances.front();
    if (it >= 2 && it <= pol.contraction_check_iter + 1 && d1 > 1e-12 * scale && d > 0.0)
      res.record.contraction = std::pow(d / d1, 1.0 / (it - 1));
    if (d <= pol.tol * scale) {
      res.record.accepted = true;
      break;
    }
    if (it == pol.contraction_check_iter + 1 && res.record.contraction >= 1.0) break;
  }
  res.record.v_norm = v_distance(iterate, nullptr, dt, alpha, config.gamma);
  res.trajectory = std::move(iterate);
  return res;
}

PicardResult picard_window(const ModelConfig& config, const FbmPath& w, double t0, double t1, const FourierField& w_init) {
  config.validate();
  const DyadicGrid grid(config.level, config.horizon);
  if (!(w.grid.horizon() == config.horizon) || w.grid.level() < config.level)
    throw ConfigError("driver must cover [0, horizon] at level >= the solution level");
  const std::size_t j0 = grid.index_of(t0);
  const std::size_t j1 = grid.index_of(t1);
  if (j1 <= j0) throw DomainError("picard_window: t1 must exceed t0");
  const auto inc = w.increments(config.level);
  return picard_window(builtin_hooks(config), config, t0, grid.mesh(),
                       std::span<const double>(inc).subspan(j0, j1 - j0), w_init);
}

SolverState generic_operator_solve(const OperatorHooks& hooks, const ModelConfig& config, const FbmPath& w) {
  config.validate();
  check_hook_exponents(hooks, config);
  if (std::fabs(w.grid.horizon() - config.horizon) > 1e-12 * config.horizon)
    throw ConfigError("driver horizon differs from the model horizon");
  if (w.grid.level() < config.level) throw ConfigError("driver level is below the solution level");

  SolverState state;
  state.times = DyadicGrid(config.level, config.horizon);
  state.store_level = config.effective_store_level();
  state.driver = w;
  state.mode = config.mode;
  state.alpha = config.alpha;
  state.gamma = config.gamma;

  const auto inc = w.increments(config.level);
  const double dt = state.times.mesh();
  const std::size_t total = state.times.intervals();
  Recorder rec(state, config);

  if (config.mode == SolveMode::stepper) {
    const auto mult = heat_multipliers(config.grid_n, dt);
    FourierField cur = config.omega0;
    for (std::size_t j = 0; j < total; ++j) {
      auto step = exponential_euler_step(hooks, cur, dt, inc[j], mult);
      if (!rec.record(j, cur, step.drift, step.diffusion)) return state;
      cur = std::move(step.next);
      state.steps_completed = j + 1;
    }
    const auto [d, f] = evaluate(hooks, cur);
    if (!rec.record(total, cur, d, f)) return state;
    state.completed = true;
    return state;
  }

  const std::size_t floor_steps = steps_for_fraction(config.level, config.window.floor_fraction);
  std::size_t m = steps_for_fraction(config.level, config.window.initial_fraction);
  FourierField cur = config.omega0;
  std::size_t j0 = 0;
  while (j0 < total) {
    m = std::min(m, total - j0);
    auto res = picard_window(hooks, config, state.times.time(j0), dt,
                             std::span<const double>(inc).subspan(j0, m), cur);
    state.windows.push_back(res.record);
    if (!res.record.accepted) {
      const bool diverging = res.record.contraction >= 1.0 || !std::isfinite(res.record.distances.back());
      if (!diverging) {
        state.failure = "Picard iteration did not reach tolerance within max_iter on [" +
                        std::to_string(res.record.t0) + ", " + std::to_string(res.record.t1) + "]";
        return state;
      }
      if (m / 2 < floor_steps) {
        state.failure = "window floor reached at t = " + std::to_string(res.record.t0) +
                        " (empirical factor " + std::to_string(res.record.contraction) + ")";
        return state;
      }
      m /= 2;
      continue;
    }
    // Channels need the operators at every accepted point except the window end,
    // which is the next window's start.
    for (std::size_t n = 0; n < m; ++n) {
      const auto [d, f] = evaluate(hooks, res.trajectory[n]);
      if (!rec.record(j0 + n, res.trajectory[n], d, f)) return state;
      state.steps_completed = j0 + n;
    }
    cur = res.trajectory[m];
    j0 += m;
    state.steps_completed = j0;
  }
  const auto [d, f] = evaluate(hooks, cur);
  if (!rec.record(total, cur, d, f)) return state;
  state.completed = true;
  return state;
}

SolverState generic_operator_solve(const DriftHook& drift, const DiffusionHook& diffusion, const ModelConfig& config,
                                   const FbmPath& w) {
  return generic_operator_solve(OperatorHooks{drift, diffusion, {}}, config, w);
}

SolverState solve(const ModelConfig& config, const FbmPath& w) {
  config.validate();
  return generic_operator_solve(builtin_hooks(config), config, w);
}

std::vector<double> ObservableSeries::channel(Channel which) const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(which == Channel::real ? v.real() : v.imag());
  return out;
}

std::vector<double> ObservableSeries::noise(Channel which) const {
  std::vector<double> out;
  out.reserve(noise_channel.size());
  for (const auto& v : noise_channel) out.push_back(which == Channel::real ? v.real() : v.imag());
  return out;
}

ObservableSeries extract_observable(const SolverState& state, const ModelConfig& config, Wavevector mode) {
  ObservableSeries s;
  s.mode = mode;
  for (const auto& ch : state.channels)
    if (ch.mode == mode) {
      s.times = state.times;
      s.values = ch.values;
      s.drift_channel = ch.drift;
      s.noise_channel = ch.noise;
      return s;
    }
  if (state.omegas.empty()) throw DomainError("extract_observable: the state holds no fields");
  if (!state.omegas.front().resolves(mode)) throw DomainError("extract_observable: mode is not resolved on the grid");
  s.times = state.stored_grid();
  const auto hooks = builtin_hooks(config);
  const double k2 = static_cast<double>(mode.norm_squared());
  for (const auto& w : state.omegas) {
    const auto [d, f] = evaluate(hooks, w);
    const complex x = pair(w, mode);
    s.values.push_back(x);
    s.drift_channel.push_back(-pair(d, mode) - k2 * x);
    s.noise_channel.push_back(-pair(f, mode));
  }
  return s;
}

double weak_residual(const ObservableSeries& series, const FbmPath& w) {
  if (series.values.empty()) return 0.0;
  const int level = series.times.level();
  if (w.grid.level() < level) throw DomainError("weak_residual: driver is coarser than the observable");
  const auto inc = w.increments(level);
  const double dt = series.times.mesh();
  const complex x0 = series.values.front();
  complex drift{}, noise{};
  double worst = 0.0, scale = 0.0;
  for (const auto& v : series.values) scale = std::max(scale, std::abs(v));
  for (std::size_t j = 0; j + 1 < series.values.size(); ++j) {
    drift += 0.5 * dt * (series.drift_channel[j] + series.drift_channel[j + 1]);
    noise += series.noise_channel[j] * inc[j];
    worst = std::max(worst, std::abs(series.values[j + 1] - x0 - drift - noise));
  }
  return scale == 0.0 ? 0.0 : worst / scale;
}

double weak_residual(const SolverState& state, const ModelConfig& config, Wavevector mode) {
  return weak_residual(extract_observable(state, config, mode), state.driver);
}

void write_trajectory_csv(std::ostream& out, const SolverState& state, const ModelConfig& config, Wavevector mode) {
  const auto series = extract_observable(state, config, mode);
  const std::size_t stride = std::size_t{1} << (series.times.level() - state.store_level);
  const DyadicGrid stored = state.stored_grid();
  out << "t,norm_alpha,X_re,X_im,a_s,x_s,a_s_im,x_s_im\n";
  out.precision(17);
  for (std::size_t j = 0; j < state.omegas.size(); ++j) {
    const std::size_t i = j * stride;
    if (i >= series.values.size()) break;
    const auto& x = series.values[i];
    const auto& a = series.drift_channel[i];
    const auto& n = series.noise_channel[i];
    out << stored.time(j) << ',' << state.norm_history[j] << ',' << x.real() << ',' << x.imag() << ',' << a.real()
        << ',' << n.real() << ',' << a.imag() << ',' << n.imag() << '\n';
  }
}

}  // namespace fracvort
