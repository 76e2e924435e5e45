#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracvort/fbm.hpp"
#include "fracvort/spectral.hpp"

namespace fracvort {

enum class SolveMode { picard, stepper };

std::string to_string(SolveMode mode);
SolveMode parse_solve_mode(const std::string& text);

/// Adaptive window policy for the Picard mode. Lengths are fractions of T.
struct WindowPolicy {
  double initial_fraction = 1.0 / 8.0;
  double floor_fraction = 1.0 / 1024.0;
  double tol = 1e-10;
  int max_iter = 60;
  /// Iteration after which an empirical factor >= 1 triggers a halving.
  int contraction_check_iter = 3;
};

/// Named presets. xi: "shear" = (cos x2, 0), "zero". omega0: "default",
/// "sin_x2", "sin_x1", "zero", "rough" (spectrum just inside B_alpha).
VectorField xi_preset(const std::string& name, int grid_n, double amplitude = 1.0);
FourierField omega0_preset(const std::string& name, int grid_n, double alpha = 1.5);

struct ModelConfig {
  int grid_n = 64;
  SobolevIndex alpha{1.5};
  HurstParam hurst{0.75};
  double gamma = 0.70;
  VectorField xi;
  FourierField omega0;
  double horizon = 0.5;
  int level = 10;
  SolveMode mode = SolveMode::stepper;
  WindowPolicy window;
  double norm_ceiling = 1e6;
  /// Fields are kept at this dyadic level; -1 means min(level, 10).
  int store_level = -1;
  /// Test modes whose observable channels are recorded at the full level.
  std::vector<Wavevector> observe{{1, 0}};

  /// Default shear noise and default initial vorticity on an N grid.
  static ModelConfig defaults(int grid_n = 64, double hurst = 0.75);
  int effective_store_level() const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Drift operator D with |D w|_{alpha-beta} <= C |w|_alpha^q (local
/// Lipschitz power p).
struct DriftHook {
  std::function<FourierField(const FourierField&)> apply;
  double beta = 0.5;
  double q = 2.0;
  double p = 1.0;
  std::string name = "drift";
};

/// Diffusion operator F with |F w|_{alpha-theta} <= C |w|_alpha.
struct DiffusionHook {
  std::function<FourierField(const FourierField&)> apply;
  double theta = 0.5;
  std::string name = "diffusion";
};

struct OperatorHooks {
  DriftHook drift;
  DiffusionHook diffusion;
  /// Optional joint evaluation (D w, F w), used instead of the two hooks when set.
  std::function<std::pair<FourierField, FourierField>(const FourierField&)> joint;
};

/// u . grad(w) with u = curl^{-1} w (beta = 1/2, q = 2, p = 1) and
/// xi . grad(w) (theta = 1/2), sharing transforms through `joint`.
OperatorHooks builtin_hooks(const ModelConfig& config);
/// Throws ConfigError unless beta in [0, 1), theta >= 0 and theta + gamma < alpha.
void check_hook_exponents(const OperatorHooks& hooks, const ModelConfig& config);

struct WindowRecord {
  double t0 = 0.0;
  double t1 = 0.0;
  int iterations = 0;
  /// Empirical factor (d_c / d_1)^{1/(c-1)} from iterate distances d_n,
  /// c <= contraction_check_iter + 1.
  double contraction = 0.0;
  bool accepted = false;
  std::vector<double> distances;
  double v_norm = 0.0;
};

/// Observable channels for one test mode phi = exp(i k.x), at every point of
/// the solution grid.
struct ChannelRecord {
  Wavevector mode;
  std::vector<complex> values;  // <w_t, phi>
  std::vector<complex> drift;   // <w_t, u_t . grad phi + lap phi>
  std::vector<complex> noise;   // <w_t, xi . grad phi>
};

struct SolverState {
  DyadicGrid times{0, 1.0};
  int store_level = 0;
  /// Fields at the points of the store-level grid reached so far.
  std::vector<FourierField> omegas;
  /// |w|_alpha at the same points.
  std::vector<double> norm_history;
  FbmPath driver{HurstParam(0.75), DyadicGrid(0, 1.0), {}, 0};
  SolveMode mode = SolveMode::stepper;
  std::vector<WindowRecord> windows;
  std::vector<ChannelRecord> channels;
  /// Largest |mean mode| seen at any step.
  double max_mean_mode = 0.0;
  /// Solution grid steps completed.
  std::size_t steps_completed = 0;
  bool completed = false;
  std::string failure;
  SobolevIndex alpha{1.5};
  double gamma = 0.7;

  DyadicGrid stored_grid() const { return times.coarsened(store_level); }
  /// V norm max(sup |w|_alpha, Hölder_gamma in alpha - gamma) on the stored
  /// grid, with the Hölder part over all pairs of at most 129 points.
  double v_norm() const;
};

/// One exponential-Euler step w -> S_d(w - d D(w) - F(w) dW) together with the
/// operator values at w.
struct StepResult {
  FourierField next;
  FourierField drift;
  FourierField diffusion;
};
StepResult exponential_euler_step(const OperatorHooks& hooks, const FourierField& w, double dt, double dw,
                                  std::span<const double> heat_dt);

/// Discrete mild map on a window with m steps of size dt:
/// Lambda(w)_j = S_{j dt} w_init - sum_{n<j} S_{(j-n) dt} (dt D(w_n) + F(w_n) dW_n).
std::vector<FourierField> lambda_map(const OperatorHooks& hooks, const std::vector<FourierField>& iterate,
                                     const FourierField& w_init, std::span<const double> dw, double dt);

struct PicardResult {
  std::vector<FourierField> trajectory;
  WindowRecord record;
};

/// Picard iteration on [t0, t0 + m dt] where dw holds the m driver increments.
/// Stops when the V-norm distance of successive iterates is below tol; the
/// record is marked not accepted when the empirical factor is >= 1 after the
/// check iteration or max_iter is reached.
PicardResult picard_window(const OperatorHooks& hooks, const ModelConfig& config, double t0, double dt,
                           std::span<const double> dw, const FourierField& w_init);
PicardResult picard_window(const ModelConfig& config, const FbmPath& w, double t0, double t1, const FourierField& w_init);

/// Runs the configured mode over [0, T]. Aborts cleanly with a partial
/// trajectory when the norm ceiling or the window floor is hit.
SolverState solve(const ModelConfig& config, const FbmPath& w);
SolverState generic_operator_solve(const OperatorHooks& hooks, const ModelConfig& config, const FbmPath& w);
SolverState generic_operator_solve(const DriftHook& drift, const DiffusionHook& diffusion, const ModelConfig& config,
                                   const FbmPath& w);

/// X_t = <w_t, phi> with its drift and noise channels.
struct ObservableSeries {
  Wavevector mode;
  DyadicGrid times{0, 1.0};
  std::vector<complex> values;
  std::vector<complex> drift_channel;
  std::vector<complex> noise_channel;

  std::vector<double> channel(Channel which) const;
  std::vector<double> noise(Channel which) const;
};

/// Full-level channels when the mode was observed during the solve, otherwise
/// recomputed from the stored fields.
ObservableSeries extract_observable(const SolverState& state, const ModelConfig& config, Wavevector mode);

/// max_t |X_t - X_0 - int a ds - int x dW| / max_t |X_t| with the drift
/// integral by trapezoid and the noise integral by left-point sums on the
/// observable's grid.
double weak_residual(const SolverState& state, const ModelConfig& config, Wavevector mode);
double weak_residual(const ObservableSeries& series, const FbmPath& w);

/// CSV t, norm_alpha, X_re, X_im, a_s, x_s, a_s_im, x_s_im at the stored points.
void write_trajectory_csv(std::ostream& out, const SolverState& state, const ModelConfig& config, Wavevector mode);

}  // namespace fracvort
