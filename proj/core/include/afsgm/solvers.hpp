#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "afsgm/oracle.hpp"
#include "afsgm/prox.hpp"
#include "afsgm/vec.hpp"

namespace afsgm {

// ceil() that forgives floating dust: formula values that are integers in
// exact arithmetic (e.g. 3*0.1/0.002) must not round up to the next integer.
std::int64_t snapped_ceil(double x);

// Positive root of L*a^2 - a - A = 0, the step-weight quadratic.
double alpha_next(double A, double L);

// Iteration horizon N = ceil(2*sqrt(3)*sqrt(L)*R_Q/sqrt(eps)) and the
// confidence factor Omega = sqrt(6*ln(N/beta)).
struct Horizon {
  std::int64_t n = 0;
  double omega = 0.0;
};

// Batch size ceil(3*sigma^2*omega_tilde*alpha/eps), clamped below at 1.
std::int64_t batch_size_theoretical(double sigma_sq, double omega_tilde, double alpha,
                                    double epsilon);

struct TheoreticalConfig {
  double epsilon = 0.002;   // target accuracy
  double beta = 0.05;       // confidence level in (0,1)
  double L_declared = 1.0;  // oracle smoothness constant
  double L0 = 1.0;          // initial local smoothness guess, <= L_declared
  double sigma_sq = 0.0;    // oracle noise proxy
  double R_Q = 1.0;         // feasible-set diameter bound
  double delta = 0.0;       // oracle inexactness
};

Horizon plan_horizon(const TheoreticalConfig& cfg);

struct PracticalConfig {
  double epsilon = 0.002;
  double L0 = 1.0;
  double sigma0_sq = 0.1;          // declared variance upper bound
  std::int64_t max_batch = 65536;  // cap on the batch formula, logged when hit
  int max_inner = 60;              // doubling cap before a divergence error
};

struct BaselineConfig {
  double lr = 0.001;
  std::int64_t batch = 128;
  double beta1 = 0.9;     // Adam first-moment decay
  double beta2 = 0.999;   // Adam second-moment decay
  double eps_hat = 1e-8;  // Adam denominator guard
  double eps_acc = 1e-10; // AdaGrad accumulator guard
};

// Iterate bundle of the fast-gradient solvers.
struct SolverState {
  DenseVector x;
  DenseVector y;
  DenseVector u;
  double A = 0.0;
  double L_cur = 1.0;
  std::int64_t k = 0;
  int inner_j = 0;                // trials of the most recent step
  std::int64_t cum_samples = 0;   // component-gradient evaluations so far
};

// Thrown when an inner loop exceeds its doubling cap; carries the last trial.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::int64_t k, int trials, double last_l);
  std::int64_t k;
  int trials;
  double last_l;
};

// Common stepping contract consumed by the harness.
class IterativeSolver {
 public:
  virtual ~IterativeSolver() = default;
  virtual void step() = 0;
  virtual const DenseVector& x() const = 0;
  virtual std::int64_t k() const = 0;
  virtual std::int64_t cum_samples() const = 0;
  virtual double current_l() const { return 0.0; }
  virtual std::int64_t last_m() const = 0;
  virtual int last_trials() const { return 0; }
  virtual bool done() const { return false; }
};

// Per-step observation for trackers and tests. References are valid only
// during the callback.
struct AfsgmStepInfo {
  std::int64_t k = 0;  // just-completed outer iteration
  double alpha = 0.0;
  double A_prev = 0.0;
  double A = 0.0;
  double L = 0.0;
  std::int64_t m = 0;
  int trials = 0;
  std::int64_t cum_samples = 0;
  const DenseVector& x;
  const DenseVector& y;
  const DenseVector& u_prev;
  const DenseVector& grad_mean;
  const std::vector<double>& trial_ls;
};
using StepObserver = std::function<void(const AfsgmStepInfo&)>;

// Adaptive fast stochastic gradient method with a doubling line search.
//
// Two variants share the update scaffold and differ in how the inner loop is
// fed:
//   Theoretical - batch size from sigma^2 * omega_tilde * alpha / eps with a
//     fresh mini-batch drawn every trial; the exit test compares values from
//     the deterministic channel and adds slack 3*sigma^2*omega_tilde/(L*m)
//     + delta.
//   Practical - omega_tilde fixed to 1, batch size from the provisional
//     alpha at the incoming L (so m stays constant across trials), one token
//     range drawn before the loop and reused by every trial, and all values
//     in the exit test are batch means; slack is eps/(L*alpha).
class FastGradientSolver : public IterativeSolver {
 public:
  enum class Variant { Theoretical, Practical };

  struct Options {
    // Accepts the first trial unconditionally at the incoming L (no halving);
    // used by the bias probes to obtain selection-free batches.
    bool force_accept_first_trial = false;
    std::int64_t max_batch = 65536;
    int max_inner = 60;
  };

  FastGradientSolver(const TheoreticalConfig& cfg, const StochasticOracle& oracle,
                     const ProxSetup& setup, DenseVector x0, std::uint64_t seed,
                     Options options = {});
  FastGradientSolver(const PracticalConfig& cfg, const StochasticOracle& oracle,
                     const ProxSetup& setup, DenseVector x0, std::uint64_t seed,
                     Options options = {});

  void step() override;
  const DenseVector& x() const override { return state_.x; }
  std::int64_t k() const override { return state_.k; }
  std::int64_t cum_samples() const override { return state_.cum_samples; }
  double current_l() const override { return state_.L_cur; }
  std::int64_t last_m() const override { return last_m_; }
  int last_trials() const override { return state_.inner_j; }
  // The theoretical variant stops at its planned horizon.
  bool done() const override;

  Variant variant() const { return variant_; }
  const SolverState& state() const { return state_; }
  const Horizon& horizon() const { return horizon_; }
  double omega_tilde_factor() const { return omega_tilde_; }
  const std::vector<double>& last_trial_ls() const { return trial_ls_; }
  void set_observer(StepObserver obs) { observer_ = std::move(obs); }

 private:
  void step_theoretical();
  void step_practical();
  void commit(double alpha, double L_accepted, DenseVector&& x_next, DenseVector&& y_used,
              DenseVector&& u_next, const DenseVector& grad_mean, std::int64_t m,
              int trials, std::int64_t samples_spent);

  Variant variant_;
  const StochasticOracle& oracle_;
  ProxSetup setup_;
  Options options_;
  SolverState state_;

  // theoretical parameters
  double epsilon_ = 0.0;
  double sigma_sq_ = 0.0;
  double delta_ = 0.0;
  double omega_tilde_ = 1.0;
  Horizon horizon_;

  // practical parameters
  double sigma0_sq_ = 0.0;

  std::uint64_t stream_ = 0;
  std::uint64_t draw_cursor_ = 0;
  std::int64_t last_m_ = 0;
  bool batch_cap_warned_ = false;
  std::vector<double> trial_ls_;
  StepObserver observer_;
};

// Baseline first-order methods behind the same stepping contract. All run in
// the Euclidean free space.
class AdamSolver : public IterativeSolver {
 public:
  AdamSolver(const BaselineConfig& cfg, const StochasticOracle& oracle, DenseVector x0,
             std::uint64_t seed);
  void step() override;
  const DenseVector& x() const override { return x_; }
  std::int64_t k() const override { return t_; }
  std::int64_t cum_samples() const override { return cum_samples_; }
  std::int64_t last_m() const override { return cfg_.batch; }

 private:
  BaselineConfig cfg_;
  const StochasticOracle& oracle_;
  DenseVector x_, m_, v_;
  std::int64_t t_ = 0;
  std::int64_t cum_samples_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t draw_cursor_ = 0;
};

class AdagradSolver : public IterativeSolver {
 public:
  AdagradSolver(const BaselineConfig& cfg, const StochasticOracle& oracle, DenseVector x0,
                std::uint64_t seed);
  void step() override;
  const DenseVector& x() const override { return x_; }
  std::int64_t k() const override { return t_; }
  std::int64_t cum_samples() const override { return cum_samples_; }
  std::int64_t last_m() const override { return cfg_.batch; }

 private:
  BaselineConfig cfg_;
  const StochasticOracle& oracle_;
  DenseVector x_, acc_;
  std::int64_t t_ = 0;
  std::int64_t cum_samples_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t draw_cursor_ = 0;
};

class SgdSolver : public IterativeSolver {
 public:
  SgdSolver(const BaselineConfig& cfg, const StochasticOracle& oracle, DenseVector x0,
            std::uint64_t seed);
  void step() override;
  const DenseVector& x() const override { return x_; }
  std::int64_t k() const override { return t_; }
  std::int64_t cum_samples() const override { return cum_samples_; }
  std::int64_t last_m() const override { return cfg_.batch; }

 private:
  BaselineConfig cfg_;
  const StochasticOracle& oracle_;
  DenseVector x_;
  std::int64_t t_ = 0;
  std::int64_t cum_samples_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t draw_cursor_ = 0;
};

}  // namespace afsgm
