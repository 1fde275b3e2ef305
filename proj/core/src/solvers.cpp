#include "afsgm/solvers.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

namespace afsgm {

namespace {

constexpr std::uint64_t kOracleStreamTag = 0x01;

double value_mean_at(const StochasticOracle& oracle, std::span<const double> point,
                     std::int64_t m, std::uint64_t stream, std::uint64_t first_index) {
  double s = 0.0;
  for (std::int64_t j = 0; j < m; ++j)
    s += oracle.value_sample(point, SampleToken{stream, first_index + static_cast<std::uint64_t>(j)});
  return s / static_cast<double>(m);
}

}  // namespace

std::int64_t snapped_ceil(double x) {
  double r = std::nearbyint(x);
  if (std::fabs(x - r) <= 1e-9 * std::max(1.0, std::fabs(x)))
    return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::ceil(x));
}

double alpha_next(double A, double L) {
  if (!(L > 0.0)) throw std::invalid_argument("alpha_next: L must be positive");
  if (A < 0.0) throw std::invalid_argument("alpha_next: A must be nonnegative");
  return (1.0 + std::sqrt(1.0 + 4.0 * A * L)) / (2.0 * L);
}

Horizon plan_horizon(const TheoreticalConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("plan_horizon: epsilon must be positive");
  if (!(cfg.L_declared > 0.0)) throw std::invalid_argument("plan_horizon: L must be positive");
  if (!(cfg.R_Q > 0.0)) throw std::invalid_argument("plan_horizon: R_Q must be positive");
  if (!(cfg.beta > 0.0 && cfg.beta < 1.0))
    throw std::invalid_argument("plan_horizon: beta must lie in (0,1)");
  double raw = 2.0 * std::sqrt(3.0) * std::sqrt(cfg.L_declared) * cfg.R_Q / std::sqrt(cfg.epsilon);
  std::int64_t n = std::max<std::int64_t>(1, snapped_ceil(raw));
  double ratio = static_cast<double>(n) / cfg.beta;
  if (!(ratio > 1.0))
    throw std::invalid_argument("plan_horizon: N/beta <= 1 makes the log nonpositive");
  return Horizon{n, std::sqrt(6.0 * std::log(ratio))};
}

std::int64_t batch_size_theoretical(double sigma_sq, double omega_tilde, double alpha,
                                    double epsilon) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("batch_size_theoretical: epsilon must be positive");
  double raw = 3.0 * sigma_sq * omega_tilde * alpha / epsilon;
  return std::max<std::int64_t>(1, snapped_ceil(raw));
}

DivergenceError::DivergenceError(std::int64_t k_, int trials_, double last_l_)
    : std::runtime_error("line search diverged at iteration " + std::to_string(k_) + " after " +
                         std::to_string(trials_) + " trials, last L=" + std::to_string(last_l_)),
      k(k_),
      trials(trials_),
      last_l(last_l_) {}

FastGradientSolver::FastGradientSolver(const TheoreticalConfig& cfg,
                                       const StochasticOracle& oracle, const ProxSetup& setup,
                                       DenseVector x0, std::uint64_t seed, Options options)
    : variant_(Variant::Theoretical),
      oracle_(oracle),
      setup_(setup),
      options_(options),
      epsilon_(cfg.epsilon),
      sigma_sq_(cfg.sigma_sq),
      delta_(cfg.delta),
      stream_(derive_stream(seed, kOracleStreamTag)) {
  if (!(cfg.L0 > 0.0)) throw std::invalid_argument("FastGradientSolver: L0 must be positive");
  if (cfg.L0 > cfg.L_declared)
    throw std::invalid_argument("FastGradientSolver: L0 must not exceed the declared L");
  horizon_ = plan_horizon(cfg);
  omega_tilde_ = omega_tilde(kappa(setup_.dual_norm_tag(), setup_.dim), horizon_.omega);
  setup_.check_feasible(x0, "FastGradientSolver: x0");
  state_.x = x0;
  state_.y = x0;
  state_.u = std::move(x0);
  state_.A = 0.0;
  state_.L_cur = cfg.L0;
}

FastGradientSolver::FastGradientSolver(const PracticalConfig& cfg,
                                       const StochasticOracle& oracle, const ProxSetup& setup,
                                       DenseVector x0, std::uint64_t seed, Options options)
    : variant_(Variant::Practical),
      oracle_(oracle),
      setup_(setup),
      options_(options),
      epsilon_(cfg.epsilon),
      omega_tilde_(1.0),
      sigma0_sq_(cfg.sigma0_sq),
      stream_(derive_stream(seed, kOracleStreamTag)) {
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("FastGradientSolver: epsilon must be positive");
  if (!(cfg.L0 > 0.0)) throw std::invalid_argument("FastGradientSolver: L0 must be positive");
  if (!(cfg.sigma0_sq > 0.0))
    throw std::invalid_argument("FastGradientSolver: sigma0_sq must be positive");
  options_.max_batch = cfg.max_batch;
  options_.max_inner = cfg.max_inner;
  setup_.check_feasible(x0, "FastGradientSolver: x0");
  state_.x = x0;
  state_.y = x0;
  state_.u = std::move(x0);
  state_.A = 0.0;
  state_.L_cur = cfg.L0;
}

bool FastGradientSolver::done() const {
  return variant_ == Variant::Theoretical && state_.k >= horizon_.n;
}

void FastGradientSolver::step() {
  if (variant_ == Variant::Theoretical)
    step_theoretical();
  else
    step_practical();
}

void FastGradientSolver::step_theoretical() {
  trial_ls_.clear();
  std::int64_t samples_spent = 0;
  for (int j = 0;; ++j) {
    if (j >= options_.max_inner)
      throw DivergenceError(state_.k + 1, j, trial_ls_.empty() ? state_.L_cur : trial_ls_.back());
    const bool force = options_.force_accept_first_trial;
    double L_trial = force ? state_.L_cur : std::ldexp(state_.L_cur, j - 1);
    double alpha = alpha_next(state_.A, L_trial);
    double A_next = state_.A + alpha;
    DenseVector y = setup_.project_feasible(
        combine(alpha, state_.u, state_.A, state_.x, A_next));

    std::int64_t m = std::min<std::int64_t>(
        batch_size_theoretical(sigma_sq_, omega_tilde_, alpha, epsilon_), options_.max_batch);
    if (m == options_.max_batch && !batch_cap_warned_) {
      std::cerr << "afsgm: batch formula exceeded max_batch=" << options_.max_batch
                << "; clamped\n";
      batch_cap_warned_ = true;
    }
    // Fresh tokens every trial: the theoretical rule re-samples inside the loop.
    MiniBatch batch = minibatch(oracle_, y, m, stream_, draw_cursor_);
    draw_cursor_ += static_cast<std::uint64_t>(m);
    samples_spent += m;

    DenseVector u_next = mirror_step(setup_, state_.u, batch.grad_mean, alpha);
    DenseVector x_next = setup_.project_feasible(
        combine(alpha, u_next, state_.A, state_.x, A_next));
    trial_ls_.push_back(L_trial);

    DenseVector d = sub(x_next, y);
    double dn = setup_.norm(d);
    double rhs = oracle_.exact_value(y) + dot(batch.grad_mean, d) + 0.5 * L_trial * dn * dn +
                 3.0 * sigma_sq_ * omega_tilde_ / (L_trial * static_cast<double>(m)) + delta_;
    if (force || oracle_.exact_value(x_next) <= rhs) {
      commit(alpha, L_trial, std::move(x_next), std::move(y), std::move(u_next), batch.grad_mean,
             m, j + 1, samples_spent);
      return;
    }
  }
}

void FastGradientSolver::step_practical() {
  trial_ls_.clear();
  // m is fixed from the provisional alpha at the incoming L, and one token
  // range serves every trial of this step.
  double alpha_prov = alpha_next(state_.A, state_.L_cur);
  std::int64_t m = std::min<std::int64_t>(
      batch_size_theoretical(sigma0_sq_, 1.0, alpha_prov, epsilon_), options_.max_batch);
  if (m == options_.max_batch && !batch_cap_warned_) {
    std::cerr << "afsgm: batch formula exceeded max_batch=" << options_.max_batch
              << "; clamped\n";
    batch_cap_warned_ = true;
  }
  const std::uint64_t first_index = draw_cursor_;
  draw_cursor_ += static_cast<std::uint64_t>(m);

  std::int64_t samples_spent = 0;
  for (int j = 0;; ++j) {
    if (j >= options_.max_inner)
      throw DivergenceError(state_.k + 1, j, trial_ls_.empty() ? state_.L_cur : trial_ls_.back());
    const bool force = options_.force_accept_first_trial;
    double L_trial = force ? state_.L_cur : std::ldexp(state_.L_cur, j - 1);
    double alpha = alpha_next(state_.A, L_trial);
    double A_next = state_.A + alpha;
    DenseVector y = setup_.project_feasible(
        combine(alpha, state_.u, state_.A, state_.x, A_next));

    MiniBatch batch = minibatch(oracle_, y, m, stream_, first_index);
    samples_spent += m;

    DenseVector u_next = mirror_step(setup_, state_.u, batch.grad_mean, alpha);
    DenseVector x_next = setup_.project_feasible(
        combine(alpha, u_next, state_.A, state_.x, A_next));
    trial_ls_.push_back(L_trial);

    DenseVector d = sub(x_next, y);
    double dn = setup_.norm(d);
    // Both sides are batch means over the same token range.
    double rhs = batch.value_mean + dot(batch.grad_mean, d) + 0.5 * L_trial * dn * dn +
                 epsilon_ / (L_trial * alpha);
    double value_x = value_mean_at(oracle_, x_next, m, stream_, first_index);
    if (force || value_x <= rhs) {
      commit(alpha, L_trial, std::move(x_next), std::move(y), std::move(u_next), batch.grad_mean,
             m, j + 1, samples_spent);
      return;
    }
  }
}

void FastGradientSolver::commit(double alpha, double L_accepted, DenseVector&& x_next,
                                DenseVector&& y_used, DenseVector&& u_next,
                                const DenseVector& grad_mean, std::int64_t m, int trials,
                                std::int64_t samples_spent) {
  double A_prev = state_.A;
  double A_next = A_prev + alpha;
  double root_residual = std::fabs(L_accepted * alpha * alpha - alpha - A_prev);
  if (root_residual > 1e-10 * std::max(1.0, A_next)) {
    std::ostringstream msg;
    msg << "step-weight quadratic violated: |L*a^2 - a - A| = " << root_residual;
    throw std::logic_error(msg.str());
  }
  check_finite(x_next, "FastGradientSolver: x");
  check_finite(u_next, "FastGradientSolver: u");

  DenseVector u_prev = std::move(state_.u);
  state_.u = std::move(u_next);
  state_.x = std::move(x_next);
  state_.A = A_next;
  state_.L_cur = L_accepted;
  state_.k += 1;
  state_.inner_j = trials;
  state_.cum_samples += samples_spent;
  last_m_ = m;

  if (observer_) {
    AfsgmStepInfo info{state_.k, alpha,  A_prev, A_next,   L_accepted, m,
                       trials,   state_.cum_samples, state_.x, y_used, u_prev, grad_mean,
                       trial_ls_};
    observer_(info);
  }
  state_.y = std::move(y_used);
}

AdamSolver::AdamSolver(const BaselineConfig& cfg, const StochasticOracle& oracle,
                       DenseVector x0, std::uint64_t seed)
    : cfg_(cfg),
      oracle_(oracle),
      x_(std::move(x0)),
      m_(x_.size(), 0.0),
      v_(x_.size(), 0.0),
      stream_(derive_stream(seed, kOracleStreamTag)) {
  if (cfg_.batch < 1) throw std::invalid_argument("AdamSolver: batch must be >= 1");
}

void AdamSolver::step() {
  MiniBatch b = minibatch(oracle_, x_, cfg_.batch, stream_, draw_cursor_);
  draw_cursor_ += static_cast<std::uint64_t>(cfg_.batch);
  cum_samples_ += cfg_.batch;
  ++t_;
  double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < x_.size(); ++i) {
    double g = b.grad_mean[i];
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
    double mhat = m_[i] / c1;
    double vhat = v_[i] / c2;
    x_[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps_hat);
  }
  check_finite(x_, "AdamSolver: x");
}

AdagradSolver::AdagradSolver(const BaselineConfig& cfg, const StochasticOracle& oracle,
                             DenseVector x0, std::uint64_t seed)
    : cfg_(cfg),
      oracle_(oracle),
      x_(std::move(x0)),
      acc_(x_.size(), 0.0),
      stream_(derive_stream(seed, kOracleStreamTag)) {
  if (cfg_.batch < 1) throw std::invalid_argument("AdagradSolver: batch must be >= 1");
}

void AdagradSolver::step() {
  MiniBatch b = minibatch(oracle_, x_, cfg_.batch, stream_, draw_cursor_);
  draw_cursor_ += static_cast<std::uint64_t>(cfg_.batch);
  cum_samples_ += cfg_.batch;
  ++t_;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    double g = b.grad_mean[i];
    acc_[i] += g * g;
    x_[i] -= cfg_.lr * g / std::sqrt(acc_[i] + cfg_.eps_acc);
  }
  check_finite(x_, "AdagradSolver: x");
}

SgdSolver::SgdSolver(const BaselineConfig& cfg, const StochasticOracle& oracle, DenseVector x0,
                     std::uint64_t seed)
    : cfg_(cfg),
      oracle_(oracle),
      x_(std::move(x0)),
      stream_(derive_stream(seed, kOracleStreamTag)) {
  if (cfg_.batch < 1) throw std::invalid_argument("SgdSolver: batch must be >= 1");
}

void SgdSolver::step() {
  MiniBatch b = minibatch(oracle_, x_, cfg_.batch, stream_, draw_cursor_);
  draw_cursor_ += static_cast<std::uint64_t>(cfg_.batch);
  cum_samples_ += cfg_.batch;
  ++t_;
  axpy(-cfg_.lr, b.grad_mean, x_);
  check_finite(x_, "SgdSolver: x");
}

}  // namespace afsgm
