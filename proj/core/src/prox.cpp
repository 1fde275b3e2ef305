#include "afsgm/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace afsgm {

namespace {

constexpr double kSimplexSumTol = 1e-12;
// Entries are clamped here before logarithms; keeps ln finite while staying
// far below any value reachable by renormalized exponential weights.
constexpr double kPositiveFloor = 1e-300;

double entropy_d(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * std::log(std::max(v, kPositiveFloor));
  return s;
}

}  // namespace

double kappa(const NormTag& norm, int dim) {
  if (norm.kind == NormTag::Kind::L2) return 1.0;
  if (norm.q < 2.0)
    throw std::invalid_argument("kappa: Lq dual norm requires q >= 2, got q=" +
                                std::to_string(norm.q));
  if (dim < 2)
    throw std::invalid_argument("kappa: Lq rule requires dim >= 2, got dim=" +
                                std::to_string(dim));
  double by_dim = 2.0 * std::log(static_cast<double>(dim));
  if (std::isinf(norm.q)) return by_dim;
  return std::min(norm.q - 1.0, by_dim);
}

double omega_tilde(double kappa, double omega) {
  if (!(kappa > 0.0)) throw std::invalid_argument("omega_tilde: kappa must be positive");
  if (omega < 0.0) throw std::invalid_argument("omega_tilde: omega must be nonnegative");
  return 2.0 * kappa + 4.0 * omega * std::sqrt(kappa) + 2.0 * omega * omega;
}

double ProxSetup::norm(std::span<const double> v) const {
  return geometry == Geometry::EuclideanFreeSpace ? norm2(v) : norm1(v);
}

NormTag ProxSetup::dual_norm_tag() const {
  if (geometry == Geometry::EuclideanFreeSpace) return NormTag::l2();
  // primal L1 -> dual Linf
  return NormTag::lq(std::numeric_limits<double>::infinity());
}

void ProxSetup::check_feasible(std::span<const double> x, const char* who) const {
  if (static_cast<int>(x.size()) != dim)
    throw std::domain_error(std::string(who) + ": dimension " + std::to_string(x.size()) +
                            " does not match setup dim " + std::to_string(dim));
  if (!all_finite(x)) throw std::domain_error(std::string(who) + ": non-finite entry");
  if (geometry == Geometry::EntropySimplex) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i] > 0.0))
        throw std::domain_error(std::string(who) + ": simplex coordinate " +
                                std::to_string(i) + " is not strictly positive");
      sum += x[i];
    }
    if (std::fabs(sum - 1.0) > kSimplexSumTol)
      throw std::domain_error(std::string(who) + ": simplex sum is " + std::to_string(sum) +
                              ", must be 1 within 1e-12");
  }
}

DenseVector ProxSetup::project_feasible(DenseVector x) const {
  if (geometry == Geometry::EuclideanFreeSpace) return x;
  double sum = 0.0;
  for (double& v : x) {
    v = std::max(v, kPositiveFloor);
    sum += v;
  }
  for (double& v : x) v /= sum;
  return x;
}

DenseVector ProxSetup::center() const {
  if (geometry == Geometry::EuclideanFreeSpace) return DenseVector(dim, 0.0);
  return DenseVector(dim, 1.0 / dim);
}

double bregman(const ProxSetup& setup, std::span<const double> x,
               std::span<const double> y) {
  setup.check_feasible(x, "bregman: x");
  setup.check_feasible(y, "bregman: y");
  if (setup.geometry == ProxSetup::Geometry::EuclideanFreeSpace) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d = x[i] - y[i];
      s += d * d;
    }
    return 0.5 * s;
  }
  // d(x) - d(y) - <grad d(y), x - y> with grad d(y)_i = ln y_i + 1
  double v = entropy_d(x) - entropy_d(y);
  for (std::size_t i = 0; i < x.size(); ++i)
    v -= (std::log(std::max(y[i], kPositiveFloor)) + 1.0) * (x[i] - y[i]);
  return std::max(v, 0.0);
}

DenseVector mirror_step(const ProxSetup& setup, std::span<const double> u,
                        std::span<const double> g, double alpha) {
  setup.check_feasible(u, "mirror_step: u");
  if (g.size() != u.size()) throw std::domain_error("mirror_step: gradient dimension mismatch");
  check_finite(g, "mirror_step: g");
  if (alpha < 0.0) throw std::invalid_argument("mirror_step: alpha must be nonnegative");

  if (setup.geometry == ProxSetup::Geometry::EuclideanFreeSpace) {
    DenseVector r(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = u[i] - alpha * g[i];
    return r;
  }

  // Exponentiated weights u_i * exp(-alpha g_i), renormalized. Shift by the
  // max exponent so the exp never overflows.
  DenseVector logw(u.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.size(); ++i) {
    logw[i] = std::log(std::max(u[i], kPositiveFloor)) - alpha * g[i];
    mx = std::max(mx, logw[i]);
  }
  DenseVector r(u.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    r[i] = std::exp(logw[i] - mx);
    sum += r[i];
  }
  for (double& v : r) v /= sum;
  return setup.project_feasible(std::move(r));
}

}  // namespace afsgm
