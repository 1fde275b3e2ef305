#pragma once

#include "afsgm/vec.hpp"

namespace afsgm {

// Norm selector. L2 is self-dual; Lq covers dual norms ||.||_q with
// q in [2, inf] (q may be +infinity).
struct NormTag {
  enum class Kind { L2, Lq } kind = Kind::L2;
  double q = 2.0;

  static NormTag l2() { return {Kind::L2, 2.0}; }
  static NormTag lq(double q) { return {Kind::Lq, q}; }
};

// Norm-regularity constant of the dual space:
//   L2 -> 1,  Lq -> min(q - 1, 2 ln n).
double kappa(const NormTag& norm, int dim);

// Concentration factor 2*kappa + 4*omega*sqrt(kappa) + 2*omega^2 used to
// scale theoretical batch sizes.
double omega_tilde(double kappa, double omega);

// Geometry bundle: norm, prox function d and feasible set. Defines the
// Bregman divergence V(x,y) = d(x) - d(y) - <grad d(y), x - y> and the
// mirror (prox-mapping) step minimized by the solvers.
//
//   EuclideanFreeSpace: Q = R^n, d(x) = ||x||^2/2, V(x,y) = ||x-y||^2/2
//   EntropySimplex:     Q = probability simplex, d(x) = sum x_i ln x_i,
//                       V(x,y) = sum x_i ln(x_i/y_i)
struct ProxSetup {
  enum class Geometry { EuclideanFreeSpace, EntropySimplex };

  Geometry geometry = Geometry::EuclideanFreeSpace;
  int dim = 0;

  static ProxSetup euclidean(int dim) { return {Geometry::EuclideanFreeSpace, dim}; }
  static ProxSetup entropy_simplex(int dim) { return {Geometry::EntropySimplex, dim}; }

  // Norm the prox function is 1-strongly convex against (L2 / L1).
  double norm(std::span<const double> v) const;
  // Tag of the dual norm, which is what kappa is computed for.
  NormTag dual_norm_tag() const;

  // Throws std::domain_error naming the violated constraint.
  void check_feasible(std::span<const double> x, const char* who) const;

  // Clamps and renormalizes simplex iterates drifting off the constraint
  // by floating rounding; identity for the Euclidean free space.
  DenseVector project_feasible(DenseVector x) const;

  // Uniform simplex point / origin, a feasible default start.
  DenseVector center() const;
};

// Bregman divergence V(x, y) >= 0 for the setup's prox function.
// y must be an interior point for the entropy geometry.
double bregman(const ProxSetup& setup, std::span<const double> x,
               std::span<const double> y);

// argmin over Q of V(x, u) + alpha * <g, x>. Constant terms of the solver's
// model phi do not change the argmin and are dropped.
DenseVector mirror_step(const ProxSetup& setup, std::span<const double> u,
                        std::span<const double> g, double alpha);

}  // namespace afsgm
