#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "afsgm/prox.hpp"
#include "afsgm/rng.hpp"
#include "afsgm/vec.hpp"

namespace afsgm {

// Declared inexactness / smoothness / noise metadata of an oracle:
//   delta    - additive slack of the quadratic upper bound
//   lip      - smoothness constant L
//   sigma_sq - sub-Gaussian variance proxy of the gradient noise
struct OracleMeta {
  double delta = 0.0;
  double lip = 1.0;
  double sigma_sq = 0.0;
};

struct Sample {
  double value = 0.0;
  DenseVector grad;
};

// Contract producing (value sample, gradient sample) at a point given a
// sample token. Immutable after construction; sample() is a pure function
// of (point, token), so replay and concurrent use are safe. Over tokens the
// gradient sample is unbiased for the smoothed gradient at the point.
class StochasticOracle {
 public:
  virtual ~StochasticOracle() = default;

  virtual int dim() const = 0;
  virtual OracleMeta meta() const = 0;
  virtual Sample sample(std::span<const double> y, SampleToken token) const = 0;

  // Deterministic value channel f_delta(y). For the built-in problems this
  // is the exact objective (full mean for finite sums).
  virtual double exact_value(std::span<const double> y) const = 0;
  // Exact gradient at y; consumed by bias probes and the sandwich check.
  virtual DenseVector exact_grad(std::span<const double> y) const = 0;
};

// Mean of `size` i.i.d. samples at `point`, drawn with consecutive token
// indices [first_index, first_index + size) from `stream`. The token range
// is recorded so a batch can be replayed bitwise.
struct MiniBatch {
  DenseVector point;
  std::int64_t size = 0;
  DenseVector grad_mean;
  double value_mean = 0.0;
  std::uint64_t stream = 0;
  std::uint64_t first_index = 0;
};

MiniBatch minibatch(const StochasticOracle& oracle, std::span<const double> y,
                    std::int64_t m, std::uint64_t stream, std::uint64_t first_index = 0);

// Largest observed violations of the two-sided smoothness sandwich
//   0 <= f(x) - f_delta(y) - <grad f_delta(y), x - y> <= L/2 ||x-y||^2 + delta
// over the supplied trial pairs. Violations are reported, never thrown.
struct DeltaLReport {
  double max_lower_violation = 0.0;
  double max_upper_violation = 0.0;
  std::int64_t pairs = 0;
};

DeltaLReport verify_delta_l(const StochasticOracle& oracle,
                            std::span<const std::pair<DenseVector, DenseVector>> trial_pairs,
                            const NormTag& norm = NormTag::l2());

}  // namespace afsgm
