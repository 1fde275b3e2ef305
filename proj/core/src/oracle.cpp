#include "afsgm/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace afsgm {

MiniBatch minibatch(const StochasticOracle& oracle, std::span<const double> y,
                    std::int64_t m, std::uint64_t stream, std::uint64_t first_index) {
  if (m < 1) throw std::invalid_argument("minibatch: size must be >= 1");
  if (static_cast<int>(y.size()) != oracle.dim())
    throw std::invalid_argument("minibatch: point dimension mismatch");

  MiniBatch b;
  b.point.assign(y.begin(), y.end());
  b.size = m;
  b.stream = stream;
  b.first_index = first_index;
  b.grad_mean.assign(y.size(), 0.0);
  double value_sum = 0.0;
  for (std::int64_t j = 0; j < m; ++j) {
    Sample s = oracle.sample(y, SampleToken{stream, first_index + static_cast<std::uint64_t>(j)});
    if (s.grad.size() != y.size())
      throw std::invalid_argument("minibatch: oracle returned wrong gradient dimension");
    axpy(1.0, s.grad, b.grad_mean);
    value_sum += s.value;
  }
  double inv = 1.0 / static_cast<double>(m);
  for (double& v : b.grad_mean) v *= inv;
  b.value_mean = value_sum * inv;
  check_finite(b.grad_mean, "minibatch: grad_mean");
  return b;
}

DeltaLReport verify_delta_l(const StochasticOracle& oracle,
                            std::span<const std::pair<DenseVector, DenseVector>> trial_pairs,
                            const NormTag& norm) {
  DeltaLReport rep;
  const OracleMeta meta = oracle.meta();
  for (const auto& [x, y] : trial_pairs) {
    double fx = oracle.exact_value(x);
    double fy = oracle.exact_value(y);
    DenseVector gy = oracle.exact_grad(y);
    DenseVector d = sub(x, y);
    double gap = fx - fy - dot(gy, d);
    double nn;
    if (norm.kind == NormTag::Kind::L2) {
      nn = norm2_sq(d);
    } else if (std::isinf(norm.q)) {
      double v = norm_inf(d);
      nn = v * v;
    } else {
      double s = 0.0;
      for (double v : d) s += std::pow(std::fabs(v), norm.q);
      double v = std::pow(s, 1.0 / norm.q);
      nn = v * v;
    }
    rep.max_lower_violation = std::max(rep.max_lower_violation, -gap);
    rep.max_upper_violation =
        std::max(rep.max_upper_violation, gap - 0.5 * meta.lip * nn - meta.delta);
    ++rep.pairs;
  }
  return rep;
}

}  // namespace afsgm
