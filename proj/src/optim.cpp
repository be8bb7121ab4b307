#include "mta/optim.hpp"

#include <cmath>

#include "mta/errors.hpp"

namespace mta {

Vec Optimizer::update_direction(const Vec& gradient) {
  if (!all_finite(gradient))
    throw NumericalError("optimizer: non-finite gradient");
  switch (spec_.kind) {
    case OptimizerKind::Sign: {
      Vec out(gradient.size());
      for (std::size_t i = 0; i < gradient.size(); ++i)
        out[i] = gradient[i] > 0.0 ? 1.0 : (gradient[i] < 0.0 ? -1.0 : 0.0);
      return out;
    }
    case OptimizerKind::Plain:
      return gradient;
    case OptimizerKind::L2Norm: {
      const double n = norm2(gradient);
      if (n == 0.0) return gradient;
      Vec out(gradient.size());
      for (std::size_t i = 0; i < gradient.size(); ++i)
        out[i] = gradient[i] / n;
      return out;
    }
    case OptimizerKind::Adam: {
      if (m_.size() != gradient.size()) {
        m_.assign(gradient.size(), 0.0);
        v_.assign(gradient.size(), 0.0);
        step_ = 0;
      }
      ++step_;
      const AdamParams& p = spec_.adam;
      const double bc1 = 1.0 - std::pow(p.beta1, static_cast<double>(step_));
      const double bc2 = 1.0 - std::pow(p.beta2, static_cast<double>(step_));
      Vec out(gradient.size());
      for (std::size_t i = 0; i < gradient.size(); ++i) {
        m_[i] = p.beta1 * m_[i] + (1.0 - p.beta1) * gradient[i];
        v_[i] = p.beta2 * v_[i] + (1.0 - p.beta2) * gradient[i] * gradient[i];
        const double mhat = m_[i] / bc1;
        const double vhat = v_[i] / bc2;
        out[i] = mhat / (std::sqrt(vhat) + p.eps);
      }
      return out;
    }
  }
  throw InvalidInput("optimizer: unknown kind");
}

void Optimizer::reset() {
  m_.clear();
  v_.clear();
  step_ = 0;
}

double step_size(const StepSchedule& schedule, long k, long total_steps) {
  if (k < 1 || k > total_steps)
    throw InvalidInput("step_size: step index out of range");
  double alpha = schedule.initial;
  for (const auto& [fraction, multiplier] : schedule.decay) {
    const long boundary = static_cast<long>(
        std::ceil(fraction * static_cast<double>(total_steps)));
    if (k > boundary) alpha *= multiplier;
  }
  return alpha;
}

}  // namespace mta
