#ifndef MTA_LOSS_HPP
#define MTA_LOSS_HPP

#include <cstddef>

#include "mta/numerics.hpp"

namespace mta {

enum class LossKind { CrossEntropy, Margin, LogitDiff };

// Surrogate losses maximized by the attack. All are expressed on logits z
// with true label y; gradients are with respect to z so they compose with
// Model::input_gradient.
struct SurrogateLoss {
  LossKind kind = LossKind::Margin;
  std::size_t target = 0;  // LogitDiff only

  static SurrogateLoss cross_entropy() {
    return {LossKind::CrossEntropy, 0};
  }
  static SurrogateLoss margin() { return {LossKind::Margin, 0}; }
  static SurrogateLoss logit_diff(std::size_t t) {
    return {LossKind::LogitDiff, t};
  }
};

double loss_value(const SurrogateLoss& loss, const Vec& z, std::size_t y);
Vec loss_logit_gradient(const SurrogateLoss& loss, const Vec& z,
                        std::size_t y);

// 1 iff argmax z != y; argmax ties resolve to the lowest index, so an exact
// tie involving y counts as correct only when y is the lowest tied index.
int zero_one_loss(const Vec& z, std::size_t y);

// Lowest-index argmax over classes != y; the margin runner-up.
std::size_t argmax_excluding(const Vec& z, std::size_t y);

}  // namespace mta

#endif  // MTA_LOSS_HPP
