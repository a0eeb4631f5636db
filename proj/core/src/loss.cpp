#include "surgrec/loss.hpp"

#include <stdexcept>

#include "surgrec/ops.hpp"

namespace surgrec {

template <typename T>
MultiTaskLoss<T> multi_task_loss(Tape<T>& tape, const Tensor<T>& gesture_logits,
                                 const Tensor<T>& task_logits, std::size_t gesture_target,
                                 std::size_t task_target, const LossWeights& weights) {
  if (weights.gesture < 0.0 || weights.task < 0.0) {
    throw std::invalid_argument("multi_task_loss: head weights must be non-negative");
  }
  auto gesture = ops::softmax_cross_entropy(tape, gesture_logits, gesture_target);
  auto task = ops::softmax_cross_entropy(tape, task_logits, task_target);
  Tensor<T> total = ops::add(tape, ops::scale(tape, gesture.loss, static_cast<T>(weights.gesture)),
                             ops::scale(tape, task.loss, static_cast<T>(weights.task)));

  MultiTaskLoss<T> out;
  out.total = total;
  out.gesture = static_cast<double>(gesture.loss.item());
  out.task = static_cast<double>(task.loss.item());
  out.gesture_probs.assign(gesture.probs.values().begin(), gesture.probs.values().end());
  out.task_probs.assign(task.probs.values().begin(), task.probs.values().end());
  return out;
}

template MultiTaskLoss<float> multi_task_loss<float>(Tape<float>&, const Tensor<float>&,
                                                     const Tensor<float>&, std::size_t,
                                                     std::size_t, const LossWeights&);
template MultiTaskLoss<double> multi_task_loss<double>(Tape<double>&, const Tensor<double>&,
                                                       const Tensor<double>&, std::size_t,
                                                       std::size_t, const LossWeights&);

}  // namespace surgrec
