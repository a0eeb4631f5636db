#pragma once

#include <cstddef>
#include <vector>

#include "surgrec/tape.hpp"
#include "surgrec/tensor.hpp"

namespace surgrec {

struct LossWeights {
  double gesture = 1.0;
  double task = 1.0;
};

template <typename T>
struct MultiTaskLoss {
  Tensor<T> total;  // scalar on the tape
  double gesture = 0.0;
  double task = 0.0;
  std::vector<double> gesture_probs;
  std::vector<double> task_probs;
};

// weights.gesture * CE(gesture) + weights.task * CE(task)
template <typename T>
MultiTaskLoss<T> multi_task_loss(Tape<T>& tape, const Tensor<T>& gesture_logits,
                                 const Tensor<T>& task_logits, std::size_t gesture_target,
                                 std::size_t task_target, const LossWeights& weights = {});

}  // namespace surgrec
