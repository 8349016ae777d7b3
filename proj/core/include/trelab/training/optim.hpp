// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "trelab/numerics/tape.hpp"

namespace trelab::training {

using numerics::Parameter;
using numerics::Tensor;

// Linear warm-up from 0 to the peak, then linear decay to 0 at the last step.
class Schedule {
 public:
  Schedule(long total_steps, double warmup_fraction, double peak_lr);

  // Rate for step t in [0, total_steps]; outside that range a ScheduleError.
  double lr_at(long t) const;

  long total_steps() const noexcept { return total_; }
  long warmup_steps() const noexcept { return warmup_; }
  double peak() const noexcept { return peak_; }

 private:
  long total_;
  long warmup_;
  double peak_;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

AdamState make_adam_state(std::span<Parameter* const> params);

// One bias-corrected Adam update from the accumulated gradients. A non-finite
// gradient raises NumericError naming the parameter, before anything changes.
void adam_step(std::span<Parameter* const> params, AdamState& state, double lr);

void zero_grads(std::span<Parameter* const> params);

}  // namespace trelab::training
