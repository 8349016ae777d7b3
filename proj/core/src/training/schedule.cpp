// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "trelab/error.hpp"
#include "trelab/training/optim.hpp"

namespace trelab::training {

Schedule::Schedule(long total_steps, double warmup_fraction, double peak_lr)
    : total_(total_steps), peak_(peak_lr) {
  if (total_steps < 1) throw ConfigError("schedule needs at least one step");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) throw ConfigError("warmup_fraction must lie in [0, 1)");
  if (!(peak_lr >= 0.0)) throw ConfigError("peak learning rate must be >= 0");
  warmup_ = std::max(1L, std::lround(warmup_fraction * static_cast<double>(total_steps)));
  warmup_ = std::min(warmup_, total_);
}

double Schedule::lr_at(long t) const {
  if (t < 0 || t > total_) {
    throw ScheduleError("step " + std::to_string(t) + " outside the schedule [0, " + std::to_string(total_) + "]");
  }
  if (t <= warmup_) return peak_ * static_cast<double>(t) / static_cast<double>(warmup_);
  return peak_ * static_cast<double>(total_ - t) / static_cast<double>(total_ - warmup_);
}

}  // namespace trelab::training
