// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "trelab/numerics/tape.hpp"

namespace trelab::testing {

struct GradMismatch {
  std::string parameter;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative = 0.0;
};

// Relative error with an absolute floor so that near-zero gradients compare
// on an absolute scale.
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Compares tape gradients of a scalar loss against central differences,
// perturbing every entry of every parameter. Returns the worst entry.
inline GradMismatch check_gradients(const std::function<numerics::Var(numerics::Tape&)>& loss,
                                    const std::vector<numerics::Parameter*>& params, double step = 1e-5) {
  for (numerics::Parameter* p : params) p->grad = numerics::Tensor(p->value.shape());
  {
    numerics::Tape tape;
    tape.backward(loss(tape));
  }
  auto value = [&] {
    numerics::Tape tape;
    return loss(tape).value().item();
  };
  GradMismatch worst;
  worst.relative = -1.0;
  for (numerics::Parameter* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + step;
      const double up = value();
      p->value[i] = saved - step;
      const double down = value();
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double rel = relative_error(p->grad[i], numeric);
      if (rel > worst.relative) worst = {p->name, i, p->grad[i], numeric, rel};
    }
  }
  return worst;
}

}  // namespace trelab::testing
