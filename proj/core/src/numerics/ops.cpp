// SPDX-License-Identifier: Apache-2.0
#include "trelab/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "trelab/error.hpp"

namespace trelab::numerics {
namespace {

void require_same_tape(Var a, Var b) {
  if (&a.tape() != &b.tape()) throw ContractError("operands recorded on different tapes");
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw DimensionError(std::string(op) + " expects a matrix, got " + to_string(t.shape()));
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  const std::size_t ia = a.index(), ib = b.index();
  return a.tape().record(matmul(a.value(), b.value()), [ia, ib](Tape& t, const Tensor&, const Tensor& g) {
    // dA = dC·Bᵀ, dB = Aᵀ·dC
    t.grad(ia) += matmul(g, transpose(t.value(ib)));
    t.grad(ib) += matmul(transpose(t.value(ia)), g);
  });
}

Var transpose(Var a) {
  const std::size_t ia = a.index();
  return a.tape().record(transpose(a.value()),
                         [ia](Tape& t, const Tensor&, const Tensor& g) { t.grad(ia) += transpose(g); });
}

Var add(Var a, Var b) {
  require_same_tape(a, b);
  if (a.shape() != b.shape()) {
    throw DimensionError("add shape mismatch: " + to_string(a.shape()) + " + " + to_string(b.shape()));
  }
  Tensor out = a.value();
  out += b.value();
  const std::size_t ia = a.index(), ib = b.index();
  return a.tape().record(std::move(out), [ia, ib](Tape& t, const Tensor&, const Tensor& g) {
    t.grad(ia) += g;
    t.grad(ib) += g;
  });
}

Var add_bias(Var x, Var bias) {
  require_same_tape(x, bias);
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (bv.rank() != 1 || xv.shape().back() != bv.size()) {
    throw DimensionError("bias " + to_string(bv.shape()) + " does not match " + to_string(xv.shape()));
  }
  Tensor out = xv;
  const std::size_t d = bv.size();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i % d];
  const std::size_t ix = x.index(), ib = bias.index();
  return x.tape().record(std::move(out), [ix, ib, d](Tape& t, const Tensor&, const Tensor& g) {
    t.grad(ix) += g;
    Tensor& gb = t.grad(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i % d] += g[i];
  });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b);
  if (a.shape() != b.shape()) {
    throw DimensionError("mul shape mismatch: " + to_string(a.shape()) + " * " + to_string(b.shape()));
  }
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const std::size_t ia = a.index(), ib = b.index();
  return a.tape().record(std::move(out), [ia, ib](Tape& t, const Tensor&, const Tensor& g) {
    const Tensor& av = t.value(ia);
    const Tensor& bv = t.value(ib);
    Tensor& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    Tensor& gb = t.grad(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
  });
}

Var scale(Var x, double factor) {
  Tensor out = x.value();
  for (double& v : out.data()) v *= factor;
  const std::size_t ix = x.index();
  return x.tape().record(std::move(out), [ix, factor](Tape& t, const Tensor&, const Tensor& g) {
    Tensor& gx = t.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
  });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  const std::size_t ix = x.index();
  return x.tape().record(Tensor::scalar(total), [ix](Tape& t, const Tensor&, const Tensor& g) {
    for (double& v : t.grad(ix).data()) v += g[0];
  });
}

Var softmax(Var x, int axis) {
  const Shape& shape = x.shape();
  const int rank = static_cast<int>(shape.size());
  Tensor y = softmax(x.value(), axis);  // validates the axis
  const int ax = axis < 0 ? axis + rank : axis;
  std::size_t outer = 1, inner = 1;
  for (int i = 0; i < ax; ++i) outer *= shape[i];
  for (int i = ax + 1; i < rank; ++i) inner *= shape[i];
  const std::size_t length = shape[ax];
  const std::size_t ix = x.index();
  return x.tape().record(std::move(y), [ix, outer, inner, length](Tape& t, const Tensor& y, const Tensor& g) {
    // dx = y ⊙ (dy − Σ dy⊙y) along the axis
    Tensor& gx = t.grad(ix);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < inner; ++i) {
        const std::size_t base = o * length * inner + i;
        double dot = 0.0;
        for (std::size_t k = 0; k < length; ++k) dot += g[base + k * inner] * y[base + k * inner];
        for (std::size_t k = 0; k < length; ++k) {
          const std::size_t at = base + k * inner;
          gx[at] += y[at] * (g[at] - dot);
        }
      }
    }
  });
}

Var causal_mask(Var scores) {
  const Tensor& s = scores.value();
  require_rank2(s, "causal_mask");
  const std::size_t n = s.shape()[0];
  if (s.shape()[1] != n) throw DimensionError("causal_mask expects a square matrix, got " + to_string(s.shape()));
  Tensor out = s;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out(i, j) = -std::numeric_limits<double>::infinity();
  const std::size_t ix = scores.index();
  return scores.tape().record(std::move(out), [ix, n](Tape& t, const Tensor&, const Tensor& g) {
    Tensor& gx = t.grad(ix);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) gx(i, j) += g(i, j);
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  require_same_tape(x, gain);
  require_same_tape(x, bias);
  const Tensor& xv = x.value();
  const std::size_t d = xv.shape().back();
  if (gain.value().size() != d || bias.value().size() != d) {
    throw DimensionError("layer_norm gain/bias " + to_string(gain.shape()) + " do not match " +
                         to_string(xv.shape()));
  }
  const std::size_t rows = xv.size() / d;
  Tensor normalized(xv.shape());
  std::vector<double> inv_std(rows);
  Tensor out(xv.shape());
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.data().data() + r * d;
    double mean = 0.0;
    for (std::size_t k = 0; k < d; ++k) mean += in[k];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t k = 0; k < d; ++k) var += (in[k] - mean) * (in[k] - mean);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std[r] = inv;
    for (std::size_t k = 0; k < d; ++k) {
      const double xhat = (in[k] - mean) * inv;
      normalized[r * d + k] = xhat;
      out[r * d + k] = xhat * gv[k] + bv[k];
    }
  }
  const std::size_t ix = x.index(), ig = gain.index(), ib = bias.index();
  return x.tape().record(
      std::move(out), [ix, ig, ib, d, rows, normalized = std::move(normalized), inv_std = std::move(inv_std)](
                          Tape& t, const Tensor&, const Tensor& g) {
        const Tensor& gv = t.value(ig);
        Tensor& gx = t.grad(ix);
        Tensor& gg = t.grad(ig);
        Tensor& gb = t.grad(ib);
        const double inv_d = 1.0 / static_cast<double>(d);
        for (std::size_t r = 0; r < rows; ++r) {
          double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
          for (std::size_t k = 0; k < d; ++k) {
            const std::size_t at = r * d + k;
            const double dxhat = g[at] * gv[k];
            mean_dxhat += dxhat;
            mean_dxhat_xhat += dxhat * normalized[at];
            gg[k] += g[at] * normalized[at];
            gb[k] += g[at];
          }
          mean_dxhat *= inv_d;
          mean_dxhat_xhat *= inv_d;
          for (std::size_t k = 0; k < d; ++k) {
            const std::size_t at = r * d + k;
            const double dxhat = g[at] * gv[k];
            gx[at] += inv_std[r] * (dxhat - mean_dxhat - normalized[at] * mean_dxhat_xhat);
          }
        }
      });
}

namespace {
constexpr double kGeluCoeff = 0.044715;
const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);
}  // namespace

double gelu_value(double x) {
  return 0.5 * x * (1.0 + std::tanh(kSqrt2OverPi * (x + kGeluCoeff * x * x * x)));
}

Var gelu(Var x) {
  Tensor out = x.value();
  for (double& v : out.data()) v = gelu_value(v);
  const std::size_t ix = x.index();
  return x.tape().record(std::move(out), [ix](Tape& t, const Tensor&, const Tensor& g) {
    const Tensor& xv = t.value(ix);
    Tensor& gx = t.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = xv[i];
      const double th = std::tanh(kSqrt2OverPi * (v + kGeluCoeff * v * v * v));
      const double dinner = kSqrt2OverPi * (1.0 + 3.0 * kGeluCoeff * v * v);
      gx[i] += g[i] * (0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * dinner);
    }
  });
}

Var cross_entropy(Var logits, std::span<const int> targets, int ignore_id) {
  const Tensor& lv = logits.value();
  require_rank2(lv, "cross_entropy");
  const std::size_t n = lv.shape()[0], vocab = lv.shape()[1];
  if (targets.size() != n) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
                         to_string(lv.shape()));
  }
  std::vector<int> tgt(targets.begin(), targets.end());
  std::size_t counted = 0;
  for (int target : tgt) {
    if (target == ignore_id) continue;
    if (target < 0 || static_cast<std::size_t>(target) >= vocab) {
      throw IndexError("cross_entropy target " + std::to_string(target) + " outside [0, " + std::to_string(vocab) +
                       ")");
    }
    ++counted;
  }
  Tensor probs(lv.shape());
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = lv.row(r);
    std::size_t arg = 0;
    for (std::size_t k = 1; k < vocab; ++k)
      if (row[k] > row[arg]) arg = k;
    const double max = row[arg];
    double rest = 0.0;
    for (std::size_t k = 0; k < vocab; ++k) {
      const double e = std::exp(row[k] - max);
      probs(r, k) = e;
      if (k != arg) rest += e;
    }
    const double norm = 1.0 + rest;
    for (std::size_t k = 0; k < vocab; ++k) probs(r, k) /= norm;
    if (tgt[r] == ignore_id) continue;
    // log-sum-exp split as (max - x_t) + log1p(rest) keeps tiny losses representable
    total += (max - row[static_cast<std::size_t>(tgt[r])]) + std::log1p(rest);
  }
  const double loss = counted ? total / static_cast<double>(counted) : 0.0;
  const std::size_t il = logits.index();
  return logits.tape().record(Tensor::scalar(loss), [il, tgt = std::move(tgt), probs = std::move(probs), counted,
                                                     ignore_id, n, vocab](Tape& t, const Tensor&, const Tensor& g) {
    if (counted == 0) return;
    Tensor& gl = t.grad(il);
    const double w = g[0] / static_cast<double>(counted);
    for (std::size_t r = 0; r < n; ++r) {
      if (tgt[r] == ignore_id) continue;
      for (std::size_t k = 0; k < vocab; ++k) gl(r, k) += w * probs(r, k);
      gl(r, static_cast<std::size_t>(tgt[r])) -= w;
    }
  });
}

Var dropout(Var x, double rate, Rng& rng, bool train) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  if (!train || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  Tensor mask(x.shape());
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    mask[i] = rng.uniform() >= rate ? keep_scale : 0.0;
    out[i] *= mask[i];
  }
  const std::size_t ix = x.index();
  return x.tape().record(std::move(out), [ix, mask = std::move(mask)](Tape& t, const Tensor&, const Tensor& g) {
    Tensor& gx = t.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
  });
}

Var embedding(Var table, std::span<const int> ids) {
  const Tensor& tv = table.value();
  require_rank2(tv, "embedding");
  const std::size_t rows = tv.shape()[0], d = tv.shape()[1];
  if (ids.empty()) throw InputError("embedding lookup of an empty id sequence");
  Tensor out({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= rows) {
      throw IndexError("token id " + std::to_string(ids[i]) + " outside vocabulary of " + std::to_string(rows));
    }
    std::copy_n(tv.row(static_cast<std::size_t>(ids[i])).begin(), d, out.row(i).begin());
  }
  const std::size_t it = table.index();
  return table.tape().record(std::move(out), [it, ids = std::vector<int>(ids.begin(), ids.end()), d](
                                                 Tape& t, const Tensor&, const Tensor& g) {
    Tensor& gt = t.grad(it);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto dst = gt.row(static_cast<std::size_t>(ids[i]));
      auto src = g.row(i);
      for (std::size_t k = 0; k < d; ++k) dst[k] += src[k];
    }
  });
}

Var slice_rows(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  require_rank2(xv, "slice_rows");
  if (begin >= end || end > xv.shape()[0]) {
    throw DimensionError("row slice [" + std::to_string(begin) + ", " + std::to_string(end) + ") of " +
                         to_string(xv.shape()));
  }
  const std::size_t d = xv.shape()[1];
  Tensor out({end - begin, d});
  std::copy_n(xv.data().begin() + static_cast<std::ptrdiff_t>(begin * d), (end - begin) * d, out.data().begin());
  const std::size_t ix = x.index();
  return x.tape().record(std::move(out), [ix, begin, d](Tape& t, const Tensor&, const Tensor& g) {
    Tensor& gx = t.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[begin * d + i] += g[i];
  });
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  require_rank2(xv, "slice_cols");
  if (begin >= end || end > xv.shape()[1]) {
    throw DimensionError("column slice [" + std::to_string(begin) + ", " + std::to_string(end) + ") of " +
                         to_string(xv.shape()));
  }
  const std::size_t n = xv.shape()[0], width = end - begin;
  Tensor out({n, width});
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < width; ++c) out(r, c) = xv(r, begin + c);
  const std::size_t ix = x.index();
  return x.tape().record(std::move(out), [ix, begin, n, width](Tape& t, const Tensor&, const Tensor& g) {
    Tensor& gx = t.grad(ix);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < width; ++c) gx(r, begin + c) += g(r, c);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw InputError("concat_cols of no parts");
  const std::size_t n = parts[0].value().shape()[0];
  std::size_t width = 0;
  for (const Var& p : parts) {
    require_same_tape(parts[0], p);
    require_rank2(p.value(), "concat_cols");
    if (p.value().shape()[0] != n) throw DimensionError("concat_cols row mismatch: " + to_string(p.shape()));
    width += p.value().shape()[1];
  }
  Tensor out({n, width});
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // (node index, column offset)
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& pv = p.value();
    const std::size_t w = pv.shape()[1];
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < w; ++c) out(r, offset + c) = pv(r, c);
    spans.emplace_back(p.index(), offset);
    offset += w;
  }
  return parts[0].tape().record(std::move(out), [spans = std::move(spans), n](Tape& t, const Tensor&, const Tensor& g) {
    for (const auto& [index, col] : spans) {
      Tensor& gp = t.grad(index);
      const std::size_t w = gp.shape()[1];
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < w; ++c) gp(r, c) += g(r, col + c);
    }
  });
}

}  // namespace trelab::numerics
