// Copyright 2026 VQASR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vqasr/nn.hpp"

#include <algorithm>
#include <cmath>

namespace vqasr {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void add_row_bias(Tensor& y, const Tensor& b) {
  const std::size_t rows = y.dim(0), cols = y.dim(1);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) y.at(r, c) += b[c];
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear

Tensor linear_forward(const Tensor& x, const LinearParams& p,
                      LinearCache* cache) {
  if (x.ndim() != 2 || x.dim(1) != p.w.dim(1))
    throw ShapeMismatchError("linear_forward: input " + x.shape_str() +
                             " vs weight " + p.w.shape_str());
  Tensor y({x.dim(0), p.w.dim(0)});
  gemm(x, false, p.w, true, y);
  add_row_bias(y, p.b);
  if (cache) cache->x = x;
  return y;
}

Tensor linear_backward(const Tensor& dy, const LinearParams& p,
                       const LinearCache& cache, LinearParams& grads) {
  gemm(dy, true, cache.x, false, grads.w, /*accumulate=*/true);
  const std::size_t rows = dy.dim(0), cols = dy.dim(1);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) grads.b[c] += dy.at(r, c);
  Tensor dx({dy.dim(0), p.w.dim(1)});
  gemm(dy, false, p.w, false, dx);
  return dx;
}

// ---------------------------------------------------------------------------
// Conv1d

Conv1dParams make_conv1d(int in_channels, int out_channels, int kernel_size,
                         int stride, int padding) {
  Conv1dParams p;
  p.in_channels = in_channels;
  p.out_channels = out_channels;
  p.kernel_size = kernel_size;
  p.stride = stride;
  p.padding = padding;
  p.weight = Tensor({static_cast<std::size_t>(out_channels),
                     static_cast<std::size_t>(in_channels),
                     static_cast<std::size_t>(kernel_size)});
  p.bias = Tensor({static_cast<std::size_t>(out_channels)});
  return p;
}

Tensor conv1d_forward(const Tensor& x, const Conv1dParams& p,
                      Conv1dCache* cache) {
  if (x.ndim() != 2 || x.dim(1) != static_cast<std::size_t>(p.in_channels))
    throw ShapeMismatchError("conv1d_forward: input " + x.shape_str() +
                             " does not match in_channels=" +
                             std::to_string(p.in_channels));
  const int t_in = static_cast<int>(x.dim(0));
  const int t_out = p.out_length(t_in);
  if (t_out < 1)
    throw ShapeMismatchError("conv1d_forward: input too short (T=" +
                             std::to_string(t_in) + ")");
  const int k = p.kernel_size, cin = p.in_channels;

  // im2col: row j holds the receptive field of output step j, laid out
  // channel-major to match the [out x in x k] weight layout.
  Tensor patches({static_cast<std::size_t>(t_out),
                  static_cast<std::size_t>(cin * k)});
  for (int j = 0; j < t_out; ++j) {
    const int start = j * p.stride - p.padding;
    for (int c = 0; c < cin; ++c) {
      for (int tap = 0; tap < k; ++tap) {
        const int src = start + tap;
        const double v = (src >= 0 && src < t_in)
                             ? x.at(static_cast<std::size_t>(src),
                                    static_cast<std::size_t>(c))
                             : 0.0;
        patches.at(static_cast<std::size_t>(j),
                   static_cast<std::size_t>(c * k + tap)) = v;
      }
    }
  }

  // The [out x in x k] weight layout doubles as the [out x in*k] matrix.
  Tensor y({static_cast<std::size_t>(t_out),
            static_cast<std::size_t>(p.out_channels)});
  gemm_view(patches.data(), patches.dim(0), patches.dim(1), false,
            p.weight.data(), p.weight.dim(0), p.weight.dim(1) * p.weight.dim(2),
            true, y.data(), y.dim(0), y.dim(1));
  add_row_bias(y, p.bias);

  if (cache) {
    cache->patches = std::move(patches);
    cache->in_length = t_in;
  }
  return y;
}

Tensor conv1d_backward(const Tensor& dy, const Conv1dParams& p,
                       const Conv1dCache& cache, Conv1dParams& grads) {
  const int t_out = static_cast<int>(dy.dim(0));
  const int k = p.kernel_size, cin = p.in_channels;

  // dW (as [out x in*k]) = dy^T * patches, accumulated in place
  const std::size_t w_rows = p.weight.dim(0);
  const std::size_t w_cols = p.weight.dim(1) * p.weight.dim(2);
  gemm_view(dy.data(), dy.dim(0), dy.dim(1), true, cache.patches.data(),
            cache.patches.dim(0), cache.patches.dim(1), false,
            grads.weight.data(), w_rows, w_cols, /*accumulate=*/true);
  for (int j = 0; j < t_out; ++j)
    for (int o = 0; o < p.out_channels; ++o)
      grads.bias[o] += dy.at(static_cast<std::size_t>(j),
                             static_cast<std::size_t>(o));

  // dPatches = dy * W2, scattered back onto the input (col2im).
  Tensor dpatches({dy.dim(0), w_cols});
  gemm_view(dy.data(), dy.dim(0), dy.dim(1), false, p.weight.data(), w_rows,
            w_cols, false, dpatches.data(), dpatches.dim(0), dpatches.dim(1));

  Tensor dx({static_cast<std::size_t>(cache.in_length),
             static_cast<std::size_t>(cin)});
  for (int j = 0; j < t_out; ++j) {
    const int start = j * p.stride - p.padding;
    for (int c = 0; c < cin; ++c) {
      for (int tap = 0; tap < k; ++tap) {
        const int src = start + tap;
        if (src < 0 || src >= cache.in_length) continue;
        dx.at(static_cast<std::size_t>(src), static_cast<std::size_t>(c)) +=
            dpatches.at(static_cast<std::size_t>(j),
                        static_cast<std::size_t>(c * k + tap));
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// GLU

Tensor glu_forward(const Tensor& x, GluCache* cache) {
  if (x.ndim() != 2 || x.dim(1) % 2 != 0)
    throw OddChannelsError("glu needs an even channel count, got " +
                           x.shape_str());
  const std::size_t rows = x.dim(0), half = x.dim(1) / 2;
  Tensor y({rows, half});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < half; ++c)
      y.at(r, c) = x.at(r, c) * sigmoid(x.at(r, half + c));
  if (cache) cache->x = x;
  return y;
}

Tensor glu_backward(const Tensor& dy, const GluCache& cache) {
  const Tensor& x = cache.x;
  const std::size_t rows = x.dim(0), half = x.dim(1) / 2;
  Tensor dx({rows, x.dim(1)});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < half; ++c) {
      const double a = x.at(r, c);
      const double s = sigmoid(x.at(r, half + c));
      const double g = dy.at(r, c);
      dx.at(r, c) = g * s;
      dx.at(r, half + c) = g * a * s * (1.0 - s);
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// LayerNorm

Tensor layer_norm_forward(const Tensor& x, const LayerNormParams& p,
                          LayerNormCache* cache) {
  constexpr double kEps = 1e-5;
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  if (p.gain.size() != cols)
    throw ShapeMismatchError("layer_norm: gain size does not match input");
  Tensor y({rows, cols});
  Tensor xhat({rows, cols});
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mean += x.at(r, c);
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = x.at(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    const double is = 1.0 / std::sqrt(var + kEps);
    inv_std[r] = is;
    for (std::size_t c = 0; c < cols; ++c) {
      const double xh = (x.at(r, c) - mean) * is;
      xhat.at(r, c) = xh;
      y.at(r, c) = p.gain[c] * xh + p.bias[c];
    }
  }
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Tensor layer_norm_backward(const Tensor& dy, const LayerNormParams& p,
                           const LayerNormCache& cache,
                           LayerNormParams& grads) {
  const Tensor& xhat = cache.xhat;
  const std::size_t rows = dy.dim(0), cols = dy.dim(1);
  Tensor dx({rows, cols});
  for (std::size_t r = 0; r < rows; ++r) {
    double sum_g = 0.0, sum_gx = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double g = dy.at(r, c) * p.gain[c];
      sum_g += g;
      sum_gx += g * xhat.at(r, c);
      grads.gain[c] += dy.at(r, c) * xhat.at(r, c);
      grads.bias[c] += dy.at(r, c);
    }
    const double inv_n = 1.0 / static_cast<double>(cols);
    for (std::size_t c = 0; c < cols; ++c) {
      const double g = dy.at(r, c) * p.gain[c];
      dx.at(r, c) = cache.inv_std[r] *
                    (g - inv_n * sum_g - xhat.at(r, c) * inv_n * sum_gx);
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Softmax / ReLU / Dropout

void softmax_rows(Tensor& x) {
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  for (std::size_t r = 0; r < rows; ++r) {
    double max_v = x.at(r, 0);
    for (std::size_t c = 1; c < cols; ++c) max_v = std::max(max_v, x.at(r, c));
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double e = std::exp(x.at(r, c) - max_v);
      x.at(r, c) = e;
      sum += e;
    }
    for (std::size_t c = 0; c < cols; ++c) x.at(r, c) /= sum;
  }
}

Tensor relu_forward(const Tensor& x, ReluCache* cache) {
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::max(0.0, y[i]);
  if (cache) cache->x = x;
  return y;
}

Tensor relu_backward(const Tensor& dy, const ReluCache& cache) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (cache.x[i] <= 0.0) dx[i] = 0.0;
  return dx;
}

Tensor dropout_forward(const Tensor& x, double p, std::mt19937_64& rng,
                       DropoutCache* cache) {
  if (p <= 0.0) {
    if (cache) {
      cache->mask = Tensor(x.shape());
      cache->mask.fill(1.0);
    }
    return x;
  }
  const double keep_scale = 1.0 / (1.0 - p);
  Tensor mask(x.shape());
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = static_cast<double>(rng() >> 11) / 9007199254740992.0;
    const double m = u < p ? 0.0 : keep_scale;
    mask[i] = m;
    y[i] = x[i] * m;
  }
  if (cache) cache->mask = std::move(mask);
  return y;
}

Tensor dropout_backward(const Tensor& dy, const DropoutCache& cache) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= cache.mask[i];
  return dx;
}

// ---------------------------------------------------------------------------
// Multi-head attention

MhaParams make_mha(int embed_dim, int heads) {
  const std::size_t e = static_cast<std::size_t>(embed_dim);
  MhaParams p;
  p.heads = heads;
  for (LinearParams* lp : {&p.wq, &p.wk, &p.wv, &p.wo}) {
    lp->w = Tensor({e, e});
    lp->b = Tensor({e});
  }
  return p;
}

Tensor mha_forward(const Tensor& q_in, const Tensor& k_in, const Tensor& v_in,
                   const MhaParams& p, bool causal, const Tensor* additive_mask,
                   MhaCache* cache) {
  const std::size_t e = p.wq.w.dim(0);
  if (q_in.dim(1) != e || k_in.dim(1) != e || v_in.dim(1) != e)
    throw ShapeMismatchError("mha_forward: embed dim mismatch");
  if (k_in.dim(0) != v_in.dim(0))
    throw ShapeMismatchError("mha_forward: k/v time axes differ");
  if (e % static_cast<std::size_t>(p.heads) != 0)
    throw IndivisibleHeadsError("embed dim " + std::to_string(e) +
                                " not divisible by " +
                                std::to_string(p.heads) + " heads");
  const std::size_t tq = q_in.dim(0), tk = k_in.dim(0);
  const std::size_t dh = e / static_cast<std::size_t>(p.heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Tensor q({tq, e}), k({tk, e}), v({tk, e});
  gemm(q_in, false, p.wq.w, true, q);
  add_row_bias(q, p.wq.b);
  gemm(k_in, false, p.wk.w, true, k);
  add_row_bias(k, p.wk.b);
  gemm(v_in, false, p.wv.w, true, v);
  add_row_bias(v, p.wv.b);

  Tensor attn({static_cast<std::size_t>(p.heads), tq, tk});
  Tensor context({tq, e});
  Tensor qh({tq, dh}), kh({tk, dh}), vh({tk, dh});
  Tensor scores({tq, tk}), ctxh({tq, dh});
  for (int h = 0; h < p.heads; ++h) {
    const std::size_t off = static_cast<std::size_t>(h) * dh;
    for (std::size_t t = 0; t < tq; ++t)
      for (std::size_t c = 0; c < dh; ++c) qh.at(t, c) = q.at(t, off + c);
    for (std::size_t t = 0; t < tk; ++t)
      for (std::size_t c = 0; c < dh; ++c) {
        kh.at(t, c) = k.at(t, off + c);
        vh.at(t, c) = v.at(t, off + c);
      }
    gemm(qh, false, kh, true, scores);
    scale_inplace(scores, scale);
    if (additive_mask) {
      require_same_shape(scores, *additive_mask, "mha additive mask");
      add_inplace(scores, *additive_mask);
    }
    if (causal) {
      for (std::size_t i = 0; i < tq; ++i)
        for (std::size_t j = i + 1; j < tk; ++j) scores.at(i, j) = -1e30;
    }
    softmax_rows(scores);
    for (std::size_t i = 0; i < tq; ++i)
      for (std::size_t j = 0; j < tk; ++j)
        attn.at(static_cast<std::size_t>(h), i, j) = scores.at(i, j);
    gemm(scores, false, vh, false, ctxh);
    for (std::size_t t = 0; t < tq; ++t)
      for (std::size_t c = 0; c < dh; ++c) context.at(t, off + c) = ctxh.at(t, c);
  }

  Tensor y({tq, e});
  gemm(context, false, p.wo.w, true, y);
  add_row_bias(y, p.wo.b);

  if (cache) {
    cache->q_in = q_in;
    cache->k_in = k_in;
    cache->v_in = v_in;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->attn = std::move(attn);
    cache->context = std::move(context);
  }
  return y;
}

void mha_backward(const Tensor& dy, const MhaParams& p, const MhaCache& cache,
                  MhaParams& grads, Tensor& dq_in, Tensor& dk_in,
                  Tensor& dv_in) {
  const std::size_t e = p.wq.w.dim(0);
  const std::size_t tq = cache.q.dim(0), tk = cache.k.dim(0);
  const std::size_t dh = e / static_cast<std::size_t>(p.heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // Output projection.
  gemm(dy, true, cache.context, false, grads.wo.w, /*accumulate=*/true);
  for (std::size_t r = 0; r < tq; ++r)
    for (std::size_t c = 0; c < e; ++c) grads.wo.b[c] += dy.at(r, c);
  Tensor dcontext({tq, e});
  gemm(dy, false, p.wo.w, false, dcontext);

  Tensor dq({tq, e}), dk({tk, e}), dv({tk, e});
  Tensor qh({tq, dh}), kh({tk, dh}), vh({tk, dh});
  Tensor dctxh({tq, dh}), attn_h({tq, tk}), dattn({tq, tk}), dscores({tq, tk});
  Tensor dqh({tq, dh}), dkh({tk, dh}), dvh({tk, dh});
  for (int h = 0; h < p.heads; ++h) {
    const std::size_t off = static_cast<std::size_t>(h) * dh;
    for (std::size_t t = 0; t < tq; ++t)
      for (std::size_t c = 0; c < dh; ++c) {
        qh.at(t, c) = cache.q.at(t, off + c);
        dctxh.at(t, c) = dcontext.at(t, off + c);
      }
    for (std::size_t t = 0; t < tk; ++t)
      for (std::size_t c = 0; c < dh; ++c) {
        kh.at(t, c) = cache.k.at(t, off + c);
        vh.at(t, c) = cache.v.at(t, off + c);
      }
    for (std::size_t i = 0; i < tq; ++i)
      for (std::size_t j = 0; j < tk; ++j)
        attn_h.at(i, j) = cache.attn.at(static_cast<std::size_t>(h), i, j);

    gemm(dctxh, false, vh, true, dattn);       // dA = dCtx V^T
    gemm(attn_h, true, dctxh, false, dvh);     // dV = A^T dCtx

    // Softmax backward: dS = A ⊙ (dA - rowsum(dA ⊙ A)).
    for (std::size_t i = 0; i < tq; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < tk; ++j)
        dot += dattn.at(i, j) * attn_h.at(i, j);
      for (std::size_t j = 0; j < tk; ++j)
        dscores.at(i, j) = attn_h.at(i, j) * (dattn.at(i, j) - dot);
    }
    scale_inplace(dscores, scale);
    gemm(dscores, false, kh, false, dqh);
    gemm(dscores, true, qh, false, dkh);

    for (std::size_t t = 0; t < tq; ++t)
      for (std::size_t c = 0; c < dh; ++c) dq.at(t, off + c) = dqh.at(t, c);
    for (std::size_t t = 0; t < tk; ++t)
      for (std::size_t c = 0; c < dh; ++c) {
        dk.at(t, off + c) = dkh.at(t, c);
        dv.at(t, off + c) = dvh.at(t, c);
      }
  }

  // Projection backward into the three inputs.
  gemm(dq, true, cache.q_in, false, grads.wq.w, /*accumulate=*/true);
  gemm(dk, true, cache.k_in, false, grads.wk.w, /*accumulate=*/true);
  gemm(dv, true, cache.v_in, false, grads.wv.w, /*accumulate=*/true);
  for (std::size_t r = 0; r < tq; ++r)
    for (std::size_t c = 0; c < e; ++c) grads.wq.b[c] += dq.at(r, c);
  for (std::size_t r = 0; r < tk; ++r)
    for (std::size_t c = 0; c < e; ++c) {
      grads.wk.b[c] += dk.at(r, c);
      grads.wv.b[c] += dv.at(r, c);
    }
  dq_in = Tensor({tq, e});
  dk_in = Tensor({tk, e});
  dv_in = Tensor({tk, e});
  gemm(dq, false, p.wq.w, false, dq_in);
  gemm(dk, false, p.wk.w, false, dk_in);
  gemm(dv, false, p.wv.w, false, dv_in);
}

// ---------------------------------------------------------------------------
// Positional encoding / embedding

Tensor sinusoidal_pe(std::size_t t_steps, std::size_t embed_dim) {
  if (embed_dim % 2 != 0)
    throw OddChannelsError("sinusoidal_pe needs an even embedding size");
  Tensor pe({t_steps, embed_dim});
  for (std::size_t t = 0; t < t_steps; ++t) {
    for (std::size_t i = 0; i < embed_dim / 2; ++i) {
      const double rate =
          std::pow(10000.0, 2.0 * static_cast<double>(i) /
                                static_cast<double>(embed_dim));
      pe.at(t, 2 * i) = std::sin(static_cast<double>(t) / rate);
      pe.at(t, 2 * i + 1) = std::cos(static_cast<double>(t) / rate);
    }
  }
  return pe;
}

Tensor embedding_forward(const std::vector<int>& ids, const Tensor& table) {
  const std::size_t e = table.dim(1);
  Tensor y({ids.size(), e});
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const int id = ids[t];
    if (id < 0 || static_cast<std::size_t>(id) >= table.dim(0))
      throw InvalidTargetError("embedding id " + std::to_string(id) +
                               " out of range");
    for (std::size_t c = 0; c < e; ++c)
      y.at(t, c) = table.at(static_cast<std::size_t>(id), c);
  }
  return y;
}

void embedding_backward(const Tensor& dy, const std::vector<int>& ids,
                        Tensor& dtable) {
  const std::size_t e = dtable.dim(1);
  for (std::size_t t = 0; t < ids.size(); ++t)
    for (std::size_t c = 0; c < e; ++c)
      dtable.at(static_cast<std::size_t>(ids[t]), c) += dy.at(t, c);
}

// ---------------------------------------------------------------------------
// Label-smoothed cross entropy

CeResult label_smoothed_ce_sum(const Tensor& logits,
                               const std::vector<int>& targets,
                               double smoothing, int pad_id) {
  const std::size_t t_steps = logits.dim(0), vocab = logits.dim(1);
  if (targets.size() != t_steps)
    throw ShapeMismatchError("label_smoothed_ce: target length " +
                             std::to_string(targets.size()) + " vs logits " +
                             logits.shape_str());
  CeResult res;
  res.dlogits = Tensor({t_steps, vocab});

  std::vector<double> logp(vocab);
  for (std::size_t t = 0; t < t_steps; ++t) {
    const int tgt = targets[t];
    if (tgt < 0 || static_cast<std::size_t>(tgt) >= vocab)
      throw InvalidTargetError("target id " + std::to_string(tgt) +
                               " outside vocabulary of " +
                               std::to_string(vocab));
    if (tgt == pad_id) continue;
    ++res.n_tokens;

    // log-softmax with max subtraction
    double max_v = logits.at(t, 0);
    for (std::size_t v = 1; v < vocab; ++v)
      max_v = std::max(max_v, logits.at(t, v));
    double sum = 0.0;
    for (std::size_t v = 0; v < vocab; ++v)
      sum += std::exp(logits.at(t, v) - max_v);
    const double log_sum = std::log(sum) + max_v;
    for (std::size_t v = 0; v < vocab; ++v) logp[v] = logits.at(t, v) - log_sum;

    const double uniform = smoothing / static_cast<double>(vocab);
    double loss_t = 0.0;
    for (std::size_t v = 0; v < vocab; ++v) {
      const double q =
          uniform + (static_cast<int>(v) == tgt ? 1.0 - smoothing : 0.0);
      loss_t -= q * logp[v];
      res.dlogits.at(t, v) = std::exp(logp[v]) - q;
    }
    res.loss += loss_t;
  }
  return res;
}

CeResult label_smoothed_ce(const Tensor& logits, const std::vector<int>& targets,
                           double smoothing, int pad_id) {
  CeResult res = label_smoothed_ce_sum(logits, targets, smoothing, pad_id);
  if (res.n_tokens == 0) {
    res.loss = 0.0;
    res.dlogits.zero();
    return res;
  }
  res.loss /= static_cast<double>(res.n_tokens);
  scale_inplace(res.dlogits, 1.0 / static_cast<double>(res.n_tokens));
  return res;
}

}  // namespace vqasr
