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

#include "vqasr/frontend.hpp"

#include <algorithm>

namespace vqasr {

void FrontEndConfig::validate() const {
  if (n_spectral < 1) throw ConfigError("front-end needs n_spectral >= 1");
  if (n_prosodic < 0) throw ConfigError("n_prosodic must be >= 0");
  if (variant == FrontEndVariant::vq) {
    if (n_prosodic < 1)
      throw ConfigError("vq front-end requires at least one prosodic channel");
    if (k_channels + l_channels != out_channels)
      throw ConfigError("vq front-end requires K + L == O (" +
                        std::to_string(k_channels) + " + " +
                        std::to_string(l_channels) +
                        " != " + std::to_string(out_channels) + ")");
  }
  if (out_channels < 1 || p_a < 1 || p_b < 1)
    throw ConfigError("front-end channel widths must be positive");
}

int FrontEndConfig::out_length(int t) const {
  auto once = [&](int n) { return (n + 2 * padding - kernel_size) / stride + 1; };
  return once(once(t));
}

FrontEndParams make_frontend(const FrontEndConfig& cfg) {
  cfg.validate();
  FrontEndParams p;
  p.cfg = cfg;
  const int k = cfg.kernel_size, s = cfg.stride, pad = cfg.padding;
  if (cfg.variant == FrontEndVariant::plain) {
    p.conv1 = make_conv1d(cfg.input_channels(), 2 * cfg.p_a, k, s, pad);
    p.conv2 = make_conv1d(cfg.p_a, 2 * cfg.out_channels, k, s, pad);
  } else {
    p.a1 = make_conv1d(cfg.n_spectral, 2 * cfg.p_a, k, s, pad);
    p.a2 = make_conv1d(cfg.p_a, 2 * cfg.k_channels, k, s, pad);
    p.b1 = make_conv1d(cfg.n_prosodic, 2 * cfg.p_b, k, s, pad);
    p.b2 = make_conv1d(cfg.p_b, 2 * cfg.l_channels, k, s, pad);
  }
  return p;
}

void init_frontend(FrontEndParams& params, std::mt19937_64& rng) {
  auto init_conv = [&](Conv1dParams& c) {
    if (c.weight.empty()) return;
    init_uniform_fan_in(
        c.weight, static_cast<std::size_t>(c.in_channels) * c.kernel_size, rng);
    c.bias.zero();
  };
  init_conv(params.conv1);
  init_conv(params.conv2);
  init_conv(params.a1);
  init_conv(params.a2);
  init_conv(params.b1);
  init_conv(params.b2);
}

std::size_t frontend_parameter_count(const FrontEndConfig& cfg) {
  cfg.validate();
  const std::size_t k = static_cast<std::size_t>(cfg.kernel_size);
  auto conv_params = [&](std::size_t cin, std::size_t cout) {
    return cout * cin * k + cout;
  };
  if (cfg.variant == FrontEndVariant::plain) {
    return conv_params(static_cast<std::size_t>(cfg.input_channels()),
                       2 * static_cast<std::size_t>(cfg.p_a)) +
           conv_params(static_cast<std::size_t>(cfg.p_a),
                       2 * static_cast<std::size_t>(cfg.out_channels));
  }
  return conv_params(static_cast<std::size_t>(cfg.n_spectral),
                     2 * static_cast<std::size_t>(cfg.p_a)) +
         conv_params(static_cast<std::size_t>(cfg.p_a),
                     2 * static_cast<std::size_t>(cfg.k_channels)) +
         conv_params(static_cast<std::size_t>(cfg.n_prosodic),
                     2 * static_cast<std::size_t>(cfg.p_b)) +
         conv_params(static_cast<std::size_t>(cfg.p_b),
                     2 * static_cast<std::size_t>(cfg.l_channels));
}

namespace {

// Inclusive input span feeding output step j after two convolutions.
std::vector<std::pair<int, int>> build_frame_map(const FrontEndConfig& cfg,
                                                 int t_in, int t_out) {
  std::vector<std::pair<int, int>> map(static_cast<std::size_t>(t_out));
  const int k = cfg.kernel_size, s = cfg.stride, pad = cfg.padding;
  for (int j = 0; j < t_out; ++j) {
    // through the second conv
    int lo1 = j * s - pad;
    int hi1 = lo1 + k - 1;
    // through the first conv
    int lo0 = lo1 * s - pad;
    int hi0 = hi1 * s - pad + k - 1;
    map[static_cast<std::size_t>(j)] = {std::clamp(lo0, 0, t_in - 1),
                                        std::clamp(hi0, 0, t_in - 1)};
  }
  return map;
}

void add_positional_encoding(Tensor& features) {
  const Tensor pe = sinusoidal_pe(features.dim(0), features.dim(1));
  add_inplace(features, pe);
}

}  // namespace

FrontEndOutput plain_frontend(const Tensor& spectral_plus_prosody,
                              const FrontEndParams& params,
                              FrontEndCache* cache) {
  const FrontEndConfig& cfg = params.cfg;
  if (cfg.variant != FrontEndVariant::plain)
    throw ConfigError("plain_frontend called with vq parameters");
  if (spectral_plus_prosody.dim(1) !=
      static_cast<std::size_t>(cfg.input_channels()))
    throw ShapeMismatchError("plain front-end expects " +
                             std::to_string(cfg.input_channels()) +
                             " channels, got " +
                             spectral_plus_prosody.shape_str());

  FrontEndCache local;
  FrontEndCache* c = cache ? cache : &local;
  Tensor h = conv1d_forward(spectral_plus_prosody, params.conv1, &c->c1);
  h = glu_forward(h, &c->g1);
  h = conv1d_forward(h, params.conv2, &c->c2);
  h = glu_forward(h, &c->g2);

  FrontEndOutput out;
  out.frame_map = build_frame_map(
      cfg, static_cast<int>(spectral_plus_prosody.dim(0)),
      static_cast<int>(h.dim(0)));
  add_positional_encoding(h);
  out.features = std::move(h);
  return out;
}

FrontEndOutput vq_frontend(const Tensor& spectral, const Tensor& prosody,
                           const FrontEndParams& params, FrontEndCache* cache) {
  const FrontEndConfig& cfg = params.cfg;
  if (cfg.variant != FrontEndVariant::vq)
    throw ConfigError("vq_frontend called with plain parameters");
  if (spectral.dim(0) != prosody.dim(0))
    throw ShapeMismatchError("vq front-end inputs differ in time: " +
                             spectral.shape_str() + " vs " +
                             prosody.shape_str());
  if (spectral.dim(1) != static_cast<std::size_t>(cfg.n_spectral) ||
      prosody.dim(1) != static_cast<std::size_t>(cfg.n_prosodic))
    throw ShapeMismatchError("vq front-end channel mismatch");

  FrontEndCache local;
  FrontEndCache* c = cache ? cache : &local;
  Tensor ha = conv1d_forward(spectral, params.a1, &c->a1);
  ha = glu_forward(ha, &c->ga1);
  ha = conv1d_forward(ha, params.a2, &c->a2);
  ha = glu_forward(ha, &c->ga2);

  Tensor hb = conv1d_forward(prosody, params.b1, &c->b1);
  hb = glu_forward(hb, &c->gb1);
  hb = conv1d_forward(hb, params.b2, &c->b2);
  hb = glu_forward(hb, &c->gb2);

  if (ha.dim(0) != hb.dim(0))
    throw ShapeMismatchError("vq front-end blocks emitted different lengths");

  Tensor merged({ha.dim(0), ha.dim(1) + hb.dim(1)});
  for (std::size_t t = 0; t < ha.dim(0); ++t) {
    for (std::size_t ch = 0; ch < ha.dim(1); ++ch)
      merged.at(t, ch) = ha.at(t, ch);
    for (std::size_t ch = 0; ch < hb.dim(1); ++ch)
      merged.at(t, ha.dim(1) + ch) = hb.at(t, ch);
  }

  FrontEndOutput out;
  out.frame_map = build_frame_map(cfg, static_cast<int>(spectral.dim(0)),
                                  static_cast<int>(merged.dim(0)));
  add_positional_encoding(merged);
  out.features = std::move(merged);
  return out;
}

Tensor plain_frontend_backward(const Tensor& dout, const FrontEndParams& params,
                               const FrontEndCache& cache,
                               FrontEndParams& grads) {
  Tensor d = glu_backward(dout, cache.g2);
  d = conv1d_backward(d, params.conv2, cache.c2, grads.conv2);
  d = glu_backward(d, cache.g1);
  return conv1d_backward(d, params.conv1, cache.c1, grads.conv1);
}

std::pair<Tensor, Tensor> vq_frontend_backward(const Tensor& dout,
                                               const FrontEndParams& params,
                                               const FrontEndCache& cache,
                                               FrontEndParams& grads) {
  const std::size_t t_out = dout.dim(0);
  const std::size_t ka = static_cast<std::size_t>(params.cfg.k_channels);
  const std::size_t lb = static_cast<std::size_t>(params.cfg.l_channels);
  Tensor da({t_out, ka}), db({t_out, lb});
  for (std::size_t t = 0; t < t_out; ++t) {
    for (std::size_t ch = 0; ch < ka; ++ch) da.at(t, ch) = dout.at(t, ch);
    for (std::size_t ch = 0; ch < lb; ++ch) db.at(t, ch) = dout.at(t, ka + ch);
  }

  Tensor d = glu_backward(da, cache.ga2);
  d = conv1d_backward(d, params.a2, cache.a2, grads.a2);
  d = glu_backward(d, cache.ga1);
  Tensor dspec = conv1d_backward(d, params.a1, cache.a1, grads.a1);

  d = glu_backward(db, cache.gb2);
  d = conv1d_backward(d, params.b2, cache.b2, grads.b2);
  d = glu_backward(d, cache.gb1);
  Tensor dpros = conv1d_backward(d, params.b1, cache.b1, grads.b1);

  return {std::move(dspec), std::move(dpros)};
}

}  // namespace vqasr
