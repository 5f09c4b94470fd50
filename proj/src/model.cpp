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

#include "vqasr/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "vqasr/feature_matrix.hpp"

namespace vqasr {

std::vector<int> Vocab::encode(const std::string& text) const {
  std::vector<int> ids;
  ids.reserve(text.size());
  for (char raw : text) {
    const char c = static_cast<char>(
        std::tolower(static_cast<unsigned char>(raw)));
    if (c == ' ')
      ids.push_back(3);
    else if (c == '\'')
      ids.push_back(4);
    else if (c >= 'a' && c <= 'z')
      ids.push_back(5 + (c - 'a'));
  }
  return ids;
}

std::string Vocab::decode(const std::vector<int>& ids) const {
  std::string text;
  for (int id : ids) {
    if (id == 3)
      text += ' ';
    else if (id == 4)
      text += '\'';
    else if (id >= 5 && id <= 30)
      text += static_cast<char>('a' + (id - 5));
  }
  return text;
}

void ModelConfig::validate() const {
  frontend.validate();
  if (embed_dim != frontend.out_channels)
    throw ConfigError("embed_dim must equal the front-end output width");
  if (embed_dim % heads != 0)
    throw ConfigError("embed_dim must be divisible by heads");
  if (embed_dim % 2 != 0)
    throw ConfigError("embed_dim must be even for the positional encoding");
  if (encoder_layers < 0 || decoder_layers < 0)
    throw ConfigError("layer counts must be non-negative");
  if (vocab_size < 4) throw ConfigError("vocabulary too small");
  if (dropout < 0.0 || dropout >= 1.0)
    throw ConfigError("dropout must be in [0, 1)");
}

namespace {

LinearParams make_linear(std::size_t out, std::size_t in) {
  LinearParams p;
  p.w = Tensor({out, in});
  p.b = Tensor({out});
  return p;
}

LayerNormParams make_layer_norm(std::size_t dim) {
  LayerNormParams p;
  p.gain = Tensor({dim});
  p.gain.fill(1.0);
  p.bias = Tensor({dim});
  return p;
}

}  // namespace

ModelParams make_model(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t e = static_cast<std::size_t>(cfg.embed_dim);
  const std::size_t f = static_cast<std::size_t>(cfg.ffn_dim);
  ModelParams p;
  p.cfg = cfg;
  p.frontend = make_frontend(cfg.frontend);
  p.encoder.resize(static_cast<std::size_t>(cfg.encoder_layers));
  for (auto& layer : p.encoder) {
    layer.ln1 = make_layer_norm(e);
    layer.ln2 = make_layer_norm(e);
    layer.self_attn = make_mha(cfg.embed_dim, cfg.heads);
    layer.ff1 = make_linear(f, e);
    layer.ff2 = make_linear(e, f);
  }
  p.encoder_ln = make_layer_norm(e);
  p.decoder.resize(static_cast<std::size_t>(cfg.decoder_layers));
  for (auto& layer : p.decoder) {
    layer.ln1 = make_layer_norm(e);
    layer.ln2 = make_layer_norm(e);
    layer.ln3 = make_layer_norm(e);
    layer.self_attn = make_mha(cfg.embed_dim, cfg.heads);
    layer.cross_attn = make_mha(cfg.embed_dim, cfg.heads);
    layer.ff1 = make_linear(f, e);
    layer.ff2 = make_linear(e, f);
  }
  p.decoder_ln = make_layer_norm(e);
  p.embedding = Tensor({static_cast<std::size_t>(cfg.vocab_size), e});
  return p;
}

ModelParams make_gradient_buffer(const ModelConfig& cfg) {
  ModelParams buffer = make_model(cfg);
  for_each_tensor(buffer, [](const std::string&, Tensor& t) { t.zero(); });
  return buffer;
}

void init_model(ModelParams& params, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  init_frontend(params.frontend, rng);
  auto init_linear = [&](LinearParams& lp) {
    init_uniform_fan_in(lp.w, lp.w.dim(1), rng);
    lp.b.zero();
  };
  auto init_mha = [&](MhaParams& mp) {
    init_linear(mp.wq);
    init_linear(mp.wk);
    init_linear(mp.wv);
    init_linear(mp.wo);
  };
  for (auto& layer : params.encoder) {
    init_mha(layer.self_attn);
    init_linear(layer.ff1);
    init_linear(layer.ff2);
  }
  for (auto& layer : params.decoder) {
    init_mha(layer.self_attn);
    init_mha(layer.cross_attn);
    init_linear(layer.ff1);
    init_linear(layer.ff2);
  }
  init_uniform_fan_in(params.embedding, params.embedding.dim(1), rng);
}

void for_each_tensor(
    ModelParams& params,
    const std::function<void(const std::string&, Tensor&)>& fn) {
  auto visit_linear = [&](const std::string& prefix, LinearParams& lp) {
    fn(prefix + ".weight", lp.w);
    fn(prefix + ".bias", lp.b);
  };
  auto visit_conv = [&](const std::string& prefix, Conv1dParams& cp) {
    fn(prefix + ".weight", cp.weight);
    fn(prefix + ".bias", cp.bias);
  };
  auto visit_ln = [&](const std::string& prefix, LayerNormParams& ln) {
    fn(prefix + ".gain", ln.gain);
    fn(prefix + ".bias", ln.bias);
  };
  auto visit_mha = [&](const std::string& prefix, MhaParams& mp) {
    visit_linear(prefix + ".wq", mp.wq);
    visit_linear(prefix + ".wk", mp.wk);
    visit_linear(prefix + ".wv", mp.wv);
    visit_linear(prefix + ".wo", mp.wo);
  };

  if (params.cfg.frontend.variant == FrontEndVariant::plain) {
    visit_conv("frontend.plain.conv1", params.frontend.conv1);
    visit_conv("frontend.plain.conv2", params.frontend.conv2);
  } else {
    visit_conv("frontend.A.conv1", params.frontend.a1);
    visit_conv("frontend.A.conv2", params.frontend.a2);
    visit_conv("frontend.B.conv1", params.frontend.b1);
    visit_conv("frontend.B.conv2", params.frontend.b2);
  }
  for (std::size_t l = 0; l < params.encoder.size(); ++l) {
    const std::string prefix = "encoder." + std::to_string(l);
    auto& layer = params.encoder[l];
    visit_ln(prefix + ".ln1", layer.ln1);
    visit_mha(prefix + ".self_attn", layer.self_attn);
    visit_ln(prefix + ".ln2", layer.ln2);
    visit_linear(prefix + ".ff1", layer.ff1);
    visit_linear(prefix + ".ff2", layer.ff2);
  }
  visit_ln("encoder_ln", params.encoder_ln);
  for (std::size_t l = 0; l < params.decoder.size(); ++l) {
    const std::string prefix = "decoder." + std::to_string(l);
    auto& layer = params.decoder[l];
    visit_ln(prefix + ".ln1", layer.ln1);
    visit_mha(prefix + ".self_attn", layer.self_attn);
    visit_ln(prefix + ".ln2", layer.ln2);
    visit_mha(prefix + ".cross_attn", layer.cross_attn);
    visit_ln(prefix + ".ln3", layer.ln3);
    visit_linear(prefix + ".ff1", layer.ff1);
    visit_linear(prefix + ".ff2", layer.ff2);
  }
  visit_ln("decoder_ln", params.decoder_ln);
  fn("embedding", params.embedding);
}

std::vector<ParamRef> collect_params(ModelParams& values, ModelParams* grads) {
  std::vector<ParamRef> out;
  for_each_tensor(values, [&](const std::string& name, Tensor& t) {
    out.push_back({name, &t, nullptr});
  });
  if (grads) {
    std::size_t i = 0;
    for_each_tensor(*grads, [&](const std::string& name, Tensor& t) {
      if (i >= out.size() || out[i].name != name)
        throw ShapeMismatchError("parameter/gradient walk order diverged");
      out[i].grad = &t;
      ++i;
    });
  }
  return out;
}

std::size_t count_parameters(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t e = static_cast<std::size_t>(cfg.embed_dim);
  const std::size_t f = static_cast<std::size_t>(cfg.ffn_dim);
  const std::size_t v = static_cast<std::size_t>(cfg.vocab_size);

  const std::size_t linear_ef = f * e + f;  // e -> f
  const std::size_t linear_fe = e * f + e;  // f -> e
  const std::size_t mha = 4 * (e * e + e);
  const std::size_t ln = 2 * e;

  const std::size_t enc_layer = mha + 2 * ln + linear_ef + linear_fe;
  const std::size_t dec_layer = 2 * mha + 3 * ln + linear_ef + linear_fe;

  std::size_t total = frontend_parameter_count(cfg.frontend);
  total += static_cast<std::size_t>(cfg.encoder_layers) * enc_layer + ln;
  total += static_cast<std::size_t>(cfg.decoder_layers) * dec_layer + ln;
  total += v * e;  // embedding (output projection is tied)
  return total;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

Tensor split_columns(const Tensor& x, std::size_t from, std::size_t to) {
  Tensor out({x.dim(0), to - from});
  for (std::size_t t = 0; t < x.dim(0); ++t)
    for (std::size_t c = from; c < to; ++c) out.at(t, c - from) = x.at(t, c);
  return out;
}

Tensor maybe_dropout(const Tensor& x, double p, bool train,
                     std::mt19937_64* rng, DropoutCache* cache) {
  if (!train) return x;
  return dropout_forward(x, p, *rng, cache);
}

Tensor encoder_stack(const ModelParams& params, const Tensor& frontend_out,
                     bool train, std::mt19937_64* rng, UtteranceCache* cache) {
  const double p = params.cfg.dropout;
  Tensor x = maybe_dropout(frontend_out, p, train, rng,
                           cache ? &cache->frontend_drop : nullptr);
  if (cache) cache->enc.resize(params.encoder.size());
  for (std::size_t l = 0; l < params.encoder.size(); ++l) {
    const auto& layer = params.encoder[l];
    EncoderLayerCache* c = cache ? &cache->enc[l] : nullptr;
    Tensor a = layer_norm_forward(x, layer.ln1, c ? &c->ln1 : nullptr);
    Tensor sa = mha_forward(a, a, a, layer.self_attn, /*causal=*/false,
                            nullptr, c ? &c->attn : nullptr);
    sa = maybe_dropout(sa, p, train, rng, c ? &c->drop1 : nullptr);
    add_inplace(x, sa);
    Tensor fin = layer_norm_forward(x, layer.ln2, c ? &c->ln2 : nullptr);
    Tensor h = linear_forward(fin, layer.ff1, c ? &c->ff1 : nullptr);
    h = relu_forward(h, c ? &c->relu : nullptr);
    h = linear_forward(h, layer.ff2, c ? &c->ff2 : nullptr);
    h = maybe_dropout(h, p, train, rng, c ? &c->drop2 : nullptr);
    add_inplace(x, h);
  }
  return layer_norm_forward(x, params.encoder_ln,
                            cache ? &cache->enc_ln : nullptr);
}

Tensor decoder_stack(const ModelParams& params, const Tensor& memory,
                     const std::vector<int>& dec_input, bool train,
                     std::mt19937_64* rng, UtteranceCache* cache) {
  const double p = params.cfg.dropout;
  const std::size_t e = static_cast<std::size_t>(params.cfg.embed_dim);
  Tensor x = embedding_forward(dec_input, params.embedding);
  scale_inplace(x, std::sqrt(static_cast<double>(e)));
  add_inplace(x, sinusoidal_pe(dec_input.size(), e));

  if (cache) {
    cache->dec.resize(params.decoder.size());
    cache->dec_input = dec_input;
  }
  for (std::size_t l = 0; l < params.decoder.size(); ++l) {
    const auto& layer = params.decoder[l];
    DecoderLayerCache* c = cache ? &cache->dec[l] : nullptr;
    Tensor a = layer_norm_forward(x, layer.ln1, c ? &c->ln1 : nullptr);
    Tensor sa = mha_forward(a, a, a, layer.self_attn, /*causal=*/true, nullptr,
                            c ? &c->self_attn : nullptr);
    sa = maybe_dropout(sa, p, train, rng, c ? &c->drop1 : nullptr);
    add_inplace(x, sa);
    Tensor q = layer_norm_forward(x, layer.ln2, c ? &c->ln2 : nullptr);
    Tensor ca = mha_forward(q, memory, memory, layer.cross_attn,
                            /*causal=*/false, nullptr,
                            c ? &c->cross_attn : nullptr);
    ca = maybe_dropout(ca, p, train, rng, c ? &c->drop2 : nullptr);
    add_inplace(x, ca);
    Tensor fin = layer_norm_forward(x, layer.ln3, c ? &c->ln3 : nullptr);
    Tensor h = linear_forward(fin, layer.ff1, c ? &c->ff1 : nullptr);
    h = relu_forward(h, c ? &c->relu : nullptr);
    h = linear_forward(h, layer.ff2, c ? &c->ff2 : nullptr);
    h = maybe_dropout(h, p, train, rng, c ? &c->drop3 : nullptr);
    add_inplace(x, h);
  }
  return layer_norm_forward(x, params.decoder_ln,
                            cache ? &cache->dec_ln : nullptr);
}

Tensor frontend_forward(const ModelParams& params, const Tensor& features,
                        UtteranceCache* cache) {
  const FrontEndConfig& fc = params.cfg.frontend;
  if (features.dim(1) != static_cast<std::size_t>(fc.input_channels()))
    throw ShapeMismatchError(
        "features have " + std::to_string(features.dim(1)) +
        " channels, front-end expects " + std::to_string(fc.input_channels()));
  if (fc.variant == FrontEndVariant::plain) {
    FrontEndOutput fe = plain_frontend(features, params.frontend,
                                       cache ? &cache->frontend : nullptr);
    return std::move(fe.features);
  }
  const Tensor spectral =
      split_columns(features, 0, static_cast<std::size_t>(fc.n_spectral));
  const Tensor prosody =
      split_columns(features, static_cast<std::size_t>(fc.n_spectral),
                    features.dim(1));
  FrontEndOutput fe = vq_frontend(spectral, prosody, params.frontend,
                                  cache ? &cache->frontend : nullptr);
  return std::move(fe.features);
}

}  // namespace

Tensor model_forward_utterance(const ModelParams& params, const Tensor& features,
                               const std::vector<int>& dec_input, bool train,
                               std::mt19937_64* rng, UtteranceCache* cache) {
  if (dec_input.empty() || dec_input.front() != Vocab::bos_id)
    throw InvalidTargetError("decoder input must start with bos");
  if (train && rng == nullptr)
    throw ConfigError("training forward needs a dropout rng");

  Tensor frontend_out = frontend_forward(params, features, cache);
  Tensor memory = encoder_stack(params, frontend_out, train, rng, cache);
  if (cache) cache->enc_memory = memory;
  Tensor dec_out = decoder_stack(params, memory, dec_input, train, rng, cache);
  if (cache) cache->dec_out = dec_out;

  Tensor logits({dec_out.dim(0),
                 static_cast<std::size_t>(params.cfg.vocab_size)});
  gemm(dec_out, false, params.embedding, true, logits);
  return logits;
}

void model_backward_utterance(const ModelParams& params,
                              const UtteranceCache& cache,
                              const Tensor& dlogits, ModelParams& grads) {
  const std::size_t e = static_cast<std::size_t>(params.cfg.embed_dim);
  const std::size_t t_dec = dlogits.dim(0);

  // Tied projection.
  gemm(dlogits, true, cache.dec_out, false, grads.embedding,
       /*accumulate=*/true);
  Tensor dx({t_dec, e});
  gemm(dlogits, false, params.embedding, false, dx);

  Tensor dmemory(cache.enc_memory.shape());

  // Decoder stack, reversed.
  dx = layer_norm_backward(dx, params.decoder_ln, cache.dec_ln,
                           grads.decoder_ln);
  for (std::size_t li = params.decoder.size(); li-- > 0;) {
    const auto& layer = params.decoder[li];
    const auto& c = cache.dec[li];
    auto& g = grads.decoder[li];

    Tensor dh = dropout_backward(dx, c.drop3);
    dh = linear_backward(dh, layer.ff2, c.ff2, g.ff2);
    dh = relu_backward(dh, c.relu);
    Tensor dfin = linear_backward(dh, layer.ff1, c.ff1, g.ff1);
    add_inplace(dx, layer_norm_backward(dfin, layer.ln3, c.ln3, g.ln3));

    Tensor dca = dropout_backward(dx, c.drop2);
    Tensor dq, dk, dv;
    mha_backward(dca, layer.cross_attn, c.cross_attn, g.cross_attn, dq, dk, dv);
    add_inplace(dmemory, dk);
    add_inplace(dmemory, dv);
    add_inplace(dx, layer_norm_backward(dq, layer.ln2, c.ln2, g.ln2));

    Tensor dsa = dropout_backward(dx, c.drop1);
    mha_backward(dsa, layer.self_attn, c.self_attn, g.self_attn, dq, dk, dv);
    add_inplace(dq, dk);
    add_inplace(dq, dv);
    add_inplace(dx, layer_norm_backward(dq, layer.ln1, c.ln1, g.ln1));
  }

  // Embedding input path: x = embed(ids) * sqrt(E) + PE.
  scale_inplace(dx, std::sqrt(static_cast<double>(e)));
  embedding_backward(dx, cache.dec_input, grads.embedding);

  // Encoder stack, reversed, seeded by the pooled cross-attention grads.
  Tensor denc = layer_norm_backward(dmemory, params.encoder_ln, cache.enc_ln,
                                    grads.encoder_ln);
  for (std::size_t li = params.encoder.size(); li-- > 0;) {
    const auto& layer = params.encoder[li];
    const auto& c = cache.enc[li];
    auto& g = grads.encoder[li];

    Tensor dh = dropout_backward(denc, c.drop2);
    dh = linear_backward(dh, layer.ff2, c.ff2, g.ff2);
    dh = relu_backward(dh, c.relu);
    Tensor dfin = linear_backward(dh, layer.ff1, c.ff1, g.ff1);
    add_inplace(denc, layer_norm_backward(dfin, layer.ln2, c.ln2, g.ln2));

    Tensor dsa = dropout_backward(denc, c.drop1);
    Tensor dq, dk, dv;
    mha_backward(dsa, layer.self_attn, c.attn, g.self_attn, dq, dk, dv);
    add_inplace(dq, dk);
    add_inplace(dq, dv);
    add_inplace(denc, layer_norm_backward(dq, layer.ln1, c.ln1, g.ln1));
  }

  Tensor dfrontend = dropout_backward(denc, cache.frontend_drop);

  // Positional encoding is additive, so the gradient passes through.
  const FrontEndConfig& fc = params.cfg.frontend;
  if (fc.variant == FrontEndVariant::plain) {
    plain_frontend_backward(dfrontend, params.frontend, cache.frontend,
                            grads.frontend);
  } else {
    vq_frontend_backward(dfrontend, params.frontend, cache.frontend,
                         grads.frontend);
  }
}

Tensor encode_utterance(const ModelParams& params, const Tensor& features) {
  Tensor frontend_out = frontend_forward(params, features, nullptr);
  return encoder_stack(params, frontend_out, /*train=*/false, nullptr, nullptr);
}

Tensor decoder_logits(const ModelParams& params, const Tensor& memory,
                      const std::vector<int>& prefix) {
  Tensor dec_out =
      decoder_stack(params, memory, prefix, /*train=*/false, nullptr, nullptr);
  Tensor logits({dec_out.dim(0),
                 static_cast<std::size_t>(params.cfg.vocab_size)});
  gemm(dec_out, false, params.embedding, true, logits);
  return logits;
}

// ---------------------------------------------------------------------------
// Batch

Tensor Batch::utterance_features(std::size_t b) const {
  const std::size_t t_len = static_cast<std::size_t>(feature_lengths[b]);
  const std::size_t c_dim = features.dim(2);
  Tensor out({t_len, c_dim});
  for (std::size_t t = 0; t < t_len; ++t)
    for (std::size_t c = 0; c < c_dim; ++c) out.at(t, c) = features.at(b, t, c);
  return out;
}

std::vector<int> Batch::decoder_input(std::size_t b) const {
  const std::size_t n = static_cast<std::size_t>(target_lengths[b]);
  std::vector<int> in;
  in.reserve(n + 1);
  in.push_back(Vocab::bos_id);
  for (std::size_t i = 0; i < n; ++i) in.push_back(targets[b * target_max + i]);
  return in;
}

std::vector<int> Batch::ce_targets(std::size_t b) const {
  const std::size_t n = static_cast<std::size_t>(target_lengths[b]);
  std::vector<int> out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) out.push_back(targets[b * target_max + i]);
  out.push_back(Vocab::eos_id);
  return out;
}

Batch make_batch(const std::vector<const FeatureMatrix*>& features,
                 const std::vector<std::vector<int>>& targets) {
  if (features.size() != targets.size() || features.empty())
    throw ShapeMismatchError("make_batch: features/targets mismatch");
  const std::size_t b_size = features.size();
  std::size_t t_max = 0, c_dim = features[0]->cols, l_max = 0;
  for (std::size_t b = 0; b < b_size; ++b) {
    if (features[b]->cols != c_dim)
      throw ShapeMismatchError("make_batch: inconsistent channel counts");
    t_max = std::max(t_max, features[b]->rows);
    l_max = std::max(l_max, targets[b].size());
  }

  Batch batch;
  batch.batch_size = b_size;
  batch.target_max = l_max;
  batch.features = Tensor({b_size, t_max, c_dim});
  batch.feature_lengths.resize(b_size);
  batch.target_lengths.resize(b_size);
  batch.targets.assign(b_size * l_max, Vocab::pad_id);
  for (std::size_t b = 0; b < b_size; ++b) {
    batch.feature_lengths[b] = static_cast<int>(features[b]->rows);
    for (std::size_t t = 0; t < features[b]->rows; ++t)
      for (std::size_t c = 0; c < c_dim; ++c)
        batch.features.at(b, t, c) = features[b]->at(t, c);
    batch.target_lengths[b] = static_cast<int>(targets[b].size());
    for (std::size_t i = 0; i < targets[b].size(); ++i)
      batch.targets[b * l_max + i] = targets[b][i];
  }
  return batch;
}

Tensor forward(const Batch& batch, const ModelParams& params) {
  const std::size_t v = static_cast<std::size_t>(params.cfg.vocab_size);
  const std::size_t t_tgt = batch.target_max + 1;  // + eos position
  Tensor logits({batch.batch_size, t_tgt, v});
  for (std::size_t b = 0; b < batch.batch_size; ++b) {
    const Tensor features = batch.utterance_features(b);
    const std::vector<int> dec_input = batch.decoder_input(b);
    Tensor utt_logits = model_forward_utterance(params, features, dec_input,
                                                /*train=*/false, nullptr,
                                                nullptr);
    for (std::size_t t = 0; t < utt_logits.dim(0); ++t)
      for (std::size_t c = 0; c < v; ++c)
        logits.at(b, t, c) = utt_logits.at(t, c);
  }
  return logits;
}

}  // namespace vqasr
