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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support/oracles.hpp"
#include "vqasr/frontend.hpp"

using namespace vqasr;
namespace vt = vqasr::testing;

namespace {

void fill_uniform(Tensor& t, std::mt19937_64& rng, double scale = 1.0) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double u = static_cast<double>(rng() >> 11) / 9007199254740992.0;
    t[i] = scale * (2.0 * u - 1.0);
  }
}

FrontEndConfig paper_plain(int m) {
  FrontEndConfig cfg;
  cfg.variant = FrontEndVariant::plain;
  cfg.n_prosodic = m;
  return cfg;
}

FrontEndConfig paper_vq(int m) {
  FrontEndConfig cfg;
  cfg.variant = FrontEndVariant::vq;
  cfg.n_prosodic = m;
  return cfg;
}

// Small widths for gradient checks; keeps K + L = O.
FrontEndConfig micro(FrontEndVariant variant) {
  FrontEndConfig cfg;
  cfg.variant = variant;
  cfg.n_spectral = 4;
  cfg.n_prosodic = 2;
  cfg.p_a = 8;
  cfg.p_b = 4;
  cfg.k_channels = 6;
  cfg.l_channels = 2;
  cfg.out_channels = 8;
  return cfg;
}

}  // namespace

TEST_CASE("shape contract: both variants emit T/4 x 256") {
  std::mt19937_64 rng(1);

  FrontEndParams plain = make_frontend(paper_plain(0));
  init_frontend(plain, rng);
  Tensor x({100, 40});
  fill_uniform(x, rng);
  const FrontEndOutput po = plain_frontend(x, plain);
  CHECK(po.features.dim(0) == 25);
  CHECK(po.features.dim(1) == 256);
  CHECK(po.frame_map.size() == 25);

  FrontEndParams plain45 = make_frontend(paper_plain(5));
  init_frontend(plain45, rng);
  Tensor x45({100, 45});
  fill_uniform(x45, rng);
  const FrontEndOutput po45 = plain_frontend(x45, plain45);
  CHECK(po45.features.dim(0) == 25);
  CHECK(po45.features.dim(1) == 256);

  FrontEndParams vq = make_frontend(paper_vq(5));
  init_frontend(vq, rng);
  Tensor spec({100, 40}), pros({100, 5});
  fill_uniform(spec, rng);
  fill_uniform(pros, rng);
  const FrontEndOutput vo = vq_frontend(spec, pros, vq);
  CHECK(vo.features.dim(0) == 25);
  CHECK(vo.features.dim(1) == 256);

  // channel bookkeeping of the paper configuration
  CHECK(vq.cfg.k_channels + vq.cfg.l_channels == vq.cfg.out_channels);
  CHECK(vq.cfg.l_channels * 3 == vq.cfg.k_channels);  // one per three
}

TEST_CASE("config validation") {
  FrontEndConfig bad = paper_vq(5);
  bad.k_channels = 200;  // K + L != O
  CHECK_THROWS_AS(make_frontend(bad), ConfigError);

  FrontEndConfig no_pros = paper_vq(0);
  CHECK_THROWS_AS(make_frontend(no_pros), ConfigError);

  CHECK_NOTHROW(make_frontend(paper_plain(0)));
}

TEST_CASE("parameter arithmetic") {
  // plain front-end, N=40, M=0:
  // conv1 40*1024*5 + 1024 = 205,824; conv2 512*512*5 + 512 = 1,311,232
  CHECK(frontend_parameter_count(paper_plain(0)) == 205824 + 1311232);

  // block B first conv with M=5: 5*512*5 + 512 = 13,312
  FrontEndParams vq = make_frontend(paper_vq(5));
  CHECK(vq.b1.n_parameters() == 13312);

  // the fused front-end carries fewer parameters than the plain one at
  // the paper configuration
  CHECK(frontend_parameter_count(paper_vq(5)) <
        frontend_parameter_count(paper_plain(5)));

  // formula cross-check against the actually allocated tensors
  for (const FrontEndConfig& cfg :
       {paper_plain(5), paper_vq(5), micro(FrontEndVariant::plain),
        micro(FrontEndVariant::vq)}) {
    const FrontEndParams params = make_frontend(cfg);
    std::size_t total = 0;
    for (const Conv1dParams* c :
         {&params.conv1, &params.conv2, &params.a1, &params.a2, &params.b1,
          &params.b2})
      total += c->weight.size() + c->bias.size();
    CHECK(total == frontend_parameter_count(cfg));
  }
}

TEST_CASE("vq blocks are exactly separable") {
  std::mt19937_64 rng(3);
  FrontEndParams vq = make_frontend(paper_vq(5));
  init_frontend(vq, rng);
  Tensor spec({48, 40}), pros({48, 5});
  fill_uniform(spec, rng);
  fill_uniform(pros, rng);
  const FrontEndOutput base = vq_frontend(spec, pros, vq);

  for (int trial = 0; trial < 5; ++trial) {
    Tensor pros2 = pros;
    fill_uniform(pros2, rng, 2.0);
    const FrontEndOutput perturbed = vq_frontend(spec, pros2, vq);
    for (std::size_t t = 0; t < base.features.dim(0); ++t)
      for (std::size_t c = 0; c < 192; ++c)
        CHECK(perturbed.features.at(t, c) == base.features.at(t, c));

    Tensor spec2 = spec;
    fill_uniform(spec2, rng, 2.0);
    const FrontEndOutput perturbed2 = vq_frontend(spec2, pros, vq);
    for (std::size_t t = 0; t < base.features.dim(0); ++t)
      for (std::size_t c = 192; c < 256; ++c)
        CHECK(perturbed2.features.at(t, c) == base.features.at(t, c));
  }
}

TEST_CASE("zero prosody input leaves block B at its bias response") {
  std::mt19937_64 rng(5);
  FrontEndParams vq = make_frontend(paper_vq(5));
  init_frontend(vq, rng);
  for (std::size_t i = 0; i < vq.b1.bias.size(); ++i)
    vq.b1.bias[i] = 0.1 * static_cast<double>(i % 7) - 0.3;
  for (std::size_t i = 0; i < vq.b2.bias.size(); ++i)
    vq.b2.bias[i] = 0.05 * static_cast<double>(i % 5) - 0.1;

  Tensor spec({100, 40});
  fill_uniform(spec, rng);
  Tensor pros({100, 5});  // zeros
  FrontEndOutput out = vq_frontend(spec, pros, vq);

  // strip the additive positional encoding to expose the block output
  const Tensor pe = sinusoidal_pe(out.features.dim(0), out.features.dim(1));
  for (std::size_t i = 0; i < pe.size(); ++i) out.features[i] -= pe[i];

  // rows whose second-conv window stays inside the sequence are equal
  const std::size_t t1 = 50;  // length after the first convolution
  for (std::size_t j = 1; 2 * j + 2 < t1; ++j)
    for (std::size_t c = 192; c < 256; ++c)
      CHECK(out.features.at(j, c) ==
            doctest::Approx(out.features.at(1, c)).epsilon(1e-12));
}

TEST_CASE("frame_map spans grow with stride and clamp at the edges") {
  std::mt19937_64 rng(7);
  FrontEndParams plain = make_frontend(paper_plain(0));
  init_frontend(plain, rng);
  Tensor x({100, 40});
  fill_uniform(x, rng);
  const FrontEndOutput out = plain_frontend(x, plain);
  for (std::size_t j = 0; j < out.frame_map.size(); ++j) {
    const auto [lo, hi] = out.frame_map[j];
    CHECK(lo >= 0);
    CHECK(hi <= 99);
    CHECK(lo <= hi);
    // interior receptive field is 4j +/- 6
    if (j >= 2 && j + 2 < out.frame_map.size()) {
      CHECK(lo == static_cast<int>(4 * j) - 6);
      CHECK(hi == static_cast<int>(4 * j) + 6);
    }
  }
}

TEST_CASE("gradients flow to both blocks") {
  std::mt19937_64 rng(9);
  FrontEndParams vq = make_frontend(paper_vq(5));
  init_frontend(vq, rng);
  Tensor spec({40, 40}), pros({40, 5});
  fill_uniform(spec, rng);
  fill_uniform(pros, rng);

  FrontEndCache cache;
  const FrontEndOutput out = vq_frontend(spec, pros, vq, &cache);
  Tensor upstream(out.features.shape());
  fill_uniform(upstream, rng);

  FrontEndParams grads = make_frontend(paper_vq(5));
  vq_frontend_backward(upstream, vq, cache, grads);

  double b_norm = 0.0, a_norm = 0.0;
  for (std::size_t i = 0; i < grads.b1.weight.size(); ++i)
    b_norm += grads.b1.weight[i] * grads.b1.weight[i];
  for (std::size_t i = 0; i < grads.a1.weight.size(); ++i)
    a_norm += grads.a1.weight[i] * grads.a1.weight[i];
  CHECK(b_norm > 0.0);
  CHECK(a_norm > 0.0);
}

TEST_CASE("front-end gradients match finite differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(1500 + seed);

    SUBCASE("plain") {
      FrontEndParams p = make_frontend(micro(FrontEndVariant::plain));
      init_frontend(p, rng);
      Tensor x({9, 6});
      fill_uniform(x, rng);
      FrontEndCache cache;
      const FrontEndOutput out = plain_frontend(x, p, &cache);
      Tensor r(out.features.shape());
      fill_uniform(r, rng);

      FrontEndParams grads = make_frontend(micro(FrontEndVariant::plain));
      const Tensor dx = plain_frontend_backward(r, p, cache, grads);

      auto loss = [&]() {
        double acc = 0.0;
        const FrontEndOutput o = plain_frontend(x, p);
        for (std::size_t i = 0; i < o.features.size(); ++i)
          acc += o.features[i] * r[i];
        return acc;
      };
      for (int c = 0; c < 5; ++c) {
        const std::size_t i = rng() % x.size();
        const double numeric = vt::finite_difference(loss, &x[i]);
        CHECK(vt::relative_error(dx[i], numeric, 1e-6) < 1e-4);
      }
      for (int c = 0; c < 5; ++c) {
        const std::size_t i = rng() % p.conv1.weight.size();
        const double numeric =
            vt::finite_difference(loss, &p.conv1.weight[i]);
        CHECK(vt::relative_error(grads.conv1.weight[i], numeric, 1e-6) < 1e-4);
      }
    }

    SUBCASE("vq") {
      FrontEndParams p = make_frontend(micro(FrontEndVariant::vq));
      init_frontend(p, rng);
      Tensor spec({9, 4}), pros({9, 2});
      fill_uniform(spec, rng);
      fill_uniform(pros, rng);
      FrontEndCache cache;
      const FrontEndOutput out = vq_frontend(spec, pros, p, &cache);
      Tensor r(out.features.shape());
      fill_uniform(r, rng);

      FrontEndParams grads = make_frontend(micro(FrontEndVariant::vq));
      const auto [dspec, dpros] = vq_frontend_backward(r, p, cache, grads);

      auto loss = [&]() {
        double acc = 0.0;
        const FrontEndOutput o = vq_frontend(spec, pros, p);
        for (std::size_t i = 0; i < o.features.size(); ++i)
          acc += o.features[i] * r[i];
        return acc;
      };
      for (int c = 0; c < 4; ++c) {
        const std::size_t i = rng() % spec.size();
        CHECK(vt::relative_error(dspec[i],
                                 vt::finite_difference(loss, &spec[i]),
                                 1e-6) < 1e-4);
        const std::size_t j = rng() % pros.size();
        CHECK(vt::relative_error(dpros[j],
                                 vt::finite_difference(loss, &pros[j]),
                                 1e-6) < 1e-4);
        const std::size_t k = rng() % p.b2.weight.size();
        CHECK(vt::relative_error(grads.b2.weight[k],
                                 vt::finite_difference(loss, &p.b2.weight[k]),
                                 1e-6) < 1e-4);
      }
    }
  }
}

TEST_CASE("time mismatch between blocks is rejected") {
  std::mt19937_64 rng(11);
  FrontEndParams vq = make_frontend(paper_vq(5));
  init_frontend(vq, rng);
  Tensor spec({40, 40}), pros({39, 5});
  CHECK_THROWS_AS(vq_frontend(spec, pros, vq), ShapeMismatchError);
}
