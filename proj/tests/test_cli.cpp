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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "support/toy_corpus.hpp"
#include "vqasr/commands.hpp"
#include "vqasr/config.hpp"
#include "vqasr/feature_file.hpp"
#include "vqasr/train.hpp"

using namespace vqasr;
namespace vt = vqasr::testing;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small but real experiment configuration over 40 mel channels.
ExperimentConfig small_experiment(const std::string& out_dir) {
  ExperimentConfig config;
  config.out_dir = out_dir;
  config.features = FeatureSet::fb;
  config.n_mels = 40;
  config.embed_dim = 16;
  config.p_a = 16;
  config.p_b = 8;
  config.k_channels = 12;
  config.l_channels = 4;
  config.encoder_layers = 1;
  config.decoder_layers = 1;
  config.heads = 2;
  config.ffn_dim = 32;
  config.dropout = 0.1;
  config.max_updates = 6;
  config.checkpoint_interval = 3;
  config.batch_frames = 200;
  config.warmup_steps = 10;
  config.threads = 2;
  return config;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("feature file round trip") {
  const fs::path dir = fresh_dir("vqasr_ff_test");
  std::mt19937_64 rng(5);
  FeatureMatrix m(17, 4);
  m.labels = {"fb00", "fb01", "f0", "pov"};
  for (double& v : m.data) {
    const double u = static_cast<double>(rng() >> 11) / 9007199254740992.0;
    v = static_cast<double>(static_cast<float>(20.0 * u - 10.0));
  }
  const std::string path = (dir / "utt.vqfb").string();
  write_feature_file(path, m);

  const FeatureMatrix back = read_feature_file(path);
  CHECK(back.rows == m.rows);
  CHECK(back.cols == m.cols);
  CHECK(back.labels == m.labels);
  CHECK(back.data == m.data);  // entries were float-representable

  // serializing the read-back matrix reproduces the file bitwise
  const std::string copy = (dir / "copy.vqfb").string();
  write_feature_file(copy, back);
  CHECK(read_bytes(path) == read_bytes(copy));
}

TEST_CASE("feature file validation") {
  const fs::path dir = fresh_dir("vqasr_ff_bad");
  FeatureMatrix m(3, 2);
  m.labels = {"same", "same"};
  CHECK_THROWS_AS(write_feature_file((dir / "dup.vqfb").string(), m),
                  DataError);

  m.labels = {"a", "b"};
  const std::string path = (dir / "ok.vqfb").string();
  write_feature_file(path, m);
  // truncate the payload
  std::string bytes = read_bytes(path);
  std::ofstream(path, std::ios::binary)
      << bytes.substr(0, bytes.size() - 3);
  CHECK_THROWS_AS(read_feature_file(path), CorruptHeaderError);

  CHECK_THROWS_AS(read_feature_file((dir / "missing.vqfb").string()),
                  NotFoundError);
}

TEST_CASE("config files parse with includes and overrides") {
  const fs::path dir = fresh_dir("vqasr_cfg_test");
  {
    std::ofstream base(dir / "base.cfg");
    base << "# base settings\n"
         << "n_mels = 40\n"
         << "variant = plain\n"
         << "max_updates = 100\n";
  }
  {
    std::ofstream exp(dir / "exp.cfg");
    exp << "include = base.cfg\n"
        << "features = fb+pitch+j+s\n"
        << "variant = vq   # override\n"
        << "seed = 7\n";
  }
  ExperimentConfig config;
  apply_config(config, parse_config_file((dir / "exp.cfg").string()));
  CHECK(config.n_mels == 40);
  CHECK(config.variant == FrontEndVariant::vq);
  CHECK(config.max_updates == 100);
  CHECK(config.features == FeatureSet::fb_pitch_js);
  CHECK(config.seed == 7);

  SUBCASE("unknown keys name the offender") {
    std::map<std::string, std::string> kv{{"warp_factor", "9"}};
    try {
      apply_config(config, kv);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("warp_factor") != std::string::npos);
    }
  }

  SUBCASE("invalid values are rejected") {
    CHECK_THROWS_AS(
        apply_config(config, {{"max_updates", "many"}}), ConfigError);
    CHECK_THROWS_AS(apply_config(config, {{"features", "fb+mfcc"}}),
                    ConfigError);
    CHECK_THROWS_AS(apply_config(config, {{"variant", "fused"}}),
                    ConfigError);
  }
}

TEST_CASE("feature sets define M and the selection") {
  CHECK(feature_set_m(FeatureSet::fb) == 0);
  CHECK(feature_set_m(FeatureSet::fb_rand) == 3);
  CHECK(feature_set_m(FeatureSet::fb_pitch) == 3);
  CHECK(feature_set_m(FeatureSet::fb_js) == 2);
  CHECK(feature_set_m(FeatureSet::fb_pitch_js) == 5);
  CHECK(feature_set_prosody(FeatureSet::fb_rand).empty());
  CHECK(feature_set_prosody(FeatureSet::fb_pitch_js).size() == 5);

  // the control condition and the vq variant constraints
  ExperimentConfig config = small_experiment("unused");
  config.variant = FrontEndVariant::vq;
  config.features = FeatureSet::fb;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.features = FeatureSet::fb_pitch;
  CHECK_NOTHROW(config.validate());
}

TEST_CASE("cmd_extract writes feature files with the selected channels") {
  const fs::path dir = fresh_dir("vqasr_extract_test");
  const vt::ToyCorpus corpus =
      vt::make_toy_corpus((dir / "corpus").string(), 4, 11);

  ExperimentConfig config = small_experiment((dir / "run").string());
  config.features = FeatureSet::fb_pitch_js;
  config.variant = FrontEndVariant::vq;

  const ExtractResult res = cmd_extract(config, corpus.manifest_path,
                                        (dir / "feats").string());
  CHECK(res.n_written == 4);
  CHECK(res.n_failed == 0);

  const FeatureMatrix feats =
      read_feature_file((dir / "feats" / (corpus.ids[0] + ".vqfb")).string());
  CHECK(feats.cols == 45);
  CHECK(feats.labels[0] == "fb00");
  CHECK(feats.labels[40] == "f0");
  CHECK(feats.labels[44] == "shimmer");

  // CMVN ran jointly over all channels
  for (std::size_t c = 0; c < feats.cols; ++c) {
    double mu = 0.0;
    for (std::size_t r = 0; r < feats.rows; ++r) mu += feats.at(r, c);
    mu /= static_cast<double>(feats.rows);
    CHECK(std::abs(mu) < 1e-5);  // float32 storage rounds the exact zero
  }

  SUBCASE("random control channels") {
    ExperimentConfig rand_cfg = config;
    rand_cfg.features = FeatureSet::fb_rand;
    const ExtractResult r2 = cmd_extract(rand_cfg, corpus.manifest_path,
                                         (dir / "feats_rand").string());
    CHECK(r2.n_written == 4);
    const FeatureMatrix m = read_feature_file(
        (dir / "feats_rand" / (corpus.ids[0] + ".vqfb")).string());
    CHECK(m.cols == 43);
    CHECK(m.labels[40] == "rand0");
  }

  SUBCASE("80 filterbanks") {
    ExperimentConfig fb80 = config;
    fb80.features = FeatureSet::fb;
    fb80.variant = FrontEndVariant::plain;
    fb80.n_mels = 80;
    const ExtractResult r3 = cmd_extract(fb80, corpus.manifest_path,
                                         (dir / "feats80").string());
    CHECK(r3.n_written == 4);
    const FeatureMatrix m = read_feature_file(
        (dir / "feats80" / (corpus.ids[0] + ".vqfb")).string());
    CHECK(m.cols == 80);
  }

  SUBCASE("empty manifest is an error") {
    const std::string empty = (dir / "empty.tsv").string();
    std::ofstream(empty).flush();
    CHECK_THROWS_AS(
        cmd_extract(config, empty, (dir / "feats_empty").string()),
        DataError);
  }
}

TEST_CASE("precomputed and on-the-fly features agree") {
  const fs::path dir = fresh_dir("vqasr_mode_test");
  const vt::ToyCorpus corpus =
      vt::make_toy_corpus((dir / "corpus").string(), 3, 13);

  ExperimentConfig config = small_experiment((dir / "run").string());
  config.features = FeatureSet::fb_pitch;
  config.variant = FrontEndVariant::plain;
  config.embed_dim = 16;

  cmd_extract(config, corpus.manifest_path, (dir / "feats").string());

  ExperimentConfig pre = config;
  pre.features_dir = (dir / "feats").string();
  pre.feature_mode = FeatureMode::precomputed;
  const auto precomputed = load_dataset(pre, corpus.manifest_path);

  ExperimentConfig fly = config;
  fly.feature_mode = FeatureMode::on_the_fly;
  const auto onfly = load_dataset(fly, corpus.manifest_path);

  REQUIRE(precomputed.size() == onfly.size());
  for (std::size_t u = 0; u < onfly.size(); ++u) {
    REQUIRE(precomputed[u].features.rows == onfly[u].features.rows);
    for (std::size_t i = 0; i < onfly[u].features.data.size(); ++i) {
      // the only difference is the float32 storage of the feature file
      const double stored = precomputed[u].features.data[i];
      const double direct = onfly[u].features.data[i];
      CHECK(stored ==
            static_cast<double>(static_cast<float>(direct)));
    }
  }
}

TEST_CASE("pack_batches respects the padded frame budget") {
  std::vector<UtteranceData> dataset(7);
  const std::size_t lengths[] = {50, 45, 40, 35, 30, 25, 20};
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    dataset[i].id = "u" + std::to_string(i);
    dataset[i].features = FeatureMatrix(lengths[i], 4);
  }
  const auto batches = pack_batches(dataset, 100);
  std::size_t covered = 0;
  for (const auto& batch : batches) {
    REQUIRE(!batch.empty());
    std::size_t max_len = 0;
    for (std::size_t idx : batch)
      max_len = std::max(max_len, dataset[idx].features.rows);
    CHECK(max_len * batch.size() <= 100);
    covered += batch.size();
  }
  CHECK(covered == dataset.size());
}

TEST_CASE("train / decode pipeline is deterministic and resumable") {
  const fs::path dir = fresh_dir("vqasr_pipeline_test");
  const vt::ToyCorpus corpus =
      vt::make_toy_corpus((dir / "corpus").string(), 3, 17);

  ExperimentConfig config = small_experiment((dir / "runA").string());
  config.train_manifest = corpus.manifest_path;
  config.test_manifest = corpus.manifest_path;
  config.seed = 5;

  const TrainResult first = train(config);
  CHECK(first.final_step == 6);
  CHECK(first.checkpoint_paths.size() == 2);  // steps 3 and 6
  CHECK(fs::exists(first.log_path));

  SUBCASE("same seed reproduces checkpoints byte for byte") {
    ExperimentConfig again = config;
    again.out_dir = (dir / "runB").string();
    const TrainResult second = train(again);
    REQUIRE(second.checkpoint_paths.size() == first.checkpoint_paths.size());
    for (std::size_t i = 0; i < first.checkpoint_paths.size(); ++i)
      CHECK(read_bytes(first.checkpoint_paths[i]) ==
            read_bytes(second.checkpoint_paths[i]));

    // thread count must not affect the bytes
    ExperimentConfig single = config;
    single.out_dir = (dir / "runC").string();
    single.threads = 1;
    const TrainResult third = train(single);
    CHECK(read_bytes(first.checkpoint_paths.back()) ==
          read_bytes(third.checkpoint_paths.back()));
  }

  SUBCASE("a different seed changes the checkpoints") {
    ExperimentConfig other = config;
    other.out_dir = (dir / "runD").string();
    other.seed = 6;
    const TrainResult second = train(other);
    CHECK(read_bytes(first.checkpoint_paths.back()) !=
          read_bytes(second.checkpoint_paths.back()));
  }

  SUBCASE("resume continues the step counter") {
    ExperimentConfig more = config;
    more.max_updates = 9;
    const TrainResult resumed = train(more);
    CHECK(resumed.final_step == 9);
    const auto all = list_checkpoints((fs::path(config.out_dir) /
                                       "checkpoints").string());
    CHECK(all.size() == 3);  // 3, 6, 9
  }

  SUBCASE("decode averages checkpoints and writes reports") {
    const DecodeScoreResult res = cmd_decode_score(config);
    CHECK(res.n_checkpoints_averaged == 2);
    CHECK(res.hypotheses.size() == 3);
    CHECK(fs::exists(res.hyp_path));
    CHECK(fs::exists(res.score_path));
    CHECK(fs::exists(res.aggregate_path));

    // deterministic rerun produces identical hypothesis bytes
    const std::string bytes_a = read_bytes(res.hyp_path);
    const DecodeScoreResult res2 = cmd_decode_score(config);
    CHECK(read_bytes(res2.hyp_path) == bytes_a);

    // the score CSV has one line per utterance plus a header
    std::ifstream scores(res.score_path);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(scores, line))
      if (!line.empty()) ++lines;
    CHECK(lines == 4);
  }

  SUBCASE("decoding without checkpoints fails") {
    ExperimentConfig empty = config;
    empty.out_dir = (dir / "never_trained").string();
    CHECK_THROWS_AS(cmd_decode_score(empty), NoCheckpointsError);
  }
}

TEST_CASE("the CLI maps errors to exit codes") {
  const std::string binary = VQASR_CLI_PATH;
  const fs::path dir = fresh_dir("vqasr_exitcode_test");

  auto run = [&](const std::string& args) {
    const std::string cmd =
        binary + " " + args + " > /dev/null 2> /dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };

  // usage errors -> 1
  CHECK(run("definitely-not-a-subcommand") == 1);
  CHECK(run("train --set nonsense_key=1") == 1);
  // data errors -> 2
  CHECK(run("score --manifest " + (dir / "missing.tsv").string() +
            " --hyps x --out " + (dir / "out.csv").string()) == 2);
  // success -> 0
  const vt::ToyCorpus corpus =
      vt::make_toy_corpus((dir / "corpus").string(), 2, 19);
  {
    std::ofstream hyps(dir / "hyps.tsv");
    hyps << corpus.ids[0] << '\t' << corpus.transcripts[0] << '\n';
    hyps << corpus.ids[1] << '\t' << "wrong words" << '\n';
  }
  CHECK(run("score --manifest " + corpus.manifest_path + " --hyps " +
            (dir / "hyps.tsv").string() + " --out " +
            (dir / "scores.csv").string()) == 0);
}
