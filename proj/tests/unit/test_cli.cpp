// Copyright 2026 The Lacuna Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "doctest.h"
#include "lacuna/cli/checkpoint.hpp"
#include "lacuna/cli/commands.hpp"
#include "lacuna/cli/run_config.hpp"

namespace fs = std::filesystem;
using namespace lacuna;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lacuna_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LACUNA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kTinyModel =
    "conv_channels = 8,16,32\n"
    "lstm_hidden = 16\n"
    "lstm_layers = 1\n"
    "score_dim = 8\n"
    "pretrain_batch = 2\n"
    "pretrain_updates = 4\n"
    "finetune_epochs = 2\n"
    "freeze_epochs = 1\n"
    "finetune_batch = 2\n"
    "checkpoint_every = 0\n";

// A tiny corpus shared by the command tests.
const fs::path& tiny_corpus() {
  static const fs::path dir = [] {
    const fs::path d = scratch_dir("corpus");
    write_file(d / "synth.cfg", "pretrain_lines = 6\nfinetune_lines = 2\ntest_lines = 2\nseed = 3\n");
    std::ostringstream log;
    cmd_synth(d / "synth.cfg", d / "corpus", std::nullopt, log);
    write_file(d / "run.cfg", kTinyModel);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("config defaults and text round trip") {
  const RunConfig d = RunConfig::parse("");
  CHECK(d.pretrain_lr == 5e-4);
  CHECK(d.mask.span_length == 12);
  CHECK(d.mask.min_gap == 8);
  CHECK(d.n_foils == 100);
  CHECK(d.freeze_epochs == 200);
  CHECK(d.finetune_epochs == 700);
  CHECK(d.model == ModelConfig{});
  const RunConfig c = RunConfig::parse(kTinyModel);
  CHECK(c.model.channels == std::array<int, 3>{8, 16, 32});
  const RunConfig back = RunConfig::parse(c.to_text());
  CHECK(back.to_text() == c.to_text());
  CHECK(back.model == c.model);
  for (const auto& key : RunConfig::keys()) CHECK(c.to_text().find(key + "=") != std::string::npos);
}

TEST_CASE("unknown keys and bad values are refused") {
  try {
    RunConfig::parse("seed = 1\nlearning_rate = 3\n", "run.cfg");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()) == "run.cfg:2: unknown config key 'learning_rate'");
  }
  CHECK_THROWS_AS(RunConfig::parse("mask_prob = 1.5\n"), ValidationError);
  CHECK_THROWS_AS(RunConfig::parse("pretrain_batch = 0\n"), ValidationError);
  CHECK_THROWS_AS(RunConfig::parse("seed = abc\n"), ValidationError);
  CHECK_THROWS_AS(RunConfig::load("/nonexistent/run.cfg"), IoError);
}

TEST_CASE("checkpoints round trip bit for bit") {
  Checkpoint c;
  c.params.add("param.a", Tensorf::Random(3, 4));
  c.params.add("param.b", Tensorf::Constant(1, 1, -0.0f));
  c.has_optimizer = true;
  c.adam = AdamState<float>::like(c.params);
  c.adam.first.at("param.a").setConstant(0.25f);
  c.meta["kind"] = "pretrain";
  c.meta["vocab"] = "<blank>\nU+0061\n";
  const std::string bytes = serialize_checkpoint(c);
  const Checkpoint back = deserialize_checkpoint(bytes);
  CHECK(back == c);
  CHECK(serialize_checkpoint(back) == bytes);

  const fs::path dir = scratch_dir("ckpt");
  save_checkpoint(dir / "c.bin", c);
  CHECK(load_checkpoint(dir / "c.bin") == c);
  CHECK(slurp(dir / "c.bin") == bytes);
}

TEST_CASE("foreign or damaged checkpoints are rejected") {
  Checkpoint c;
  c.params.add("w", Tensorf::Ones(2, 2));
  std::string bytes = serialize_checkpoint(c);
  std::string wrong_version = bytes;
  wrong_version[8] = 9;
  CHECK_THROWS_AS(deserialize_checkpoint(wrong_version), ValidationError);
  std::string wrong_magic = bytes;
  wrong_magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(wrong_magic), ValidationError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), IoError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes + "x"), ValidationError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/c.bin"), IoError);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch_dir("exit");
  CHECK(run_cli("evaluate --checkpoint /nonexistent/model.bin --manifest x.tsv") == 2);
  CHECK(run_cli("transcribe --checkpoint /nonexistent/model.bin a.png") == 2);
  write_file(dir / "empty.tsv", "");
  CHECK(run_cli("pretrain --manifest " + (dir / "empty.tsv").string() + " --out " + (dir / "out").string()) == 1);
  CHECK_FALSE(fs::exists(dir / "out" / "pretrained.bin"));
  write_file(dir / "bad.cfg", "no_such_key = 1\n");
  CHECK(run_cli("pretrain --config " + (dir / "bad.cfg").string() + " --manifest x.tsv --out " + (dir / "o").string()) ==
        1);
  CHECK(run_cli("frobnicate") == 1);
}

TEST_CASE("resumed pre-training matches an uninterrupted run") {
  const fs::path& d = tiny_corpus();
  const fs::path manifest = d / "corpus" / "manifest.tsv";
  std::ostringstream log;
  RunOptions opts;
  opts.config = d / "run.cfg";
  cmd_pretrain(opts, manifest, d / "straight", {}, log);

  write_file(d / "stop.cfg", std::string(kTinyModel) + "stop_after_updates = 2\n");
  RunOptions stop_opts;
  stop_opts.config = d / "stop.cfg";
  cmd_pretrain(stop_opts, manifest, d / "first_half", {}, log);
  CHECK_FALSE(fs::exists(d / "first_half" / outputs::kPretrained));
  REQUIRE(fs::exists(d / "first_half" / outputs::kLatest));
  cmd_pretrain(opts, manifest, d / "second_half", d / "first_half" / outputs::kLatest, log);

  const Checkpoint a = load_checkpoint(d / "straight" / outputs::kPretrained);
  const Checkpoint b = load_checkpoint(d / "second_half" / outputs::kPretrained);
  CHECK(a.params == b.params);
  CHECK(a.meta_at("update") == b.meta_at("update"));

  RunOptions other_seed = opts;
  other_seed.seed = 99;
  CHECK_THROWS_AS(cmd_pretrain(other_seed, manifest, d / "bad", d / "first_half" / outputs::kLatest, log),
                  ValidationError);
}

TEST_CASE("fine-tune, transcribe and evaluate end to end") {
  const fs::path& d = tiny_corpus();
  const fs::path manifest = d / "corpus" / "manifest.tsv";
  std::ostringstream log;
  RunOptions opts;
  opts.config = d / "run.cfg";
  if (!fs::exists(d / "straight" / outputs::kPretrained)) cmd_pretrain(opts, manifest, d / "straight", {}, log);
  cmd_finetune(opts, manifest, (d / "straight" / outputs::kPretrained).string(), d / "ft", log);
  cmd_finetune(opts, manifest, "scratch", d / "ft_scratch", log);
  const fs::path model = d / "ft" / outputs::kFinetuned;
  REQUIRE(fs::exists(model));
  CHECK(fs::exists(d / "ft" / outputs::kFreezeEnd));
  CHECK(load_model(model).vocab == load_model(d / "ft_scratch" / outputs::kFinetuned).vocab);
  CHECK_FALSE(load_model(model).checkpoint.params == load_model(d / "ft_scratch" / outputs::kFinetuned).checkpoint.params);

  const Manifest m = read_manifest(d / "corpus" / "test.tsv");
  std::vector<fs::path> images;
  for (const auto& e : m.entries) images.push_back(e.image);
  const auto once = cmd_transcribe(model, images);
  CHECK(once.size() == images.size());
  CHECK(cmd_transcribe(model, images) == once);
  CHECK(cmd_transcribe(model, {d / "corpus" / "test.tsv"}) == once);

  const CerReport r1 = cmd_evaluate(model, manifest, d / "r1.tsv", log);
  const CerReport r2 = cmd_evaluate(model, manifest, d / "r2.tsv", log);
  CHECK(r1.lines.size() == 2);
  CHECK(slurp(d / "r1.tsv") == slurp(d / "r2.tsv"));

  // A pretrained checkpoint is not a transcription model.
  CHECK_THROWS_AS(load_model(d / "straight" / outputs::kPretrained), ValidationError);
  // Nor does a checkpoint of another shape fit the configured model.
  write_file(d / "wide.cfg", std::string(kTinyModel) + "lstm_hidden = 24\n");
  RunOptions wide;
  wide.config = d / "wide.cfg";
  CHECK_THROWS_AS(cmd_finetune(wide, manifest, (d / "straight" / outputs::kPretrained).string(), d / "ft_wide", log),
                  ValidationError);
}
