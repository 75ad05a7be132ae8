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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "criteria.hpp"
#include "lacuna/cli/checkpoint.hpp"
#include "lacuna/cli/commands.hpp"
#include "lacuna/cli/run_config.hpp"
#include "lacuna/corpus/line_image.hpp"
#include "lacuna/corpus/manifest.hpp"
#include "lacuna/corpus/synth.hpp"
#include "lacuna/corpus/vocabulary.hpp"
#include "lacuna/decode_eval/evaluate.hpp"
#include "lacuna/finetune/trainer.hpp"

namespace fs = std::filesystem;

namespace lacuna::acceptance {

namespace {

// Narrowed model for the training runs: the full width costs about 20x more
// per line on one core.
constexpr const char* kReducedModel =
    "conv_channels=16,32,64\n"
    "lstm_hidden=128\n"
    "lstm_layers=3\n"
    "score_dim=64\n";

fs::path work_dir(const std::string& name) {
  const fs::path dir = fs::current_path() / "acceptance_work" / name;
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

// Runs the command-line tool, sending its output to `log`. Returns the exit status.
int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(LACUNA_CLI_PATH) + " " + args + " >>" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Step {
  std::string args;
  std::string what;
};

// Runs steps in order; the first failing one becomes the error text.
std::string run_steps(const std::vector<Step>& steps, const fs::path& log) {
  for (const auto& s : steps) {
    const int rc = cli(s.args, log);
    if (rc != 0) return s.what + " exited with " + std::to_string(rc) + " (log " + log.string() + ")";
  }
  return {};
}

// Mean of the contrastive accuracy column over the last `tail` updates.
double final_accuracy(const fs::path& metrics, int tail) {
  std::ifstream in(metrics);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> acc;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string update, lr, loss, accuracy;
    std::getline(row, update, '\t');
    std::getline(row, lr, '\t');
    std::getline(row, loss, '\t');
    std::getline(row, accuracy, '\t');
    acc.push_back(std::stod(accuracy));
  }
  if (acc.empty()) return 0.0;
  const std::size_t n = std::min<std::size_t>(acc.size(), static_cast<std::size_t>(tail));
  double sum = 0.0;
  for (std::size_t i = acc.size() - n; i < acc.size(); ++i) sum += acc[i];
  return sum / static_cast<double>(n);
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

}  // namespace

Outcome trend_reproduction() {
  const fs::path dir = work_dir("trend");
  const fs::path log = dir / "log.txt";
  // Default synthetic corpus: two styles, 29 symbols plus space, 5000/30/100 lines.
  write_file(dir / "synth.cfg", "seed=7\n");
  write_file(dir / "run.cfg", std::string(kReducedModel) +
                                  "temperature=0.1\n"
                                  "pretrain_lr=0.002\n"
                                  "pretrain_updates=12000\n"
                                  "checkpoint_every=0\n");
  const std::string corpus = (dir / "corpus").string();
  const std::string cfg = " --config " + (dir / "run.cfg").string();
  const std::string err = run_steps(
      {{"synth --config " + (dir / "synth.cfg").string() + " --out " + corpus, "synth"},
       {"pretrain" + cfg + " --manifest " + corpus + "/pretrain.tsv --out " + (dir / "pre").string(), "pretrain"},
       {"finetune" + cfg + " --manifest " + corpus + "/finetune.tsv --init " + (dir / "pre/pretrained.bin").string() +
            " --out " + (dir / "ft_pre").string(),
        "finetune from pretrained"},
       {"finetune" + cfg + " --manifest " + corpus + "/finetune.tsv --init scratch --out " +
            (dir / "ft_scratch").string(),
        "finetune from scratch"}},
      log);
  if (!err.empty()) return {false, err};

  std::ostringstream quiet;
  const fs::path test = dir / "corpus" / "test.tsv";
  const double pre = cmd_evaluate(dir / "ft_pre/finetuned.bin", test, dir / "ft_pre/cer_report.tsv", quiet).aggregate();
  const double scratch =
      cmd_evaluate(dir / "ft_scratch/finetuned.bin", test, dir / "ft_scratch/cer_report.tsv", quiet).aggregate();
  const double accuracy = final_accuracy(dir / "pre" / outputs::kPretrainMetrics, 100);
  const double reduction = scratch > 0.0 ? (scratch - pre) / scratch : 0.0;
  const bool pass = reduction >= 0.20 && accuracy > 0.5;
  return {pass, fmt("test CER scratch %.4f, pretrained %.4f, relative reduction %.3f (need >= 0.20); "
                    "final contrastive accuracy %.3f (need > 0.5)",
                    scratch, pre, reduction, accuracy)};
}

Outcome overfit_sanity() {
  const fs::path dir = work_dir("overfit");
  SynthConfig synth;
  synth.pretrain_lines = 0;
  synth.finetune_lines = 8;
  synth.test_lines = 0;
  const Manifest manifest = synth_corpus(synth, dir / "corpus");
  std::vector<TranscribedLine> lines;
  for (const auto& e : manifest.entries) lines.push_back({load_line(e.image), read_transcript(e.transcript)});
  const Vocabulary vocab = build_vocab(std::span<const TranscribedLine>(lines));

  const RunConfig config = RunConfig::parse(kReducedModel);
  FinetuneSettings settings = config.finetune_settings();
  settings.probe_lines = 8;
  Finetuner trainer(config.model, settings, InitKind::kScratch, vocab, lines);
  FinetuneProgress progress = trainer.initial_progress(nullptr);
  double probe = 1.0;
  int epochs = 0;
  while (progress.epoch < settings.epochs) {
    probe = trainer.run_epoch(progress).probe_cer;
    epochs = progress.epoch;
    if (probe < 0.05) break;
  }
  const double cer = evaluate(progress.params, config.model, vocab, lines).aggregate();
  return {cer < 0.05, fmt("training CER %.4f after %.0f of %.0f epochs (need < 0.05)", cer, epochs, settings.epochs)};
}

Outcome determinism() {
  const fs::path root = work_dir("determinism");
  const std::string run_cfg = std::string(kReducedModel) +
                              "pretrain_updates=20\n"
                              "pretrain_batch=4\n"
                              "finetune_epochs=6\n"
                              "freeze_epochs=3\n"
                              "finetune_batch=4\n"
                              "checkpoint_every=0\n"
                              "workers=1\n";
  const char* names[] = {"a", "b"};
  for (const char* name : names) {
    const fs::path dir = root / name;
    fs::create_directories(dir);
    write_file(dir / "synth.cfg", "pretrain_lines=24\nfinetune_lines=6\ntest_lines=6\nseed=11\n");
    write_file(dir / "run.cfg", run_cfg);
    const std::string corpus = (dir / "corpus").string();
    const std::string cfg = " --config " + (dir / "run.cfg").string() + " --seed 5";
    const std::string err = run_steps(
        {{"synth --config " + (dir / "synth.cfg").string() + " --out " + corpus, "synth"},
         {"pretrain" + cfg + " --manifest " + corpus + "/manifest.tsv --out " + (dir / "pre").string(), "pretrain"},
         {"finetune" + cfg + " --manifest " + corpus + "/manifest.tsv --init " + (dir / "pre/pretrained.bin").string() +
              " --out " + (dir / "ft").string(),
          "finetune"},
         {"evaluate --checkpoint " + (dir / "ft/finetuned.bin").string() + " --manifest " + corpus +
              "/manifest.tsv --out " + (dir / "eval").string(),
          "evaluate"}},
        dir / "log.txt");
    if (!err.empty()) return {false, std::string("run ") + name + ": " + err};
  }
  const char* artifacts[] = {"pre/pretrained.bin", "pre/pretrain_metrics.tsv", "ft/freeze_end.bin",
                             "ft/finetuned.bin",   "ft/finetune_metrics.tsv",  "eval/cer_report.tsv"};
  int compared = 0;
  for (const char* a : artifacts) {
    const std::string x = slurp(root / "a" / a);
    if (x.empty()) return {false, std::string("missing artifact ") + a};
    if (x != slurp(root / "b" / a)) return {false, std::string(a) + " differs between the two runs"};
    ++compared;
  }
  // Corpora are part of the pipeline too.
  for (const auto& e : fs::recursive_directory_iterator(root / "a" / "corpus")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), root / "a");
    if (slurp(e.path()) != slurp(root / "b" / rel)) return {false, rel.string() + " differs between the two runs"};
    ++compared;
  }
  return {true, std::to_string(compared) + " artifacts bit-identical"};
}

}  // namespace lacuna::acceptance
