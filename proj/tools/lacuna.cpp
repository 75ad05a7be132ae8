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

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "lacuna/cli/commands.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Line-level text recognition with masked contrastive pre-training"};
  app.require_subcommand(1);

  lacuna::RunOptions run;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string manifest;
  std::string init;
  std::string out;
  std::string checkpoint;
  std::vector<std::string> inputs;

  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", run.config, "key=value config file (missing keys use defaults)");
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--workers", workers, "parallel line workers")->check(CLI::PositiveNumber);
  };

  CLI::App* pretrain = app.add_subcommand("pretrain", "contrastive pre-training on unlabeled lines");
  add_run_flags(pretrain);
  pretrain->add_option("--manifest", manifest, "manifest with pretrain lines")->required();
  pretrain->add_option("--out", out, "output directory")->required();
  pretrain->add_option("--init", init, "checkpoint of an interrupted run to resume");

  CLI::App* finetune = app.add_subcommand("finetune", "CTC fine-tuning on labeled lines");
  add_run_flags(finetune);
  finetune->add_option("--manifest", manifest, "manifest with finetune lines")->required();
  finetune->add_option("--init", init, "pretrained checkpoint, or 'scratch'")->required();
  finetune->add_option("--out", out, "output directory")->required();

  CLI::App* transcribe = app.add_subcommand("transcribe", "print one transcription per line image");
  transcribe->add_option("--checkpoint", checkpoint, "fine-tuned checkpoint")->required();
  transcribe->add_option("--manifest", inputs, "manifest(s) whose images are transcribed in order");
  transcribe->add_option("images", inputs, "line image files");
  transcribe->add_option("--out", out, "write transcriptions here instead of stdout");

  CLI::App* evaluate = app.add_subcommand("evaluate", "character error rate on test lines");
  evaluate->add_option("--checkpoint", checkpoint, "fine-tuned checkpoint")->required();
  evaluate->add_option("--manifest", manifest, "manifest with test lines")->required();
  evaluate->add_option("--out", out, "output directory for the per-line report");

  CLI::App* synth = app.add_subcommand("synth", "render a synthetic corpus with manifests");
  synth->add_option("--config", run.config, "synthetic corpus config (missing keys use defaults)");
  synth->add_option("--seed", seed, "override the corpus seed");
  synth->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const bool seed_given = (pretrain->parsed() && pretrain->count("--seed")) ||
                          (finetune->parsed() && finetune->count("--seed")) || (synth->parsed() && synth->count("--seed"));
  if (seed_given) run.seed = seed;
  if ((pretrain->parsed() && pretrain->count("--workers")) || (finetune->parsed() && finetune->count("--workers"))) {
    run.workers = workers;
  }

  try {
    if (pretrain->parsed()) {
      lacuna::cmd_pretrain(run, manifest, out, init, std::clog);
    } else if (finetune->parsed()) {
      lacuna::cmd_finetune(run, manifest, init, out, std::clog);
    } else if (transcribe->parsed()) {
      if (inputs.empty()) throw lacuna::ValidationError("transcribe needs image paths or --manifest");
      std::vector<fs::path> paths(inputs.begin(), inputs.end());
      const std::vector<std::string> lines = lacuna::cmd_transcribe(checkpoint, paths);
      std::ofstream file;
      if (!out.empty()) {
        file.open(out, std::ios::binary);
        if (!file) throw lacuna::IoError("cannot write '" + out + "'");
      }
      std::ostream& sink = out.empty() ? std::cout : file;
      for (const auto& l : lines) sink << l << '\n';
    } else if (evaluate->parsed()) {
      const fs::path report = out.empty() ? fs::path{} : fs::path(out) / lacuna::outputs::kCerReport;
      const lacuna::CerReport r = lacuna::cmd_evaluate(checkpoint, manifest, report, std::clog);
      std::cout << lacuna::summary(r) << '\n';
    } else if (synth->parsed()) {
      lacuna::cmd_synth(run.config, out, run.seed, std::clog);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return lacuna::exit_code(e);
  }
  return 0;
}
