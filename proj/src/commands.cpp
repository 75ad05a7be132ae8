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

#include "lacuna/cli/commands.hpp"

#include <fstream>

#include "lacuna/corpus/line_image.hpp"
#include "lacuna/corpus/synth.hpp"
#include "lacuna/corpus/unicode.hpp"

namespace lacuna {

namespace fs = std::filesystem;

namespace {

constexpr const char* kKindPretrain = "pretrain";
constexpr const char* kKindFinetune = "finetune";

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
}

class TsvLog {
 public:
  TsvLog(const fs::path& path, const std::string& header, bool append) {
    const bool fresh = !append || !fs::exists(path);
    out_.open(path, fresh ? std::ios::binary | std::ios::trunc : std::ios::binary | std::ios::app);
    if (!out_) throw IoError("cannot write '" + path.string() + "'");
    if (fresh) out_ << header << '\n';
  }
  std::ofstream& row() { return out_; }

 private:
  std::ofstream out_;
};

std::vector<ManifestEntry> entries_of(const Manifest& manifest, Split split, const fs::path& path) {
  if (manifest.empty()) throw ValidationError("manifest '" + path.string() + "' is empty");
  std::vector<ManifestEntry> out = manifest.filter(split).entries;
  if (out.empty()) {
    throw ValidationError("manifest '" + path.string() + "' has no " + to_string(split) + " lines");
  }
  return out;
}

std::vector<TranscribedLine> load_labeled(const std::vector<ManifestEntry>& entries, int height) {
  std::vector<TranscribedLine> lines;
  for (const auto& e : entries) {
    TranscribedLine line;
    line.image = load_line(e.image, height);
    line.text = read_transcript(e.transcript);
    lines.push_back(std::move(line));
  }
  return lines;
}

RunConfig config_from(const Checkpoint& c) { return RunConfig::parse(c.meta_at("config"), "checkpoint config"); }

Checkpoint make_checkpoint(const ParameterSet<float>& params, const AdamState<float>& adam, const RunConfig& config,
                           const std::string& kind) {
  Checkpoint c;
  c.params = params;
  c.has_optimizer = true;
  c.adam = adam;
  c.meta["kind"] = kind;
  c.meta["config"] = config.to_text();
  c.meta["seed"] = std::to_string(config.seed);
  return c;
}

}  // namespace

RunConfig resolve_config(const RunOptions& options, std::ostream& log) {
  RunConfig config = options.config.empty() ? RunConfig{} : RunConfig::load(options.config);
  if (options.seed) config.seed = *options.seed;
  if (options.workers) config.workers = *options.workers;
  config.validate();
  log << "effective configuration"
      << (options.config.empty() ? " (defaults)" : " (" + options.config.string() + " + defaults)") << ":\n";
  std::string text = config.to_text();
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    log << "  " << text.substr(pos, nl - pos) << '\n';
    pos = nl + 1;
  }
  return config;
}

void cmd_pretrain(const RunOptions& options, const fs::path& manifest_path, const fs::path& out_dir,
                  const fs::path& resume, std::ostream& log) {
  RunConfig config = resolve_config(options, log);
  const Manifest manifest = read_manifest(manifest_path);
  const std::vector<ManifestEntry> entries = entries_of(manifest, Split::kPretrain, manifest_path);

  std::optional<Checkpoint> resumed;
  if (!resume.empty()) {
    resumed = load_checkpoint(resume);
    if (resumed->meta_at("kind") != kKindPretrain) throw ValidationError("'" + resume.string() + "' is not a pretraining checkpoint");
    const RunConfig before = config_from(*resumed);
    if (!(before.model == config.model)) throw ValidationError("resumed checkpoint was trained with a different model configuration");
    if (before.seed != config.seed) {
      throw ValidationError("resumed checkpoint used seed " + std::to_string(before.seed) + ", this run uses " +
                            std::to_string(config.seed));
    }
    if (!resumed->has_optimizer) throw ValidationError("resumed checkpoint lacks optimizer state");
  }
  ensure_dir(out_dir);
  write_text(out_dir / outputs::kConfig, config.to_text());

  std::vector<LineImage> lines;
  int dropped = 0;
  for (const auto& e : entries) {
    LineImage line = load_line(e.image, config.model.image_height);
    if (ratio_filter(line, config.ratio_lo, config.ratio_hi)) {
      lines.push_back(std::move(line));
    } else {
      ++dropped;
    }
  }
  log << "pretraining on " << lines.size() << " lines (" << dropped << " outside width/height ratio ["
      << config.ratio_lo << ", " << config.ratio_hi << "])\n";
  if (lines.empty()) throw ValidationError("no pretraining line passes the width/height ratio filter");

  const Pretrainer trainer(config.model, config.pretrain_settings(), std::move(lines));
  PretrainProgress progress;
  if (resumed) {
    progress.params = resumed->params;
    progress.adam = resumed->adam;
    progress.adam.settings = config.adam;
    progress.update = std::stoll(resumed->meta_at("update"));
    log << "resuming at update " << progress.update << '\n';
  } else {
    progress = trainer.initial_progress();
  }

  const auto save = [&](const fs::path& path, const PretrainProgress& p) {
    Checkpoint c = make_checkpoint(p.params, p.adam, config, kKindPretrain);
    c.meta["update"] = std::to_string(p.update);
    save_checkpoint(path, c);
  };
  TsvLog metrics(out_dir / outputs::kPretrainMetrics, "update\tlr\tloss\tcontrastive_accuracy\tskipped_lines",
                 resumed.has_value());
  const std::int64_t total = config.pretrain_updates;
  const std::int64_t stop = config.stop_after_updates > 0 ? std::min(config.stop_after_updates, total) : total;
  trainer.run(progress, stop, [&](const PretrainMetrics& m, const PretrainProgress& p) {
    metrics.row() << m.update << '\t' << m.lr << '\t' << m.loss << '\t' << m.accuracy << '\t' << m.skipped_lines
                  << '\n';
    if (m.update % 50 == 0 || m.update == total) {
      log << "update " << m.update << "/" << total << "  lr " << m.lr << "  loss " << m.loss << "  acc " << m.accuracy
          << '\n';
    }
    if (config.checkpoint_every > 0 && m.update % config.checkpoint_every == 0) save(out_dir / outputs::kLatest, p);
  });
  metrics.row().flush();
  if (progress.update < total) {
    save(out_dir / outputs::kLatest, progress);
    log << "stopped at update " << progress.update << "; resume with --init " << (out_dir / outputs::kLatest).string()
        << '\n';
    return;
  }
  save(out_dir / outputs::kPretrained, progress);
  log << "wrote " << (out_dir / outputs::kPretrained).string() << '\n';
}

void cmd_finetune(const RunOptions& options, const fs::path& manifest_path, const std::string& init,
                  const fs::path& out_dir, std::ostream& log) {
  RunConfig config = resolve_config(options, log);
  if (init.empty()) throw ValidationError("fine-tuning needs --init <checkpoint> or --init scratch");
  const bool scratch = init == "scratch";
  std::optional<Checkpoint> pretrained;
  if (!scratch) {
    pretrained = load_checkpoint(init);
    if (pretrained->meta_at("kind") != kKindPretrain) {
      throw ValidationError("'" + init + "' is not a pretraining checkpoint");
    }
  }
  const Manifest manifest = read_manifest(manifest_path);
  std::vector<TranscribedLine> lines =
      load_labeled(entries_of(manifest, Split::kFinetune, manifest_path), config.model.image_height);
  const Vocabulary vocab = build_vocab(lines);
  ensure_dir(out_dir);
  write_text(out_dir / outputs::kConfig, config.to_text());

  const InitKind kind = scratch ? InitKind::kScratch : InitKind::kPretrained;
  Finetuner trainer(config.model, config.finetune_settings(), kind, vocab, std::move(lines));
  for (const auto& id : trainer.infeasible_lines()) {
    log << "warning: line '" << id << "' is too narrow for its transcript; it is skipped\n";
  }
  FinetuneProgress progress = trainer.initial_progress(pretrained ? &pretrained->params : nullptr);
  log << "fine-tuning from " << to_string(kind) << ": " << vocab.size() << " symbols (incl. blank), "
      << trainer.total_updates() << " updates over " << config.finetune_epochs << " epochs\n";

  const auto save = [&](const fs::path& path, const FinetuneProgress& p) {
    Checkpoint c = make_checkpoint(p.params, p.adam, config, kKindFinetune);
    c.meta["init"] = to_string(kind);
    c.meta["vocab"] = vocab.serialize();
    c.meta["update"] = std::to_string(p.update);
    c.meta["epoch"] = std::to_string(p.epoch);
    save_checkpoint(path, c);
  };
  TsvLog metrics(out_dir / outputs::kFinetuneMetrics, "epoch\tlr\tloss\ttrain_cer", false);
  std::int64_t last_saved = 0;
  trainer.run(progress, [&](const FinetuneMetrics& m, const FinetuneProgress& p) {
    metrics.row() << m.epoch << '\t' << m.lr << '\t' << m.loss << '\t' << m.probe_cer << '\n';
    if ((m.epoch + 1) % 25 == 0 || p.epoch == config.finetune_epochs) {
      log << "epoch " << m.epoch + 1 << "/" << config.finetune_epochs << "  lr " << m.lr << "  ctc " << m.loss
          << "  train CER " << m.probe_cer << '\n';
    }
    if (kind == InitKind::kPretrained && p.epoch == config.freeze_epochs && p.epoch < config.finetune_epochs) {
      save(out_dir / outputs::kFreezeEnd, p);
    }
    if (config.checkpoint_every > 0 && p.update / config.checkpoint_every > last_saved / config.checkpoint_every) {
      save(out_dir / outputs::kLatest, p);
    }
    last_saved = p.update;
  });
  metrics.row().flush();
  save(out_dir / outputs::kFinetuned, progress);
  log << "wrote " << (out_dir / outputs::kFinetuned).string() << '\n';
}

LoadedModel load_model(const fs::path& path) {
  LoadedModel m;
  m.checkpoint = load_checkpoint(path);
  if (m.checkpoint.meta_at("kind") != kKindFinetune || !m.checkpoint.meta.count("vocab")) {
    throw ValidationError("'" + path.string() + "' is a pretraining checkpoint without a vocabulary projection");
  }
  m.config = config_from(m.checkpoint);
  m.vocab = Vocabulary::deserialize(m.checkpoint.meta_at("vocab"));
  const std::vector<std::string> diff = shape_diff(m.checkpoint.params, m.config.model);
  if (!diff.empty()) throw ValidationError("checkpoint parameters do not match its configuration: " + diff.front());
  return m;
}

std::vector<std::string> cmd_transcribe(const fs::path& checkpoint, const std::vector<fs::path>& inputs) {
  const LoadedModel model = load_model(checkpoint);
  std::vector<fs::path> images;
  for (const auto& in : inputs) {
    if (in.extension() == ".tsv") {
      for (const auto& e : read_manifest(in).entries) images.push_back(e.image);
    } else {
      images.push_back(in);
    }
  }
  std::vector<std::string> out;
  for (const auto& path : images) {
    const LineImage line = load_line(path, model.config.model.image_height);
    out.push_back(codepoints_to_utf8(transcribe_line(model.checkpoint.params, model.config.model, model.vocab, line)));
  }
  return out;
}

CerReport cmd_evaluate(const fs::path& checkpoint, const fs::path& manifest_path, const fs::path& report_path,
                       std::ostream& log) {
  const LoadedModel model = load_model(checkpoint);
  const Manifest manifest = read_manifest(manifest_path);
  const std::vector<TranscribedLine> lines =
      load_labeled(entries_of(manifest, Split::kTest, manifest_path), model.config.model.image_height);
  const CerReport report = evaluate(model.checkpoint.params, model.config.model, model.vocab, lines);
  if (!report_path.empty()) {
    if (report_path.has_parent_path()) ensure_dir(report_path.parent_path());
    write_report(report_path, report);
    log << "wrote " << report_path.string() << '\n';
  }
  return report;
}

Manifest cmd_synth(const fs::path& synth_config, const fs::path& out_dir, std::optional<std::uint64_t> seed,
                   std::ostream& log) {
  SynthConfig config = synth_config.empty() ? SynthConfig{} : SynthConfig::load(synth_config);
  if (seed) config.seed = *seed;
  config.validate();
  ensure_dir(out_dir);
  const Manifest m = synth_corpus(config, out_dir);
  log << "wrote " << m.filter(Split::kPretrain).size() << " pretrain, " << m.filter(Split::kFinetune).size()
      << " finetune and " << m.filter(Split::kTest).size() << " test lines to " << out_dir.string() << '\n';
  return m;
}

int exit_code(const std::exception& error) {
  if (dynamic_cast<const ValidationError*>(&error)) return 1;
  if (dynamic_cast<const IoError*>(&error)) return 2;
  if (dynamic_cast<const NumericalError*>(&error)) return 3;
  return 1;
}

}  // namespace lacuna
