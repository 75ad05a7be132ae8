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

#include "lacuna/decode_eval/evaluate.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lacuna/decode_eval/cer.hpp"
#include "lacuna/decode_eval/decode.hpp"

namespace lacuna {

void CerReport::add(CerLine line) {
  total_edits += line.edit_distance;
  total_ref += line.ref_len;
  lines.push_back(std::move(line));
}

double CerReport::aggregate() const {
  return total_ref ? static_cast<double>(total_edits) / static_cast<double>(total_ref) : 0.0;
}

std::u32string transcribe_line(const ParameterSet<float>& params, const ModelConfig& cfg, const Vocabulary& vocab,
                               const LineImage& line) {
  if (!params.contains(param_names::kVocabWeight)) {
    throw ValidationError("checkpoint has no vocabulary projection; fine-tune it before transcribing");
  }
  if (params.at(param_names::kVocabWeight).rows() != vocab.size()) {
    throw ValidationError("vocabulary projection has " + std::to_string(params.at(param_names::kVocabWeight).rows()) +
                          " outputs, vocabulary has " + std::to_string(vocab.size()) + " symbols");
  }
  // No ink, or too narrow for a single frame: nothing can be emitted.
  if (line.pixels.cast<int>().sum() == 0 || line.width_px() < ShapePlan(cfg).min_width()) return {};
  return greedy_decode(line_logits(params, line.pixels, cfg), vocab).symbols;
}

CerReport evaluate(const ParameterSet<float>& params, const ModelConfig& cfg, const Vocabulary& vocab,
                   const std::vector<TranscribedLine>& lines) {
  CerReport report;
  for (const auto& line : lines) {
    if (line.text.empty()) throw ValidationError("line '" + line.image.source_id + "' has an empty reference");
    CerLine row;
    row.source_id = line.image.source_id;
    row.hypothesis = transcribe_line(params, cfg, vocab, line.image);
    row.edit_distance = edit_distance(row.hypothesis, line.text);
    row.ref_len = static_cast<int>(line.text.size());
    row.cer = static_cast<double>(row.edit_distance) / row.ref_len;
    report.add(std::move(row));
  }
  return report;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string report_tsv(const CerReport& report) {
  std::ostringstream out;
  out << "source_id\tedit_distance\tref_len\tcer\n";
  for (const auto& l : report.lines) {
    out << l.source_id << '\t' << l.edit_distance << '\t' << l.ref_len << '\t' << fixed(l.cer, 6) << '\n';
  }
  out << "<aggregate>\t" << report.total_edits << '\t' << report.total_ref << '\t' << fixed(report.aggregate(), 6)
      << '\n';
  return out.str();
}

void write_report(const std::filesystem::path& path, const CerReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report '" + path.string() + "'");
  out << report_tsv(report);
  if (!out) throw IoError("failed writing report '" + path.string() + "'");
}

std::string summary(const CerReport& report) {
  return "CER " + fixed(100.0 * report.aggregate(), 1) + "% (" + std::to_string(report.total_edits) + "/" +
         std::to_string(report.total_ref) + " over " + std::to_string(report.lines.size()) + " lines)";
}

}  // namespace lacuna
