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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lacuna/corpus/line_image.hpp"
#include "lacuna/corpus/vocabulary.hpp"
#include "lacuna/encoder/encoder.hpp"

namespace lacuna {

struct CerLine {
  std::string source_id;
  int edit_distance = 0;
  int ref_len = 0;
  double cer = 0.0;
  std::u32string hypothesis;
};

/// Per-line CER plus the micro-averaged aggregate.
struct CerReport {
  std::vector<CerLine> lines;
  long total_edits = 0;
  long total_ref = 0;

  void add(CerLine line);
  /// total_edits / total_ref; 0 for an empty report.
  double aggregate() const;
};

/// Transcribes one line: encoder, vocabulary projection, greedy decoding.
std::u32string transcribe_line(const ParameterSet<float>& params, const ModelConfig& cfg, const Vocabulary& vocab,
                               const LineImage& line);

/// Decodes and scores every line, in input order.
CerReport evaluate(const ParameterSet<float>& params, const ModelConfig& cfg, const Vocabulary& vocab,
                   const std::vector<TranscribedLine>& lines);

/// TSV with header `source_id edit_distance ref_len cer`, one row per line and
/// a final `<aggregate>` row.
std::string report_tsv(const CerReport& report);
void write_report(const std::filesystem::path& path, const CerReport& report);

/// Aggregate as a percentage with one decimal, e.g. "CER 14.8% (37/250 over 10 lines)".
std::string summary(const CerReport& report);

}  // namespace lacuna
