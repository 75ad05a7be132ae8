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

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 2 5        run only the listed ones
//
// Each result line is also appended to acceptance_results.txt in the working
// directory.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "criteria.hpp"

using namespace lacuna::acceptance;

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "CTC matches path enumeration", ctc_oracle},
      {2, "gradients match central differences", gradient_fidelity},
      {3, "mask plans valid with target coverage", masking_properties},
      {4, "contrastive closed forms and chance accuracy", contrastive_closed_forms},
      {5, "extractor shapes match the shape oracle", shape_contract},
      {6, "learning-rate breakpoints and freeze checksum", schedule_contract},
      {7, "pre-training lowers fine-tuned CER", trend_reproduction},
      {8, "from-scratch overfit of 8 lines", overfit_sanity},
      {9, "identical seeds give identical artifacts", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char line[1024];
    std::snprintf(line, sizeof line, "criterion %d [%s]: %s (%.1fs) %s\n", c.id, c.name, out.pass ? "PASS" : "FAIL",
                  secs, out.detail.c_str());
    std::fputs(line, stdout);
    std::fflush(stdout);
    // Kept across runs so passing results stay visible when ctest hides stdout.
    if (std::FILE* log = std::fopen("acceptance_results.txt", "a")) {
      std::fputs(line, log);
      std::fclose(log);
    }
    if (!out.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
