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

#include "lacuna/types.hpp"

namespace lacuna {

inline constexpr int kLineHeight = 96;

/// A binarized text line, height fixed by preprocessing (1 = ink).
struct LineImage {
  Bitmap pixels;
  std::string source_id;

  int height() const { return static_cast<int>(pixels.rows()); }
  int width_px() const { return static_cast<int>(pixels.cols()); }
};

/// A line image with its NFD-normalized transcript.
struct TranscribedLine {
  LineImage image;
  std::u32string text;
};

/// Global Otsu threshold over the 256-level histogram. Pixels <= threshold
/// are the dark class. Returns -1 for a constant image (single class).
/// Ties between thresholds resolve to the lowest one.
int otsu_threshold(const Bitmap& gray);

/// Bilinear resampling with pixel-center alignment.
Bitmap resize_bilinear(const Bitmap& gray, int height, int width);

/// Scales to `target_height` preserving aspect ratio (width rounded to
/// nearest), then binarizes with Otsu: dark pixels become ink (1).
/// Images already at the target height are not resampled.
LineImage preprocess_line(const Bitmap& gray, int target_height, std::string source_id);

/// Reads a grayscale raster and preprocesses it.
LineImage load_line(const std::filesystem::path& path, int target_height = kLineHeight);

/// Keep iff lo <= width / height <= hi.
bool ratio_filter(const LineImage& image, double lo = 6.0, double hi = 23.0);

/// Renders a binary line back to 8-bit gray (ink 0, page 255).
Bitmap to_gray(const Bitmap& binary);

}  // namespace lacuna
