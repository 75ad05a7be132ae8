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

#include "lacuna/corpus/line_image.hpp"

#include <array>
#include <cmath>

#include "lacuna/corpus/png_io.hpp"

namespace lacuna {

int otsu_threshold(const Bitmap& gray) {
  std::array<double, 256> hist{};
  for (long i = 0; i < gray.size(); ++i) hist[gray.data()[i]] += 1.0;
  const double total = static_cast<double>(gray.size());
  double sum_all = 0.0;
  for (int v = 0; v < 256; ++v) sum_all += v * hist[v];

  double w0 = 0.0;
  double sum0 = 0.0;
  double best = -1.0;
  int best_t = -1;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double mu0 = sum0 / w0;
    const double mu1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

Bitmap resize_bilinear(const Bitmap& gray, int height, int width) {
  if (height < 1 || width < 1) throw ValidationError("resize target must be at least 1x1");
  const long src_h = gray.rows();
  const long src_w = gray.cols();
  Bitmap out(height, width);
  const double sy = static_cast<double>(src_h) / height;
  const double sx = static_cast<double>(src_w) / width;
  for (int y = 0; y < height; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(src_h - 1));
    const long y0 = static_cast<long>(std::floor(fy));
    const long y1 = std::min(y0 + 1, src_h - 1);
    const double dy = fy - y0;
    for (int x = 0; x < width; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(src_w - 1));
      const long x0 = static_cast<long>(std::floor(fx));
      const long x1 = std::min(x0 + 1, src_w - 1);
      const double dx = fx - x0;
      const double top = gray(y0, x0) * (1 - dx) + gray(y0, x1) * dx;
      const double bottom = gray(y1, x0) * (1 - dx) + gray(y1, x1) * dx;
      out(y, x) = static_cast<std::uint8_t>(std::lround(top * (1 - dy) + bottom * dy));
    }
  }
  return out;
}

LineImage preprocess_line(const Bitmap& gray, int target_height, std::string source_id) {
  if (gray.rows() < 1 || gray.cols() < 1) throw ValidationError("empty line image '" + source_id + "'");
  Bitmap scaled;
  if (gray.rows() == target_height) {
    scaled = gray;
  } else {
    const long width = std::lround(static_cast<double>(gray.cols()) * target_height / static_cast<double>(gray.rows()));
    if (width < 1) throw ValidationError("line image '" + source_id + "' has zero width after scaling");
    scaled = resize_bilinear(gray, target_height, static_cast<int>(width));
  }
  if (scaled.cols() < 2) throw ValidationError("line image '" + source_id + "' narrower than 2 px after scaling");
  const int t = otsu_threshold(scaled);
  LineImage out;
  out.source_id = std::move(source_id);
  out.pixels = Bitmap::Zero(scaled.rows(), scaled.cols());
  if (t >= 0) {
    for (long i = 0; i < scaled.size(); ++i) out.pixels.data()[i] = scaled.data()[i] <= t ? 1 : 0;
  }
  return out;
}

LineImage load_line(const std::filesystem::path& path, int target_height) {
  return preprocess_line(read_png_gray(path), target_height, path.stem().string());
}

bool ratio_filter(const LineImage& image, double lo, double hi) {
  if (image.height() == 0) return false;
  const double ratio = static_cast<double>(image.width_px()) / image.height();
  return lo <= ratio && ratio <= hi;
}

Bitmap to_gray(const Bitmap& binary) {
  Bitmap out(binary.rows(), binary.cols());
  for (long i = 0; i < binary.size(); ++i) out.data()[i] = binary.data()[i] ? 0 : 255;
  return out;
}

}  // namespace lacuna
