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

#include "lacuna/types.hpp"

namespace lacuna {

/// Reads any PNG as 8-bit grayscale (color is converted, alpha dropped).
/// Throws IoError if the file cannot be read or decoded.
Bitmap read_png_gray(const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG. Output bytes depend only on the pixels.
void write_png_gray(const std::filesystem::path& path, const Bitmap& gray);

}  // namespace lacuna
