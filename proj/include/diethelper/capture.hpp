// Copyright 2026 The Diet Helper Authors
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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "diethelper/transcript.hpp"

namespace diethelper {

// Image held in memory; it is never written to disk by this library.
struct ImageBytes {
  std::vector<std::byte> data;
  /// Optional original file name, used by fixture adapters to find sidecars.
  std::string name;
};

struct ImageFile {
  std::filesystem::path path;
};

struct FragmentList {
  std::vector<TextFragment> fragments;
};

struct RawText {
  std::string text;
};

using CaptureRequest = std::variant<ImageBytes, ImageFile, FragmentList, RawText>;

struct CaptureOutcome {
  std::vector<TextFragment> fragments;
};

// Converts an image into text fragments in detector order. Implementations
// must be safe to call concurrently.
class OcrAdapter {
 public:
  virtual ~OcrAdapter() = default;
  virtual std::vector<TextFragment> recognize(std::span<const std::byte> image,
                                              std::string_view name_hint) const = 0;
};

// Runs an external program for every image: image bytes on stdin, one
// fragment per line on stdout. A non-zero exit status, a failed launch or a
// timeout raise Errc::adapter_unavailable.
class CommandOcrAdapter final : public OcrAdapter {
 public:
  explicit CommandOcrAdapter(std::vector<std::string> argv,
                             std::chrono::milliseconds timeout = std::chrono::seconds(30));

  std::vector<TextFragment> recognize(std::span<const std::byte> image,
                                      std::string_view name_hint) const override;

 private:
  std::vector<std::string> argv_;
  std::chrono::milliseconds timeout_;
};

// Test adapter backed by transcript files. For an image named "x.png" it
// reads "<dir>/x.png.txt"; for anonymous bytes it reads "<dir>/<hex digest>.txt"
// (BLAKE2b-128 of the bytes). Each line is one fragment; a missing sidecar
// means no text was detected.
class FixtureOcrAdapter final : public OcrAdapter {
 public:
  explicit FixtureOcrAdapter(std::filesystem::path directory);

  std::vector<TextFragment> recognize(std::span<const std::byte> image,
                                      std::string_view name_hint) const override;

  static std::string digest(std::span<const std::byte> image);

 private:
  std::filesystem::path directory_;
};

/// Splits command output into fragments: one per line, trailing '\r' removed,
/// no fragment for the text after a final newline.
std::vector<TextFragment> split_lines(std::string_view output);

/// Fragment and raw-text requests pass through untouched (raw text becomes a
/// single fragment); image requests go to `adapter`. Throws
/// Error(Errc::no_text_found) when no fragment has text, and
/// Error(Errc::adapter_unavailable) for an image request without an adapter.
CaptureOutcome extract_fragments(const CaptureRequest& request,
                                 const OcrAdapter* adapter);

}  // namespace diethelper
