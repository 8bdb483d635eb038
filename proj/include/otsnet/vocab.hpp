/* Copyright 2026 The OTSNet Desk Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace otsnet {

/// 96 recognition classes followed by three framing ids.
///
/// Classes 0..94 are the printable ASCII characters ' '..'~' in code-point
/// order; class 95 is a catch-all unknown glyph that no renderer emits.
class CharVocab {
 public:
  static constexpr int kClasses = 96;
  static constexpr int kUnknown = 95;
  static constexpr int kBos = 96;
  static constexpr int kEos = 97;
  static constexpr int kPad = 98;
  static constexpr int kSize = 99;

  static bool is_class(int id) { return id >= 0 && id < kClasses; }
  static bool contains(char c) { return c >= ' ' && c <= '~'; }
  // IndexError for characters outside the class table.
  static int id_of(char c);
  // Text for a class id; framing ids render as "".
  static std::string text_of(int id);
  static std::vector<int> encode(std::string_view text);
  static std::string decode(const std::vector<int>& ids);
};

/// Teacher-forcing frames for a batch of texts, each row padded to `length`.
///
///   decoder_input : BOS c0 c1 ... c_{n-1} PAD ...
///   decoder_target: c0 c1 ... c_{n-1} EOS PAD ...  (EOS dropped when n == length)
///   sq_target     : c0 c1 ... c_{n-1} PAD ...      (slot t aligned with char t)
struct LabelBatch {
  std::size_t batch = 0;
  std::size_t length = 0;
  std::vector<int> decoder_input;
  std::vector<int> decoder_target;
  std::vector<int> sq_target;

  // IndexError when a text exceeds `length` or has an unknown character.
  static LabelBatch frame(const std::vector<std::string>& texts, std::size_t length);
};

}  // namespace otsnet
