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

#include "otsnet/vocab.hpp"

#include "otsnet/errors.hpp"

namespace otsnet {

int CharVocab::id_of(char c) {
  if (!contains(c)) {
    throw IndexError("character code " + std::to_string(static_cast<int>(static_cast<unsigned char>(c))) +
                     " is outside the vocabulary");
  }
  return c - ' ';
}

std::string CharVocab::text_of(int id) {
  if (id >= 0 && id < kUnknown) return std::string(1, static_cast<char>(' ' + id));
  if (id == kUnknown) return "\xef\xbf\xbd";  // U+FFFD
  if (id >= kClasses && id < kSize) return "";
  throw IndexError("id " + std::to_string(id) + " outside the vocabulary");
}

std::vector<int> CharVocab::encode(std::string_view text) {
  std::vector<int> ids;
  ids.reserve(text.size());
  for (char c : text) ids.push_back(id_of(c));
  return ids;
}

std::string CharVocab::decode(const std::vector<int>& ids) {
  std::string out;
  for (int id : ids) out += text_of(id);
  return out;
}

LabelBatch LabelBatch::frame(const std::vector<std::string>& texts, std::size_t length) {
  LabelBatch out;
  out.batch = texts.size();
  out.length = length;
  out.decoder_input.assign(out.batch * length, CharVocab::kPad);
  out.decoder_target.assign(out.batch * length, CharVocab::kPad);
  out.sq_target.assign(out.batch * length, CharVocab::kPad);
  for (std::size_t b = 0; b < texts.size(); ++b) {
    const auto ids = CharVocab::encode(texts[b]);
    if (ids.size() > length) {
      throw IndexError("label '" + texts[b] + "' is longer than the maximum length " + std::to_string(length));
    }
    int* input = out.decoder_input.data() + b * length;
    int* target = out.decoder_target.data() + b * length;
    int* sq = out.sq_target.data() + b * length;
    input[0] = CharVocab::kBos;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      target[i] = ids[i];
      sq[i] = ids[i];
      if (i + 1 < length) input[i + 1] = ids[i];
    }
    if (ids.size() < length) target[ids.size()] = CharVocab::kEos;
  }
  return out;
}

}  // namespace otsnet
