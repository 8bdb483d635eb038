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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "otsnet/attention.hpp"
#include "otsnet/decoder.hpp"
#include "otsnet/tensor.hpp"

namespace otsnet {

/// File stem for a record, e.g. "layer03_dmha_diff_head1_sample0".
std::string attention_file_stem(const AttentionRecord& record);

/// Writes one text file and one normalized graymap per record. The text
/// header carries layer, head, kind, rows, cols, lambda and the row sums;
/// the body holds the map rows. Returns the text files written.
std::vector<std::filesystem::path> export_attention(const AttentionSink& records, const std::filesystem::path& dir);

/// Parsed form of an attention text export.
struct AttentionFile {
  int layer = 0;
  int head = 0;
  std::string kind;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double lambda = 0.0;
  std::vector<double> row_sums;
  std::vector<double> map;
};
AttentionFile read_attention_file(const std::filesystem::path& path);

/// Rows "label_char_id,d0,d1,..." for the first |label| slots of each
/// sample. `semantic` is [B, T, D].
void write_feature_rows(std::ostream& out, const Tensor& semantic, const std::vector<std::string>& labels);

/// "path<TAB>text<TAB>mean_confidence<TAB>c1;c2;...<TAB>stop".
std::string recognition_line(const std::string& source, const Recognition& r);

}  // namespace otsnet
