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

#include "otsnet/exports.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "otsnet/errors.hpp"
#include "otsnet/image_io.hpp"
#include "otsnet/vocab.hpp"

namespace otsnet {

std::string attention_file_stem(const AttentionRecord& record) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "layer%02d_%s_head%d_sample%zu", record.layer, attention_kind_name(record.kind),
                record.head, record.batch);
  return buf;
}

std::vector<std::filesystem::path> export_attention(const AttentionSink& records, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& r : records) {
    if (r.map.size() != r.rows * r.cols) throw DimensionError("attention record map size does not match rows x cols");
    const auto stem = dir / attention_file_stem(r);
    std::ofstream out(stem.string() + ".txt");
    if (!out) throw ContractError("cannot write " + stem.string() + ".txt");
    out.precision(17);
    out << "# layer " << r.layer << "\n# head " << r.head << "\n# kind " << attention_kind_name(r.kind) << "\n# rows "
        << r.rows << "\n# cols " << r.cols << "\n# lambda " << r.lambda << "\n# row_sums";
    for (std::size_t i = 0; i < r.rows; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < r.cols; ++j) s += r.map[i * r.cols + j];
      out << ' ' << s;
    }
    out << '\n';
    for (std::size_t i = 0; i < r.rows; ++i) {
      for (std::size_t j = 0; j < r.cols; ++j) out << (j ? " " : "") << r.map[i * r.cols + j];
      out << '\n';
    }
    write_pgm_normalized(stem.string() + ".pgm", r.rows, r.cols, r.map);
    written.push_back(stem.string() + ".txt");
  }
  return written;
}

AttentionFile read_attention_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot read " + path.string());
  AttentionFile f;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    if (line.rfind("# ", 0) == 0) {
      std::string hash, field;
      ls >> hash >> field;
      if (field == "layer") ls >> f.layer;
      else if (field == "head") ls >> f.head;
      else if (field == "kind") ls >> f.kind;
      else if (field == "rows") ls >> f.rows;
      else if (field == "cols") ls >> f.cols;
      else if (field == "lambda") ls >> f.lambda;
      else if (field == "row_sums") for (double v; ls >> v;) f.row_sums.push_back(v);
      continue;
    }
    for (double v; ls >> v;) f.map.push_back(v);
  }
  if (f.map.size() != f.rows * f.cols || f.row_sums.size() != f.rows) {
    throw ContractError(path.string() + ": malformed attention export");
  }
  return f;
}

void write_feature_rows(std::ostream& out, const Tensor& semantic, const std::vector<std::string>& labels) {
  if (semantic.dim() != 3 || semantic.size(0) != labels.size()) {
    throw DimensionError("feature export: " + std::to_string(labels.size()) + " labels for features " +
                         shape_str(semantic.shape()));
  }
  const std::size_t slots = semantic.size(1), dim = semantic.size(2);
  const auto v = semantic.data();
  const auto old = out.precision(17);
  for (std::size_t b = 0; b < labels.size(); ++b) {
    const auto ids = CharVocab::encode(labels[b]);
    for (std::size_t t = 0; t < ids.size() && t < slots; ++t) {
      out << ids[t];
      const double* row = v.data() + (b * slots + t) * dim;
      for (std::size_t k = 0; k < dim; ++k) out << ',' << row[k];
      out << '\n';
    }
  }
  out.precision(old);
}

std::string recognition_line(const std::string& source, const Recognition& r) {
  std::ostringstream out;
  out.precision(6);
  out << source << '\t' << r.text() << '\t' << std::fixed << r.mean_confidence() << '\t';
  for (std::size_t i = 0; i < r.confidences.size(); ++i) out << (i ? ";" : "") << r.confidences[i];
  out << '\t' << stop_reason_name(r.stop);
  return out.str();
}

}  // namespace otsnet
