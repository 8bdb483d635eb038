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

#include "otsnet/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <iterator>
#include <mutex>
#include <thread>
#include <numeric>

#include "otsnet/errors.hpp"
#include "otsnet/model.hpp"

namespace otsnet {

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double char_similarity(const std::string& prediction, const std::string& label) {
  const std::size_t longest = std::max(prediction.size(), label.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(prediction, label)) / static_cast<double>(longest);
}

Metrics score(const std::vector<std::string>& predictions, const std::vector<std::string>& labels) {
  if (predictions.size() != labels.size()) throw DimensionError("score: prediction and label counts differ");
  Metrics m;
  m.count = labels.size();
  if (m.count == 0) return m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double exact = predictions[i] == labels[i] ? 1.0 : 0.0;
    const double sim = char_similarity(predictions[i], labels[i]);
    m.sequence_accuracy += exact;
    m.character_accuracy += sim;
    auto& sub = m.subsets["len=" + std::to_string(labels[i].size())];
    ++sub.count;
    sub.sequence_accuracy += exact;
    sub.character_accuracy += sim;
  }
  m.sequence_accuracy /= static_cast<double>(m.count);
  m.character_accuracy /= static_cast<double>(m.count);
  for (auto& [key, sub] : m.subsets) {
    sub.sequence_accuracy /= static_cast<double>(sub.count);
    sub.character_accuracy /= static_cast<double>(sub.count);
  }
  return m;
}

std::vector<Recognition> recognize_all(const OtsNet& model, const std::vector<const std::vector<double>*>& images,
                                       std::size_t batch_size, std::size_t threads) {
  if (batch_size == 0) throw ConfigError("recognition batch size must be positive");
  const auto& cfg = model.config();
  const std::size_t batches = (images.size() + batch_size - 1) / batch_size;
  std::vector<std::vector<Recognition>> results(batches);
  auto run = [&](std::size_t k) {
    const std::size_t start = k * batch_size, end = std::min(images.size(), start + batch_size);
    std::vector<const std::vector<double>*> chunk(images.begin() + static_cast<std::ptrdiff_t>(start),
                                                  images.begin() + static_cast<std::ptrdiff_t>(end));
    results[k] = model.recognize(stack_images(chunk, cfg.image_height, cfg.image_width));
  };
  threads = std::max<std::size_t>(1, std::min(threads, batches));
  if (threads == 1) {
    for (std::size_t k = 0; k < batches; ++k) run(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < batches;) {
          try {
            run(k);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  std::vector<Recognition> out;
  out.reserve(images.size());
  for (auto& r : results) std::move(r.begin(), r.end(), std::back_inserter(out));
  return out;
}

Metrics evaluate(const OtsNet& model, const std::vector<SyntheticSample>& samples, std::size_t batch_size,
                 std::vector<Recognition>* recognitions, std::size_t threads) {
  std::vector<const std::vector<double>*> images;
  std::vector<std::string> predictions, labels;
  for (const auto& s : samples) {
    images.push_back(&s.image);
    labels.push_back(s.text);
  }
  auto results = recognize_all(model, images, batch_size, threads);
  for (const auto& r : results) predictions.push_back(r.text());
  if (recognitions) *recognitions = std::move(results);
  return score(predictions, labels);
}

}  // namespace otsnet
