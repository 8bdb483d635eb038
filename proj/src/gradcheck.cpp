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

#include "otsnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "otsnet/errors.hpp"

namespace otsnet {

std::string GradcheckReport::worst() const {
  const GradcheckEntry* worst = nullptr;
  for (const auto& e : entries) {
    if (!worst || e.max_rel_error > worst->max_rel_error) worst = &e;
  }
  return worst ? worst->name : std::string();
}

GradcheckReport gradcheck(const std::function<Tensor()>& loss, const std::vector<Parameter>& params,
                          const GradcheckOptions& options) {
  for (const auto& p : params) {
    Tensor t = p.tensor;
    t.zero_grad();
  }
  Tensor base = loss();
  const double base_value = base.item();
  base.backward();

  {
    NoGradGuard guard;
    const double again = loss().item();
    if (again != base_value) {
      throw ContractError("gradcheck: loss is not deterministic (" + std::to_string(base_value) + " vs " +
                          std::to_string(again) + "); freeze stochastic nodes first");
    }
  }

  GradcheckReport report;
  report.rel_tol = options.rel_tol;
  NoGradGuard guard;
  for (const auto& p : params) {
    Tensor t = p.tensor;
    GradcheckEntry entry;
    entry.name = p.name;
    const std::vector<double> analytic = t.grad().empty() ? std::vector<double>(t.numel(), 0.0)
                                                          : std::vector<double>(t.grad().begin(), t.grad().end());
    auto values = t.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + options.step;
      const double plus = loss().item();
      values[i] = saved - options.step;
      const double minus = loss().item();
      values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), options.abs_floor});
      const double err = std::abs(analytic[i] - numeric) / denom;
      if (err > entry.max_rel_error || i == 0) {
        entry.max_rel_error = err;
        entry.worst_index = i;
        entry.analytic = analytic[i];
        entry.numeric = numeric;
      }
    }
    report.passed = report.passed && entry.max_rel_error <= options.rel_tol;
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace otsnet
