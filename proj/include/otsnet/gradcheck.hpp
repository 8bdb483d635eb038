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

#include <functional>
#include <string>
#include <vector>

#include "otsnet/parameters.hpp"
#include "otsnet/tensor.hpp"

namespace otsnet {

struct GradcheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradcheckReport {
  std::vector<GradcheckEntry> entries;
  double rel_tol = 0.0;
  bool passed = true;

  // Name of the parameter with the largest error, empty when none.
  std::string worst() const;
};

struct GradcheckOptions {
  double step = 1e-4;
  double rel_tol = 1e-4;
  // Denominator floor: error = |a - n| / max(|a|, |n|, abs_floor). Keeps
  // elements whose true gradient is ~0 from turning round-off into a
  // spurious relative failure.
  double abs_floor = 1e-6;
};

// Central-difference check of every element of every parameter against
// the gradient produced by backward(). `loss` must be deterministic; two
// evaluations that disagree raise ContractError (oracle invalid).
GradcheckReport gradcheck(const std::function<Tensor()>& loss, const std::vector<Parameter>& params,
                          const GradcheckOptions& options = {});

}  // namespace otsnet
