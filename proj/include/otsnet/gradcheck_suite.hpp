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

#include <cstdint>
#include <string>
#include <vector>

#include "otsnet/gradcheck.hpp"
#include "otsnet/model.hpp"

namespace otsnet {

struct GradcheckCase {
  std::string name;
  GradcheckReport report;
};

/// Shrinks a model configuration to gradcheck size while keeping its
/// architectural switches (encoder variant, lambda_init, PAM/MMCV/SQ).
ModelConfig gradcheck_model_config(const ModelConfig& base);

/// Adds N(0, scale^2) noise to every parameter so no check sits at a
/// degenerate point such as zero lambda vectors or unit gains.
void jitter_parameters(ParameterStore& store, std::uint64_t seed, double scale);

/// Block-level checks (MHSA, DMHA, MHCA, quantizer chain with frozen noise,
/// one decoder layer) followed by the end-to-end loss on a one-sample batch.
std::vector<GradcheckCase> run_gradcheck_suite(const ModelConfig& base, std::uint64_t seed,
                                               const GradcheckOptions& options = {});

}  // namespace otsnet
