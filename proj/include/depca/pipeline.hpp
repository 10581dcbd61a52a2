/*
 * Copyright 2026 The depca authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DEPCA_PIPELINE_HPP_
#define DEPCA_PIPELINE_HPP_

#include "depca/config.hpp"

namespace depca::cli
{

/// Execute one experiment. Artifacts land in config.output_dir together
/// with a manifest.json recording the config hash, seed, version and
/// per-stage wall clock. Throws the library error types on failure.
void run(const ExperimentConfig& config);

/// Draws T samples of the 2-D source model with the inverse-Gamma weight
/// laws matched to the dependency parameters (m11, m22, m12); the raw,
/// unstandardized sources used by the approx-check protocol.
Eigen::MatrixXd sample_model_sources_2d(double m11, double m22, double m12, long T, Rng& rng);

}  // namespace depca::cli

#endif  // DEPCA_PIPELINE_HPP_
