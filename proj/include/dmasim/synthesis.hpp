// SPDX-License-Identifier: Apache-2.0
//
// dmasim - coupled-dipole simulation of cavity-backed dynamic metasurface antennas
// Copyright 2026 The dmasim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dmasim/forward.hpp"
#include "dmasim/radiation.hpp"

namespace dmasim {

// Beamforming cost on a normalized pattern:
//   cost = -mean_target |E|^2 + w * mean_complement |E|^2   (lower is better)
struct BeamObjective {
    std::shared_ptr<const RoiGrid> roi;
    std::vector<std::size_t> target;
    double sidelobe_weight = 1.0;

    // Throws DomainError unless target is a nonempty strict subset of the ROI and w >= 0.
    void validate() const;
};

// ARC ROI (181 one-degree samples at 10 m), target = the 5 samples centred on +20 degrees.
BeamObjective default_beam_objective();

// Indices of the arc samples within half_width_deg of center_deg.
std::vector<std::size_t> arc_target(const RoiGrid& arc, double center_deg, double half_width_deg);

// Throws DomainError when f is not sampled on obj.roi or not normalized.
double objective_eval(const FieldMap& f, const BeamObjective& obj);

struct ObjectiveValue {
    double cost = 0.0;
    RVector gradient;  // d cost / d c, one entry per meta-atom
    CVector field;     // unnormalized
};

// Cost and exact gradient through solve, radiation, and normalization; one adjoint solve.
ObjectiveValue objective_and_gradient(const ForwardModel& fm, const TuningState& s, const BeamObjective& obj);

RVector objective_gradient(const DmaTopology& t, const TuningState& s, const LorentzianModel& model,
                           const BeamObjective& obj, CouplingMode mode);

struct SynthesisOptions {
    int restarts = 8;
    int iterations = 2000;
    double step = 0.02;  // peak Adam step in logit space, cosine-decayed to zero
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct OptimizationResult {
    TuningState best_configuration;
    double best_cost = 0.0;
    std::vector<double> cost_trace;   // winning restart, cost at iterations 0..iterations
    std::vector<double> best_so_far;  // running minimum of cost_trace
    BeamMetrics metrics;              // of the best configuration
    int restarts_used = 0;
    int best_restart = 0;
    std::uint64_t seed = 0;
};

// Adam descent on logits u with c = 1 / (1 + exp(-u)), so every evaluated configuration lies in
// [0, 1]^N. Restarts run in parallel; the lowest cost wins, ties go to the lowest restart index.
OptimizationResult synthesize(const DmaTopology& t, const LorentzianModel& model, const BeamObjective& obj,
                              const SynthesisOptions& opts, CouplingMode mode);

}  // namespace dmasim
