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
#include <string>
#include <vector>

#include "dmasim/forward.hpp"
#include "dmasim/geometry.hpp"
#include "dmasim/radiation.hpp"

namespace dmasim {

// d(E / ||E||) / d c_n sampled on the ROI.
struct SensitivityMap {
    CVector values;
    std::size_t atom = 0;
    std::uint64_t configuration_fingerprint = 0;
    std::shared_ptr<const RoiGrid> roi;
};

SensitivityMap sensitivity_map(const DmaTopology& t, const TuningState& s, const LorentzianModel& model,
                               std::shared_ptr<const RoiGrid> roi, std::size_t atom, CouplingMode mode);

// n i.i.d. uniform configurations on [0, 1]^dim, a pure function of the seed.
std::vector<TuningState> sample_configs(std::uint64_t seed, std::size_t n, std::size_t dim);

struct Ensemble {
    std::size_t n_configs = 200;
    std::uint64_t seed = 1;
};

struct SensitivityStats {
    double sigma = 0.0;  // mean |d E_norm / d c_n| over samples, atoms and configurations
    RVector mean_map;    // same mean, resolved per ROI sample
    std::size_t n_configs = 0;
    std::size_t n_atoms = 0;
};

// Configurations are processed in fixed-size chunks reduced in index order, so the result does
// not depend on `threads`.
SensitivityStats mean_sensitivity(const ForwardModel& fm, const Ensemble& ensemble, unsigned threads = 1);
SensitivityStats mean_sensitivity(const DmaTopology& t, const Ensemble& ensemble, const LorentzianModel& model,
                                  std::shared_ptr<const RoiGrid> roi, CouplingMode mode, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Linear surrogate and linearity metric

// Alpha: complex alpha_n per atom plus bias (N + 1 complex unknowns).
// AlphaParts: Re alpha_n and Im alpha_n per atom plus bias (2N + 1 unknowns).
enum class FeatureSet { Alpha, AlphaParts };

std::string to_string(FeatureSet f);
std::size_t feature_count(FeatureSet f, std::size_t n_atoms);  // bias included

// Configurations with their unnormalized fields (one row per configuration).
struct FieldDataset {
    std::vector<TuningState> configs;
    CMatrix fields;
    LorentzianModel model;
    double frequency = 0.0;

    std::size_t size() const noexcept { return configs.size(); }
    FieldDataset subset(const std::vector<std::size_t>& rows) const;
};

FieldDataset simulate_dataset(const ForwardModel& fm, const std::vector<TuningState>& configs, unsigned threads = 1);

// Feature rows for a dataset; column 0 is the bias.
CMatrix design_matrix(const std::vector<TuningState>& configs, const LorentzianModel& model, double frequency,
                      FeatureSet features);

struct LinearSurrogate {
    CMatrix weights;  // ROI samples x features (bias excluded)
    CVector bias;     // per ROI sample
    FeatureSet features = FeatureSet::Alpha;
    LorentzianModel model;
    double frequency = 0.0;
    std::vector<std::uint64_t> training_ids;  // sorted configuration fingerprints
    std::uint64_t training_fingerprint = 0;

    // Predicted fields, one row per configuration.
    CMatrix predict(const std::vector<TuningState>& configs) const;
};

// Per-sample complex least squares over the dataset. Throws DomainError with fewer than
// 2 * feature_count samples and DegenerateRegression for a rank-deficient design.
LinearSurrogate fit_linear_surrogate(const FieldDataset& train, FeatureSet features = FeatureSet::Alpha);

// zeta = 10 log10(sum |E|^2 / sum |E - E_hat|^2) over the test set, clamped to +-kMaxDecibels.
// Throws DomainError for an empty test set or one sharing a configuration with the training set.
double linearity_metric(const LinearSurrogate& sur, const FieldDataset& test);

// Seeded 80/20-style split of [0, n) into (train, test); both sorted.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double train_fraction,
                                                                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// Trade-off sweep

struct SweepOptions {
    std::size_t n_topologies = 12;
    std::size_t n_configs = 200;
    std::uint64_t seed = 1;  // topology t uses rng_seed = seed + t; configurations derive from it too
    double train_fraction = 0.8;
    FeatureSet features = FeatureSet::Alpha;
    unsigned threads = 1;
};

struct TradeoffRecord {
    std::string level;
    std::size_t level_index = 0;
    double via_count = 0.0;  // mean over topologies
    double sigma = 0.0;
    double zeta_db = 0.0;
    std::size_t n_topologies = 0;
    std::size_t n_configs = 0;
    std::uint64_t seed = 0;
};

// Per-topology statistics behind one record, kept for medians and diagnostics.
struct TopologyStats {
    std::size_t level_index = 0;
    std::size_t topology_index = 0;
    std::size_t via_count = 0;
    double sigma = 0.0;
    double zeta_db = 0.0;
};

struct TradeoffResult {
    std::vector<TradeoffRecord> records;  // one per level, in level order
    std::vector<TopologyStats> per_topology;
};

// Configuration ensemble of topology t in a sweep. Levels share it, so they differ only in coupling.
std::uint64_t sweep_config_seed(std::uint64_t sweep_seed, std::size_t topology_index);

TradeoffResult tradeoff_sweep(const std::vector<CouplingLevel>& levels, const PhysicsContext& ctx,
                              const LorentzianModel& model, std::shared_ptr<const RoiGrid> roi,
                              const SweepOptions& opts);

// Plane used by the sweep and the linearity study: 1 m standoff, 2 m x 2 m, 21 x 21 samples.
RoiGrid default_sweep_roi();

// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dmasim
