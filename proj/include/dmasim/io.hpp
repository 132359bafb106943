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
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmasim/analysis.hpp"
#include "dmasim/geometry.hpp"
#include "dmasim/physics.hpp"
#include "dmasim/radiation.hpp"
#include "dmasim/solver.hpp"
#include "dmasim/synthesis.hpp"

namespace dmasim {

struct PlaneRoiSpec {
    double distance = 1.0;
    double width = 2.0;
    double height = 2.0;
    std::size_t rows = 101;
    std::size_t cols = 101;

    RoiGrid build() const { return plane_roi(distance, width, height, rows, cols); }
    bool operator==(const PlaneRoiSpec&) const = default;
};

struct ArcRoiSpec {
    double radius = 10.0;
    std::size_t n_angles = 181;
    double first_deg = -90.0;
    double last_deg = 90.0;

    RoiGrid build() const { return arc_roi(radius, n_angles, first_deg, last_deg); }
    bool operator==(const ArcRoiSpec&) const = default;
};

struct LevelSpec {
    std::string name;
    double via_spacing = 0.0;  // m
    bool unilateral = false;

    bool operator==(const LevelSpec&) const = default;
};

// Everything a run depends on. Thread count is deliberately absent: it never changes results.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    double frequency = 10e9;
    TopologySpec topology;  // rng_seed and via_spacing are taken from `seed` and the level
    std::vector<LevelSpec> levels;
    LorentzianModel model;
    PlaneRoiSpec plane;  // simulate, sensitivity maps
    PlaneRoiSpec sweep_plane{1.0, 2.0, 2.0, 21, 21};
    ArcRoiSpec arc;
    double target_center_deg = 20.0;
    double target_half_width_deg = 2.0;
    double sidelobe_weight = 1.0;
    std::size_t n_topologies = 12;
    std::size_t n_configs = 200;
    double train_fraction = 0.8;
    FeatureSet features = FeatureSet::Alpha;
    SynthesisOptions synthesis;  // seed and threads are filled in at run time
    double uniform_tuning = 0.5;
    std::string level = "DENSE";
    std::size_t sensitivity_atom = 0;
    std::size_t check_cases = 10;
    int born_max_orders = 200;
    double born_tolerance = 1e-10;
    std::string output_dir = "out";

    PhysicsContext context() const { return PhysicsContext(frequency); }
    std::vector<CouplingLevel> coupling_levels() const;
    const LevelSpec& find_level(const std::string& name) const;
    // Topology spec for `level` and topology index t (rng_seed = seed + t).
    TopologySpec topology_for(const LevelSpec& level, std::uint64_t t = 0) const;
    BeamObjective objective() const;
};

// Defaults at 10 GHz, including the four coupling presets.
ExperimentConfig default_config();

// Missing fields take defaults; unknown fields, wrong types, and invalid values throw
// ConfigError carrying the JSON path (e.g. "/model/damping").
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& c);

// Keys sorted, no whitespace; the config hash is FNV-1a of this string.
std::string canonical_json(const nlohmann::json& j);
std::uint64_t config_hash(const ExperimentConfig& c);

// Metadata written into every artifact.
struct ArtifactMeta {
    std::string command;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> extra;
};

nlohmann::json meta_json(const ArtifactMeta& m);

// Round-trip formatting for doubles ("%.17g").
std::string format_double(double v);

// x, y, z, re, im, abs with '#'-prefixed metadata lines.
void write_field_csv(const std::filesystem::path& path, const FieldMap& f, const ArtifactMeta& meta);
// Same layout for a real-valued map (im = 0).
void write_real_map_csv(const std::filesystem::path& path, const RoiGrid& roi, const RVector& values,
                        const ArtifactMeta& meta);

// JSON header line terminated by '\n', then rows x cols complex samples as little-endian
// doubles, row-major, interleaved (re, im).
void write_field_binary(const std::filesystem::path& path, const FieldMap& f, const ArtifactMeta& meta);
FieldMap read_field_binary(const std::filesystem::path& path, nlohmann::json* header = nullptr);

// index, re, im per scatterer.
void write_solution_csv(const std::filesystem::path& path, const CVector& moments, const ArtifactMeta& meta);

// level, via_count, sigma, zeta_dB, n_topologies, n_configs, seed
void write_sweep_csv(const std::filesystem::path& path, const std::vector<TradeoffRecord>& records,
                     const ArtifactMeta& meta);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

nlohmann::json to_json_value(const OptimizationResult& r);
nlohmann::json to_json_value(const TradeoffResult& r);

}  // namespace dmasim
