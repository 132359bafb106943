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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmasim/common.hpp"

namespace dmasim {

// Operating frequency and the quantities derived from it.
class PhysicsContext {
public:
    explicit PhysicsContext(double frequency_hz = 10e9);

    double frequency() const noexcept { return frequency_; }
    double wavelength() const noexcept { return kSpeedOfLight / frequency_; }
    double wavenumber() const noexcept { return 2.0 * kPi / wavelength(); }

    bool operator==(const PhysicsContext&) const = default;

private:
    double frequency_;
};

enum class FeedPlacement { Random, Centroid };

struct TopologySpec {
    double cavity_side = 0.0;            // m, edge of the square bounding box
    double boundary_irregularity = 0.3;  // [0, 1)
    int n_meta_atoms = 64;
    double via_spacing = 0.0;     // m, upper bound on arc-length spacing along the fence
    double min_separation = 0.0;  // m
    FeedPlacement feed_placement = FeedPlacement::Random;
    std::uint64_t rng_seed = 1;

    // Throws DomainError naming the first violated invariant.
    void validate(const PhysicsContext& ctx) const;
    std::uint64_t fingerprint() const;

    bool operator==(const TopologySpec&) const = default;
};

// 10 GHz, side 10 wavelengths, 64 atoms, min separation lambda/5, via spacing lambda.
TopologySpec default_topology_spec(const PhysicsContext& ctx);

struct DmaTopology {
    Point2 feed_position = Point2::Zero();
    std::vector<Point2> meta_atom_positions;
    std::vector<Point2> via_positions;
    std::vector<Point2> boundary_polygon;  // counter-clockwise, not closed
    PhysicsContext context;
    TopologySpec spec;
    std::uint64_t spec_fingerprint = 0;

    std::size_t n_meta() const noexcept { return meta_atom_positions.size(); }
    std::size_t n_via() const noexcept { return via_positions.size(); }
};

// Seeded random cavity: perturbed square with one concave notch, a via fence at uniform
// arc-length spacing, then feed and meta-atoms by rejection sampling.
// Throws InfeasibleSpec when a point cannot be placed within kMaxPlacementAttempts.
DmaTopology generate_topology(const TopologySpec& spec, const PhysicsContext& ctx);

inline constexpr int kMaxPlacementAttempts = 10000;

// Mutual-coupling presets, ordered by increasing expected coupling.
struct CouplingLevel {
    std::string name;
    TopologySpec spec;
    bool unilateral = false;  // solver drops every scatterer-scatterer coupling
};

std::vector<CouplingLevel> coupling_levels(const PhysicsContext& ctx);
std::vector<CouplingLevel> coupling_levels(const PhysicsContext& ctx, const TopologySpec& base);
const CouplingLevel& find_level(const std::vector<CouplingLevel>& levels, const std::string& name);

struct Violation {
    enum class Kind { Containment, Separation, ViaOffBoundary, ViaSpacing, Count };
    Kind kind;
    std::vector<std::size_t> indices;  // scatterer indices: 0 = feed, 1..N atoms, then vias
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const noexcept { return violations.empty(); }
    bool has(Violation::Kind kind) const;
};

ValidationReport validate_topology(const DmaTopology& t);

// Geometry helpers shared with other modules.
bool point_in_polygon(const Point2& p, const std::vector<Point2>& polygon);
double distance_to_boundary(const Point2& p, const std::vector<Point2>& polygon);
double polygon_perimeter(const std::vector<Point2>& polygon);

// JSON (SI units, field names as in the structs).
void to_json(nlohmann::json& j, const PhysicsContext& c);
void to_json(nlohmann::json& j, const TopologySpec& s);
void to_json(nlohmann::json& j, const DmaTopology& t);
std::string to_string(FeedPlacement p);

}  // namespace dmasim
