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

#include <memory>
#include <span>
#include <vector>

#include "dmasim/common.hpp"
#include "dmasim/geometry.hpp"
#include "dmasim/solver.hpp"

namespace dmasim {

// Sample points of the region of interest. The DMA lies in the z = 0 plane, radiating to z > 0.
struct RoiGrid {
    enum class Kind { Plane, Arc };

    Kind kind = Kind::Plane;
    std::vector<Point3> points;
    std::size_t rows = 0;  // Plane: grid rows (y); Arc: number of angles
    std::size_t cols = 0;  // Plane: grid columns (x); Arc: 1
    std::vector<double> angles_deg;  // Arc only, angle from broadside in the x-z plane

    std::size_t size() const noexcept { return points.size(); }
};

// rows x cols grid on the plane z = distance, centred on the axis, row-major in y then x.
RoiGrid plane_roi(double distance, double width, double height, std::size_t rows, std::size_t cols);

// n_angles directions evenly spaced over [first_deg, last_deg] at the given radius.
RoiGrid arc_roi(double radius, std::size_t n_angles, double first_deg = -90.0, double last_deg = 90.0);

// 1 m plane, 2 m x 2 m, 101 x 101 samples.
RoiGrid default_plane_roi();
// 181 one-degree samples at 10 m.
RoiGrid default_arc_roi();

struct FieldMap {
    CVector values;
    std::shared_ptr<const RoiGrid> roi;
    bool normalized = false;
};

// Column n maps a unit moment on meta-atom n to every ROI sample. Vias do not radiate.
// Throws DomainError when a sample lies inside the cavity aperture.
CMatrix radiation_operator(const DmaTopology& t, const RoiGrid& roi);

FieldMap radiate(const DipoleSolution& sol, const DmaTopology& t, std::shared_ptr<const RoiGrid> roi);
FieldMap radiate_moments(const CVector& meta_moments, const DmaTopology& t, std::shared_ptr<const RoiGrid> roi);

// f / ||f||_2. Throws NullPattern for an all-zero field.
FieldMap normalize(const FieldMap& f);

struct BeamMetrics {
    double peak_intensity = 0.0;         // max over target of |E|^2
    double target_to_rest_ratio_db = 0.0;  // clamped to +-kMaxDecibels
};

inline constexpr double kMaxDecibels = 300.0;

// Throws DomainError for an empty target, one covering the whole ROI, or out-of-range indices.
BeamMetrics beam_metrics(const FieldMap& f, std::span<const std::size_t> target);

// Sorted, de-duplicated complement of `target` in [0, n). Validates as beam_metrics does.
std::vector<std::size_t> complement_indices(std::span<const std::size_t> target, std::size_t n);

}  // namespace dmasim
