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

#include "dmasim/radiation.hpp"

#include <algorithm>
#include <cmath>

#include "dmasim/physics.hpp"

namespace dmasim {

RoiGrid plane_roi(double distance, double width, double height, std::size_t rows, std::size_t cols) {
    if (!(distance > 0.0)) throw DomainError("plane ROI distance must be positive");
    if (!(width > 0.0 && height > 0.0)) throw DomainError("plane ROI extent must be positive");
    if (rows < 1 || cols < 1 || rows * cols < 2) throw DomainError("ROI needs at least 2 samples");
    RoiGrid g;
    g.kind = RoiGrid::Kind::Plane;
    g.rows = rows;
    g.cols = cols;
    g.points.reserve(rows * cols);
    const auto coord = [](std::size_t i, std::size_t n, double extent) {
        return n == 1 ? 0.0 : -0.5 * extent + extent * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) g.points.emplace_back(coord(c, cols, width), coord(r, rows, height), distance);
    return g;
}

RoiGrid arc_roi(double radius, std::size_t n_angles, double first_deg, double last_deg) {
    if (!(radius > 0.0)) throw DomainError("arc ROI radius must be positive");
    if (n_angles < 2) throw DomainError("ROI needs at least 2 samples");
    if (!(first_deg >= -90.0 && last_deg <= 90.0 && first_deg < last_deg))
        throw DomainError("arc ROI angles must satisfy -90 <= first < last <= 90");
    RoiGrid g;
    g.kind = RoiGrid::Kind::Arc;
    g.rows = n_angles;
    g.cols = 1;
    g.points.reserve(n_angles);
    g.angles_deg.reserve(n_angles);
    for (std::size_t i = 0; i < n_angles; ++i) {
        const double deg = first_deg + (last_deg - first_deg) * static_cast<double>(i) / static_cast<double>(n_angles - 1);
        const double th = deg * kPi / 180.0;
        g.angles_deg.push_back(deg);
        g.points.emplace_back(radius * std::sin(th), 0.0, radius * std::cos(th));
    }
    return g;
}

RoiGrid default_plane_roi() { return plane_roi(1.0, 2.0, 2.0, 101, 101); }

RoiGrid default_arc_roi() { return arc_roi(10.0, 181); }

CMatrix radiation_operator(const DmaTopology& t, const RoiGrid& roi) {
    const double k = t.context.wavenumber();
    const auto rows = static_cast<Eigen::Index>(roi.size());
    const auto cols = static_cast<Eigen::Index>(t.n_meta());
    for (const auto& p : roi.points) {
        if (std::abs(p.z()) < kMinDistance && point_in_polygon(p.head<2>(), t.boundary_polygon))
            throw DomainError("ROI sample lies inside the cavity aperture");
    }
    CMatrix r(rows, cols);
    for (Eigen::Index n = 0; n < cols; ++n) {
        const Point2& a = t.meta_atom_positions[static_cast<std::size_t>(n)];
        const Point3 src(a.x(), a.y(), 0.0);
        for (Eigen::Index i = 0; i < rows; ++i) r(i, n) = greens_3d(k, src, roi.points[static_cast<std::size_t>(i)]);
    }
    return r;
}

FieldMap radiate_moments(const CVector& meta_moments, const DmaTopology& t, std::shared_ptr<const RoiGrid> roi) {
    if (static_cast<std::size_t>(meta_moments.size()) != t.n_meta())
        throw DomainError("moment vector does not match the number of meta-atoms");
    FieldMap f;
    f.values = radiation_operator(t, *roi) * meta_moments;
    f.roi = std::move(roi);
    return f;
}

FieldMap radiate(const DipoleSolution& sol, const DmaTopology& t, std::shared_ptr<const RoiGrid> roi) {
    if (sol.topology_fingerprint != t.spec_fingerprint)
        throw DomainError("solution was not computed for this topology");
    return radiate_moments(sol.meta_moments(), t, std::move(roi));
}

FieldMap normalize(const FieldMap& f) {
    const double norm = f.values.norm();
    if (!(norm > 0.0)) throw NullPattern("null pattern: cannot normalize an all-zero field");
    FieldMap out;
    out.values = f.values / norm;
    out.roi = f.roi;
    out.normalized = true;
    return out;
}

std::vector<std::size_t> complement_indices(std::span<const std::size_t> target, std::size_t n) {
    std::vector<char> in_target(n, 0);
    for (std::size_t i : target) {
        if (i >= n) throw DomainError("target index " + std::to_string(i) + " out of range");
        in_target[i] = 1;
    }
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n; ++i)
        if (!in_target[i]) rest.push_back(i);
    if (target.empty()) throw DomainError("target set is empty");
    if (rest.empty()) throw DomainError("target set covers the whole ROI");
    return rest;
}

BeamMetrics beam_metrics(const FieldMap& f, std::span<const std::size_t> target) {
    const auto n = static_cast<std::size_t>(f.values.size());
    const std::vector<std::size_t> rest = complement_indices(target, n);

    std::vector<std::size_t> unique_target(target.begin(), target.end());
    std::sort(unique_target.begin(), unique_target.end());
    unique_target.erase(std::unique(unique_target.begin(), unique_target.end()), unique_target.end());

    BeamMetrics m;
    double target_sum = 0.0;
    for (std::size_t i : unique_target) {
        const double p = std::norm(f.values[static_cast<Eigen::Index>(i)]);
        m.peak_intensity = std::max(m.peak_intensity, p);
        target_sum += p;
    }
    double rest_sum = 0.0;
    for (std::size_t i : rest) rest_sum += std::norm(f.values[static_cast<Eigen::Index>(i)]);

    const double target_mean = target_sum / static_cast<double>(unique_target.size());
    const double rest_mean = rest_sum / static_cast<double>(rest.size());
    if (rest_mean <= 0.0) {
        m.target_to_rest_ratio_db = target_mean > 0.0 ? kMaxDecibels : 0.0;
    } else if (target_mean <= 0.0) {
        m.target_to_rest_ratio_db = -kMaxDecibels;
    } else {
        m.target_to_rest_ratio_db = std::clamp(10.0 * std::log10(target_mean / rest_mean), -kMaxDecibels, kMaxDecibels);
    }
    return m;
}

}  // namespace dmasim
