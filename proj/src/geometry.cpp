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

#include "dmasim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace dmasim {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

PhysicsContext::PhysicsContext(double frequency_hz) : frequency_(frequency_hz) {
    if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz))
        throw DomainError("frequency must be positive and finite");
}

void TopologySpec::validate(const PhysicsContext& ctx) const {
    const double lambda = ctx.wavelength();
    if (!(cavity_side >= 5.0 * lambda * (1.0 - 1e-12)))
        throw DomainError("cavity_side must be at least 5 wavelengths");
    if (!(boundary_irregularity >= 0.0 && boundary_irregularity < 1.0))
        throw DomainError("boundary_irregularity must lie in [0, 1)");
    if (n_meta_atoms < 1) throw DomainError("n_meta_atoms must be at least 1");
    if (!(via_spacing > 0.0)) throw DomainError("via_spacing must be positive");
    if (!(min_separation > 0.0)) throw DomainError("min_separation must be positive");
}

std::uint64_t TopologySpec::fingerprint() const {
    Fnv1a h;
    h.str("TopologySpec/v1")
        .f64(cavity_side)
        .f64(boundary_irregularity)
        .u64(static_cast<std::uint64_t>(n_meta_atoms))
        .f64(via_spacing)
        .f64(min_separation)
        .u64(static_cast<std::uint64_t>(feed_placement))
        .u64(rng_seed);
    return h.digest();
}

TopologySpec default_topology_spec(const PhysicsContext& ctx) {
    const double lambda = ctx.wavelength();
    TopologySpec s;
    s.cavity_side = 10.0 * lambda;
    s.boundary_irregularity = 0.3;
    s.n_meta_atoms = 64;
    s.via_spacing = lambda;
    s.min_separation = lambda / 5.0;
    s.feed_placement = FeedPlacement::Random;
    s.rng_seed = 1;
    return s;
}

// ---------------------------------------------------------------------------
// Polygon helpers

double polygon_perimeter(const std::vector<Point2>& polygon) {
    double total = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i)
        total += (polygon[(i + 1) % polygon.size()] - polygon[i]).norm();
    return total;
}

bool point_in_polygon(const Point2& p, const std::vector<Point2>& polygon) {
    bool inside = false;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = polygon[i];
        const Point2& b = polygon[j];
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double x_cross = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
            if (p.x() < x_cross) inside = !inside;
        }
    }
    return inside;
}

namespace {

double distance_to_segment(const Point2& p, const Point2& a, const Point2& b) {
    const Point2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

double signed_area(const std::vector<Point2>& polygon) {
    double area = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const Point2& a = polygon[i];
        const Point2& b = polygon[(i + 1) % polygon.size()];
        area += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * area;
}

Point2 polygon_centroid(const std::vector<Point2>& polygon) {
    const double area = signed_area(polygon);
    Point2 c = Point2::Zero();
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const Point2& a = polygon[i];
        const Point2& b = polygon[(i + 1) % polygon.size()];
        const double cross = a.x() * b.y() - b.x() * a.y();
        c += (a + b) * cross;
    }
    return c / (6.0 * area);
}

std::vector<Point2> make_boundary(const TopologySpec& spec, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double s = spec.cavity_side;
    const double h = 0.5 * s;
    const double max_offset = spec.boundary_irregularity * s / 4.0;

    std::vector<Point2> corners = {{-h, -h}, {h, -h}, {h, h}, {-h, h}};
    for (auto& c : corners) {
        const double r = max_offset * std::sqrt(unit(rng));
        const double phi = 2.0 * kPi * unit(rng);
        c += r * Point2(std::cos(phi), std::sin(phi));
    }

    // One concave notch on a random edge breaks the remaining symmetry.
    const auto edge = static_cast<std::size_t>(std::min(3.0, std::floor(4.0 * unit(rng))));
    const double t_mid = 0.3 + 0.4 * unit(rng);
    const double width = s * (0.1 + 0.1 * unit(rng));
    const double depth = s * (0.08 + 0.07 * unit(rng));

    const Point2 a = corners[edge];
    const Point2 b = corners[(edge + 1) % 4];
    const double len = (b - a).norm();
    const Point2 dir = (b - a) / len;
    const Point2 inward(-dir.y(), dir.x());  // counter-clockwise polygon
    const double half_t = 0.5 * width / len;

    std::vector<Point2> polygon;
    polygon.reserve(7);
    for (std::size_t i = 0; i < 4; ++i) {
        polygon.push_back(corners[i]);
        if (i == edge) {
            polygon.push_back(a + (t_mid - half_t) * (b - a));
            polygon.push_back(a + t_mid * (b - a) + depth * inward);
            polygon.push_back(a + (t_mid + half_t) * (b - a));
        }
    }
    return polygon;
}

std::vector<Point2> place_vias(const std::vector<Point2>& polygon, double spacing) {
    const double perimeter = polygon_perimeter(polygon);
    const auto count = static_cast<std::size_t>(std::ceil(perimeter / spacing - 1e-12));
    const double step = perimeter / static_cast<double>(count);

    std::vector<Point2> vias;
    vias.reserve(count);
    std::size_t edge = 0;
    double edge_start = 0.0;
    double edge_len = (polygon[1] - polygon[0]).norm();
    for (std::size_t i = 0; i < count; ++i) {
        const double s = step * static_cast<double>(i);
        while (s > edge_start + edge_len && edge + 1 < polygon.size()) {
            edge_start += edge_len;
            ++edge;
            edge_len = (polygon[(edge + 1) % polygon.size()] - polygon[edge]).norm();
        }
        const Point2& a = polygon[edge];
        const Point2& b = polygon[(edge + 1) % polygon.size()];
        const double t = std::clamp((s - edge_start) / edge_len, 0.0, 1.0);
        vias.push_back(a + t * (b - a));
    }
    return vias;
}

template <typename Accept>
Point2 sample_interior(const std::vector<Point2>& polygon, std::mt19937_64& rng, Accept&& accept,
                       const char* what) {
    double min_x = polygon[0].x(), max_x = min_x, min_y = polygon[0].y(), max_y = min_y;
    for (const auto& v : polygon) {
        min_x = std::min(min_x, v.x());
        max_x = std::max(max_x, v.x());
        min_y = std::min(min_y, v.y());
        max_y = std::max(max_y, v.y());
    }
    std::uniform_real_distribution<double> ux(min_x, max_x);
    std::uniform_real_distribution<double> uy(min_y, max_y);
    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
        const Point2 p(ux(rng), uy(rng));
        if (point_in_polygon(p, polygon) && accept(p)) return p;
    }
    throw InfeasibleSpec(std::string("infeasible spec: could not place ") + what + " after " +
                         std::to_string(kMaxPlacementAttempts) + " attempts");
}

}  // namespace

double distance_to_boundary(const Point2& p, const std::vector<Point2>& polygon) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < polygon.size(); ++i)
        best = std::min(best, distance_to_segment(p, polygon[i], polygon[(i + 1) % polygon.size()]));
    return best;
}

DmaTopology generate_topology(const TopologySpec& spec, const PhysicsContext& ctx) {
    spec.validate(ctx);
    std::mt19937_64 rng(spec.rng_seed);

    DmaTopology t;
    t.context = ctx;
    t.spec = spec;
    t.spec_fingerprint = Fnv1a().u64(spec.fingerprint()).f64(ctx.frequency()).digest();
    t.boundary_polygon = make_boundary(spec, rng);
    t.via_positions = place_vias(t.boundary_polygon, spec.via_spacing);

    // Interior points keep min_separation from the whole boundary, so they clear every via
    // regardless of fence density and stay identical across coupling levels.
    const double sep = spec.min_separation;
    const auto clear_of_boundary = [&](const Point2& p) {
        return distance_to_boundary(p, t.boundary_polygon) >= sep;
    };

    if (spec.feed_placement == FeedPlacement::Centroid) {
        t.feed_position = polygon_centroid(t.boundary_polygon);
        if (!point_in_polygon(t.feed_position, t.boundary_polygon) || !clear_of_boundary(t.feed_position))
            throw InfeasibleSpec("infeasible spec: polygon centroid is not a valid feed position");
    } else {
        t.feed_position = sample_interior(t.boundary_polygon, rng, clear_of_boundary, "feed");
    }

    t.meta_atom_positions.reserve(static_cast<std::size_t>(spec.n_meta_atoms));
    for (int n = 0; n < spec.n_meta_atoms; ++n) {
        const auto accept = [&](const Point2& p) {
            if (!clear_of_boundary(p)) return false;
            if ((p - t.feed_position).norm() < sep) return false;
            return std::all_of(t.meta_atom_positions.begin(), t.meta_atom_positions.end(),
                               [&](const Point2& q) { return (p - q).norm() >= sep; });
        };
        t.meta_atom_positions.push_back(sample_interior(t.boundary_polygon, rng, accept, "meta-atom"));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Coupling presets

std::vector<CouplingLevel> coupling_levels(const PhysicsContext& ctx) {
    return coupling_levels(ctx, default_topology_spec(ctx));
}

std::vector<CouplingLevel> coupling_levels(const PhysicsContext& ctx, const TopologySpec& base) {
    const double lambda = ctx.wavelength();
    const auto with_spacing = [&](double spacing) {
        TopologySpec s = base;
        s.via_spacing = spacing;
        return s;
    };
    return {
        {"UNILATERAL", with_spacing(lambda), true},
        {"SPARSE", with_spacing(lambda), false},
        {"MEDIUM", with_spacing(lambda / 3.0), false},
        {"DENSE", with_spacing(lambda / 10.0), false},
    };
}

const CouplingLevel& find_level(const std::vector<CouplingLevel>& levels, const std::string& name) {
    for (const auto& l : levels)
        if (l.name == name) return l;
    throw DomainError("unknown coupling level '" + name + "'");
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::has(Violation::Kind kind) const {
    return std::any_of(violations.begin(), violations.end(),
                       [kind](const Violation& v) { return v.kind == kind; });
}

ValidationReport validate_topology(const DmaTopology& t) {
    ValidationReport report;
    const auto& poly = t.boundary_polygon;
    const std::size_t n_meta = t.n_meta();
    const std::size_t n_via = t.n_via();
    if (poly.size() < 3) {
        report.violations.push_back({Violation::Kind::Containment, {}, "boundary polygon has fewer than 3 vertices"});
        return report;
    }

    // Scatterer index space: 0 = feed, 1..N = meta-atoms, N+1.. = vias.
    std::vector<Point2> pts;
    pts.reserve(1 + n_meta + n_via);
    pts.push_back(t.feed_position);
    pts.insert(pts.end(), t.meta_atom_positions.begin(), t.meta_atom_positions.end());
    pts.insert(pts.end(), t.via_positions.begin(), t.via_positions.end());
    const std::size_t first_via = 1 + n_meta;

    if (t.spec.n_meta_atoms >= 0 && n_meta != static_cast<std::size_t>(t.spec.n_meta_atoms))
        report.violations.push_back({Violation::Kind::Count, {},
                                     "expected " + std::to_string(t.spec.n_meta_atoms) + " meta-atoms, found " +
                                         std::to_string(n_meta)});

    for (std::size_t i = 0; i < first_via; ++i) {
        if (!point_in_polygon(pts[i], poly) || distance_to_boundary(pts[i], poly) <= 0.0)
            report.violations.push_back({Violation::Kind::Containment, {i},
                                         (i == 0 ? std::string("feed") : "meta-atom " + std::to_string(i - 1)) +
                                             " is not strictly inside the boundary"});
    }

    // Via-via pairs are governed by via_spacing, every other pair by min_separation.
    const double sep = t.spec.min_separation;
    for (std::size_t i = 0; i < first_via; ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double d = (pts[i] - pts[j]).norm();
            if (d < sep)
                report.violations.push_back({Violation::Kind::Separation, {i, j},
                                             "scatterers " + std::to_string(i) + " and " + std::to_string(j) +
                                                 " are closer than min_separation"});
        }
    }

    const double on_edge_tol = 1e-9 * std::max(1.0, t.spec.cavity_side);
    for (std::size_t v = 0; v < n_via; ++v) {
        if (distance_to_boundary(t.via_positions[v], poly) > on_edge_tol)
            report.violations.push_back({Violation::Kind::ViaOffBoundary, {first_via + v},
                                         "via " + std::to_string(v) + " is off the boundary"});
    }
    for (std::size_t v = 0; v < n_via && n_via > 1; ++v) {
        const double d = (t.via_positions[(v + 1) % n_via] - t.via_positions[v]).norm();
        if (d > t.spec.via_spacing * (1.0 + 1e-9))
            report.violations.push_back({Violation::Kind::ViaSpacing, {first_via + v, first_via + (v + 1) % n_via},
                                         "via gap exceeds via_spacing"});
    }
    return report;
}

// ---------------------------------------------------------------------------
// JSON export

std::string to_string(FeedPlacement p) {
    return p == FeedPlacement::Centroid ? "centroid" : "random";
}

void to_json(nlohmann::json& j, const PhysicsContext& c) {
    j = nlohmann::json{{"frequency", c.frequency()}, {"wavelength", c.wavelength()}, {"wavenumber", c.wavenumber()}};
}

void to_json(nlohmann::json& j, const TopologySpec& s) {
    j = nlohmann::json{{"cavity_side", s.cavity_side},
                       {"boundary_irregularity", s.boundary_irregularity},
                       {"n_meta_atoms", s.n_meta_atoms},
                       {"via_spacing", s.via_spacing},
                       {"min_separation", s.min_separation},
                       {"feed_placement", to_string(s.feed_placement)},
                       {"rng_seed", s.rng_seed}};
}

namespace {
nlohmann::json points_json(const std::vector<Point2>& pts) {
    auto arr = nlohmann::json::array();
    for (const auto& p : pts) arr.push_back({p.x(), p.y()});
    return arr;
}
}  // namespace

void to_json(nlohmann::json& j, const DmaTopology& t) {
    j = nlohmann::json{{"context", t.context},
                       {"spec", t.spec},
                       {"spec_fingerprint", hex64(t.spec_fingerprint)},
                       {"feed_position", {t.feed_position.x(), t.feed_position.y()}},
                       {"meta_atom_positions", points_json(t.meta_atom_positions)},
                       {"via_positions", points_json(t.via_positions)},
                       {"boundary_polygon", points_json(t.boundary_polygon)}};
}

}  // namespace dmasim
