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

#include <nlohmann/json.hpp>

#include "dmasim/common.hpp"
#include "dmasim/geometry.hpp"

namespace dmasim {

// Outgoing 2D scalar Green's function (i/4) H0^(1)(k|a-b|), time convention exp(-i w t).
// Throws SelfInteraction when |a-b| < kMinDistance.
Complex greens_2d(double k, const Point2& a, const Point2& b);

// Free-space 3D scalar Green's function exp(ikr) / (4 pi r).
Complex greens_3d(double k, const Point3& a, const Point3& b);

inline constexpr double kMinDistance = 1e-12;  // m

// Tunable resonance alpha(c) = F / (f0(c)^2 - f^2 - i*gamma*f), f0(c) = f_min + c (f_max - f_min).
//
// alpha is dimensionless in the normalization of greens_2d, so F carries Hz^2.
struct LorentzianModel {
    double oscillator_strength = 0.0;  // F, Hz^2
    double resonance_low = 9.8e9;      // f_min, Hz
    double resonance_high = 10.2e9;    // f_max, Hz
    double damping = 200e6;            // gamma, Hz

    void validate() const;
    bool operator==(const LorentzianModel&) const = default;
};

inline constexpr double kDefaultResonanceFraction = 0.95;

// Defaults at the operating frequency of `ctx`: F is set so that an on-resonance atom has
// |alpha| = resonance_fraction * |via_polarizability|.
LorentzianModel default_lorentzian(const PhysicsContext& ctx, double resonance_fraction = kDefaultResonanceFraction);

struct Polarizability {
    Complex value;
    Complex derivative;  // d alpha / d c
};

// Throws DomainError for c outside [0, 1] or f <= 0.
Polarizability meta_atom_polarizability(double c, const LorentzianModel& model, double f);

// Largest polarizability a lossless 2D point scatterer can have in the greens_2d normalization.
Complex via_polarizability(double k);

void to_json(nlohmann::json& j, const LorentzianModel& m);

}  // namespace dmasim
