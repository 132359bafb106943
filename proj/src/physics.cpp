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

#include "dmasim/physics.hpp"

#include <cmath>

namespace dmasim {

Complex greens_2d(double k, const Point2& a, const Point2& b) {
    const double r = (a - b).norm();
    if (!(r >= kMinDistance)) throw SelfInteraction("self-interaction undefined: coincident 2D points");
    const double x = k * r;
    // H0^(1)(x) = J0(x) + i Y0(x)
    const Complex h0(std::cyl_bessel_j(0.0, x), std::cyl_neumann(0.0, x));
    return 0.25 * kI * h0;
}

Complex greens_3d(double k, const Point3& a, const Point3& b) {
    const double r = (a - b).norm();
    if (!(r >= kMinDistance)) throw SelfInteraction("self-interaction undefined: coincident 3D points");
    return std::polar(1.0 / (4.0 * kPi * r), k * r);
}

void LorentzianModel::validate() const {
    if (!(resonance_low < resonance_high)) throw DomainError("Lorentzian requires f_min < f_max");
    if (!(damping > 0.0)) throw DomainError("Lorentzian damping must be positive");
    if (!(oscillator_strength > 0.0)) throw DomainError("Lorentzian oscillator strength must be positive");
}

LorentzianModel default_lorentzian(const PhysicsContext& ctx, double resonance_fraction) {
    LorentzianModel m;
    // On resonance alpha = i F / (gamma f).
    const double f = ctx.frequency();
    m.oscillator_strength = resonance_fraction * std::abs(via_polarizability(ctx.wavenumber())) * m.damping * f;
    return m;
}

Polarizability meta_atom_polarizability(double c, const LorentzianModel& model, double f) {
    if (!(c >= 0.0 && c <= 1.0)) throw DomainError("tuning value outside [0, 1]");
    if (!(f > 0.0)) throw DomainError("frequency must be positive");
    const double span = model.resonance_high - model.resonance_low;
    const double f0 = model.resonance_low + c * span;
    const Complex denom(f0 * f0 - f * f, -model.damping * f);
    const Complex alpha = model.oscillator_strength / denom;
    // d/dc [F / D] = -F D' / D^2 with D' = 2 f0 span
    const Complex dalpha = -alpha / denom * (2.0 * f0 * span);
    return {alpha, dalpha};
}

// A point scatterer with moment p = alpha * E_local radiates p * greens_2d. Per unit length its
// scattered power is |alpha|^2 / (4k) and its extinction is Im(alpha) / k in the same units,
// from the far-field form of H0 and the optical theorem. Passivity (extinction >= scattering)
// is Im(1/alpha) <= -1/4; equality means lossless, and the largest |alpha| on that line is
// reached at Re(1/alpha) = 0, i.e. alpha = 4i. In this normalization the unitary limit carries
// no explicit k dependence; k is accepted so that callers stay agnostic of that.
Complex via_polarizability(double k) {
    if (!(k > 0.0)) throw DomainError("wavenumber must be positive");
    return {0.0, 4.0};
}

void to_json(nlohmann::json& j, const LorentzianModel& m) {
    j = nlohmann::json{{"oscillator_strength", m.oscillator_strength},
                       {"resonance_low", m.resonance_low},
                       {"resonance_high", m.resonance_high},
                       {"damping", m.damping}};
}

}  // namespace dmasim
