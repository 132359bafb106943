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

#include "dmasim/forward.hpp"

namespace dmasim {

ForwardModel::ForwardModel(const DmaTopology& t, const LorentzianModel& model, std::shared_ptr<const RoiGrid> roi,
                           CouplingMode mode)
    : cavity_(t, mode), radiation_(radiation_operator(t, *roi)), model_(model), roi_(std::move(roi)) {
    model_.validate();
}

ForwardModel::Evaluation ForwardModel::evaluate(const TuningState& s) const {
    Evaluation ev{solve_reduced(cavity_, s, model_), {}};
    ev.field = radiation_ * ev.solution.moments;
    return ev;
}

CVector normalize_derivative(const CVector& field, const CVector& d_field) {
    const double norm = field.norm();
    if (!(norm > 0.0)) throw NullPattern("null pattern: derivative of an all-zero field");
    const double radial = field.dot(d_field).real();  // Re(E^H dE)
    return d_field / norm - field * (radial / (norm * norm * norm));
}

CMatrix ForwardModel::normalized_jacobian(const Evaluation& ev) const {
    const auto n = static_cast<Eigen::Index>(n_meta());
    // M^-1 is symmetric; column n carries the response to a unit change of atom n's 1/alpha.
    CMatrix response = ev.solution.lu.solve(CMatrix::Identity(n, n));
    for (Eigen::Index j = 0; j < n; ++j) response.col(j) *= ev.solution.source_derivative(static_cast<std::size_t>(j));
    CMatrix jac = radiation_ * response;

    const double norm = ev.field.norm();
    if (!(norm > 0.0)) throw NullPattern("null pattern: derivative of an all-zero field");
    // Re(E^H dE_n) for every column at once.
    const RVector radial = (ev.field.adjoint() * jac).real().transpose();
    jac /= norm;
    jac.noalias() -= (ev.field / (norm * norm * norm)) * radial.transpose().cast<Complex>();
    return jac;
}

CVector ForwardModel::normalized_derivative(const Evaluation& ev, std::size_t atom) const {
    if (atom >= n_meta()) throw DomainError("atom index " + std::to_string(atom) + " out of range");
    const auto n = static_cast<Eigen::Index>(n_meta());
    CVector unit = CVector::Zero(n);
    unit[static_cast<Eigen::Index>(atom)] = 1.0;
    const CVector dp = ev.solution.lu.solve(unit) * ev.solution.source_derivative(atom);
    return normalize_derivative(ev.field, radiation_ * dp);
}

}  // namespace dmasim
