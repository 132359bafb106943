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

#include "dmasim/radiation.hpp"
#include "dmasim/solver.hpp"

namespace dmasim {

// Configuration -> radiated field for one (topology, model, ROI, mode). Holds the via-eliminated
// cavity operator and the radiation operator, so each evaluation is an N x N solve plus a
// matrix-vector product. Read-only after construction; share across threads freely.
class ForwardModel {
public:
    ForwardModel(const DmaTopology& t, const LorentzianModel& model, std::shared_ptr<const RoiGrid> roi,
                 CouplingMode mode);

    struct Evaluation {
        ReducedSolution solution;
        CVector field;  // unnormalized
    };

    Evaluation evaluate(const TuningState& s) const;

    // Derivatives of the normalized field, column n = d(E / ||E||) / d c_n, for every atom.
    // Uses the retained factorization for all columns at once.
    CMatrix normalized_jacobian(const Evaluation& ev) const;

    // Single column of normalized_jacobian from one extra solve.
    CVector normalized_derivative(const Evaluation& ev, std::size_t atom) const;

    const CavityOperator& cavity() const noexcept { return cavity_; }
    const CMatrix& radiation() const noexcept { return radiation_; }
    const LorentzianModel& model() const noexcept { return model_; }
    const std::shared_ptr<const RoiGrid>& roi() const noexcept { return roi_; }
    std::size_t n_meta() const noexcept { return cavity_.n_meta(); }

private:
    CavityOperator cavity_;
    CMatrix radiation_;
    LorentzianModel model_;
    std::shared_ptr<const RoiGrid> roi_;
};

// Projects an unnormalized field derivative dE onto the derivative of E / ||E||:
//   dE / ||E|| - E Re(E^H dE) / ||E||^3
CVector normalize_derivative(const CVector& field, const CVector& d_field);

}  // namespace dmasim
