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
#include <span>
#include <string>
#include <vector>

#include "dmasim/common.hpp"
#include "dmasim/geometry.hpp"
#include "dmasim/physics.hpp"

namespace dmasim {

enum class CouplingMode { Full, Unilateral };

std::string to_string(CouplingMode mode);

inline CouplingMode mode_of(const CouplingLevel& level) {
    return level.unilateral ? CouplingMode::Unilateral : CouplingMode::Full;
}

// DMA configuration: one tuning value in [0, 1] per meta-atom.
class TuningState {
public:
    TuningState() = default;
    explicit TuningState(std::vector<double> values);  // throws DomainError if any value is outside [0, 1]
    static TuningState uniform(std::size_t n, double c);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    TuningState with(std::size_t index, double c) const;
    std::uint64_t fingerprint() const;

    bool operator==(const TuningState&) const = default;

private:
    std::vector<double> values_;
};

// Interaction system M p = e over meta-atoms (rows 0..n_meta-1) followed by vias.
// M = diag(1/alpha) - G with zero-diagonal G; G = 0 in unilateral mode.
struct InteractionSystem {
    CMatrix matrix;
    CVector source;
    std::size_t n_meta = 0;
    std::size_t n_via = 0;
    CouplingMode mode = CouplingMode::Full;

    std::vector<Polarizability> meta_alpha;
    Complex via_alpha;
    TuningState tuning;
    LorentzianModel model;
    double frequency = 0.0;
    std::uint64_t topology_seed = 0;
    std::uint64_t topology_fingerprint = 0;
    std::uint64_t fingerprint = 0;

    std::size_t size() const noexcept { return n_meta + n_via; }
    bool is_meta(std::size_t row) const noexcept { return row < n_meta; }
};

// The feed is a unit source: e_j = greens_2d(feed, scatterer_j). It is not part of M.
InteractionSystem assemble(const DmaTopology& t, const TuningState& s, const LorentzianModel& model, CouplingMode mode);

struct DipoleSolution {
    CVector moments;
    std::size_t n_meta = 0;
    std::uint64_t fingerprint = 0;           // fingerprint of the solved system
    std::uint64_t topology_fingerprint = 0;  // lineage check for radiate()
    double residual = 0.0;                   // ||M p - e|| / ||e||

    auto meta_moments() const { return moments.head(static_cast<Eigen::Index>(n_meta)); }
};

// Residual ||M p - e|| / ||e||.
double relative_residual(const CMatrix& m, const CVector& p, const CVector& e);

inline constexpr double kMaxConditionNumber = 1e14;

// Direct solve with its LU factorization retained for low-rank updates and adjoint solves.
// Immutable after construction; safe to share across threads.
class FactorizedSystem {
public:
    // Throws DegenerateSystem when the condition estimate exceeds kMaxConditionNumber.
    explicit FactorizedSystem(InteractionSystem sys);

    const InteractionSystem& system() const noexcept { return sys_; }
    const DipoleSolution& solution() const noexcept { return solution_; }
    const Eigen::PartialPivLU<CMatrix>& lu() const noexcept { return lu_; }
    double condition_estimate() const noexcept { return condition_; }

private:
    InteractionSystem sys_;
    Eigen::PartialPivLU<CMatrix> lu_;
    DipoleSolution solution_;
    double condition_ = 0.0;
};

DipoleSolution solve_direct(const InteractionSystem& sys);

struct BornResult {
    DipoleSolution solution;
    std::vector<double> residual_history;  // one entry per order used, starting at order 0
    bool converged = false;
    bool diverged = false;  // residual grew over kBornDivergenceWindow consecutive orders

    std::size_t orders_used() const noexcept { return residual_history.size(); }
};

inline constexpr int kBornDivergenceWindow = 10;

// Partial sums p_K = sum_{k<=K} (A G)^k A e with A = diag(alpha); term k is the k-bounce path
// contribution. Non-convergence is reported in the result, never thrown.
BornResult born_series(const InteractionSystem& sys, int k_max, double tol);

struct TuningChange {
    std::size_t index;  // meta-atom row
    double tuning;
};

// Solution after changing the tuning of a few meta-atoms, via a rank-|changes| Woodbury
// correction on the retained factorization. Throws DomainError for via rows, duplicate
// indices, or tuning outside [0, 1].
DipoleSolution woodbury_update(const FactorizedSystem& base, std::span<const TuningChange> changes);

// Meta-atom-only form of the interaction system. The vias have fixed polarizability, so they
// are eliminated once per topology:
//   coupling   C = G_mm + G_mv B^-1 G_vm,   B = diag(1/alpha_via) - G_vv
//   excitation f = e_m + G_mv B^-1 e_v
// and every configuration then solves (diag(1/alpha) - C) p_m = f. C is symmetric and, unlike
// G, has a non-zero diagonal (fields returning to an atom after reflection off the fence).
class CavityOperator {
public:
    CavityOperator(const DmaTopology& t, CouplingMode mode);

    const CMatrix& coupling() const noexcept { return coupling_; }
    const CVector& excitation() const noexcept { return excitation_; }
    std::size_t n_meta() const noexcept { return static_cast<std::size_t>(excitation_.size()); }
    CouplingMode mode() const noexcept { return mode_; }
    double frequency() const noexcept { return frequency_; }
    std::uint64_t topology_seed() const noexcept { return seed_; }
    std::uint64_t topology_fingerprint() const noexcept { return topology_fingerprint_; }

private:
    CMatrix coupling_;
    CVector excitation_;
    CouplingMode mode_;
    double frequency_;
    std::uint64_t seed_;
    std::uint64_t topology_fingerprint_;
};

struct ReducedSolution {
    std::vector<Polarizability> alpha;
    Eigen::PartialPivLU<CMatrix> lu;  // of diag(1/alpha) - C
    CVector moments;                  // meta-atoms only

    // d p / d c_n = M^-1 u_n * s_n, with s_n = (dalpha_n / alpha_n^2) p_n.
    Complex source_derivative(std::size_t n) const {
        return alpha[n].derivative / (alpha[n].value * alpha[n].value) * moments[static_cast<Eigen::Index>(n)];
    }
};

// Throws DegenerateSystem past kMaxConditionNumber.
ReducedSolution solve_reduced(const CavityOperator& cavity, const TuningState& s, const LorentzianModel& model);

}  // namespace dmasim
