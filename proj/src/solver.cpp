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

#include "dmasim/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dmasim {

std::string to_string(CouplingMode mode) {
    return mode == CouplingMode::Unilateral ? "UNILATERAL" : "FULL";
}

// ---------------------------------------------------------------------------
// TuningState

TuningState::TuningState(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!(values_[i] >= 0.0 && values_[i] <= 1.0))
            throw DomainError("tuning value " + std::to_string(i) + " outside [0, 1]");
    }
}

TuningState TuningState::uniform(std::size_t n, double c) {
    return TuningState(std::vector<double>(n, c));
}

TuningState TuningState::with(std::size_t index, double c) const {
    std::vector<double> v = values_;
    v.at(index) = c;
    return TuningState(std::move(v));
}

std::uint64_t TuningState::fingerprint() const {
    Fnv1a h;
    h.str("TuningState/v1").u64(values_.size());
    for (double v : values_) h.f64(v);
    return h.digest();
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

std::uint64_t system_fingerprint(std::uint64_t topology_fp, const TuningState& s, const LorentzianModel& m,
                                 CouplingMode mode) {
    return Fnv1a()
        .str("InteractionSystem/v1")
        .u64(topology_fp)
        .u64(s.fingerprint())
        .f64(m.oscillator_strength)
        .f64(m.resonance_low)
        .f64(m.resonance_high)
        .f64(m.damping)
        .u64(static_cast<std::uint64_t>(mode))
        .digest();
}

std::string degenerate_message(double cond, double frequency, std::uint64_t seed) {
    std::ostringstream os;
    os << "degenerate system: condition estimate " << cond << " exceeds " << kMaxConditionNumber << " at "
       << frequency << " Hz, topology seed " << seed;
    return os.str();
}

void check_tuning(const DmaTopology& t, const TuningState& s) {
    if (s.size() != t.n_meta())
        throw DomainError("tuning length " + std::to_string(s.size()) + " does not match " +
                          std::to_string(t.n_meta()) + " meta-atoms");
}

}  // namespace

InteractionSystem assemble(const DmaTopology& t, const TuningState& s, const LorentzianModel& model,
                           CouplingMode mode) {
    check_tuning(t, s);
    model.validate();
    const double k = t.context.wavenumber();
    const double f = t.context.frequency();

    InteractionSystem sys;
    sys.n_meta = t.n_meta();
    sys.n_via = t.n_via();
    sys.mode = mode;
    sys.tuning = s;
    sys.model = model;
    sys.frequency = f;
    sys.topology_seed = t.spec.rng_seed;
    sys.topology_fingerprint = t.spec_fingerprint;
    sys.fingerprint = system_fingerprint(t.spec_fingerprint, s, model, mode);
    sys.via_alpha = via_polarizability(k);

    std::vector<Point2> pos;
    pos.reserve(sys.size());
    pos.insert(pos.end(), t.meta_atom_positions.begin(), t.meta_atom_positions.end());
    pos.insert(pos.end(), t.via_positions.begin(), t.via_positions.end());

    const auto n = static_cast<Eigen::Index>(sys.size());
    sys.matrix = CMatrix::Zero(n, n);
    sys.source.resize(n);
    sys.meta_alpha.reserve(sys.n_meta);
    for (std::size_t i = 0; i < sys.n_meta; ++i) sys.meta_alpha.push_back(meta_atom_polarizability(s[i], model, f));

    for (Eigen::Index i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const Complex alpha = sys.is_meta(ui) ? sys.meta_alpha[ui].value : sys.via_alpha;
        sys.matrix(i, i) = 1.0 / alpha;
        sys.source[i] = greens_2d(k, t.feed_position, pos[ui]);
        if (mode == CouplingMode::Unilateral) continue;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const Complex g = greens_2d(k, pos[ui], pos[static_cast<std::size_t>(j)]);
            sys.matrix(i, j) = -g;
            sys.matrix(j, i) = -g;
        }
    }
    return sys;
}

double relative_residual(const CMatrix& m, const CVector& p, const CVector& e) {
    const double en = e.norm();
    return (m * p - e).norm() / (en > 0.0 ? en : 1.0);
}

// ---------------------------------------------------------------------------
// Direct solve

FactorizedSystem::FactorizedSystem(InteractionSystem sys) : sys_(std::move(sys)), lu_(sys_.matrix) {
    const double rcond = lu_.rcond();
    condition_ = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(condition_ <= kMaxConditionNumber))
        throw DegenerateSystem(degenerate_message(condition_, sys_.frequency, sys_.topology_seed));

    solution_.moments = lu_.solve(sys_.source);
    solution_.n_meta = sys_.n_meta;
    solution_.fingerprint = sys_.fingerprint;
    solution_.topology_fingerprint = sys_.topology_fingerprint;
    solution_.residual = relative_residual(sys_.matrix, solution_.moments, sys_.source);
}

DipoleSolution solve_direct(const InteractionSystem& sys) {
    return FactorizedSystem(sys).solution();
}

// ---------------------------------------------------------------------------
// Born series

BornResult born_series(const InteractionSystem& sys, int k_max, double tol) {
    if (k_max < 1) throw DomainError("born_series requires k_max >= 1");
    const auto n = static_cast<Eigen::Index>(sys.size());

    CVector alpha(n);
    for (Eigen::Index i = 0; i < n; ++i) alpha[i] = 1.0 / sys.matrix(i, i);
    // Off-diagonal coupling G = diag(M) - M.
    CMatrix coupling = -sys.matrix;
    coupling.diagonal().setZero();

    BornResult out;
    CVector term = alpha.cwiseProduct(sys.source);  // order 0: A e
    CVector sum = term;
    int growth_run = 0;
    double previous = std::numeric_limits<double>::infinity();

    for (int order = 0; order <= k_max; ++order) {
        if (order > 0) {
            term = alpha.cwiseProduct(coupling * term);
            sum += term;
        }
        const double r = relative_residual(sys.matrix, sum, sys.source);
        out.residual_history.push_back(r);
        if (r <= tol) {
            out.converged = true;
            break;
        }
        growth_run = (r > previous) ? growth_run + 1 : 0;
        previous = r;
        if (growth_run >= kBornDivergenceWindow || !std::isfinite(r)) {
            out.diverged = true;
            break;
        }
    }

    out.solution.moments = std::move(sum);
    out.solution.n_meta = sys.n_meta;
    out.solution.fingerprint = sys.fingerprint;
    out.solution.topology_fingerprint = sys.topology_fingerprint;
    out.solution.residual = out.residual_history.back();
    return out;
}

// ---------------------------------------------------------------------------
// Woodbury update
//
// M' = M + U D U^T with U selecting the changed rows and D_j = 1/alpha'_j - 1/alpha_j.
// p' = p - Z (I + D U^T Z)^-1 D U^T p,  Z = M^-1 U. This form never inverts D, so a change
// to the same tuning value (D_j = 0) is harmless.

DipoleSolution woodbury_update(const FactorizedSystem& base, std::span<const TuningChange> changes) {
    const InteractionSystem& sys = base.system();
    const DipoleSolution& p0 = base.solution();
    if (changes.empty()) return p0;

    std::vector<double> tuning(sys.tuning.values().begin(), sys.tuning.values().end());
    std::vector<std::size_t> seen;
    const auto r = static_cast<Eigen::Index>(changes.size());
    const auto n = static_cast<Eigen::Index>(sys.size());
    CMatrix z(n, r);
    CVector d(r);
    for (Eigen::Index j = 0; j < r; ++j) {
        const TuningChange& ch = changes[static_cast<std::size_t>(j)];
        if (!sys.is_meta(ch.index))
            throw DomainError("woodbury_update: row " + std::to_string(ch.index) + " is not a meta-atom");
        if (std::find(seen.begin(), seen.end(), ch.index) != seen.end())
            throw DomainError("woodbury_update: duplicate row " + std::to_string(ch.index));
        seen.push_back(ch.index);

        const Polarizability updated = meta_atom_polarizability(ch.tuning, sys.model, sys.frequency);
        d[j] = 1.0 / updated.value - 1.0 / sys.meta_alpha[ch.index].value;
        tuning[ch.index] = ch.tuning;
    }
    CMatrix unit = CMatrix::Zero(n, r);
    for (Eigen::Index j = 0; j < r; ++j) unit(static_cast<Eigen::Index>(seen[static_cast<std::size_t>(j)]), j) = 1.0;
    z = base.lu().solve(unit);

    CMatrix capacitance = CMatrix::Identity(r, r);
    CVector projected(r);
    for (Eigen::Index j = 0; j < r; ++j) {
        const auto row = static_cast<Eigen::Index>(seen[static_cast<std::size_t>(j)]);
        capacitance.row(j) += d[j] * z.row(row);
        projected[j] = d[j] * p0.moments[row];
    }
    const CVector correction = capacitance.partialPivLu().solve(projected);

    DipoleSolution out;
    out.moments = p0.moments - z * correction;
    out.n_meta = p0.n_meta;
    out.topology_fingerprint = p0.topology_fingerprint;
    const TuningState new_state(std::move(tuning));
    out.fingerprint = system_fingerprint(sys.topology_fingerprint, new_state, sys.model, sys.mode);

    // Residual against the updated matrix without forming it.
    CVector lhs = sys.matrix * out.moments - sys.source;
    for (Eigen::Index j = 0; j < r; ++j) {
        const auto row = static_cast<Eigen::Index>(seen[static_cast<std::size_t>(j)]);
        lhs[row] += d[j] * out.moments[row];
    }
    out.residual = lhs.norm() / sys.source.norm();
    return out;
}

// ---------------------------------------------------------------------------
// Via elimination

CavityOperator::CavityOperator(const DmaTopology& t, CouplingMode mode)
    : mode_(mode),
      frequency_(t.context.frequency()),
      seed_(t.spec.rng_seed),
      topology_fingerprint_(t.spec_fingerprint) {
    const double k = t.context.wavenumber();
    const auto nm = static_cast<Eigen::Index>(t.n_meta());
    const auto nv = static_cast<Eigen::Index>(t.n_via());
    const auto& atoms = t.meta_atom_positions;
    const auto& vias = t.via_positions;

    excitation_.resize(nm);
    for (Eigen::Index i = 0; i < nm; ++i) excitation_[i] = greens_2d(k, t.feed_position, atoms[static_cast<std::size_t>(i)]);
    coupling_ = CMatrix::Zero(nm, nm);
    if (mode == CouplingMode::Unilateral) return;

    for (Eigen::Index i = 0; i < nm; ++i)
        for (Eigen::Index j = i + 1; j < nm; ++j) {
            const Complex g = greens_2d(k, atoms[static_cast<std::size_t>(i)], atoms[static_cast<std::size_t>(j)]);
            coupling_(i, j) = g;
            coupling_(j, i) = g;
        }
    if (nv == 0) return;

    CMatrix via_block(nv, nv);
    const Complex inv_via = 1.0 / via_polarizability(k);
    for (Eigen::Index i = 0; i < nv; ++i) {
        via_block(i, i) = inv_via;
        for (Eigen::Index j = i + 1; j < nv; ++j) {
            const Complex g = greens_2d(k, vias[static_cast<std::size_t>(i)], vias[static_cast<std::size_t>(j)]);
            via_block(i, j) = -g;
            via_block(j, i) = -g;
        }
    }
    CMatrix cross(nv, nm);  // G_vm
    CVector via_source(nv);
    for (Eigen::Index v = 0; v < nv; ++v) {
        via_source[v] = greens_2d(k, t.feed_position, vias[static_cast<std::size_t>(v)]);
        for (Eigen::Index m = 0; m < nm; ++m)
            cross(v, m) = greens_2d(k, vias[static_cast<std::size_t>(v)], atoms[static_cast<std::size_t>(m)]);
    }

    const Eigen::PartialPivLU<CMatrix> lu(via_block);
    const double rcond = lu.rcond();
    const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(cond <= kMaxConditionNumber)) throw DegenerateSystem(degenerate_message(cond, frequency_, seed_));

    const CMatrix reflected = lu.solve(cross);  // B^-1 G_vm
    coupling_.noalias() += cross.transpose() * reflected;
    excitation_.noalias() += reflected.transpose() * via_source;
    // Symmetric by construction; remove round-off asymmetry.
    const CMatrix sym = 0.5 * (coupling_ + coupling_.transpose());
    coupling_ = sym;
}

ReducedSolution solve_reduced(const CavityOperator& cavity, const TuningState& s, const LorentzianModel& model) {
    const std::size_t n = cavity.n_meta();
    if (s.size() != n)
        throw DomainError("tuning length " + std::to_string(s.size()) + " does not match " + std::to_string(n) +
                          " meta-atoms");
    ReducedSolution out;
    out.alpha.reserve(n);
    CMatrix m = -cavity.coupling();
    for (std::size_t i = 0; i < n; ++i) {
        out.alpha.push_back(meta_atom_polarizability(s[i], model, cavity.frequency()));
        const auto ii = static_cast<Eigen::Index>(i);
        m(ii, ii) += 1.0 / out.alpha.back().value;
    }
    out.lu.compute(m);
    const double rcond = out.lu.rcond();
    const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(cond <= kMaxConditionNumber))
        throw DegenerateSystem(degenerate_message(cond, cavity.frequency(), cavity.topology_seed()));
    out.moments = out.lu.solve(cavity.excitation());
    return out;
}

}  // namespace dmasim
