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

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "dmasim/solver.hpp"
#include "oracles.hpp"

using namespace dmasim;

namespace {

const PhysicsContext kCtx(10e9);

DmaTopology level_topology(const std::string& level, std::uint64_t seed) {
    TopologySpec s = find_level(coupling_levels(kCtx), level).spec;
    s.rng_seed = seed;
    return generate_topology(s, kCtx);
}

TuningState random_tuning(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return TuningState(v);
}

}  // namespace

TEST_CASE("two-atom system matches Cramer's rule") {
    const Point2 a(0.012, 0.003), b(-0.007, 0.015);
    const DmaTopology t = oracle::manual_topology({a, b});
    const LorentzianModel model = default_lorentzian(kCtx);
    const TuningState s(std::vector<double>{0.3, 0.8});
    const double k = kCtx.wavenumber();

    const Complex a1 = meta_atom_polarizability(0.3, model, kCtx.frequency()).value;
    const Complex a2 = meta_atom_polarizability(0.8, model, kCtx.frequency()).value;
    const Complex g = greens_2d(k, a, b);
    const Complex e1 = greens_2d(k, Point2(0, 0), a), e2 = greens_2d(k, Point2(0, 0), b);
    const Complex det = 1.0 / (a1 * a2) - g * g;
    const Complex p1 = (e1 / a2 + g * e2) / det;
    const Complex p2 = (e2 / a1 + g * e1) / det;

    const DipoleSolution sol = solve_direct(assemble(t, s, model, CouplingMode::Full));
    CHECK(std::abs(sol.moments[0] - p1) < 1e-13 * std::abs(p1));
    CHECK(std::abs(sol.moments[1] - p2) < 1e-13 * std::abs(p2));
    CHECK(sol.residual < 1e-14);
}

TEST_CASE("unilateral moments are alpha times the feed field") {
    const DmaTopology t = level_topology("SPARSE", 5);
    const LorentzianModel model = default_lorentzian(kCtx);
    std::mt19937_64 rng(11);
    const TuningState s = random_tuning(t.n_meta(), rng);
    const DipoleSolution sol = solve_direct(assemble(t, s, model, CouplingMode::Unilateral));
    const double k = kCtx.wavenumber();
    for (std::size_t i = 0; i < t.n_meta(); ++i) {
        const Complex want = meta_atom_polarizability(s[i], model, kCtx.frequency()).value *
                             greens_2d(k, t.feed_position, t.meta_atom_positions[i]);
        CHECK(std::abs(sol.moments[static_cast<Eigen::Index>(i)] - want) < 1e-14 * std::abs(want));
    }
}

TEST_CASE("assembled matrix is symmetric with the documented diagonal") {
    const DmaTopology t = level_topology("MEDIUM", 2);
    const LorentzianModel model = default_lorentzian(kCtx);
    const InteractionSystem sys = assemble(t, TuningState::uniform(t.n_meta(), 0.4), model, CouplingMode::Full);
    CHECK((sys.matrix - sys.matrix.transpose()).norm() == 0.0);
    CHECK(sys.size() == t.n_meta() + t.n_via());
    CHECK(std::abs(sys.matrix(0, 0) - 1.0 / meta_atom_polarizability(0.4, model, kCtx.frequency()).value) < 1e-15);
    const auto last = static_cast<Eigen::Index>(sys.size() - 1);
    CHECK(std::abs(sys.matrix(last, last) - 1.0 / via_polarizability(kCtx.wavenumber())) < 1e-15);
}

TEST_CASE("Born partial sums follow the geometric series") {
    // Weak atoms spread over a wide area: the series converges quickly.
    std::vector<Point2> atoms;
    for (int i = 0; i < 6; ++i) atoms.emplace_back(0.05 * std::cos(i), 0.04 * i + 0.01);
    const DmaTopology t = oracle::manual_topology(atoms);
    const LorentzianModel model = default_lorentzian(kCtx, 0.05);
    std::mt19937_64 rng(3);
    const InteractionSystem sys = assemble(t, random_tuning(atoms.size(), rng), model, CouplingMode::Full);

    CVector alpha(sys.matrix.rows());
    for (Eigen::Index i = 0; i < alpha.size(); ++i) alpha[i] = 1.0 / sys.matrix(i, i);
    CMatrix g = -sys.matrix;
    g.diagonal().setZero();
    const CMatrix ag = alpha.asDiagonal() * g;

    const BornResult born = born_series(sys, 200, 1e-13);
    REQUIRE(born.converged);
    CVector term = alpha.cwiseProduct(sys.source), sum = term;
    for (std::size_t order = 0; order < born.orders_used(); ++order) {
        if (order > 0) {
            term = ag * term;
            sum += term;
        }
        const double r = (sys.matrix * sum - sys.source).norm() / sys.source.norm();
        CHECK(born.residual_history[order] == doctest::Approx(r).epsilon(1e-8));
    }
    CHECK(oracle::rel_error(born.solution.moments, sum) < 1e-14);
    CHECK(oracle::rel_error(born.solution.moments, solve_direct(sys).moments) < 1e-12);
}

TEST_CASE("Born series flags divergence under strong coupling") {
    const DmaTopology t = level_topology("DENSE", 1);
    const LorentzianModel model = default_lorentzian(kCtx);
    const InteractionSystem sys = assemble(t, TuningState::uniform(t.n_meta(), 0.5), model, CouplingMode::Full);
    const BornResult born = born_series(sys, 500, 1e-10);
    CHECK_FALSE(born.converged);
    CHECK(born.diverged);
    CHECK_THROWS_AS(born_series(sys, 0, 1e-10), DomainError);
}

TEST_CASE("Born series is exact at order zero without coupling") {
    const DmaTopology t = level_topology("SPARSE", 9);
    const InteractionSystem sys =
        assemble(t, TuningState::uniform(t.n_meta(), 0.2), default_lorentzian(kCtx), CouplingMode::Unilateral);
    const BornResult born = born_series(sys, 10, 1e-14);
    CHECK(born.converged);
    CHECK(born.orders_used() == 1);
}

TEST_CASE("Woodbury updates match full re-solves for rank 1, 4 and 8") {
    const LorentzianModel model = default_lorentzian(kCtx);
    std::mt19937_64 rng(2024);
    for (const char* level : {"SPARSE", "MEDIUM", "DENSE"}) {
        const DmaTopology t = level_topology(level, 17);
        const FactorizedSystem base(assemble(t, random_tuning(t.n_meta(), rng), model, CouplingMode::Full));
        for (std::size_t k : {1u, 4u, 8u}) {
            std::vector<std::size_t> idx(t.n_meta());
            std::iota(idx.begin(), idx.end(), 0);
            std::shuffle(idx.begin(), idx.end(), rng);
            std::vector<TuningChange> changes;
            std::vector<double> updated(base.system().tuning.values().begin(), base.system().tuning.values().end());
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (std::size_t j = 0; j < k; ++j) {
                const double c = u(rng);
                changes.push_back({idx[j], c});
                updated[idx[j]] = c;
            }
            const DipoleSolution w = woodbury_update(base, changes);
            const DipoleSolution direct = solve_direct(assemble(t, TuningState(updated), model, CouplingMode::Full));
            INFO(level << " rank " << k);
            CHECK(oracle::rel_error(w.moments, direct.moments) < 1e-9);
            CHECK(w.residual < 1e-9);
            CHECK(w.fingerprint == direct.fingerprint);
        }
    }
}

TEST_CASE("Woodbury rejects via rows and duplicates, tolerates no-op changes") {
    const DmaTopology t = level_topology("SPARSE", 4);
    const LorentzianModel model = default_lorentzian(kCtx);
    const FactorizedSystem base(assemble(t, TuningState::uniform(t.n_meta(), 0.5), model, CouplingMode::Full));
    const std::vector<TuningChange> via{{t.n_meta(), 0.3}};
    CHECK_THROWS_AS(woodbury_update(base, via), DomainError);
    const std::vector<TuningChange> dup{{2, 0.3}, {2, 0.4}};
    CHECK_THROWS_AS(woodbury_update(base, dup), DomainError);
    const std::vector<TuningChange> bad{{2, 1.5}};
    CHECK_THROWS_AS(woodbury_update(base, bad), DomainError);
    const std::vector<TuningChange> same{{2, 0.5}};
    CHECK(oracle::rel_error(woodbury_update(base, same).moments, base.solution().moments) < 1e-12);
}

TEST_CASE("via elimination reproduces the full solve") {
    const LorentzianModel model = default_lorentzian(kCtx);
    std::mt19937_64 rng(99);
    for (const char* level : {"UNILATERAL", "SPARSE", "MEDIUM", "DENSE"}) {
        const CouplingLevel& l = find_level(coupling_levels(kCtx), level);
        const DmaTopology t = level_topology(level, 21);
        const CouplingMode mode = mode_of(l);
        const CavityOperator cavity(t, mode);
        CHECK((cavity.coupling() - cavity.coupling().transpose()).norm() < 1e-12 * cavity.coupling().norm() + 1e-300);
        for (int rep = 0; rep < 3; ++rep) {
            const TuningState s = random_tuning(t.n_meta(), rng);
            const ReducedSolution red = solve_reduced(cavity, s, model);
            const DipoleSolution full = solve_direct(assemble(t, s, model, mode));
            INFO(level);
            CHECK(oracle::rel_error(red.moments, CVector(full.meta_moments())) < 1e-10);
        }
    }
}

TEST_CASE("tuning states validate their range and size") {
    CHECK_THROWS_AS(TuningState(std::vector<double>{0.1, 1.2}), DomainError);
    CHECK_THROWS_AS(TuningState(std::vector<double>{-0.1}), DomainError);
    const TuningState a = TuningState::uniform(4, 0.5);
    CHECK(a.with(1, 0.25)[1] == 0.25);
    CHECK(a.fingerprint() != a.with(1, 0.25).fingerprint());
    const DmaTopology t = level_topology("SPARSE", 1);
    CHECK_THROWS_AS(assemble(t, a, default_lorentzian(kCtx), CouplingMode::Full), DomainError);
}
