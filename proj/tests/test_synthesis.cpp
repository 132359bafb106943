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

#include <random>

#include "dmasim/synthesis.hpp"
#include "oracles.hpp"

using namespace dmasim;

namespace {

const PhysicsContext kCtx(10e9);

DmaTopology level_topology(const std::string& level, std::uint64_t seed) {
    TopologySpec s = find_level(coupling_levels(kCtx), level).spec;
    s.rng_seed = seed;
    return generate_topology(s, kCtx);
}

BeamObjective small_objective(double w) {
    BeamObjective obj;
    auto roi = std::make_shared<const RoiGrid>(arc_roi(10.0, 37, -90.0, 90.0));
    obj.target = arc_target(*roi, 20.0, 5.0);
    obj.roi = roi;
    obj.sidelobe_weight = w;
    return obj;
}

// Cost through the full system with vias, sharing nothing with ForwardModel.
double full_cost(const DmaTopology& t, const TuningState& s, const LorentzianModel& m, const BeamObjective& obj,
                 CouplingMode mode) {
    return objective_eval(normalize(radiate(solve_direct(assemble(t, s, m, mode)), t, obj.roi)), obj);
}

}  // namespace

TEST_CASE("objective on simple patterns") {
    BeamObjective obj;
    auto roi = std::make_shared<const RoiGrid>(plane_roi(1.0, 1.0, 1.0, 1, 8));
    obj.roi = roi;
    obj.target = {2, 3};
    FieldMap f;
    f.roi = roi;
    f.values = CVector::Constant(8, Complex(1.0, 0.0));
    const FieldMap uniform = normalize(f);
    for (double w : {0.0, 0.5, 1.0, 3.0}) {
        obj.sidelobe_weight = w;
        CHECK(objective_eval(uniform, obj) == doctest::Approx((w - 1.0) / 8.0));
    }
    f.values.setZero();
    f.values[2] = Complex(0.6, 0.0);
    f.values[3] = Complex(0.0, 0.8);
    obj.sidelobe_weight = 2.0;
    CHECK(objective_eval(normalize(f), obj) == doctest::Approx(-0.5));
    CHECK_THROWS_AS(objective_eval(f, obj), DomainError);  // not normalized

    FieldMap other = uniform;
    other.roi = std::make_shared<const RoiGrid>(plane_roi(2.0, 1.0, 1.0, 1, 8));
    CHECK_THROWS_AS(objective_eval(other, obj), DomainError);
    obj.target = {};
    CHECK_THROWS_AS(objective_eval(uniform, obj), DomainError);
    obj.target = {0, 1, 2, 3, 4, 5, 6, 7};
    CHECK_THROWS_AS(objective_eval(uniform, obj), DomainError);
}

TEST_CASE("default objective targets five samples around +20 degrees") {
    const BeamObjective obj = default_beam_objective();
    CHECK(obj.roi->size() == 181);
    CHECK(obj.target.size() == 5);
    CHECK(obj.roi->angles_deg[obj.target.front()] == doctest::Approx(18.0));
    CHECK(obj.sidelobe_weight == 1.0);
}

TEST_CASE("adjoint gradient matches central differences of the full solve") {
    const LorentzianModel model = default_lorentzian(kCtx);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (const char* level : {"UNILATERAL", "SPARSE", "DENSE"}) {
        const CouplingMode mode = mode_of(find_level(coupling_levels(kCtx), level));
        for (double w : {0.0, 1.0}) {
            const DmaTopology t = level_topology(level, 40 + static_cast<std::uint64_t>(w));
            const BeamObjective obj = small_objective(w);
            std::vector<double> c(t.n_meta());
            for (auto& x : c) x = u(rng);
            const TuningState s(c);
            const RVector g = objective_gradient(t, s, model, obj, mode);
            // Every 8th atom keeps the full-system differences affordable.
            RVector got(8), fd(8);
            const double h = 1e-6;
            for (Eigen::Index j = 0; j < 8; ++j) {
                const auto i = static_cast<std::size_t>(8 * j + 3);
                got[j] = g[static_cast<Eigen::Index>(i)];
                fd[j] = (full_cost(t, s.with(i, c[i] + h), model, obj, mode) -
                         full_cost(t, s.with(i, c[i] - h), model, obj, mode)) /
                        (2.0 * h);
            }
            INFO(level << " w=" << w);
            CHECK(g.size() == 64);
            CHECK(oracle::rel_error(got, fd) < 1e-5);
        }
    }
}

TEST_CASE("synthesis: envelope, feasibility and determinism") {
    const DmaTopology t = level_topology("SPARSE", 6);
    const LorentzianModel model = default_lorentzian(kCtx);
    const BeamObjective obj = small_objective(1.0);
    SynthesisOptions opts;
    opts.restarts = 3;
    opts.iterations = 60;
    opts.seed = 12;
    const OptimizationResult a = synthesize(t, model, obj, opts, CouplingMode::Full);
    opts.threads = 3;
    const OptimizationResult b = synthesize(t, model, obj, opts, CouplingMode::Full);

    REQUIRE(a.cost_trace.size() == 61);
    for (std::size_t i = 1; i < a.best_so_far.size(); ++i) CHECK(a.best_so_far[i] <= a.best_so_far[i - 1]);
    CHECK(a.best_cost == a.best_so_far.back());
    CHECK(a.best_cost < a.cost_trace.front());
    for (double v : a.best_configuration.values()) CHECK((v >= 0.0 && v <= 1.0));
    CHECK(a.best_cost == doctest::Approx(full_cost(t, a.best_configuration, model, obj, CouplingMode::Full)).epsilon(1e-9));

    CHECK(a.best_configuration == b.best_configuration);
    CHECK(a.cost_trace == b.cost_trace);
    CHECK(a.best_restart == b.best_restart);
    CHECK(a.metrics.peak_intensity == b.metrics.peak_intensity);
    CHECK(a.restarts_used == 3);
}

TEST_CASE("synthesis argument checks and a flat run") {
    const DmaTopology t = level_topology("UNILATERAL", 6);
    const LorentzianModel model = default_lorentzian(kCtx);
    const BeamObjective obj = small_objective(1.0);
    SynthesisOptions opts;
    opts.restarts = 0;
    CHECK_THROWS_AS(synthesize(t, model, obj, opts, CouplingMode::Unilateral), DomainError);
    opts.restarts = 2;
    opts.iterations = 0;
    const OptimizationResult r = synthesize(t, model, obj, opts, CouplingMode::Unilateral);
    CHECK(r.cost_trace.size() == 1);
    CHECK(r.best_so_far.size() == 1);
}
