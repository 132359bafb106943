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

#include "dmasim/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dmasim/parallel.hpp"

namespace dmasim {

void BeamObjective::validate() const {
    if (!roi) throw DomainError("beam objective has no ROI");
    if (!(sidelobe_weight >= 0.0)) throw DomainError("sidelobe weight must be non-negative");
    complement_indices(target, roi->size());
}

std::vector<std::size_t> arc_target(const RoiGrid& arc, double center_deg, double half_width_deg) {
    if (arc.kind != RoiGrid::Kind::Arc) throw DomainError("arc_target needs an ARC ROI");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < arc.angles_deg.size(); ++i)
        if (std::abs(arc.angles_deg[i] - center_deg) <= half_width_deg + 1e-9) out.push_back(i);
    return out;
}

BeamObjective default_beam_objective() {
    BeamObjective obj;
    auto roi = std::make_shared<const RoiGrid>(default_arc_roi());
    obj.target = arc_target(*roi, 20.0, 2.0);
    obj.roi = std::move(roi);
    obj.sidelobe_weight = 1.0;
    return obj;
}

namespace {

// Per-sample weights: -1/|T| on the target, w/|C| on the complement.
RVector sample_weights(const BeamObjective& obj) {
    const std::size_t n = obj.roi->size();
    const std::vector<std::size_t> rest = complement_indices(obj.target, n);
    std::vector<char> in_target(n, 0);
    for (std::size_t i : obj.target) in_target[i] = 1;
    const auto n_target = static_cast<double>(n - rest.size());
    RVector w(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        w[static_cast<Eigen::Index>(i)] = in_target[i] ? -1.0 / n_target : obj.sidelobe_weight / static_cast<double>(rest.size());
    return w;
}

bool same_grid(const RoiGrid& a, const RoiGrid& b) {
    if (&a == &b) return true;
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.points[i] != b.points[i]) return false;
    return true;
}

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

}  // namespace

double objective_eval(const FieldMap& f, const BeamObjective& obj) {
    obj.validate();
    if (!f.roi || !same_grid(*f.roi, *obj.roi)) throw DomainError("grid mismatch between field map and objective");
    if (!f.normalized) throw DomainError("objective_eval expects a normalized field map");
    const RVector w = sample_weights(obj);
    return (w.array() * f.values.cwiseAbs2().array()).sum();
}

// With W = diag(weights), the cost of E / ||E|| is J = E^H W E / E^H E, so for a real parameter
//   dJ/dc = 2 Re(h^H dE/dc),  h = (W E - J E) / ||E||^2.
// dE/dc_n = R M^-1 u_n s_n and M is complex symmetric, so all N entries follow from one solve
//   a = M^-1 (R^T conj(h)),  dJ/dc_n = 2 Re(a_n s_n).
ObjectiveValue objective_and_gradient(const ForwardModel& fm, const TuningState& s, const BeamObjective& obj) {
    if (!same_grid(*fm.roi(), *obj.roi)) throw DomainError("grid mismatch between forward model and objective");
    const RVector w = sample_weights(obj);
    ForwardModel::Evaluation ev = fm.evaluate(s);
    const CVector& e = ev.field;
    const double power = e.squaredNorm();
    if (!(power > 0.0)) throw NullPattern("null pattern: cannot normalize an all-zero field");

    ObjectiveValue out;
    out.cost = (w.array() * e.cwiseAbs2().array()).sum() / power;
    const CVector h = (w.cast<Complex>().cwiseProduct(e) - out.cost * e) / power;
    const CVector adjoint = ev.solution.lu.solve(fm.radiation().transpose() * h.conjugate());

    const std::size_t n = fm.n_meta();
    out.gradient.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        out.gradient[ii] = 2.0 * (adjoint[ii] * ev.solution.source_derivative(i)).real();
    }
    out.field = std::move(ev.field);
    return out;
}

RVector objective_gradient(const DmaTopology& t, const TuningState& s, const LorentzianModel& model,
                           const BeamObjective& obj, CouplingMode mode) {
    obj.validate();
    const ForwardModel fm(t, model, obj.roi, mode);
    return objective_and_gradient(fm, s, obj).gradient;
}

namespace {

struct RestartOutcome {
    TuningState best;
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<double> trace;
};

RestartOutcome run_restart(const ForwardModel& fm, const BeamObjective& obj, const SynthesisOptions& opts, int restart) {
    const std::size_t n = fm.n_meta();
    std::mt19937_64 rng(Fnv1a().str("synthesize/restart").u64(opts.seed).u64(static_cast<std::uint64_t>(restart)).digest());
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> u(n), m(n, 0.0), v(n, 0.0), c(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double c0 = std::clamp(unit(rng), 1e-6, 1.0 - 1e-6);
        u[i] = std::log(c0 / (1.0 - c0));
    }

    RestartOutcome out;
    out.trace.reserve(static_cast<std::size_t>(opts.iterations) + 1);
    double beta1_pow = 1.0, beta2_pow = 1.0;
    for (int it = 0; it <= opts.iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) c[i] = sigmoid(u[i]);
        TuningState state(c);
        const ObjectiveValue val = objective_and_gradient(fm, state, obj);
        out.trace.push_back(val.cost);
        if (val.cost < out.best_cost) {
            out.best_cost = val.cost;
            out.best = std::move(state);
        }
        if (it == opts.iterations) break;

        const double progress = static_cast<double>(it) / static_cast<double>(opts.iterations);
        const double lr = opts.step * 0.5 * (1.0 + std::cos(kPi * progress));
        beta1_pow *= opts.beta1;
        beta2_pow *= opts.beta2;
        for (std::size_t i = 0; i < n; ++i) {
            const double g = val.gradient[static_cast<Eigen::Index>(i)] * c[i] * (1.0 - c[i]);  // chain through sigmoid
            m[i] = opts.beta1 * m[i] + (1.0 - opts.beta1) * g;
            v[i] = opts.beta2 * v[i] + (1.0 - opts.beta2) * g * g;
            const double m_hat = m[i] / (1.0 - beta1_pow);
            const double v_hat = v[i] / (1.0 - beta2_pow);
            u[i] -= lr * m_hat / (std::sqrt(v_hat) + opts.epsilon);
        }
    }
    return out;
}

}  // namespace

OptimizationResult synthesize(const DmaTopology& t, const LorentzianModel& model, const BeamObjective& obj,
                              const SynthesisOptions& opts, CouplingMode mode) {
    obj.validate();
    if (opts.restarts < 1) throw DomainError("synthesize needs at least one restart");
    if (opts.iterations < 0) throw DomainError("iteration count must be non-negative");

    const ForwardModel fm(t, model, obj.roi, mode);
    std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(opts.restarts));
    parallel_for(outcomes.size(), opts.threads,
                 [&](std::size_t r) { outcomes[r] = run_restart(fm, obj, opts, static_cast<int>(r)); });

    std::size_t winner = 0;
    for (std::size_t r = 1; r < outcomes.size(); ++r)
        if (outcomes[r].best_cost < outcomes[winner].best_cost) winner = r;

    OptimizationResult res;
    res.best_configuration = outcomes[winner].best;
    res.best_cost = outcomes[winner].best_cost;
    res.cost_trace = std::move(outcomes[winner].trace);
    res.best_so_far.resize(res.cost_trace.size());
    double running = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < res.cost_trace.size(); ++i) res.best_so_far[i] = running = std::min(running, res.cost_trace[i]);
    res.restarts_used = opts.restarts;
    res.best_restart = static_cast<int>(winner);
    res.seed = opts.seed;

    const ForwardModel::Evaluation ev = fm.evaluate(res.best_configuration);
    FieldMap f;
    f.values = ev.field;
    f.roi = obj.roi;
    res.metrics = beam_metrics(normalize(f), obj.target);
    return res;
}

}  // namespace dmasim
