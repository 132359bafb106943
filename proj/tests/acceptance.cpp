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

// Acceptance suite: one PASS/FAIL line per criterion.
// usage: acceptance <path-to-dmasim-cli> [scratch-dir]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "dmasim/analysis.hpp"
#include "dmasim/synthesis.hpp"
#include "oracles.hpp"

using namespace dmasim;
namespace fs = std::filesystem;

namespace {

const PhysicsContext kCtx(10e9);

struct Verdict {
    bool pass;
    std::string detail;
};

int g_failed = 0;

template <typename F>
void criterion(int id, const std::string& name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v{false, ""};
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++g_failed;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.detail.c_str(),
                secs);
    std::fflush(stdout);
}

std::string fmt(double v, int prec = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

DmaTopology level_topology(const CouplingLevel& l, std::uint64_t seed) {
    TopologySpec s = l.spec;
    s.rng_seed = seed;
    return generate_topology(s, kCtx);
}

TuningState random_tuning(std::size_t n, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return TuningState(v);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------

Verdict born_direct() {
    const auto levels = coupling_levels(kCtx);
    const LorentzianModel model = default_lorentzian(kCtx);
    std::mt19937_64 rng(101);
    std::ostringstream detail;
    bool ok = true;
    std::size_t converged_total = 0;
    for (const auto& l : levels) {
        std::size_t converged = 0;
        double worst = 0.0;
        for (std::uint64_t i = 0; i < 50; ++i) {
            const DmaTopology t = level_topology(l, 1000 + i);
            const InteractionSystem sys = assemble(t, random_tuning(t.n_meta(), rng), model, mode_of(l));
            const BornResult born = born_series(sys, 2000, 1e-10);
            if (!born.converged) continue;
            ++converged;
            worst = std::max(worst, oracle::rel_error(born.solution.moments, solve_direct(sys).moments));
        }
        ok = ok && worst < 1e-8;
        converged_total += converged;
        detail << l.name << " " << converged << "/50 convergent, max err " << fmt(worst) << "; ";
    }

    // Weak-coupling control with the full solver: the same cavities without a fence, atoms at
    // 5% of the unitary limit, so the series converges and the comparison is not empty.
    const LorentzianModel weak = default_lorentzian(kCtx, 0.05);
    std::size_t control_converged = 0;
    double control_worst = 0.0;
    for (std::uint64_t i = 0; i < 50; ++i) {
        DmaTopology t = level_topology(levels[1], 2000 + i);
        t.via_positions.clear();
        const InteractionSystem sys = assemble(t, random_tuning(t.n_meta(), rng), weak, CouplingMode::Full);
        const BornResult born = born_series(sys, 2000, 1e-10);
        if (!born.converged) continue;
        ++control_converged;
        control_worst = std::max(control_worst, oracle::rel_error(born.solution.moments, solve_direct(sys).moments));
    }
    ok = ok && control_worst < 1e-8 && converged_total + control_converged > 0;
    detail << "weak-coupling control " << control_converged << "/50 convergent, max err " << fmt(control_worst);
    return {ok, detail.str()};
}

Verdict adjoint_fd() {
    const auto levels = coupling_levels(kCtx);
    const CouplingLevel* spanning[] = {&find_level(levels, "UNILATERAL"), &find_level(levels, "SPARSE"),
                                       &find_level(levels, "DENSE")};
    const LorentzianModel model = default_lorentzian(kCtx);
    const BeamObjective obj = default_beam_objective();
    auto plane = std::make_shared<const RoiGrid>(plane_roi(1.0, 2.0, 2.0, 11, 11));
    std::mt19937_64 rng(202);
    constexpr double h = 1e-6;
    double worst_map = 0.0, worst_grad = 0.0;

    for (int k = 0; k < 50; ++k) {
        const CouplingLevel& l = *spanning[k % 3];
        const CouplingMode mode = mode_of(l);
        const DmaTopology t = level_topology(l, 3000 + static_cast<std::uint64_t>(k));
        const TuningState s = random_tuning(t.n_meta(), rng, 0.02, 0.98);
        const auto c = s.values();

        // Oracle: central differences through the full system with vias.
        const auto full_field = [&](const TuningState& st, const std::shared_ptr<const RoiGrid>& roi) {
            return radiate(solve_direct(assemble(t, st, model, mode)), t, roi);
        };
        const std::size_t atom = static_cast<std::size_t>(rng() % t.n_meta());
        const SensitivityMap map = sensitivity_map(t, s, model, plane, atom, mode);
        const CVector fd_map = (normalize(full_field(s.with(atom, c[atom] + h), plane)).values -
                                normalize(full_field(s.with(atom, c[atom] - h), plane)).values) /
                               (2.0 * h);
        worst_map = std::max(worst_map, oracle::rel_error(map.values, fd_map));

        const RVector g = objective_gradient(t, s, model, obj, mode);
        // Eight atoms per case keep the full-system differences within budget.
        std::vector<std::size_t> idx(t.n_meta());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::shuffle(idx.begin(), idx.end(), rng);
        RVector got(8), fd(8);
        for (Eigen::Index j = 0; j < 8; ++j) {
            const std::size_t n = idx[static_cast<std::size_t>(j)];
            got[j] = g[static_cast<Eigen::Index>(n)];
            const double up = objective_eval(normalize(full_field(s.with(n, c[n] + h), obj.roi)), obj);
            const double down = objective_eval(normalize(full_field(s.with(n, c[n] - h), obj.roi)), obj);
            fd[j] = (up - down) / (2.0 * h);
        }
        worst_grad = std::max(worst_grad, oracle::rel_error(got, fd));
    }
    return {worst_map < 1e-5 && worst_grad < 1e-5,
            "50 cases over UNILATERAL/SPARSE/DENSE, max rel err sensitivity " + fmt(worst_map) + ", gradient " +
                fmt(worst_grad)};
}

Verdict unilateral_affinity() {
    const auto levels = coupling_levels(kCtx);
    const DmaTopology t = level_topology(find_level(levels, "UNILATERAL"), 1);
    auto roi = std::make_shared<const RoiGrid>(default_sweep_roi());
    const ForwardModel fm(t, default_lorentzian(kCtx), roi, CouplingMode::Unilateral);
    const FieldDataset ds = simulate_dataset(fm, sample_configs(404, 200, t.n_meta()));
    const auto [train, test] = split_indices(ds.size(), 0.8, 405);
    const FieldDataset held = ds.subset(test);
    const LinearSurrogate sur = fit_linear_surrogate(ds.subset(train));
    const double rel_mse = (held.fields - sur.predict(held.configs)).squaredNorm() / held.fields.squaredNorm();
    const double zeta = linearity_metric(sur, held);
    return {rel_mse < 1e-10, "held-out relative MSE " + fmt(rel_mse) + ", zeta " + fmt(zeta) + " dB"};
}

TradeoffResult g_sweep;

Verdict tradeoff() {
    const auto levels = coupling_levels(kCtx);
    SweepOptions opts;  // 12 topologies x 200 configurations
    auto roi = std::make_shared<const RoiGrid>(default_sweep_roi());
    g_sweep = tradeoff_sweep(levels, kCtx, default_lorentzian(kCtx), roi, opts);
    bool ok = levels.size() >= 4;
    std::vector<double> sigma, zeta;
    std::ostringstream detail;
    for (std::size_t i = 0; i < g_sweep.records.size(); ++i) {
        const auto& r = g_sweep.records[i];
        sigma.push_back(r.sigma);
        zeta.push_back(r.zeta_db);
        if (i > 0) ok = ok && sigma[i] > sigma[i - 1] && zeta[i] < zeta[i - 1];
        detail << r.level << " sigma " << fmt(r.sigma, 4) << " zeta " << fmt(r.zeta_db, 4) << " dB; ";
    }
    const double rho = spearman(sigma, zeta);
    ok = ok && rho == -1.0;
    detail << "spearman " << fmt(rho);
    return {ok, detail.str()};
}

Verdict sensitivity_ratio() {
    // Per-topology sigma from the 12 x 200 sweep above (same seeds, same ensembles).
    if (g_sweep.per_topology.empty()) tradeoff();
    const auto levels = coupling_levels(kCtx);
    std::size_t uni = 0, dense = 0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i].name == "UNILATERAL") uni = i;
        if (levels[i].name == "DENSE") dense = i;
    }
    std::vector<double> su(12), sd(12);
    for (const auto& st : g_sweep.per_topology) {
        if (st.level_index == uni) su[st.topology_index] = st.sigma;
        if (st.level_index == dense) sd[st.topology_index] = st.sigma;
    }
    std::vector<double> ratio(12);
    for (std::size_t t = 0; t < 12; ++t) ratio[t] = sd[t] / su[t];
    const double m = median(ratio);
    return {m >= 2.0, "median DENSE/UNILATERAL sigma ratio over 12 topologies " + fmt(m) + " (min " +
                          fmt(*std::min_element(ratio.begin(), ratio.end())) + ", max " +
                          fmt(*std::max_element(ratio.begin(), ratio.end())) + ")"};
}

Verdict synthesis_ordering() {
    const auto levels = coupling_levels(kCtx);
    const BeamObjective obj = default_beam_objective();
    const LorentzianModel model = default_lorentzian(kCtx);
    std::ostringstream detail;
    std::vector<double> ratio_med, peak_med;
    for (const char* name : {"UNILATERAL", "SPARSE", "DENSE"}) {
        const CouplingLevel& l = find_level(levels, name);
        const DmaTopology t = level_topology(l, 1);
        std::vector<double> ratios, peaks;
        for (std::uint64_t seed = 1; seed <= 8; ++seed) {
            SynthesisOptions opts;
            opts.seed = seed;
            const OptimizationResult r = synthesize(t, model, obj, opts, mode_of(l));
            ratios.push_back(r.metrics.target_to_rest_ratio_db);
            peaks.push_back(r.metrics.peak_intensity);
        }
        ratio_med.push_back(median(ratios));
        peak_med.push_back(median(peaks));
        detail << name << " ratio " << fmt(ratio_med.back(), 4) << " dB peak " << fmt(peak_med.back(), 4) << "; ";
    }
    const bool ordered = ratio_med[2] > ratio_med[1] && ratio_med[1] > ratio_med[0];
    const double gap_db = 10.0 * std::log10(peak_med[2] / peak_med[0]);
    detail << "ordering " << (ordered ? "holds" : "violated") << ", DENSE-UNILATERAL peak gap " << fmt(gap_db) << " dB";
    return {ordered && gap_db >= 3.0, detail.str()};
}

Verdict woodbury() {
    const auto levels = coupling_levels(kCtx);
    const LorentzianModel model = default_lorentzian(kCtx);
    std::mt19937_64 rng(707);
    double worst = 0.0;
    const std::size_t ranks[] = {1, 4, 8};
    for (int k = 0; k < 30; ++k) {
        const CouplingLevel& l = levels[1 + static_cast<std::size_t>(k) % 3];
        const DmaTopology t = level_topology(l, 5000 + static_cast<std::uint64_t>(k));
        const FactorizedSystem base(assemble(t, random_tuning(t.n_meta(), rng), model, mode_of(l)));
        const std::size_t rank = ranks[k % 3];
        std::vector<std::size_t> idx(t.n_meta());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<double> c(base.system().tuning.values().begin(), base.system().tuning.values().end());
        std::vector<TuningChange> changes;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t j = 0; j < rank; ++j) {
            c[idx[j]] = u(rng);
            changes.push_back({idx[j], c[idx[j]]});
        }
        const DipoleSolution w = woodbury_update(base, changes);
        const DipoleSolution direct = solve_direct(assemble(t, TuningState(c), model, mode_of(l)));
        worst = std::max(worst, oracle::rel_error(w.moments, direct.moments));
    }
    return {worst < 1e-9, "30 cases, ranks 1/4/8, max rel err " + fmt(worst)};
}

Verdict determinism(const std::string& cli, const fs::path& scratch) {
    std::ostringstream detail;
    bool ok = true;
    struct Run {
        const char* command;
        std::vector<const char*> files;
    };
    const Run runs[] = {{"tradeoff", {"tradeoff.csv", "tradeoff.json"}},
                        {"synthesize", {"synthesis_DENSE.json", "synthesis_DENSE.csv"}}};
    for (const auto& r : runs) {
        for (const char* threads : {"1", "4"}) {
            const fs::path out = scratch / (std::string(r.command) + "_t" + threads);
            const std::string cmd = "\"" + cli + "\" " + r.command + " --config \"" + DMASIM_DEFAULT_CONFIG +
                                    "\" --out \"" + out.string() + "\" --threads " + threads + " > /dev/null";
            if (std::system(cmd.c_str()) != 0) return {false, std::string(r.command) + " exited with an error"};
        }
        for (const char* f : r.files) {
            const std::string a = slurp(scratch / (std::string(r.command) + "_t1") / f);
            const std::string b = slurp(scratch / (std::string(r.command) + "_t4") / f);
            const bool same = !a.empty() && a == b;
            ok = ok && same;
            detail << f << (same ? " identical" : " DIFFERS") << "; ";
        }
    }
    detail << "threads 1 vs 4";
    return {ok, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <dmasim-cli> [scratch-dir]\n", argv[0]);
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path scratch = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "dmasim_acceptance";
    fs::create_directories(scratch);

    criterion(1, "Born/direct equivalence", born_direct);
    criterion(2, "adjoint vs finite differences", adjoint_fd);
    criterion(3, "unilateral affinity", unilateral_affinity);
    criterion(4, "sigma/zeta trade-off", tradeoff);
    criterion(5, "DENSE vs UNILATERAL sensitivity", sensitivity_ratio);
    criterion(6, "synthesis ordering and peak gap", synthesis_ordering);
    criterion(7, "Woodbury consistency", woodbury);
    criterion(8, "artifact determinism", [&] { return determinism(cli, scratch); });

    std::printf("%d of 8 criteria failed\n", g_failed);
    return g_failed == 0 ? 0 : 1;
}
