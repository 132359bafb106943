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

// dmasim command-line driver.
//
//   dmasim <topology|simulate|sensitivity|linearity|tradeoff|synthesize|check> [flags]
//
// Exit status: 0 success, 1 domain/numerical error, 2 config or usage error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "dmasim/analysis.hpp"
#include "dmasim/io.hpp"
#include "dmasim/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dmasim;

namespace {

constexpr const char* kOutEnv = "DMASIM_OUT";

struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    bool full_scale = false;
    std::string level;
};

struct Run {
    ExperimentConfig cfg;
    fs::path out;
    unsigned threads = 1;
    std::uint64_t hash = 0;
    std::vector<std::string> levels;  // levels the command operates on

    ArtifactMeta meta(const std::string& command, const std::string& level = {}) const {
        ArtifactMeta m{command, hash, cfg.seed, {}};
        if (!level.empty()) m.extra.emplace_back("level", level);
        return m;
    }
};

Run prepare(const Flags& f, bool all_levels_by_default) {
    Run run;
    run.cfg = f.config.empty() ? default_config() : load_config(f.config);
    if (f.seed) run.cfg.seed = *f.seed;
    if (f.full_scale) {
        run.cfg.n_topologies = 12;
        run.cfg.n_configs = 1000;
    }
    if (!f.level.empty()) {
        if (std::none_of(run.cfg.levels.begin(), run.cfg.levels.end(),
                         [&](const LevelSpec& l) { return l.name == f.level; }))
            throw ConfigError("--level", "unknown coupling level '" + f.level + "'");
        run.cfg.level = f.level;
        run.levels = {f.level};
    } else if (all_levels_by_default) {
        for (const auto& l : run.cfg.levels) run.levels.push_back(l.name);
    } else {
        run.levels = {run.cfg.level};
    }
    if (!f.out.empty())
        run.out = f.out;
    else if (const char* env = std::getenv(kOutEnv); env && *env)
        run.out = env;
    else
        run.out = run.cfg.output_dir;
    run.threads = std::max(1u, f.threads);
    run.hash = config_hash(run.cfg);
    fs::create_directories(run.out);
    write_json(run.out / "config.json", config_to_json(run.cfg));
    return run;
}

CouplingMode mode_for(const LevelSpec& l) { return l.unilateral ? CouplingMode::Unilateral : CouplingMode::Full; }

DmaTopology topology_for(const Run& run, const LevelSpec& l, std::uint64_t t = 0) {
    return generate_topology(run.cfg.topology_for(l, t), run.cfg.context());
}

void report(const fs::path& p) { std::cout << "wrote " << p.string() << '\n'; }

// ---------------------------------------------------------------------------

int cmd_topology(const Run& run) {
    for (const auto& name : run.levels) {
        const LevelSpec& l = run.cfg.find_level(name);
        const DmaTopology t = topology_for(run, l);
        const ValidationReport rep = validate_topology(t);
        json j{{"meta", meta_json(run.meta("topology", name))},
               {"topology", t},
               {"unilateral", l.unilateral},
               {"valid", rep.ok()}};
        const fs::path p = run.out / ("topology_" + name + ".json");
        write_json(p, j);
        report(p);
        std::cout << name << ": " << t.n_meta() << " meta-atoms, " << t.n_via() << " vias\n";
    }
    return 0;
}

int cmd_simulate(const Run& run) {
    for (const auto& name : run.levels) {
        const LevelSpec& l = run.cfg.find_level(name);
        const DmaTopology t = topology_for(run, l);
        const TuningState s = TuningState::uniform(t.n_meta(), run.cfg.uniform_tuning);
        const DipoleSolution sol = solve_direct(assemble(t, s, run.cfg.model, mode_for(l)));
        auto roi = std::make_shared<const RoiGrid>(run.cfg.plane.build());
        const FieldMap field = radiate(sol, t, roi);
        ArtifactMeta m = run.meta("simulate", name);
        m.extra.emplace_back("uniform_tuning", format_double(run.cfg.uniform_tuning));

        const fs::path csv = run.out / ("field_" + name + ".csv");
        const fs::path bin = run.out / ("field_" + name + ".bin");
        const fs::path moments = run.out / ("moments_" + name + ".csv");
        write_field_csv(csv, field, m);
        write_field_binary(bin, field, m);
        write_solution_csv(moments, sol.moments, m);
        report(csv);
        report(bin);
        report(moments);
        std::cout << name << ": residual " << sol.residual << '\n';
    }
    return 0;
}

int cmd_sensitivity(const Run& run) {
    auto roi = std::make_shared<const RoiGrid>(run.cfg.plane.build());
    json summary{{"meta", meta_json(run.meta("sensitivity"))}, {"levels", json::array()}};
    for (const auto& name : run.levels) {
        const LevelSpec& l = run.cfg.find_level(name);
        const DmaTopology t = topology_for(run, l);
        const ForwardModel fm(t, run.cfg.model, roi, mode_for(l));
        const TuningState base = TuningState::uniform(t.n_meta(), run.cfg.uniform_tuning);
        const ForwardModel::Evaluation ev = fm.evaluate(base);

        FieldMap single;
        single.values = fm.normalized_derivative(ev, run.cfg.sensitivity_atom);
        single.roi = roi;
        ArtifactMeta m = run.meta("sensitivity", name);
        m.extra.emplace_back("atom", std::to_string(run.cfg.sensitivity_atom));
        const fs::path p1 = run.out / ("sensitivity_" + name + "_atom" + std::to_string(run.cfg.sensitivity_atom) + ".csv");
        write_field_csv(p1, single, m);
        report(p1);

        const SensitivityStats st = mean_sensitivity(fm, Ensemble{run.cfg.n_configs, run.cfg.seed}, run.threads);
        ArtifactMeta mm = run.meta("sensitivity", name);
        mm.extra.emplace_back("n_configs", std::to_string(st.n_configs));
        mm.extra.emplace_back("sigma", format_double(st.sigma));
        const fs::path p2 = run.out / ("sensitivity_mean_" + name + ".csv");
        write_real_map_csv(p2, *roi, st.mean_map, mm);
        report(p2);
        summary["levels"].push_back({{"level", name}, {"sigma", st.sigma}, {"n_configs", st.n_configs},
                                     {"n_atoms", st.n_atoms}, {"via_count", t.n_via()}});
        std::cout << name << ": sigma " << format_double(st.sigma) << '\n';
    }
    const fs::path p = run.out / "sensitivity.json";
    write_json(p, summary);
    report(p);
    return 0;
}

int cmd_linearity(const Run& run) {
    const std::string& name = run.levels.front();
    const LevelSpec& l = run.cfg.find_level(name);
    auto roi = std::make_shared<const RoiGrid>(run.cfg.sweep_plane.build());
    const DmaTopology t = topology_for(run, l);
    const ForwardModel fm(t, run.cfg.model, roi, mode_for(l));
    const FieldDataset ds =
        simulate_dataset(fm, sample_configs(sweep_config_seed(run.cfg.seed, 0), run.cfg.n_configs, t.n_meta()), run.threads);
    const auto [train, test] =
        split_indices(ds.size(), run.cfg.train_fraction, Fnv1a().str("sweep/split").u64(run.cfg.seed).u64(0).digest());
    const LinearSurrogate sur = fit_linear_surrogate(ds.subset(train), run.cfg.features);
    const double zeta = linearity_metric(sur, ds.subset(test));

    const json j{{"meta", meta_json(run.meta("linearity", name))},
                 {"level", name},
                 {"zeta_db", zeta},
                 {"features", to_string(run.cfg.features)},
                 {"n_train", train.size()},
                 {"n_test", test.size()},
                 {"via_count", t.n_via()}};
    const fs::path p = run.out / ("linearity_" + name + ".json");
    write_json(p, j);
    report(p);
    std::cout << name << ": zeta " << format_double(zeta) << " dB\n";
    return 0;
}

int cmd_tradeoff(const Run& run) {
    std::vector<CouplingLevel> levels;
    for (const auto& name : run.levels) {
        const LevelSpec& l = run.cfg.find_level(name);
        levels.push_back({l.name, run.cfg.topology_for(l), l.unilateral});
    }
    SweepOptions opts;
    opts.n_topologies = run.cfg.n_topologies;
    opts.n_configs = run.cfg.n_configs;
    opts.seed = run.cfg.seed;
    opts.train_fraction = run.cfg.train_fraction;
    opts.features = run.cfg.features;
    opts.threads = run.threads;
    auto roi = std::make_shared<const RoiGrid>(run.cfg.sweep_plane.build());
    const TradeoffResult res = tradeoff_sweep(levels, run.cfg.context(), run.cfg.model, roi, opts);

    const fs::path csv = run.out / "tradeoff.csv";
    write_sweep_csv(csv, res.records, run.meta("tradeoff"));
    json j = to_json_value(res);
    j["meta"] = meta_json(run.meta("tradeoff"));
    std::vector<double> sigma, zeta;
    for (const auto& r : res.records) {
        sigma.push_back(r.sigma);
        zeta.push_back(r.zeta_db);
    }
    if (res.records.size() >= 2) j["spearman_sigma_zeta"] = spearman(sigma, zeta);
    const fs::path js = run.out / "tradeoff.json";
    write_json(js, j);
    report(csv);
    report(js);
    for (const auto& r : res.records)
        std::cout << r.level << ": vias " << format_double(r.via_count) << ", sigma " << format_double(r.sigma)
                  << ", zeta " << format_double(r.zeta_db) << " dB\n";
    return 0;
}

int cmd_synthesize(const Run& run) {
    const BeamObjective obj = run.cfg.objective();
    for (const auto& name : run.levels) {
        const LevelSpec& l = run.cfg.find_level(name);
        const DmaTopology t = topology_for(run, l);
        SynthesisOptions opts = run.cfg.synthesis;
        opts.seed = run.cfg.seed;
        opts.threads = run.threads;
        const OptimizationResult res = synthesize(t, run.cfg.model, obj, opts, mode_for(l));

        json j = to_json_value(res);
        j["meta"] = meta_json(run.meta("synthesize", name));
        j["level"] = name;
        j["target"] = obj.target;
        const fs::path js = run.out / ("synthesis_" + name + ".json");
        write_json(js, j);

        const ForwardModel fm(t, run.cfg.model, obj.roi, mode_for(l));
        FieldMap f;
        f.values = fm.evaluate(res.best_configuration).field;
        f.roi = obj.roi;
        const fs::path csv = run.out / ("synthesis_" + name + ".csv");
        write_field_csv(csv, normalize(f), run.meta("synthesize", name));
        report(js);
        report(csv);
        std::cout << name << ": cost " << format_double(res.best_cost) << ", peak "
                  << format_double(res.metrics.peak_intensity) << ", target/rest "
                  << format_double(res.metrics.target_to_rest_ratio_db) << " dB\n";
    }
    return 0;
}

// Finite differences against the adjoint gradient and the analytic sensitivity, plus the
// Born series against the direct solve, on seeded random cases.
int cmd_check(const Run& run) {
    constexpr double kStep = 1e-6;
    constexpr double kAdjointTol = 1e-5;
    constexpr double kBornTol = 1e-8;
    const BeamObjective obj = run.cfg.objective();
    bool ok = true;
    json levels = json::array();

    for (const auto& name : run.levels) {
        const LevelSpec& l = run.cfg.find_level(name);
        const CouplingMode mode = mode_for(l);
        const std::size_t n_cases = run.cfg.check_cases;
        struct Case {
            double gradient_error = 0.0, sensitivity_error = 0.0, born_error = 0.0;
            bool born_converged = false;
            std::size_t born_orders = 0;
        };
        std::vector<Case> cases(n_cases);
        parallel_for(n_cases, run.threads, [&](std::size_t i) {
            const DmaTopology t = topology_for(run, l, i);
            std::mt19937_64 rng(Fnv1a().str("check").u64(run.cfg.seed).u64(i).digest());
            std::uniform_real_distribution<double> inner(0.05, 0.95);
            std::vector<double> c(t.n_meta());
            for (auto& x : c) x = inner(rng);
            const TuningState s(c);
            const std::size_t atom = static_cast<std::size_t>(rng() % t.n_meta());

            const ForwardModel fm(t, run.cfg.model, obj.roi, mode);
            const RVector g = objective_gradient(t, s, run.cfg.model, obj, mode);
            const auto cost_at = [&](const TuningState& st) {
                FieldMap f;
                f.values = fm.evaluate(st).field;
                f.roi = obj.roi;
                return objective_eval(normalize(f), obj);
            };
            RVector g_fd(g.size());
            for (Eigen::Index n = 0; n < g.size(); ++n) {
                const auto k = static_cast<std::size_t>(n);
                g_fd[n] = (cost_at(s.with(k, c[k] + kStep)) - cost_at(s.with(k, c[k] - kStep))) / (2.0 * kStep);
            }
            cases[i].gradient_error = (g - g_fd).norm() / g_fd.norm();

            const CVector d = fm.normalized_derivative(fm.evaluate(s), atom);
            const auto norm_field = [&](const TuningState& st) {
                const CVector e = fm.evaluate(st).field;
                return CVector(e / e.norm());
            };
            const CVector d_fd =
                (norm_field(s.with(atom, c[atom] + kStep)) - norm_field(s.with(atom, c[atom] - kStep))) / (2.0 * kStep);
            cases[i].sensitivity_error = (d - d_fd).norm() / d_fd.norm();

            const InteractionSystem sys = assemble(t, s, run.cfg.model, mode);
            const DipoleSolution direct = solve_direct(sys);
            const BornResult born = born_series(sys, run.cfg.born_max_orders, run.cfg.born_tolerance);
            cases[i].born_converged = born.converged;
            cases[i].born_orders = born.orders_used();
            cases[i].born_error = (born.solution.moments - direct.moments).norm() / direct.moments.norm();
        });

        double worst_grad = 0.0, worst_sens = 0.0, worst_born = 0.0;
        std::size_t converged = 0;
        json per = json::array();
        for (const auto& cs : cases) {
            worst_grad = std::max(worst_grad, cs.gradient_error);
            worst_sens = std::max(worst_sens, cs.sensitivity_error);
            if (cs.born_converged) {
                ++converged;
                worst_born = std::max(worst_born, cs.born_error);
            }
            per.push_back({{"gradient_rel_error", cs.gradient_error},
                           {"sensitivity_rel_error", cs.sensitivity_error},
                           {"born_converged", cs.born_converged},
                           {"born_orders", cs.born_orders},
                           {"born_rel_error", cs.born_error}});
        }
        const bool level_ok = worst_grad < kAdjointTol && worst_sens < kAdjointTol && worst_born < kBornTol;
        ok = ok && level_ok;
        levels.push_back({{"level", name},
                          {"cases", per},
                          {"max_gradient_rel_error", worst_grad},
                          {"max_sensitivity_rel_error", worst_sens},
                          {"born_converged_cases", converged},
                          {"max_born_rel_error", worst_born},
                          {"ok", level_ok}});
        std::cout << name << ": gradient " << format_double(worst_grad) << ", sensitivity " << format_double(worst_sens)
                  << ", born converged " << converged << "/" << n_cases << " (max error " << format_double(worst_born)
                  << ")" << (level_ok ? "" : "  FAILED") << '\n';
    }
    const fs::path p = run.out / "check.json";
    write_json(p, json{{"meta", meta_json(run.meta("check"))}, {"levels", levels}, {"ok", ok}});
    report(p);
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled-dipole simulator for cavity-backed dynamic metasurface antennas"};
    app.require_subcommand(1);
    Flags flags;

    struct Command {
        const char* name;
        const char* help;
        bool all_levels;
        int (*fn)(const Run&);
    };
    const Command commands[] = {
        {"topology", "generate and export the cavity topology", true, cmd_topology},
        {"simulate", "forward solve for a uniform configuration, field map on the plane ROI", false, cmd_simulate},
        {"sensitivity", "single-atom and ensemble-mean sensitivity maps", true, cmd_sensitivity},
        {"linearity", "linear-surrogate metric for one coupling level", false, cmd_linearity},
        {"tradeoff", "sensitivity / linearity sweep across coupling levels", true, cmd_tradeoff},
        {"synthesize", "adjoint beam synthesis", false, cmd_synthesize},
        {"check", "finite-difference and Born-series diagnostics", true, cmd_check},
    };
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", flags.config, "experiment config (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--out", flags.out, std::string("output directory (default: $") + kOutEnv + " or config)");
        sub->add_option("--seed", flags.seed, "override the config seed");
        sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--full-scale", flags.full_scale, "12 topologies x 1000 configurations");
        sub->add_option("--level", flags.level, "coupling level name");
        subs.emplace_back(sub, &c);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (const auto& [sub, c] : subs) {
            if (!sub->parsed()) continue;
            const Run run = prepare(flags, c->all_levels);
            return c->fn(run);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
