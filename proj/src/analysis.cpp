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

#include "dmasim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dmasim/parallel.hpp"

namespace dmasim {

SensitivityMap sensitivity_map(const DmaTopology& t, const TuningState& s, const LorentzianModel& model,
                               std::shared_ptr<const RoiGrid> roi, std::size_t atom, CouplingMode mode) {
    if (atom >= t.n_meta()) throw DomainError("atom index " + std::to_string(atom) + " out of range");
    const ForwardModel fm(t, model, roi, mode);
    const ForwardModel::Evaluation ev = fm.evaluate(s);
    SensitivityMap out;
    out.values = fm.normalized_derivative(ev, atom);
    out.atom = atom;
    out.configuration_fingerprint = s.fingerprint();
    out.roi = std::move(roi);
    return out;
}

std::vector<TuningState> sample_configs(std::uint64_t seed, std::size_t n, std::size_t dim) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<TuningState> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(dim);
        for (auto& x : v) x = std::min(unit(rng), 1.0);
        out.emplace_back(std::move(v));
    }
    return out;
}

namespace {

constexpr std::size_t kChunk = 16;

struct SensitivityChunk {
    double total = 0.0;
    RVector map;
};

}  // namespace

SensitivityStats mean_sensitivity(const ForwardModel& fm, const Ensemble& ensemble, unsigned threads) {
    if (ensemble.n_configs < 1) throw DomainError("ensemble needs at least one configuration");
    const std::vector<TuningState> configs = sample_configs(ensemble.seed, ensemble.n_configs, fm.n_meta());
    const auto n_roi = static_cast<Eigen::Index>(fm.roi()->size());

    const std::size_t n_chunks = (configs.size() + kChunk - 1) / kChunk;
    std::vector<SensitivityChunk> chunks(n_chunks);
    parallel_for(n_chunks, threads, [&](std::size_t c) {
        SensitivityChunk& out = chunks[c];
        out.map = RVector::Zero(n_roi);
        const std::size_t end = std::min(configs.size(), (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) {
            const CMatrix jac = fm.normalized_jacobian(fm.evaluate(configs[i]));
            const Eigen::MatrixXd mag = jac.cwiseAbs();
            out.map += mag.rowwise().sum();
        }
        out.total = out.map.sum();
    });

    SensitivityStats stats;
    stats.n_configs = configs.size();
    stats.n_atoms = fm.n_meta();
    stats.mean_map = RVector::Zero(n_roi);
    for (const auto& ch : chunks) stats.mean_map += ch.map;
    const double per_sample = static_cast<double>(stats.n_configs * stats.n_atoms);
    stats.mean_map /= per_sample;
    stats.sigma = stats.mean_map.mean();
    return stats;
}

SensitivityStats mean_sensitivity(const DmaTopology& t, const Ensemble& ensemble, const LorentzianModel& model,
                                  std::shared_ptr<const RoiGrid> roi, CouplingMode mode, unsigned threads) {
    const ForwardModel fm(t, model, std::move(roi), mode);
    return mean_sensitivity(fm, ensemble, threads);
}

// ---------------------------------------------------------------------------
// Regression

std::string to_string(FeatureSet f) { return f == FeatureSet::AlphaParts ? "ALPHA_PARTS" : "ALPHA"; }

std::size_t feature_count(FeatureSet f, std::size_t n_atoms) {
    return 1 + (f == FeatureSet::AlphaParts ? 2 * n_atoms : n_atoms);
}

FieldDataset FieldDataset::subset(const std::vector<std::size_t>& rows) const {
    FieldDataset out;
    out.model = model;
    out.frequency = frequency;
    out.fields.resize(static_cast<Eigen::Index>(rows.size()), fields.cols());
    out.configs.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.configs.push_back(configs.at(rows[i]));
        out.fields.row(static_cast<Eigen::Index>(i)) = fields.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

FieldDataset simulate_dataset(const ForwardModel& fm, const std::vector<TuningState>& configs, unsigned threads) {
    FieldDataset ds;
    ds.configs = configs;
    ds.model = fm.model();
    ds.frequency = fm.cavity().frequency();
    ds.fields.resize(static_cast<Eigen::Index>(configs.size()), static_cast<Eigen::Index>(fm.roi()->size()));
    parallel_for(configs.size(), threads, [&](std::size_t i) {
        ds.fields.row(static_cast<Eigen::Index>(i)) = fm.evaluate(configs[i]).field.transpose();
    });
    return ds;
}

CMatrix design_matrix(const std::vector<TuningState>& configs, const LorentzianModel& model, double frequency,
                      FeatureSet features) {
    if (configs.empty()) return CMatrix(0, 0);
    const std::size_t n = configs.front().size();
    CMatrix x(static_cast<Eigen::Index>(configs.size()), static_cast<Eigen::Index>(feature_count(features, n)));
    for (std::size_t r = 0; r < configs.size(); ++r) {
        if (configs[r].size() != n) throw DomainError("configurations in a dataset must share one size");
        const auto row = static_cast<Eigen::Index>(r);
        x(row, 0) = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Complex a = meta_atom_polarizability(configs[r][i], model, frequency).value;
            const auto col = static_cast<Eigen::Index>(1 + i);
            if (features == FeatureSet::Alpha) {
                x(row, col) = a;
            } else {
                x(row, col) = a.real();
                x(row, col + static_cast<Eigen::Index>(n)) = a.imag();
            }
        }
    }
    return x;
}

namespace {

std::vector<std::uint64_t> sorted_ids(const std::vector<TuningState>& configs) {
    std::vector<std::uint64_t> ids;
    ids.reserve(configs.size());
    for (const auto& c : configs) ids.push_back(c.fingerprint());
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace

LinearSurrogate fit_linear_surrogate(const FieldDataset& train, FeatureSet features) {
    if (train.size() == 0) throw DomainError("empty training set");
    const std::size_t n_atoms = train.configs.front().size();
    const std::size_t n_features = feature_count(features, n_atoms);
    if (train.size() < 2 * n_features)
        throw DomainError("regression needs at least " + std::to_string(2 * n_features) + " samples, got " +
                          std::to_string(train.size()));

    const CMatrix x = design_matrix(train.configs, train.model, train.frequency, features);
    const Eigen::ColPivHouseholderQR<CMatrix> qr(x);
    if (qr.rank() < x.cols())
        throw DegenerateRegression("degenerate regression: design matrix rank " + std::to_string(qr.rank()) + " < " +
                                   std::to_string(x.cols()));
    const CMatrix coef = qr.solve(train.fields);  // features x samples

    LinearSurrogate sur;
    sur.bias = coef.row(0).transpose();
    sur.weights = coef.bottomRows(coef.rows() - 1).transpose();
    sur.features = features;
    sur.model = train.model;
    sur.frequency = train.frequency;
    sur.training_ids = sorted_ids(train.configs);
    Fnv1a h;
    h.str("LinearSurrogate/training");
    for (auto id : sur.training_ids) h.u64(id);
    sur.training_fingerprint = h.digest();
    return sur;
}

CMatrix LinearSurrogate::predict(const std::vector<TuningState>& configs) const {
    const CMatrix x = design_matrix(configs, model, frequency, features);
    CMatrix out = x.rightCols(x.cols() - 1) * weights.transpose();
    out.rowwise() += bias.transpose();
    return out;
}

double linearity_metric(const LinearSurrogate& sur, const FieldDataset& test) {
    if (test.size() == 0) throw DomainError("empty test set");
    for (const auto& c : test.configs) {
        if (std::binary_search(sur.training_ids.begin(), sur.training_ids.end(), c.fingerprint()))
            throw DomainError("test set shares a configuration with the training set");
    }
    const double signal = test.fields.squaredNorm();
    const double noise = (test.fields - sur.predict(test.configs)).squaredNorm();
    if (noise <= 0.0) return kMaxDecibels;
    if (signal <= 0.0) return -kMaxDecibels;
    return std::clamp(10.0 * std::log10(signal / noise), -kMaxDecibels, kMaxDecibels);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double train_fraction,
                                                                             std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw DomainError("train fraction must lie in (0, 1)");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Fisher-Yates with an explicit draw so the permutation does not depend on the library's shuffle.
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

// ---------------------------------------------------------------------------
// Sweep

RoiGrid default_sweep_roi() { return plane_roi(1.0, 2.0, 2.0, 21, 21); }

std::uint64_t sweep_config_seed(std::uint64_t sweep_seed, std::size_t topology_index) {
    return Fnv1a().str("sweep/configs").u64(sweep_seed).u64(topology_index).digest();
}

namespace {

TopologyStats sweep_item(const CouplingLevel& level, std::size_t level_index, std::size_t topology_index,
                         const PhysicsContext& ctx, const LorentzianModel& model,
                         const std::shared_ptr<const RoiGrid>& roi, const SweepOptions& opts) {
    TopologySpec spec = level.spec;
    spec.rng_seed = opts.seed + topology_index;
    const DmaTopology topo = generate_topology(spec, ctx);
    const ForwardModel fm(topo, model, roi, mode_of(level));
    const std::vector<TuningState> configs =
        sample_configs(sweep_config_seed(opts.seed, topology_index), opts.n_configs, topo.n_meta());

    FieldDataset ds;
    ds.configs = configs;
    ds.model = model;
    ds.frequency = ctx.frequency();
    ds.fields.resize(static_cast<Eigen::Index>(configs.size()), static_cast<Eigen::Index>(roi->size()));
    double sens_total = 0.0;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const ForwardModel::Evaluation ev = fm.evaluate(configs[i]);
        sens_total += fm.normalized_jacobian(ev).cwiseAbs().sum();
        ds.fields.row(static_cast<Eigen::Index>(i)) = ev.field.transpose();
    }

    const auto [train, test] =
        split_indices(configs.size(), opts.train_fraction, Fnv1a().str("sweep/split").u64(opts.seed).u64(topology_index).digest());
    const LinearSurrogate sur = fit_linear_surrogate(ds.subset(train), opts.features);

    TopologyStats st;
    st.level_index = level_index;
    st.topology_index = topology_index;
    st.via_count = topo.n_via();
    st.sigma = sens_total / static_cast<double>(configs.size() * topo.n_meta() * roi->size());
    st.zeta_db = linearity_metric(sur, ds.subset(test));
    return st;
}

}  // namespace

TradeoffResult tradeoff_sweep(const std::vector<CouplingLevel>& levels, const PhysicsContext& ctx,
                              const LorentzianModel& model, std::shared_ptr<const RoiGrid> roi,
                              const SweepOptions& opts) {
    if (levels.size() < 2) throw DomainError("trade-off sweep needs at least two coupling levels");
    if (opts.n_topologies < 1) throw DomainError("trade-off sweep needs at least one topology");
    const std::size_t n_items = levels.size() * opts.n_topologies;

    TradeoffResult result;
    result.per_topology.resize(n_items);
    parallel_for(n_items, opts.threads, [&](std::size_t item) {
        const std::size_t l = item / opts.n_topologies;
        const std::size_t t = item % opts.n_topologies;
        result.per_topology[item] = sweep_item(levels[l], l, t, ctx, model, roi, opts);
    });

    for (std::size_t l = 0; l < levels.size(); ++l) {
        TradeoffRecord rec;
        rec.level = levels[l].name;
        rec.level_index = l;
        rec.n_topologies = opts.n_topologies;
        rec.n_configs = opts.n_configs;
        rec.seed = opts.seed;
        for (std::size_t t = 0; t < opts.n_topologies; ++t) {
            const TopologyStats& st = result.per_topology[l * opts.n_topologies + t];
            rec.via_count += static_cast<double>(st.via_count);
            rec.sigma += st.sigma;
            rec.zeta_db += st.zeta_db;
        }
        const auto n = static_cast<double>(opts.n_topologies);
        rec.via_count /= n;
        rec.sigma /= n;
        rec.zeta_db /= n;
        result.records.push_back(rec);
    }
    return result;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("spearman needs two equal-length series (n >= 2)");
    const auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < order.size();) {
            std::size_t j = i;
            while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> rx = ranks(x), ry = ranks(y);
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace dmasim
