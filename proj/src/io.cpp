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

#include "dmasim/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace dmasim {

using nlohmann::json;

// ---------------------------------------------------------------------------
// ExperimentConfig

std::vector<CouplingLevel> ExperimentConfig::coupling_levels() const {
    std::vector<CouplingLevel> out;
    out.reserve(levels.size());
    for (const auto& l : levels) out.push_back({l.name, topology_for(l), l.unilateral});
    return out;
}

const LevelSpec& ExperimentConfig::find_level(const std::string& name) const {
    for (const auto& l : levels)
        if (l.name == name) return l;
    throw DomainError("unknown coupling level '" + name + "'");
}

TopologySpec ExperimentConfig::topology_for(const LevelSpec& level, std::uint64_t t) const {
    TopologySpec s = topology;
    s.via_spacing = level.via_spacing;
    s.rng_seed = seed + t;
    return s;
}

BeamObjective ExperimentConfig::objective() const {
    BeamObjective obj;
    auto roi = std::make_shared<const RoiGrid>(arc.build());
    obj.target = arc_target(*roi, target_center_deg, target_half_width_deg);
    obj.roi = std::move(roi);
    obj.sidelobe_weight = sidelobe_weight;
    return obj;
}

ExperimentConfig default_config() {
    ExperimentConfig c;
    const PhysicsContext ctx = c.context();
    c.topology = default_topology_spec(ctx);
    c.model = default_lorentzian(ctx);
    for (const auto& l : dmasim::coupling_levels(ctx)) c.levels.push_back({l.name, l.spec.via_spacing, l.unilateral});
    return c;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

// Walks one JSON object, tracking which keys were consumed so leftovers can be reported.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    std::string path(const std::string& key) const { return path_ + "/" + key; }

    const json* raw(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = raw(key)) {
            if (!v->is_number()) throw ConfigError(path(key), "expected a number");
            out = v->get<double>();
            if (!std::isfinite(out)) throw ConfigError(path(key), "expected a finite number");
        }
    }

    template <typename Int>
    void integer(const std::string& key, Int& out) {
        if (const json* v = raw(key)) {
            if (!v->is_number_integer()) throw ConfigError(path(key), "expected an integer");
            if constexpr (std::is_unsigned_v<Int>) {
                if (v->is_number_unsigned()) {
                    out = static_cast<Int>(v->get<std::uint64_t>());
                    return;
                }
                const auto s = v->get<std::int64_t>();
                if (s < 0) throw ConfigError(path(key), "expected a non-negative integer");
                out = static_cast<Int>(s);
            } else {
                out = static_cast<Int>(v->get<std::int64_t>());
            }
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const json* v = raw(key)) {
            if (!v->is_boolean()) throw ConfigError(path(key), "expected true or false");
            out = v->get<bool>();
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const json* v = raw(key)) {
            if (!v->is_string()) throw ConfigError(path(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(path(it.key()), "unknown field");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw ConfigError(path, what);
}

void read_plane(ObjectReader& parent, const std::string& key, PlaneRoiSpec& out) {
    const json* v = parent.raw(key);
    if (!v) return;
    const std::string p = parent.path(key);
    ObjectReader r(*v, p);
    r.number("distance", out.distance);
    r.number("width", out.width);
    r.number("height", out.height);
    r.integer("rows", out.rows);
    r.integer("cols", out.cols);
    r.finish();
    require(out.distance > 0.0, p + "/distance", "must be positive");
    require(out.width >= 0.0, p + "/width", "must be non-negative");
    require(out.height >= 0.0, p + "/height", "must be non-negative");
    require(out.rows >= 1, p + "/rows", "must be at least 1");
    require(out.cols >= 1, p + "/cols", "must be at least 1");
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c = default_config();
    ObjectReader root(j, "");

    root.integer("seed", c.seed);
    root.number("frequency", c.frequency);
    require(c.frequency > 0.0, "/frequency", "must be positive");
    const PhysicsContext ctx = c.context();
    // Frequency-dependent defaults follow the configured frequency.
    c.topology = default_topology_spec(ctx);
    c.model = default_lorentzian(ctx);
    c.levels.clear();
    for (const auto& l : dmasim::coupling_levels(ctx)) c.levels.push_back({l.name, l.spec.via_spacing, l.unilateral});

    if (const json* v = root.raw("topology")) {
        ObjectReader r(*v, "/topology");
        r.number("cavity_side", c.topology.cavity_side);
        r.number("boundary_irregularity", c.topology.boundary_irregularity);
        r.integer("n_meta_atoms", c.topology.n_meta_atoms);
        r.number("min_separation", c.topology.min_separation);
        std::string feed = to_string(c.topology.feed_placement);
        r.string("feed_placement", feed);
        if (feed == "random")
            c.topology.feed_placement = FeedPlacement::Random;
        else if (feed == "centroid")
            c.topology.feed_placement = FeedPlacement::Centroid;
        else
            throw ConfigError("/topology/feed_placement", "expected random or centroid");
        r.finish();
    }

    if (const json* v = root.raw("levels")) {
        require(v->is_array(), "/levels", "expected an array");
        require(!v->empty(), "/levels", "needs at least one level");
        c.levels.clear();
        std::set<std::string> names;
        for (std::size_t i = 0; i < v->size(); ++i) {
            const std::string p = "/levels/" + std::to_string(i);
            ObjectReader r((*v)[i], p);
            LevelSpec l;
            r.string("name", l.name);
            r.number("via_spacing", l.via_spacing);
            r.boolean("unilateral", l.unilateral);
            r.finish();
            require(!l.name.empty(), p + "/name", "must be a non-empty string");
            require(names.insert(l.name).second, p + "/name", "duplicate level name");
            c.levels.push_back(l);
        }
    }
    for (std::size_t i = 0; i < c.levels.size(); ++i) {
        try {
            c.topology_for(c.levels[i]).validate(ctx);
        } catch (const DomainError& e) {
            throw ConfigError(j.contains("levels") ? "/levels/" + std::to_string(i) : "/topology", e.what());
        }
    }

    if (const json* v = root.raw("model")) {
        ObjectReader r(*v, "/model");
        r.number("oscillator_strength", c.model.oscillator_strength);
        r.number("resonance_low", c.model.resonance_low);
        r.number("resonance_high", c.model.resonance_high);
        r.number("damping", c.model.damping);
        r.finish();
    }
    try {
        c.model.validate();
    } catch (const DomainError& e) {
        throw ConfigError("/model", e.what());
    }

    read_plane(root, "plane", c.plane);
    read_plane(root, "sweep_plane", c.sweep_plane);
    if (const json* v = root.raw("arc")) {
        ObjectReader r(*v, "/arc");
        r.number("radius", c.arc.radius);
        r.integer("n_angles", c.arc.n_angles);
        r.number("first_deg", c.arc.first_deg);
        r.number("last_deg", c.arc.last_deg);
        r.finish();
        require(c.arc.radius > 0.0, "/arc/radius", "must be positive");
        require(c.arc.n_angles >= 2, "/arc/n_angles", "must be at least 2");
        require(c.arc.first_deg >= -90.0 && c.arc.last_deg <= 90.0 && c.arc.first_deg < c.arc.last_deg, "/arc",
                "angles must satisfy -90 <= first_deg < last_deg <= 90");
    }

    if (const json* v = root.raw("objective")) {
        ObjectReader r(*v, "/objective");
        r.number("target_center_deg", c.target_center_deg);
        r.number("target_half_width_deg", c.target_half_width_deg);
        r.number("sidelobe_weight", c.sidelobe_weight);
        r.finish();
        require(c.sidelobe_weight >= 0.0, "/objective/sidelobe_weight", "must be non-negative");
    }
    try {
        c.objective().validate();
    } catch (const DomainError& e) {
        throw ConfigError("/objective", e.what());
    }

    if (const json* v = root.raw("ensemble")) {
        ObjectReader r(*v, "/ensemble");
        r.integer("n_topologies", c.n_topologies);
        r.integer("n_configs", c.n_configs);
        r.number("train_fraction", c.train_fraction);
        std::string features = to_string(c.features);
        r.string("features", features);
        if (features == "ALPHA")
            c.features = FeatureSet::Alpha;
        else if (features == "ALPHA_PARTS")
            c.features = FeatureSet::AlphaParts;
        else
            throw ConfigError("/ensemble/features", "expected ALPHA or ALPHA_PARTS");
        r.finish();
        require(c.n_topologies >= 1, "/ensemble/n_topologies", "must be at least 1");
        require(c.n_configs >= 2, "/ensemble/n_configs", "must be at least 2");
        require(c.train_fraction > 0.0 && c.train_fraction < 1.0, "/ensemble/train_fraction", "must lie in (0, 1)");
    }

    if (const json* v = root.raw("synthesis")) {
        ObjectReader r(*v, "/synthesis");
        r.integer("restarts", c.synthesis.restarts);
        r.integer("iterations", c.synthesis.iterations);
        r.number("step", c.synthesis.step);
        r.number("beta1", c.synthesis.beta1);
        r.number("beta2", c.synthesis.beta2);
        r.number("epsilon", c.synthesis.epsilon);
        r.finish();
        require(c.synthesis.restarts >= 1, "/synthesis/restarts", "must be at least 1");
        require(c.synthesis.iterations >= 0, "/synthesis/iterations", "must be non-negative");
        require(c.synthesis.step > 0.0, "/synthesis/step", "must be positive");
        require(c.synthesis.beta1 >= 0.0 && c.synthesis.beta1 < 1.0, "/synthesis/beta1", "must lie in [0, 1)");
        require(c.synthesis.beta2 >= 0.0 && c.synthesis.beta2 < 1.0, "/synthesis/beta2", "must lie in [0, 1)");
        require(c.synthesis.epsilon > 0.0, "/synthesis/epsilon", "must be positive");
    }

    root.number("uniform_tuning", c.uniform_tuning);
    require(c.uniform_tuning >= 0.0 && c.uniform_tuning <= 1.0, "/uniform_tuning", "must lie in [0, 1]");
    root.string("level", c.level);
    require(std::any_of(c.levels.begin(), c.levels.end(), [&](const LevelSpec& l) { return l.name == c.level; }),
            "/level", "names no configured level");
    root.integer("sensitivity_atom", c.sensitivity_atom);
    require(c.sensitivity_atom < static_cast<std::size_t>(c.topology.n_meta_atoms), "/sensitivity_atom",
            "must be below n_meta_atoms");

    if (const json* v = root.raw("check")) {
        ObjectReader r(*v, "/check");
        r.integer("cases", c.check_cases);
        r.integer("born_max_orders", c.born_max_orders);
        r.number("born_tolerance", c.born_tolerance);
        r.finish();
        require(c.check_cases >= 1, "/check/cases", "must be at least 1");
        require(c.born_max_orders >= 1, "/check/born_max_orders", "must be at least 1");
        require(c.born_tolerance > 0.0, "/check/born_tolerance", "must be positive");
    }

    root.string("output_dir", c.output_dir);
    root.finish();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("/", "cannot read config file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("/", std::string("malformed JSON: ") + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const ExperimentConfig& c) {
    const auto plane = [](const PlaneRoiSpec& p) {
        return json{{"distance", p.distance}, {"width", p.width}, {"height", p.height}, {"rows", p.rows},
                    {"cols", p.cols}};
    };
    json levels = json::array();
    for (const auto& l : c.levels)
        levels.push_back({{"name", l.name}, {"via_spacing", l.via_spacing}, {"unilateral", l.unilateral}});
    return json{
        {"seed", c.seed},
        {"frequency", c.frequency},
        {"topology",
         {{"cavity_side", c.topology.cavity_side},
          {"boundary_irregularity", c.topology.boundary_irregularity},
          {"n_meta_atoms", c.topology.n_meta_atoms},
          {"min_separation", c.topology.min_separation},
          {"feed_placement", to_string(c.topology.feed_placement)}}},
        {"levels", levels},
        {"model",
         {{"oscillator_strength", c.model.oscillator_strength},
          {"resonance_low", c.model.resonance_low},
          {"resonance_high", c.model.resonance_high},
          {"damping", c.model.damping}}},
        {"plane", plane(c.plane)},
        {"sweep_plane", plane(c.sweep_plane)},
        {"arc",
         {{"radius", c.arc.radius}, {"n_angles", c.arc.n_angles}, {"first_deg", c.arc.first_deg},
          {"last_deg", c.arc.last_deg}}},
        {"objective",
         {{"target_center_deg", c.target_center_deg},
          {"target_half_width_deg", c.target_half_width_deg},
          {"sidelobe_weight", c.sidelobe_weight}}},
        {"ensemble",
         {{"n_topologies", c.n_topologies},
          {"n_configs", c.n_configs},
          {"train_fraction", c.train_fraction},
          {"features", to_string(c.features)}}},
        {"synthesis",
         {{"restarts", c.synthesis.restarts},
          {"iterations", c.synthesis.iterations},
          {"step", c.synthesis.step},
          {"beta1", c.synthesis.beta1},
          {"beta2", c.synthesis.beta2},
          {"epsilon", c.synthesis.epsilon}}},
        {"uniform_tuning", c.uniform_tuning},
        {"level", c.level},
        {"sensitivity_atom", c.sensitivity_atom},
        {"check",
         {{"cases", c.check_cases}, {"born_max_orders", c.born_max_orders}, {"born_tolerance", c.born_tolerance}}},
        {"output_dir", c.output_dir},
    };
}

std::string canonical_json(const json& j) { return j.dump(); }

std::uint64_t config_hash(const ExperimentConfig& c) {
    // The output directory names where artifacts go, not what they contain.
    json j = config_to_json(c);
    j.erase("output_dir");
    return Fnv1a().str(canonical_json(j)).digest();
}

// ---------------------------------------------------------------------------
// Artifacts

json meta_json(const ArtifactMeta& m) {
    json j{{"command", m.command}, {"config_hash", hex64(m.config_hash)}, {"seed", m.seed}, {"generator", "dmasim"}};
    for (const auto& [k, v] : m.extra) j[k] = v;
    return j;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
}

void write_meta_lines(std::ostream& out, const ArtifactMeta& m) {
    out << "# generator: dmasim\n";
    out << "# command: " << m.command << '\n';
    out << "# config_hash: " << hex64(m.config_hash) << '\n';
    out << "# seed: " << m.seed << '\n';
    for (const auto& [k, v] : m.extra) out << "# " << k << ": " << v << '\n';
}

}  // namespace

void write_field_csv(const std::filesystem::path& path, const FieldMap& f, const ArtifactMeta& meta) {
    if (!f.roi || f.roi->size() != static_cast<std::size_t>(f.values.size()))
        throw DomainError("field map and ROI disagree in size");
    std::ofstream out = open_out(path);
    write_meta_lines(out, meta);
    out << "# normalized: " << (f.normalized ? "true" : "false") << '\n';
    out << "x,y,z,re,im,abs\n";
    for (std::size_t i = 0; i < f.roi->size(); ++i) {
        const Point3& p = f.roi->points[i];
        const Complex v = f.values[static_cast<Eigen::Index>(i)];
        out << format_double(p.x()) << ',' << format_double(p.y()) << ',' << format_double(p.z()) << ','
            << format_double(v.real()) << ',' << format_double(v.imag()) << ',' << format_double(std::abs(v)) << '\n';
    }
}

void write_real_map_csv(const std::filesystem::path& path, const RoiGrid& roi, const RVector& values,
                        const ArtifactMeta& meta) {
    if (roi.size() != static_cast<std::size_t>(values.size())) throw DomainError("map and ROI disagree in size");
    std::ofstream out = open_out(path);
    write_meta_lines(out, meta);
    out << "x,y,z,re,im,abs\n";
    for (std::size_t i = 0; i < roi.size(); ++i) {
        const Point3& p = roi.points[i];
        const double v = values[static_cast<Eigen::Index>(i)];
        out << format_double(p.x()) << ',' << format_double(p.y()) << ',' << format_double(p.z()) << ','
            << format_double(v) << ",0," << format_double(std::abs(v)) << '\n';
    }
}

namespace {

void put_le(std::ostream& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(b, 8);
}

double get_le(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw Error("truncated field map payload");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

void write_field_binary(const std::filesystem::path& path, const FieldMap& f, const ArtifactMeta& meta) {
    if (!f.roi || f.roi->size() != static_cast<std::size_t>(f.values.size()))
        throw DomainError("field map and ROI disagree in size");
    const RoiGrid& roi = *f.roi;
    json points = json::array();
    for (const auto& p : roi.points) points.push_back({p.x(), p.y(), p.z()});
    json header{{"meta", meta_json(meta)},
                {"kind", roi.kind == RoiGrid::Kind::Plane ? "PLANE" : "ARC"},
                {"rows", roi.rows},
                {"cols", roi.cols},
                {"normalized", f.normalized},
                {"layout", "row-major, interleaved re/im, little-endian float64"},
                {"points", points}};
    if (roi.kind == RoiGrid::Kind::Arc) header["angles_deg"] = roi.angles_deg;
    std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
    out << header.dump() << '\n';
    for (Eigen::Index i = 0; i < f.values.size(); ++i) {
        put_le(out, f.values[i].real());
        put_le(out, f.values[i].imag());
    }
}

FieldMap read_field_binary(const std::filesystem::path& path, json* header_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    const json header = json::parse(line);
    auto roi = std::make_shared<RoiGrid>();
    roi->kind = header.at("kind") == "ARC" ? RoiGrid::Kind::Arc : RoiGrid::Kind::Plane;
    roi->rows = header.at("rows").get<std::size_t>();
    roi->cols = header.at("cols").get<std::size_t>();
    for (const auto& p : header.at("points")) roi->points.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    if (header.contains("angles_deg")) roi->angles_deg = header["angles_deg"].get<std::vector<double>>();
    FieldMap f;
    f.normalized = header.at("normalized").get<bool>();
    f.values.resize(static_cast<Eigen::Index>(roi->size()));
    for (Eigen::Index i = 0; i < f.values.size(); ++i) {
        const double re = get_le(in);
        f.values[i] = Complex(re, get_le(in));
    }
    f.roi = std::move(roi);
    if (header_out) *header_out = header;
    return f;
}

void write_solution_csv(const std::filesystem::path& path, const CVector& moments, const ArtifactMeta& meta) {
    std::ofstream out = open_out(path);
    write_meta_lines(out, meta);
    out << "index,re,im\n";
    for (Eigen::Index i = 0; i < moments.size(); ++i)
        out << i << ',' << format_double(moments[i].real()) << ',' << format_double(moments[i].imag()) << '\n';
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<TradeoffRecord>& records,
                     const ArtifactMeta& meta) {
    std::ofstream out = open_out(path);
    write_meta_lines(out, meta);
    out << "level,via_count,sigma,zeta_dB,n_topologies,n_configs,seed\n";
    for (const auto& r : records)
        out << r.level << ',' << format_double(r.via_count) << ',' << format_double(r.sigma) << ','
            << format_double(r.zeta_db) << ',' << r.n_topologies << ',' << r.n_configs << ',' << r.seed << '\n';
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

json to_json_value(const OptimizationResult& r) {
    const auto c = r.best_configuration.values();
    return json{{"best_configuration", std::vector<double>(c.begin(), c.end())},
                {"best_cost", r.best_cost},
                {"cost_trace", r.cost_trace},
                {"best_so_far", r.best_so_far},
                {"metrics",
                 {{"peak_intensity", r.metrics.peak_intensity},
                  {"target_to_rest_ratio_db", r.metrics.target_to_rest_ratio_db}}},
                {"restarts_used", r.restarts_used},
                {"best_restart", r.best_restart},
                {"seed", r.seed}};
}

json to_json_value(const TradeoffResult& r) {
    json records = json::array();
    for (const auto& rec : r.records)
        records.push_back({{"level", rec.level},
                           {"via_count", rec.via_count},
                           {"sigma", rec.sigma},
                           {"zeta_db", rec.zeta_db},
                           {"n_topologies", rec.n_topologies},
                           {"n_configs", rec.n_configs},
                           {"seed", rec.seed}});
    json per = json::array();
    for (const auto& t : r.per_topology)
        per.push_back({{"level_index", t.level_index},
                       {"topology_index", t.topology_index},
                       {"via_count", t.via_count},
                       {"sigma", t.sigma},
                       {"zeta_db", t.zeta_db}});
    return json{{"records", records}, {"per_topology", per}};
}

}  // namespace dmasim
