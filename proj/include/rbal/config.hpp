#pragma once

// Experiment configuration: one JSON document with sections `classifier`,
// `decision`, `run`, `data` and `outputs`. Missing or malformed fields are
// reported by their dotted path, e.g. "decision.c_ins".

#include "rbal/active_learning.hpp"
#include "rbal/decision.hpp"
#include "rbal/error.hpp"
#include "rbal/evpi_grid.hpp"
#include "rbal/gmm.hpp"
#include "rbal/io.hpp"
#include "rbal/synthetic.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace rbal {

struct DataSource {
    std::optional<SyntheticSpec> synthetic;
    std::optional<std::filesystem::path> file;
    std::size_t dim = 0;
};

struct GridConfig {
    std::size_t nx = 100, ny = 100;
    std::optional<std::array<double, 2>> x_range, y_range;
};

struct ExperimentConfig {
    explicit ExperimentConfig(ModelSpec m) : model(std::move(m)) {}

    ModelSpec model;
    RunConfig run;
    std::size_t repetitions = 1;
    std::size_t parallelism = 0;
    std::optional<std::size_t> baseline_budget;
    DataSource data;
    std::filesystem::path output_dir;
    GridConfig grid;
    nlohmann::json source; // the document as read, echoed into manifests
};

namespace config_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
    throw Error(Errc::ConfigError, path + ": " + what);
}

inline const json& require(const json& j, const std::string& parent, const char* key) {
    const std::string path = parent.empty() ? key : parent + "." + key;
    if (!j.is_object())
        fail(parent.empty() ? "<root>" : parent, "expected an object");
    if (!j.contains(key))
        fail(path, "missing config field");
    return j.at(key);
}

inline double number(const json& j, const std::string& path) {
    if (j.is_number())
        return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "infinity" || s == "+inf")
            return std::numeric_limits<double>::infinity();
    }
    fail(path, "expected a number");
}

inline std::size_t count(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 0)
        fail(path, "expected a non-negative integer");
    return j.get<std::size_t>();
}

inline std::vector<double> numbers(const json& j, const std::string& path) {
    if (!j.is_array())
        fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline Eigen::VectorXd vector(const json& j, const std::string& path) {
    const auto v = numbers(j, path);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Eigen::MatrixXd matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty())
        fail(path, "expected an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd m;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto row = numbers(j[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]");
        if (r == 0)
            m.resize(rows, static_cast<Eigen::Index>(row.size()));
        if (static_cast<Eigen::Index>(row.size()) != m.cols())
            fail(path, "rows differ in length");
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

inline std::vector<double> flat_matrix(const json& j, const std::string& path) {
    if (j.is_array() && !j.empty() && j[0].is_array()) {
        std::vector<double> out;
        for (std::size_t r = 0; r < j.size(); ++r) {
            const auto row = numbers(j[r], path + "[" + std::to_string(r) + "]");
            out.insert(out.end(), row.begin(), row.end());
        }
        return out;
    }
    return numbers(j, path);
}

template <class F>
auto wrap(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == Errc::ConfigError)
            throw;
        throw Error(e.code(), path + ": " + e.what());
    }
}

inline DecisionProcess parse_decision(const json& d) {
    const std::size_t k = count(require(d, "decision", "K"), "decision.K");
    const std::size_t a = count(require(d, "decision", "A"), "decision.A");
    const auto& tj = require(d, "decision", "transitions");
    if (!tj.is_array() || tj.size() != a)
        fail("decision.transitions", "expected " + std::to_string(a) + " tables (one per action)");
    std::vector<TransitionCpt> tables;
    for (std::size_t i = 0; i < a; ++i) {
        const auto path = "decision.transitions[" + std::to_string(i) + "]";
        auto flat = flat_matrix(tj[i], path);
        tables.push_back(wrap(path, [&] { return TransitionCpt(k, std::move(flat)); }));
    }
    auto ua = numbers(require(d, "decision", "u_action"), "decision.u_action");
    auto us = numbers(require(d, "decision", "u_state"), "decision.u_state");
    const double c = number(require(d, "decision", "c_ins"), "decision.c_ins");
    return wrap("decision", [&] {
        return DecisionProcess(std::move(tables), UtilityTable(std::move(ua)),
                               UtilityTable(std::move(us)), c);
    });
}

inline SyntheticSpec parse_synthetic(const json& s) {
    const std::string base = "data.synthetic";
    const std::uint64_t seed = s.contains("seed") ? count(s.at("seed"), base + ".seed") : 1;
    if (s.contains("preset")) {
        const auto name = s.at("preset").get<std::string>();
        if (name == "default")
            return default_synthetic_spec(seed);
        if (name == "z24-like")
            return z24_like_spec(seed);
        fail(base + ".preset", "unknown preset '" + name + "' (default | z24-like)");
    }
    SyntheticSpec spec;
    spec.seed = seed;
    const auto& classes = require(s, base, "classes");
    if (!classes.is_array() || classes.empty())
        fail(base + ".classes", "expected a non-empty array");
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const auto p = base + ".classes[" + std::to_string(i) + "]";
        SyntheticSpec::ClassSpec c;
        c.mean = vector(require(classes[i], p, "mean"), p + ".mean");
        c.cov = matrix(require(classes[i], p, "cov"), p + ".cov");
        c.count = count(require(classes[i], p, "count"), p + ".count");
        spec.classes.push_back(std::move(c));
    }
    if (s.contains("segments")) {
        const auto& segs = s.at("segments");
        if (!segs.is_array())
            fail(base + ".segments", "expected an array");
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const auto p = base + ".segments[" + std::to_string(i) + "]";
            const auto label = count(require(segs[i], p, "label"), p + ".label");
            spec.segments.push_back({ClassLabel(static_cast<int>(label)),
                                     count(require(segs[i], p, "count"), p + ".count")});
        }
    }
    return spec;
}

} // namespace config_detail

/// Parses a configuration document. Relative data paths resolve against
/// `base_dir`.
inline ExperimentConfig parse_config(const nlohmann::json& doc,
                                     const std::filesystem::path& base_dir = {}) {
    using namespace config_detail;
    if (!doc.is_object())
        fail("<root>", "expected a JSON object");
    // data first: it fixes D
    DataSource source;
    const auto& data = require(doc, "", "data");
    if (data.contains("synthetic")) {
        source.synthetic = parse_synthetic(data.at("synthetic"));
        source.dim = static_cast<std::size_t>(source.synthetic->classes.front().mean.size());
    } else if (data.contains("file")) {
        std::filesystem::path p = data.at("file").get<std::string>();
        source.file = p.is_relative() ? base_dir / p : p;
        source.dim = count(require(data, "data", "dim"), "data.dim");
    } else {
        fail("data", "missing config field: expected 'synthetic' or 'file'");
    }

    auto dp = parse_decision(require(doc, "", "decision"));
    const auto k = dp.num_states();
    const auto d = static_cast<Eigen::Index>(source.dim);

    NiwParams prior = NiwParams::standard(d);
    auto alpha = DirichletParams::symmetric(k);
    if (doc.contains("classifier")) {
        const auto& c = doc.at("classifier");
        if (c.contains("m0"))
            prior.m = vector(c.at("m0"), "classifier.m0");
        if (c.contains("kappa0"))
            prior.kappa = number(c.at("kappa0"), "classifier.kappa0");
        if (c.contains("v0"))
            prior.v = number(c.at("v0"), "classifier.v0");
        if (c.contains("S0"))
            prior.S = matrix(c.at("S0"), "classifier.S0");
        else if (c.contains("v0"))
            prior.S = (prior.v - static_cast<double>(d) - 1.0) * Eigen::MatrixXd::Identity(d, d);
        if (c.contains("alpha"))
            alpha.alpha = numbers(c.at("alpha"), "classifier.alpha");
    }
    if (prior.dim() != d)
        fail("classifier.m0", "dimension differs from the data dimension");
    wrap("classifier", [&] {
        prior.validate();
        alpha.validate();
        return 0;
    });
    if (alpha.alpha.size() != k)
        fail("classifier.alpha", "expected " + std::to_string(k) + " entries");
    ExperimentConfig cfg(ModelSpec{std::move(dp), std::move(prior), std::move(alpha), k});
    cfg.source = doc;
    cfg.data = std::move(source);

    const auto& run = require(doc, "", "run");
    const auto order = require(run, "run", "order").get<std::string>();
    if (order == "random")
        cfg.run.order = PresentationOrder::RandomShuffle;
    else if (order == "sequential")
        cfg.run.order = PresentationOrder::Sequential;
    else
        fail("run.order", "expected 'random' or 'sequential'");
    cfg.run.seed = count(require(run, "run", "seed"), "run.seed");
    cfg.run.initial_fraction =
        number(require(run, "run", "initial_fraction"), "run.initial_fraction");
    if (!(cfg.run.initial_fraction > 0.0 && cfg.run.initial_fraction < 1.0))
        fail("run.initial_fraction", "must lie in (0, 1)");
    cfg.repetitions = count(require(run, "run", "repetitions"), "run.repetitions");
    if (cfg.repetitions < 1)
        fail("run.repetitions", "must be at least 1");
    const auto& cov = require(run, "run", "coverage_enforcement");
    if (!cov.is_boolean())
        fail("run.coverage_enforcement", "expected true or false");
    cfg.run.coverage_enforcement = cov.get<bool>();
    if (run.contains("test_fraction"))
        cfg.run.test_fraction = number(run.at("test_fraction"), "run.test_fraction");
    if (run.contains("standardize"))
        cfg.run.standardize = run.at("standardize").get<bool>();
    if (run.contains("parallelism"))
        cfg.parallelism = count(run.at("parallelism"), "run.parallelism");
    if (run.contains("baseline_budget"))
        cfg.baseline_budget = count(run.at("baseline_budget"), "run.baseline_budget");

    const auto& out = require(doc, "", "outputs");
    cfg.output_dir = require(out, "outputs", "directory").get<std::string>();
    if (out.contains("grid")) {
        const auto& g = out.at("grid");
        if (g.contains("resolution")) {
            const auto r = numbers(g.at("resolution"), "outputs.grid.resolution");
            if (r.size() != 2 || r[0] < 1 || r[1] < 1)
                fail("outputs.grid.resolution", "expected [nx, ny] with positive entries");
            cfg.grid.nx = static_cast<std::size_t>(r[0]);
            cfg.grid.ny = static_cast<std::size_t>(r[1]);
        }
        auto range = [&](const char* key) -> std::optional<std::array<double, 2>> {
            if (!g.contains(key))
                return std::nullopt;
            const auto v = numbers(g.at(key), std::string("outputs.grid.") + key);
            if (v.size() != 2 || !(v[1] > v[0]))
                fail(std::string("outputs.grid.") + key, "expected [min, max] with min < max");
            return std::array<double, 2>{v[0], v[1]};
        };
        cfg.grid.x_range = range("x_range");
        cfg.grid.y_range = range("y_range");
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    const auto text = read_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ConfigError, path.string() + ": " + e.what());
    }
    try {
        return parse_config(doc, path.parent_path());
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ConfigError, path.string() + ": " + e.what());
    }
}

/// Loads or generates the dataset named by the configuration.
inline LabeledSet load_data(const ExperimentConfig& cfg) {
    if (cfg.data.synthetic)
        return generate_synthetic(*cfg.data.synthetic);
    return load_dataset(*cfg.data.file, cfg.data.dim, cfg.model.num_classes);
}

} // namespace rbal
