#pragma once

// End-to-end orchestration shared by the command-line tool and the
// integration tests: run the Monte Carlo study described by a configuration
// and write curves, logs, grids, classifier summaries and a manifest.

#include "rbal/active_learning.hpp"
#include "rbal/config.hpp"
#include "rbal/decision.hpp"
#include "rbal/evpi_grid.hpp"
#include "rbal/io.hpp"
#include "rbal/preprocessing.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rbal {

inline constexpr const char* version = "0.1.0";

enum class Command { Run, Baseline, Curves, EvpiMap };

inline const char* to_string(Command c) {
    switch (c) {
    case Command::Run: return "run";
    case Command::Baseline: return "baseline";
    case Command::Curves: return "curves";
    case Command::EvpiMap: return "evpi-map";
    }
    return "?";
}

namespace detail {

/// Grid and optional projection for plotting one repetition's classifiers.
struct PlotFrame {
    GridSpec grid;
    std::optional<Projection> projection;
};

inline PlotFrame plot_frame(const ExperimentConfig& cfg, const Repetition& rep) {
    PlotFrame f;
    std::vector<FeatureVector> plane;
    if (rep.pool.dim() != 2) {
        f.projection = pca_fit(rep.pool);
        plane = pca_project(*f.projection, rep.pool).features;
    } else {
        plane = rep.pool.features;
    }
    f.grid = grid_around(plane, cfg.grid.nx, cfg.grid.ny);
    if (cfg.grid.x_range) {
        f.grid.x_min = (*cfg.grid.x_range)[0];
        f.grid.x_max = (*cfg.grid.x_range)[1];
    }
    if (cfg.grid.y_range) {
        f.grid.y_min = (*cfg.grid.y_range)[0];
        f.grid.y_max = (*cfg.grid.y_range)[1];
    }
    return f;
}

inline void write_plots(const ExperimentConfig& cfg, const Repetition& rep,
                        const GmmPosterior& initial, const GmmPosterior* final_model,
                        const std::filesystem::path& dir, std::vector<std::string>& files) {
    const auto frame = plot_frame(cfg, rep);
    const auto& dp = cfg.model.process;
    write_file_atomic(dir / "evpi_initial.csv",
                      grid_csv(evpi_grid(initial, dp, frame.grid, frame.projection)));
    write_json(dir / "map_initial.json", map_summary(initial, frame.projection));
    files.insert(files.end(), {"evpi_initial.csv", "map_initial.json"});
    if (final_model) {
        write_file_atomic(dir / "evpi_final.csv",
                          grid_csv(evpi_grid(*final_model, dp, frame.grid, frame.projection)));
        write_json(dir / "map_final.json", map_summary(*final_model, frame.projection));
        files.insert(files.end(), {"evpi_final.csv", "map_final.json"});
    }
    if (frame.projection) {
        nlohmann::json p = {{"mean", to_json(frame.projection->mean)},
                            {"loadings", to_json(Eigen::MatrixXd(frame.projection->loadings))},
                            {"explained_variance",
                             {frame.projection->explained[0], frame.projection->explained[1]}}};
        write_json(dir / "projection.json", p);
        files.push_back("projection.json");
    }
}

} // namespace detail

/// Executes `command` and writes its files into `dir`. Outputs depend only on
/// the configuration (including its seeds), never on the thread count.
/// Returns the names of the files written.
inline std::vector<std::string> execute(Command command, const ExperimentConfig& cfg,
                                        const std::filesystem::path& dir) {
    const LabeledSet data = load_data(cfg);
    std::vector<std::string> files;

    MonteCarloOptions opt;
    opt.base_seed = cfg.run.seed;
    opt.parallelism = cfg.parallelism;
    opt.repetitions = cfg.repetitions;

    std::optional<MonteCarloResult> mc;
    if (command == Command::EvpiMap) {
        RunConfig rc = cfg.run;
        const auto rep = make_repetition(data, cfg.model.num_classes, rc);
        const auto initial = fit(rep.pool.subset(rep.initial), cfg.model.prior, cfg.model.alpha,
                                 cfg.model.num_classes);
        detail::write_plots(cfg, rep, initial, nullptr, dir, files);
    } else {
        if (command == Command::Baseline) {
            opt.arms = Arms::RandomOnly;
            opt.random_budget = cfg.baseline_budget;
        }
        mc = monte_carlo(data, cfg.model, cfg.run, opt);
        std::optional<LearningCurve> act, rnd;
        if (command != Command::Baseline)
            act = mc->active;
        rnd = mc->random;
        const auto curve_name = command == Command::Baseline ? "baseline_curves.csv" : "curves.csv";
        write_file_atomic(dir / curve_name, curves_csv(curve_table(act, rnd)));
        files.push_back(curve_name);
        if (command != Command::Curves) {
            write_file_atomic(dir / "query_log.csv", query_log_csv(*mc));
            files.push_back("query_log.csv");
            const auto& first = mc->runs.front();
            const RunResult& shown = first.active ? *first.active : *first.random;
            detail::write_plots(cfg, first.rep, shown.trajectory.front(), &shown.trajectory.back(),
                                dir, files);
        }
    }

    nlohmann::json seeds = nlohmann::json::array();
    if (mc)
        for (const auto& o : mc->runs)
            seeds.push_back(o.seed);
    else
        seeds.push_back(cfg.run.seed);
    nlohmann::json manifest = {
        {"tool", "rbal"},
        {"version", version},
        {"command", to_string(command)},
        {"config", cfg.source},
        {"base_seed", cfg.run.seed},
        {"repetition_seeds", seeds},
        {"data", {{"rows", data.size()}, {"dim", data.dim()}}},
        {"files", files},
    };
    if (mc) {
        std::size_t total_active = 0;
        for (const auto& o : mc->runs)
            if (o.active)
                total_active += o.active->queries();
        manifest["mean_active_queries"] =
            static_cast<double>(total_active) / static_cast<double>(mc->runs.size());
    }
    write_json(dir / "manifest.json", manifest);
    files.push_back("manifest.json");
    return files;
}

/// Result of re-deriving the worked example: posterior (0.4, 0.3, 0.2, 0.1)
/// on the four-state maintenance problem.
struct WorkedExampleReport {
    double meu_unobserved = 0.0;
    double meu_observed = 0.0;
    double evpi = 0.0;
    double delta_unobserved = 0.0, delta_observed = 0.0, delta_evpi = 0.0;
    bool pass = false;
};

inline constexpr double worked_meu_unobserved = -4.4;
inline constexpr double worked_meu_observed = 1.015;
inline constexpr double worked_evpi = 5.415;

inline WorkedExampleReport verify_worked_example(const DecisionProcess& dp, double tol = 1e-9) {
    const auto p = DiscreteDistribution::validate({0.4, 0.3, 0.2, 0.1});
    WorkedExampleReport r;
    r.meu_unobserved = meu_unobserved(dp, p).expected_utility;
    r.meu_observed = meu_observed(dp, p);
    r.evpi = evpi(dp, p);
    r.delta_unobserved = r.meu_unobserved - worked_meu_unobserved;
    r.delta_observed = r.meu_observed - worked_meu_observed;
    r.delta_evpi = r.evpi - worked_evpi;
    r.pass = std::abs(r.delta_unobserved) <= tol && std::abs(r.delta_observed) <= tol &&
             std::abs(r.delta_evpi) <= tol;
    return r;
}

} // namespace rbal
