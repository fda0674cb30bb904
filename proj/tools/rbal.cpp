// Command-line front end. Exit codes: 0 success, 1 validation error,
// 2 numeric failure (including a failed worked-example check), 3 I/O failure.

#include "rbal/rbal.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

int exit_code(rbal::Errc code) {
    switch (rbal::category(code)) {
    case rbal::ErrorCategory::Validation: return 1;
    case rbal::ErrorCategory::Numeric: return 2;
    case rbal::ErrorCategory::Io: return 3;
    }
    return 1;
}

rbal::ExperimentConfig load(const std::string& path, std::optional<std::uint64_t> seed) {
    auto cfg = rbal::load_config(path);
    if (seed) {
        cfg.run.seed = *seed;
        cfg.source["run"]["seed"] = *seed;
    }
    return cfg;
}

int verify(const std::string& config_path) {
    const auto dp = config_path.empty() ? rbal::synthetic_maintenance_process()
                                        : rbal::load_config(config_path).model.process;
    const auto r = rbal::verify_worked_example(dp);
    std::printf("posterior       0.4 0.3 0.2 0.1\n");
    std::printf("MEU unobserved  %.12g  (expected %.12g, delta %.3g)\n", r.meu_unobserved,
                rbal::worked_meu_unobserved, r.delta_unobserved);
    std::printf("MEU observed    %.12g  (expected %.12g, delta %.3g)\n", r.meu_observed,
                rbal::worked_meu_observed, r.delta_observed);
    std::printf("EVPI            %.12g  (expected %.12g, delta %.3g)\n", r.evpi, rbal::worked_evpi,
                r.delta_evpi);
    std::printf("%s\n", r.pass ? "PASS" : "FAIL");
    return r.pass ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Risk-based active learning for maintenance decisions"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;

    auto* generate = app.add_subcommand("generate", "write the configured synthetic dataset");
    generate->add_option("--config", config, "experiment configuration (JSON)")->required();
    generate->add_option("--out", out, "dataset file to write")->required();
    generate->add_option("--seed", seed, "override the data seed");

    struct Study {
        const char* name;
        const char* help;
        rbal::Command command;
        CLI::App* app = nullptr;
    };
    Study studies[] = {
        {"run", "active and random arms: curves, query log, EVPI grids, summaries",
         rbal::Command::Run},
        {"baseline", "random-sampling arm only", rbal::Command::Baseline},
        {"curves", "active and random arms: learning curves only", rbal::Command::Curves},
        {"evpi-map", "EVPI grid and class summary of the initial classifier",
         rbal::Command::EvpiMap},
    };
    for (auto& s : studies) {
        s.app = app.add_subcommand(s.name, s.help);
        s.app->add_option("--config", config, "experiment configuration (JSON)")->required();
        s.app->add_option("--out", out, "output directory (overrides outputs.directory)");
        s.app->add_option("--seed", seed, "override run.seed");
    }

    auto* verify_cmd = app.add_subcommand("verify-example", "re-derive the worked EVPI example");
    verify_cmd->add_option("--config", config, "take the decision process from this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*verify_cmd)
            return verify(config);

        if (*generate) {
            auto cfg = rbal::load_config(config);
            if (!cfg.data.synthetic)
                throw rbal::Error(rbal::Errc::ConfigError,
                                  "data.synthetic: generate needs a synthetic data source");
            auto spec = *cfg.data.synthetic;
            if (seed)
                spec.seed = *seed;
            const auto data = rbal::generate_synthetic(spec);
            rbal::write_dataset(out, data);
            std::cerr << "wrote " << data.size() << " rows to " << out << "\n";
            return 0;
        }

        for (const auto& s : studies) {
            if (!*s.app)
                continue;
            const auto cfg = load(config, seed);
            const std::filesystem::path dir = out.empty() ? cfg.output_dir : std::filesystem::path(out);
            const auto files = rbal::execute(s.command, cfg, dir);
            for (const auto& f : files)
                std::cerr << "wrote " << (dir / f).string() << "\n";
            return 0;
        }
    } catch (const rbal::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
