// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "rbal/rbal.hpp"

#include <json.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

using namespace rbal;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail, double seconds) {
    std::printf("criterion %d %-28s %s  %s  [%.1fs]\n", id, name, pass ? "PASS" : "FAIL",
                detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass)
        ++failures;
}

template <class F>
void criterion(int id, const char* name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(id, name, pass, detail, s);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k, double zero_rate) {
    std::exponential_distribution<double> e(1.0);
    std::bernoulli_distribution drop(zero_rate);
    std::vector<double> p(k);
    double sum = 0;
    for (auto& x : p)
        sum += (x = drop(rng) ? 0.0 : e(rng));
    if (sum == 0) {
        p[0] = 1;
        sum = 1;
    }
    for (auto& x : p)
        x /= sum;
    return p;
}

// ---------------------------------------------------------------------------

bool worked_example(std::string& detail) {
    const auto r = verify_worked_example(synthetic_maintenance_process(), 1e-9);
    detail = fmt("MEU(I)=%.12g MEU(I_H->d)=%.12g EVPI=%.12g", r.meu_unobserved, r.meu_observed, r.evpi);
    return r.pass;
}

bool repair_destinations(std::string& detail) {
    // do-nothing rows of the bridge process as published
    const std::vector<double> rows{0.7, 0.28, 0.015, 0.005, //
                                   0.43, 0.55, 0.15, 0.05,  //
                                   0.0, 0.0, 0.8, 0.2,      //
                                   0.0, 0.0, 0.0, 1.0};
    const std::vector<std::size_t> undamaged{0, 1};
    const auto pi = stationary_distribution(restrict_and_renormalize(rows, 4, undamaged));
    const double a = 0.99 * pi[0], b = 0.99 * pi[1];
    detail = fmt("0.99*pi = [%.6f, %.6f], published [0.5996, 0.3904]", a, b);
    return std::abs(a - 0.5996) <= 5e-4 && std::abs(b - 0.3904) <= 5e-4;
}

bool evpi_fuzz(std::string& detail) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> ks(2, 6), as(2, 4);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    std::size_t negative = 0, zero_mismatch = 0, zeros = 0;
    const int n = 100'000;
    for (int trial = 0; trial < n; ++trial) {
        const std::size_t k = ks(rng), a = as(rng);
        std::vector<TransitionCpt> t;
        for (std::size_t i = 0; i < a; ++i) {
            std::vector<double> rows;
            for (std::size_t r = 0; r < k; ++r) {
                const auto row = random_simplex(rng, k, 0.3);
                rows.insert(rows.end(), row.begin(), row.end());
            }
            t.emplace_back(k, std::move(rows));
        }
        std::vector<double> ua(a), us(k);
        for (auto& x : ua)
            x = u(rng);
        for (auto& x : us)
            x = u(rng);
        const DecisionProcess dp(std::move(t), UtilityTable(ua), UtilityTable(us), 0.0);
        const auto p = DiscreteDistribution::validate(random_simplex(rng, k, 0.4));

        const double v = evpi(dp, p);
        if (v < 0.0)
            ++negative;
        const auto chosen = meu_unobserved(dp, p).action;
        bool optimal = true;
        for (std::size_t i = 0; i < k; ++i) {
            if (p[i] <= 1e-12)
                continue;
            for (std::size_t b = 0; b < a; ++b)
                if (dp.state_action_utility(i, Action(b)) > dp.state_action_utility(i, chosen))
                    optimal = false;
        }
        if (optimal)
            ++zeros;
        if (optimal != (v == 0.0))
            ++zero_mismatch;
    }
    detail = fmt("%d cases, %zu negative, %zu zero/no-policy-change mismatches (%zu zero cases)", n,
                 negative, zero_mismatch, zeros);
    return negative == 0 && zero_mismatch == 0;
}

bool conjugate_oracle(std::string& detail) {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> obs(1.5, 0.7);
    LabeledSet data;
    for (int i = 0; i < 50; ++i)
        data.push_back(Eigen::VectorXd::Constant(1, obs(rng)), ClassLabel(1));
    const auto prior = NiwParams::standard(1);
    const auto post = fit(data, prior, DirichletParams::symmetric(1), 1);

    // Unnormalized log posterior over (mu, log sigma^2): Gaussian likelihood
    // times normal / inverse-gamma prior, with the log-variance Jacobian.
    const double m0 = prior.m[0], k0 = prior.kappa, v0 = prior.v, s0 = prior.S(0, 0);
    double sx = 0, sxx = 0;
    for (const auto& x : data.features) {
        sx += x[0];
        sxx += x[0] * x[0];
    }
    const double n = 50.0, xbar = sx / n, var = sxx / n - xbar * xbar;
    auto log_joint = [&](double mu, double ls) {
        const double s2 = std::exp(ls);
        const double ll = -0.5 * n * ls - 0.5 * (sxx - 2 * mu * sx + n * mu * mu) / s2;
        const double lp_mu = -0.5 * ls - 0.5 * k0 * (mu - m0) * (mu - m0) / s2;
        const double lp_s2 = -(0.5 * v0 + 1.0) * ls - 0.5 * s0 / s2;
        return ll + lp_mu + lp_s2 + ls;
    };
    const int nm = 1600, ns = 1600;
    const double sd_mu = std::sqrt(var / n);
    const double mu_lo = xbar - 12 * sd_mu, mu_hi = xbar + 12 * sd_mu;
    const double ls_c = std::log(var), ls_lo = ls_c - 2.5, ls_hi = ls_c + 2.5;
    const double dm = (mu_hi - mu_lo) / nm, dl = (ls_hi - ls_lo) / ns;
    std::vector<double> mus(nm), s2s(ns), logw(static_cast<std::size_t>(nm) * ns);
    double lmax = -INFINITY;
    for (int i = 0; i < nm; ++i)
        mus[i] = mu_lo + (i + 0.5) * dm;
    for (int j = 0; j < ns; ++j)
        s2s[j] = std::exp(ls_lo + (j + 0.5) * dl);
    for (int i = 0; i < nm; ++i)
        for (int j = 0; j < ns; ++j)
            lmax = std::max(lmax, logw[i * ns + j] = log_joint(mus[i], std::log(s2s[j])));
    double z = 0;
    std::vector<double> w(logw.size());
    for (std::size_t q = 0; q < w.size(); ++q)
        z += (w[q] = std::exp(logw[q] - lmax));

    double worst = 0;
    for (int p = 0; p < 20; ++p) {
        const double x = xbar - 3.0 + 6.0 * p / 19.0;
        double acc = 0;
        for (int i = 0; i < nm; ++i)
            for (int j = 0; j < ns; ++j) {
                const double s2 = s2s[j], r = x - mus[i];
                acc += w[i * ns + j] * std::exp(-0.5 * r * r / s2) / std::sqrt(2 * std::numbers::pi * s2);
            }
        const double brute = acc / z;
        const double model = std::exp(post.class_log_predictive(ClassLabel(1), Eigen::VectorXd::Constant(1, x)));
        worst = std::max(worst, std::abs(model - brute) / brute);
    }
    detail = fmt("max relative deviation %.3g over 20 probes", worst);
    return worst <= 1e-3;
}

bool normalization(std::string& detail) {
    auto spec = default_synthetic_spec(3);
    for (auto& c : spec.classes)
        c.count = 15;
    const auto post = fit(generate_synthetic(spec), NiwParams::standard(2),
                          DirichletParams::symmetric(4), 4);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 4.0);
    std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
    double worst = 0;
    bool finite = true;
    for (int i = 0; i < 10'000; ++i) {
        Eigen::Vector2d x(g(rng), g(rng));
        if (i % 10 == 0) {
            const double a = angle(rng);
            x = 1e3 * Eigen::Vector2d(std::cos(a), std::sin(a));
        }
        const auto p = post.predict(x);
        double s = 0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            finite = finite && std::isfinite(p[k]) && p[k] >= 0;
            s += p[k];
        }
        worst = std::max(worst, std::abs(s - 1.0));
    }

    const std::vector<std::size_t> counts{7, 0, 21, 4};
    const DirichletParams alpha{{1.0, 1.0, 1.0, 1.0}};
    const GmmPosterior labels(std::vector<NiwParams>(4, NiwParams::standard(2)), counts, alpha);
    std::vector<std::gamma_distribution<double>> gam;
    for (std::size_t k = 0; k < 4; ++k)
        gam.emplace_back(static_cast<double>(counts[k]) + alpha.alpha[k], 1.0);
    std::vector<double> mean(4, 0.0);
    const int draws = 1'000'000;
    for (int i = 0; i < draws; ++i) {
        double d[4], t = 0;
        for (std::size_t k = 0; k < 4; ++k)
            t += (d[k] = gam[k](rng));
        for (std::size_t k = 0; k < 4; ++k)
            mean[k] += d[k] / t;
    }
    double dir_worst = 0;
    for (std::size_t k = 0; k < 4; ++k)
        dir_worst = std::max(dir_worst, std::abs(mean[k] / draws -
                                                 labels.class_prior_predictive(ClassLabel(static_cast<int>(k + 1)))));
    detail = fmt("max |sum-1| = %.3g, max Dirichlet mean deviation = %.4f", worst, dir_worst);
    return finite && worst <= 1e-12 && dir_worst <= 0.005;
}

struct Study {
    ExperimentConfig cfg;
    LabeledSet data;
    MonteCarloResult mc;
};

bool curve_ordering(const Study& s, std::string& detail) {
    const auto& act = s.mc.active;
    const auto& rnd = s.mc.random;
    bool ok = true;
    std::string parts;
    for (std::size_t q : {5u, 10u, 20u}) {
        if (q >= act.size() || q >= rnd.size()) {
            parts += fmt("q=%zu missing; ", q);
            ok = false;
            continue;
        }
        parts += fmt("q=%zu active %.4f random %.4f; ", q, act.mean[q], rnd.mean[q]);
        ok = ok && act.mean[q] >= rnd.mean[q];
    }
    std::vector<double> diff;
    for (const auto& o : s.mc.runs)
        if (o.active->accuracy.size() > 10 && o.random->accuracy.size() > 10)
            diff.push_back(o.active->accuracy[10] - o.random->accuracy[10]);
    double m = 0, ss = 0;
    for (double d : diff)
        m += d;
    m /= static_cast<double>(diff.size());
    for (double d : diff)
        ss += (d - m) * (d - m);
    const double se = std::sqrt(ss / static_cast<double>(diff.size() - 1)) /
                      std::sqrt(static_cast<double>(diff.size()));
    parts += fmt("paired gap at q=10 %.4f (se %.4f, %zu reps)", m, se, diff.size());
    detail = parts;
    return ok && diff.size() > 1 && m > se;
}

bool preferential_sampling(const Study& s, std::string& detail) {
    std::size_t queried = 0, queried23 = 0, pool = 0, pool23 = 0;
    for (const auto& o : s.mc.runs) {
        for (const auto& e : o.active->log)
            if (e.queried) {
                ++queried;
                queried23 += (e.label == 2 || e.label == 3);
            }
        for (auto i : o.rep.stream) {
            ++pool;
            const int l = o.rep.pool.labels[i].index();
            pool23 += (l == 2 || l == 3);
        }
    }
    const double share = static_cast<double>(queried23) / static_cast<double>(queried);
    const double base = static_cast<double>(pool23) / static_cast<double>(pool);
    // one-sided 95% Wilson lower bound
    const double zc = 1.6448536269514722, nq = static_cast<double>(queried);
    const double centre = share + zc * zc / (2 * nq);
    const double half = zc * std::sqrt(share * (1 - share) / nq + zc * zc / (4 * nq * nq));
    const double lower = (centre - half) / (1 + zc * zc / nq);
    detail = fmt("query share %.4f (95%% lower %.4f, n=%zu) vs pool share %.4f", share, lower,
                 queried, base);
    return lower > base;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RBAL_CLI_PATH) + " " + args + " 2>/dev/null";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

bool determinism(std::string& detail) {
    const fs::path dir = fs::temp_directory_path() / "rbal_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ifstream in(fs::path(RBAL_CONFIG_DIR) / "synthetic.json");
    auto doc = nlohmann::json::parse(in);
    std::string outcome;
    bool ok = true;
    const std::size_t threads[2] = {1, 4};
    for (int i = 0; i < 2; ++i) {
        doc["run"]["parallelism"] = threads[i];
        const auto cfg = dir / ("config" + std::to_string(i) + ".json");
        std::ofstream(cfg) << doc.dump(2);
        const int status = run_cli("run --config " + cfg.string() + " --out " +
                                   (dir / ("out" + std::to_string(i))).string());
        if (status != 0) {
            detail = fmt("run exited with %d", status);
            return false;
        }
    }
    std::size_t compared = 0;
    for (const char* f : {"curves.csv", "query_log.csv", "evpi_initial.csv", "evpi_final.csv"}) {
        const auto a = read_file(dir / "out0" / f), b = read_file(dir / "out1" / f);
        ++compared;
        if (a != b || a.empty()) {
            ok = false;
            outcome += std::string(f) + " differs; ";
        }
    }
    detail = outcome + fmt("%zu files compared at parallelism 1 vs 4", compared);
    fs::remove_all(dir);
    return ok;
}

bool grid_structure(const Study& s, std::string& detail) {
    auto rc = s.cfg.run;
    const auto rep = make_repetition(s.data, s.cfg.model.num_classes, rc);
    const auto initial = fit(rep.pool.subset(rep.initial), s.cfg.model.prior, s.cfg.model.alpha,
                             s.cfg.model.num_classes);
    const auto spec = grid_around(rep.pool.features, s.cfg.grid.nx, s.cfg.grid.ny);
    const auto g = evpi_grid(initial, s.cfg.model.process, spec);

    auto sorted = g.values;
    std::sort(sorted.begin(), sorted.end());
    const double cut = sorted[static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(sorted.size())))];
    auto high = [&](std::size_t ix, std::size_t iy) { return g.at(ix, iy) >= cut && cut > 0.0; };

    const auto& classes = s.cfg.data.synthetic->classes;
    auto cell = [&](const Eigen::VectorXd& c) {
        auto clampi = [](double v, std::size_t n) {
            return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(n - 1)));
        };
        return std::pair{clampi((c[0] - spec.x_min) / (spec.x_max - spec.x_min) * spec.nx, spec.nx),
                         clampi((c[1] - spec.y_min) / (spec.y_max - spec.y_min) * spec.ny, spec.ny)};
    };
    const auto [x1, y1] = cell(classes.front().mean);
    const auto [x4, y4] = cell(classes.back().mean);

    // monotone lattice paths from the class-1 cell to the class-4 cell
    const long sx = x4 >= x1 ? 1 : -1, sy = y4 >= y1 ? 1 : -1;
    const std::size_t w = (x4 > x1 ? x4 - x1 : x1 - x4) + 1, h = (y4 > y1 ? y4 - y1 : y1 - y4) + 1;
    std::vector<char> reach(w * h, 0);
    for (std::size_t j = 0; j < h; ++j)
        for (std::size_t i = 0; i < w; ++i) {
            const auto ix = static_cast<std::size_t>(static_cast<long>(x1) + sx * static_cast<long>(i));
            const auto iy = static_cast<std::size_t>(static_cast<long>(y1) + sy * static_cast<long>(j));
            if (high(ix, iy))
                continue;
            reach[j * w + i] = (i == 0 && j == 0) || (i > 0 && reach[j * w + i - 1]) ||
                               (j > 0 && reach[(j - 1) * w + i]);
        }
    const bool blocked = !reach[w * h - 1];

    // cells crossed by the straight segment between the centers
    std::size_t crossed = 0;
    for (int t = 0; t <= 2000; ++t) {
        const Eigen::VectorXd c = classes.front().mean + (t / 2000.0) * (classes.back().mean - classes.front().mean);
        const auto [ix, iy] = cell(c);
        crossed += high(ix, iy);
    }
    detail = fmt("top-decile threshold %.3f; %zu high samples on the center segment; monotone paths %s",
                 cut, crossed, blocked ? "all blocked" : "NOT blocked");
    return blocked && crossed > 0;
}

} // namespace

int main() {
    criterion(1, "worked-example exactness", worked_example);
    criterion(2, "repair-destination weights", repair_destinations);
    criterion(3, "evpi non-negativity fuzz", evpi_fuzz);
    criterion(4, "conjugate-update oracle", conjugate_oracle);
    criterion(5, "predictive normalization", normalization);

    const auto t0 = std::chrono::steady_clock::now();
    std::optional<Study> study;
    std::string study_error;
    try {
        Study s{load_config(fs::path(RBAL_CONFIG_DIR) / "synthetic.json"), {}, {}};
        s.data = load_data(s.cfg);
        MonteCarloOptions opt;
        opt.repetitions = s.cfg.repetitions;
        opt.base_seed = s.cfg.run.seed;
        opt.parallelism = s.cfg.parallelism;
        s.mc = monte_carlo(s.data, s.cfg.model, s.cfg.run, opt);
        study = std::move(s);
    } catch (const std::exception& e) {
        study_error = e.what();
    }
    const double study_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (study) {
        std::printf("(synthetic study: %zu repetitions in %.1fs)\n", study->mc.runs.size(), study_s);
        criterion(6, "learning-curve ordering", [&](std::string& d) { return curve_ordering(*study, d); });
        criterion(7, "preferential sampling", [&](std::string& d) { return preferential_sampling(*study, d); });
    } else {
        report(6, "learning-curve ordering", false, "study failed: " + study_error, study_s);
        report(7, "preferential sampling", false, "study failed: " + study_error, study_s);
    }
    criterion(8, "determinism", determinism);
    if (study)
        criterion(9, "evpi-grid structure", [&](std::string& d) { return grid_structure(*study, d); });
    else
        report(9, "evpi-grid structure", false, "study failed: " + study_error, 0.0);

    std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
