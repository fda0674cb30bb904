#pragma once

// Risk-based active learning: unlabeled observations are presented one at a
// time, and the ground-truth label is bought by inspection whenever the
// expected value of perfect information exceeds the inspection cost. A
// random-sampling baseline and a Monte Carlo harness compare the two on
// decision accuracy.

#include "rbal/decision.hpp"
#include "rbal/error.hpp"
#include "rbal/gmm.hpp"
#include "rbal/preprocessing.hpp"
#include "rbal/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <thread>
#include <vector>

namespace rbal {

enum class PresentationOrder { RandomShuffle, Sequential };

struct RunConfig {
    PresentationOrder order = PresentationOrder::RandomShuffle;
    std::uint64_t seed = 0;
    double initial_fraction = 0.015;
    bool coverage_enforcement = true;
    /// Fraction of the data held out for measuring decision accuracy.
    double test_fraction = 0.5;
    /// Standardize features with statistics of the training pool.
    bool standardize = false;
};

/// Ground truth for the training pool, revealed one index at a time.
class LabelOracle {
public:
    explicit LabelOracle(std::vector<ClassLabel> truth) : truth_(std::move(truth)) {}
    ClassLabel inspect(std::size_t pool_index) const { return truth_.at(pool_index); }
    std::size_t size() const { return truth_.size(); }

private:
    std::vector<ClassLabel> truth_;
};

struct QueryRecord {
    std::size_t step = 0;        // position in the presentation stream
    std::size_t observation = 0; // row of the source dataset
    double evpi = 0.0;
    bool queried = false;
    int label = 0; // revealed label, 0 when not queried
};

using QueryLog = std::vector<QueryRecord>;

/// One repetition's train/test split, seed labels and presentation order.
struct Repetition {
    LabeledSet pool; // training pool D, standardized when requested
    LabeledSet test;
    std::vector<std::size_t> pool_rows; // source row of every pool entry
    std::vector<std::size_t> initial;   // pool indices forming the seed D_l
    std::vector<std::size_t> stream;    // pool indices of D_u in presentation order
    std::optional<Standardizer> standardizer;
    std::uint64_t seed = 0;
};

/// Splits `data` for one repetition. The test set is a random half (per
/// `test_fraction`); the pool keeps source row order. With coverage
/// enforcement the seed set is redrawn until every class is present.
inline Repetition make_repetition(const LabeledSet& data, std::size_t num_classes,
                                  const RunConfig& cfg) {
    if (data.empty())
        throw Error(Errc::EmptyInput, "dataset is empty");
    if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0))
        throw Error(Errc::InvalidParameter, "test fraction must lie in (0, 1)");
    if (!(cfg.initial_fraction > 0.0 && cfg.initial_fraction < 1.0))
        throw Error(Errc::InvalidParameter, "initial label fraction must lie in (0, 1)");

    Repetition rep;
    rep.seed = cfg.seed;
    const std::size_t n = data.size();
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    auto split_rng = make_stream(cfg.seed, StreamTag::Split);
    std::shuffle(rows.begin(), rows.end(), split_rng);
    const auto n_test = static_cast<std::size_t>(std::floor(cfg.test_fraction * static_cast<double>(n)));
    if (n_test == 0 || n_test >= n)
        throw Error(Errc::EmptyTestSet, "split leaves an empty test set or pool");
    std::vector<std::size_t> test_rows(rows.begin(), rows.begin() + static_cast<long>(n_test));
    std::vector<std::size_t> pool_rows(rows.begin() + static_cast<long>(n_test), rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(pool_rows.begin(), pool_rows.end());

    rep.pool = data.subset(pool_rows);
    rep.test = data.subset(test_rows);
    rep.pool_rows = std::move(pool_rows);
    if (cfg.standardize) {
        rep.standardizer = fit_standardizer(rep.pool);
        rep.pool = rep.standardizer->apply(rep.pool);
        rep.test = rep.standardizer->apply(rep.test);
    }

    const std::size_t m = rep.pool.size();
    auto n_init = static_cast<std::size_t>(std::llround(cfg.initial_fraction * static_cast<double>(m)));
    n_init = std::max<std::size_t>(n_init, 1);
    if (cfg.coverage_enforcement)
        n_init = std::max(n_init, num_classes);
    if (n_init >= m)
        throw Error(Errc::InsufficientInitialLabels, "seed set would consume the whole pool");

    std::vector<std::size_t> present(num_classes, 0);
    for (auto l : rep.pool.labels)
        if (l.index() >= 1 && static_cast<std::size_t>(l.index()) <= num_classes)
            ++present[l.slot()];
        else
            throw Error(Errc::LabelOutOfRange, "label " + std::to_string(l.index()));
    if (cfg.coverage_enforcement)
        for (std::size_t k = 0; k < num_classes; ++k)
            if (present[k] == 0)
                throw Error(Errc::InsufficientInitialLabels,
                            "class " + std::to_string(k + 1) + " is absent from the training pool");

    auto init_rng = make_stream(cfg.seed, StreamTag::InitialLabels);
    std::vector<std::size_t> idx(m);
    constexpr int max_draws = 100000;
    for (int attempt = 0;; ++attempt) {
        if (attempt == max_draws)
            throw Error(Errc::InsufficientInitialLabels,
                        "no seed set covering every class after " + std::to_string(max_draws) +
                            " draws");
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::shuffle(idx.begin(), idx.end(), init_rng);
        if (!cfg.coverage_enforcement)
            break;
        std::vector<char> seen(num_classes, 0);
        for (std::size_t i = 0; i < n_init; ++i)
            seen[rep.pool.labels[idx[i]].slot()] = 1;
        if (std::find(seen.begin(), seen.end(), 0) == seen.end())
            break;
    }
    rep.initial.assign(idx.begin(), idx.begin() + static_cast<long>(n_init));
    std::sort(rep.initial.begin(), rep.initial.end());

    std::vector<char> is_init(m, 0);
    for (auto i : rep.initial)
        is_init[i] = 1;
    for (std::size_t i = 0; i < m; ++i)
        if (!is_init[i])
            rep.stream.push_back(i);
    if (cfg.order == PresentationOrder::RandomShuffle) {
        auto order_rng = make_stream(cfg.seed, StreamTag::Presentation);
        std::shuffle(rep.stream.begin(), rep.stream.end(), order_rng);
    }
    return rep;
}

/// Action an agent with perfect knowledge of each test label would take.
inline std::vector<Action> perfect_information_actions(const DecisionProcess& dp,
                                                       const LabeledSet& test) {
    std::vector<Action> out;
    out.reserve(test.size());
    for (auto l : test.labels) {
        const auto p = DiscreteDistribution::point_mass(dp.num_states(), l.slot());
        out.push_back(meu_unobserved(dp, p).action);
    }
    return out;
}

/// Fraction of test points on which the classifier-driven agent picks the
/// same action as the perfect-information agent.
inline double decision_accuracy(const GmmPosterior& classifier, const DecisionProcess& dp,
                                const LabeledSet& test,
                                const std::vector<Action>& perfect_actions) {
    if (test.empty())
        throw Error(Errc::EmptyTestSet, "decision accuracy of an empty test set");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i)
        if (meu_unobserved(dp, classifier.predict(test.features[i])).action == perfect_actions[i])
            ++correct;
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

inline double decision_accuracy(const GmmPosterior& classifier, const DecisionProcess& dp,
                                const LabeledSet& test) {
    if (test.empty())
        throw Error(Errc::EmptyTestSet, "decision accuracy of an empty test set");
    return decision_accuracy(classifier, dp, test, perfect_information_actions(dp, test));
}

/// Model inputs shared by every repetition.
struct ModelSpec {
    DecisionProcess process;
    NiwParams prior;
    DirichletParams alpha;
    std::size_t num_classes = 0;
};

struct RunResult {
    std::vector<GmmPosterior> trajectory; // one entry per (re)fit, initial first
    QueryLog log;
    std::vector<double> accuracy; // accuracy[q] after q queries
    LabeledSet labeled;           // final D_l
    std::size_t initial_size = 0;

    std::size_t queries() const { return accuracy.empty() ? 0 : accuracy.size() - 1; }
};

namespace detail {

struct Loop {
    const Repetition& rep;
    const ModelSpec& model;
    std::vector<Action> perfect;
    LabelOracle oracle;
    RunResult result;

    Loop(const Repetition& r, const ModelSpec& m)
        : rep(r), model(m), perfect(perfect_information_actions(m.process, r.test)),
          oracle(r.pool.labels) {
        result.labeled = rep.pool.subset(rep.initial);
        result.initial_size = result.labeled.size();
        refit();
    }

    const GmmPosterior& current() const { return result.trajectory.back(); }

    void refit() {
        result.trajectory.push_back(
            fit(result.labeled, model.prior, model.alpha, model.num_classes));
        result.accuracy.push_back(
            decision_accuracy(current(), model.process, rep.test, perfect));
    }

    void query(std::size_t step, std::size_t pool_index, double value) {
        const auto label = oracle.inspect(pool_index);
        result.log.push_back({step, rep.pool_rows[pool_index], value, true, label.index()});
        result.labeled.push_back(rep.pool.features[pool_index], label);
        refit();
    }
};

} // namespace detail

/// Presents D_u in stream order; queries and refits from the fixed prior
/// whenever EVPI exceeds the inspection cost.
inline RunResult run_active(const Repetition& rep, const ModelSpec& model) {
    detail::Loop loop(rep, model);
    const auto& dp = model.process;
    for (std::size_t step = 0; step < rep.stream.size(); ++step) {
        const auto idx = rep.stream[step];
        const double value = evpi(dp, loop.current().predict(rep.pool.features[idx]));
        if (value > dp.c_ins())
            loop.query(step, idx, value);
        else
            loop.result.log.push_back({step, rep.pool_rows[idx], value, false, 0});
    }
    return std::move(loop.result);
}

/// Queries `budget` points of D_u drawn uniformly without replacement. The
/// log records the EVPI each point had under the model at query time.
inline RunResult run_random_baseline(const Repetition& rep, const ModelSpec& model,
                                     std::size_t budget) {
    if (budget > rep.stream.size())
        throw Error(Errc::InvalidParameter, "budget " + std::to_string(budget) +
                                                " exceeds the unlabeled pool of " +
                                                std::to_string(rep.stream.size()));
    detail::Loop loop(rep, model);
    std::vector<std::size_t> picks = rep.stream;
    std::sort(picks.begin(), picks.end());
    auto rng = make_stream(rep.seed, StreamTag::Baseline);
    std::shuffle(picks.begin(), picks.end(), rng);
    for (std::size_t q = 0; q < budget; ++q) {
        const auto idx = picks[q];
        const double value = evpi(model.process, loop.current().predict(rep.pool.features[idx]));
        loop.query(q, idx, value);
    }
    return std::move(loop.result);
}

/// Per-query-count summary across repetitions. Repetitions contribute only up
/// to their own final query count.
struct LearningCurve {
    std::vector<double> mean;
    std::vector<double> sd; // sample standard deviation, 0 for a single repetition
    std::vector<std::size_t> reps_at_q;
    std::size_t repetitions = 0;

    std::size_t size() const { return mean.size(); }
};

inline LearningCurve aggregate(const std::vector<std::vector<double>>& per_rep) {
    LearningCurve c;
    c.repetitions = per_rep.size();
    std::size_t len = 0;
    for (const auto& a : per_rep)
        len = std::max(len, a.size());
    c.mean.assign(len, 0.0);
    c.sd.assign(len, 0.0);
    c.reps_at_q.assign(len, 0);
    for (std::size_t q = 0; q < len; ++q) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& a : per_rep)
            if (q < a.size()) {
                sum += a[q];
                ++n;
            }
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (const auto& a : per_rep)
            if (q < a.size())
                ss += (a[q] - mean) * (a[q] - mean);
        c.mean[q] = mean;
        c.sd[q] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
        c.reps_at_q[q] = n;
    }
    return c;
}

struct RepetitionOutcome {
    std::uint64_t seed = 0;
    Repetition rep;
    std::optional<RunResult> active;
    std::optional<RunResult> random;
};

struct MonteCarloResult {
    std::vector<RepetitionOutcome> runs;
    LearningCurve active;
    LearningCurve random;
};

enum class Arms { Both, ActiveOnly, RandomOnly };

struct MonteCarloOptions {
    std::size_t repetitions = 1;
    std::uint64_t base_seed = 0;
    /// Worker threads; 0 selects the available hardware parallelism.
    std::size_t parallelism = 0;
    Arms arms = Arms::Both;
    /// Budget of the random arm when the active arm is not run. Defaults to
    /// the whole unlabeled pool.
    std::optional<std::size_t> random_budget;
    /// Keep every refit classifier; otherwise only the first and last.
    bool keep_trajectories = false;
};

/// Repetition r uses seed base_seed + r for its split, seed labels,
/// presentation order and baseline draws. The random arm gets the same
/// number of queries as the active arm of the same repetition. Results do
/// not depend on the thread count.
inline MonteCarloResult monte_carlo(const LabeledSet& data, const ModelSpec& model,
                                    const RunConfig& base, const MonteCarloOptions& opt) {
    if (opt.repetitions < 1)
        throw Error(Errc::InvalidParameter, "at least one repetition is required");
    MonteCarloResult out;
    out.runs.resize(opt.repetitions);
    std::vector<std::exception_ptr> errors(opt.repetitions);

    auto trim = [&](RunResult& r) {
        if (!opt.keep_trajectories && r.trajectory.size() > 2)
            r.trajectory.erase(r.trajectory.begin() + 1, r.trajectory.end() - 1);
    };
    auto one = [&](std::size_t r) {
        try {
            RunConfig cfg = base;
            cfg.seed = opt.base_seed + r;
            auto& o = out.runs[r];
            o.seed = cfg.seed;
            o.rep = make_repetition(data, model.num_classes, cfg);
            std::optional<std::size_t> budget = opt.random_budget;
            if (opt.arms != Arms::RandomOnly) {
                o.active = run_active(o.rep, model);
                budget = o.active->queries();
                trim(*o.active);
            }
            if (opt.arms != Arms::ActiveOnly) {
                const auto b = std::min(budget.value_or(o.rep.stream.size()), o.rep.stream.size());
                o.random = run_random_baseline(o.rep, model, b);
                trim(*o.random);
            }
        } catch (...) {
            errors[r] = std::current_exception();
        }
    };

    std::size_t workers = opt.parallelism ? opt.parallelism : std::thread::hardware_concurrency();
    workers = std::clamp<std::size_t>(workers, 1, opt.repetitions);
    if (workers == 1) {
        for (std::size_t r = 0; r < opt.repetitions; ++r)
            one(r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t r = next++; r < opt.repetitions; r = next++)
                    one(r);
            });
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    std::vector<std::vector<double>> act, rnd;
    for (const auto& o : out.runs) {
        if (o.active)
            act.push_back(o.active->accuracy);
        if (o.random)
            rnd.push_back(o.random->accuracy);
    }
    if (!act.empty())
        out.active = aggregate(act);
    if (!rnd.empty())
        out.random = aggregate(rnd);
    return out;
}

} // namespace rbal
