#pragma once

// Single-stage maintenance influence diagram: the current health state H_t is
// inferred from features, an action d_t is chosen, the structure moves to
// H_{t+1} through an action-dependent transition table, and utility accrues
// from both the action and the next state.

#include "rbal/error.hpp"
#include "rbal/probability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace rbal {

class DecisionProcess {
public:
    DecisionProcess(std::vector<TransitionCpt> transitions, UtilityTable u_action,
                    UtilityTable u_state, double c_ins)
        : transitions_(std::move(transitions)), u_action_(std::move(u_action)),
          u_state_(std::move(u_state)), c_ins_(c_ins) {
        if (transitions_.size() < 2)
            throw Error(Errc::InvalidParameter, "a decision needs at least two actions");
        k_ = transitions_.front().size();
        for (const auto& t : transitions_)
            if (t.size() != k_)
                throw Error(Errc::DimensionMismatch, "transition tables disagree in state count");
        if (u_action_.size() != transitions_.size())
            throw Error(Errc::LengthMismatch, "action utilities need " +
                                                  std::to_string(transitions_.size()) +
                                                  " entries, got " +
                                                  std::to_string(u_action_.size()));
        if (u_state_.size() != k_)
            throw Error(Errc::LengthMismatch, "state utilities need " + std::to_string(k_) +
                                                  " entries, got " +
                                                  std::to_string(u_state_.size()));
        if (std::isnan(c_ins_) || c_ins_ < 0.0)
            throw Error(Errc::InvalidParameter, "inspection cost must be >= 0");
    }

    std::size_t num_states() const { return k_; }
    std::size_t num_actions() const { return transitions_.size(); }
    const TransitionCpt& transition(Action a) const { return transitions_.at(a.index()); }
    const std::vector<TransitionCpt>& transitions() const { return transitions_; }
    const UtilityTable& u_action() const { return u_action_; }
    const UtilityTable& u_state() const { return u_state_; }
    double c_ins() const { return c_ins_; }

    /// Utility of taking `a` when the current state is known to be `state`
    /// (0-based): expected next-state utility plus the action utility.
    double state_action_utility(std::size_t state, Action a) const {
        return expectation(transition(a).row(state), u_state_.values()) + u_action_[a.index()];
    }

    DecisionProcess with_inspection_cost(double c) const {
        return DecisionProcess(transitions_, u_action_, u_state_, c);
    }

private:
    std::vector<TransitionCpt> transitions_;
    UtilityTable u_action_;
    UtilityTable u_state_;
    double c_ins_ = 0.0;
    std::size_t k_ = 0;
};

struct PolicyResult {
    Action action;
    double expected_utility = 0.0;
};

namespace detail {

inline void check_posterior(const DecisionProcess& dp, const DiscreteDistribution& p) {
    if (p.size() != dp.num_states())
        throw Error(Errc::DimensionMismatch, "posterior has " + std::to_string(p.size()) +
                                                 " states, process has " +
                                                 std::to_string(dp.num_states()));
}

inline void check_action(const DecisionProcess& dp, Action a) {
    if (a.index() >= dp.num_actions())
        throw Error(Errc::DimensionMismatch, "action " + std::to_string(a.index()) +
                                                 " outside 0.." +
                                                 std::to_string(dp.num_actions() - 1));
}

/// Best action and its utility for a known current state.
inline PolicyResult best_for_state(const DecisionProcess& dp, std::size_t state) {
    std::vector<double> eu(dp.num_actions());
    for (std::size_t a = 0; a < eu.size(); ++a)
        eu[a] = dp.state_action_utility(state, Action(a));
    const auto best = argmax_with_tiebreak(eu);
    return {Action(best), eu[best]};
}

} // namespace detail

/// Sum over H_t, H_{t+1} of P(H_t) P(H_{t+1} | H_t, a) U(H_{t+1}), plus U(a).
inline double expected_utility(const DecisionProcess& dp, const DiscreteDistribution& posterior,
                               Action a) {
    detail::check_posterior(dp, posterior);
    detail::check_action(dp, a);
    const auto& t = dp.transition(a);
    const auto& u = dp.u_state();
    double sum = 0.0;
    for (std::size_t i = 0; i < dp.num_states(); ++i)
        for (std::size_t j = 0; j < dp.num_states(); ++j)
            sum += posterior[i] * t(i, j) * u[j];
    return sum + dp.u_action()[a.index()];
}

/// Maximum expected utility when the health state is not observed.
inline PolicyResult meu_unobserved(const DecisionProcess& dp,
                                   const DiscreteDistribution& posterior) {
    std::vector<double> eu(dp.num_actions());
    for (std::size_t a = 0; a < eu.size(); ++a)
        eu[a] = expected_utility(dp, posterior, Action(a));
    const auto best = argmax_with_tiebreak(eu);
    return {Action(best), eu[best]};
}

/// Maximum expected utility when the health state is revealed before acting:
/// sum over H_t of P(H_t) times the best per-state utility.
inline double meu_observed(const DecisionProcess& dp, const DiscreteDistribution& posterior) {
    detail::check_posterior(dp, posterior);
    double sum = 0.0;
    for (std::size_t i = 0; i < dp.num_states(); ++i)
        sum += posterior[i] * detail::best_for_state(dp, i).expected_utility;
    return sum;
}

/// Expected value of perfect information about H_t.
///
/// Equal to meu_observed - meu_unobserved, evaluated as the posterior-weighted
/// per-state regret of the unobserved-optimal action so that it is exactly
/// zero whenever that action is per-state optimal on the posterior support.
inline double evpi(const DecisionProcess& dp, const DiscreteDistribution& posterior) {
    const auto chosen = meu_unobserved(dp, posterior).action;
    double regret = 0.0;
    for (std::size_t i = 0; i < dp.num_states(); ++i) {
        if (posterior[i] == 0.0)
            continue;
        const double best = detail::best_for_state(dp, i).expected_utility;
        regret += posterior[i] * (best - dp.state_action_utility(i, chosen));
    }
    return (regret < 0.0 && regret > -1e-9) ? 0.0 : regret;
}

/// Inspect when the information is worth strictly more than it costs.
inline bool query_indicated(const DecisionProcess& dp, const DiscreteDistribution& posterior) {
    return evpi(dp, posterior) > dp.c_ins();
}

/// Rows and columns of `row_major` (n x n) restricted to `states` (0-based),
/// each row rescaled to sum to one.
inline TransitionCpt restrict_and_renormalize(std::span<const double> row_major, std::size_t n,
                                              std::span<const std::size_t> states) {
    if (row_major.size() != n * n)
        throw Error(Errc::LengthMismatch, "matrix is not n x n");
    if (states.empty())
        throw Error(Errc::EmptyInput, "empty state subset");
    const std::size_t m = states.size();
    std::vector<double> out(m * m);
    for (std::size_t r = 0; r < m; ++r) {
        if (states[r] >= n)
            throw Error(Errc::DimensionMismatch, "state subset index out of range");
        double total = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
            if (states[c] >= n)
                throw Error(Errc::DimensionMismatch, "state subset index out of range");
            out[r * m + c] = row_major[states[r] * n + states[c]];
            total += out[r * m + c];
        }
        if (!(total > 0.0))
            throw Error(Errc::ReducibleChain,
                        "restricted row " + std::to_string(r) + " has no mass inside the subset");
        for (std::size_t c = 0; c < m; ++c)
            out[r * m + c] /= total;
    }
    return TransitionCpt(m, std::move(out));
}

/// Stationary distribution of an irreducible, aperiodic chain by power
/// iteration from the uniform distribution.
inline DiscreteDistribution stationary_distribution(const TransitionCpt& cpt,
                                                    std::size_t max_iter = 1'000'000,
                                                    double tol = 1e-12) {
    const std::size_t n = cpt.size();
    // irreducibility: every state reaches every other state
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<char> seen(n, 0);
        std::vector<std::size_t> stack{s};
        seen[s] = 1;
        while (!stack.empty()) {
            const auto i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < n; ++j)
                if (!seen[j] && cpt(i, j) > 0.0) {
                    seen[j] = 1;
                    stack.push_back(j);
                }
        }
        if (std::find(seen.begin(), seen.end(), 0) != seen.end())
            throw Error(Errc::ReducibleChain,
                        "state " + std::to_string(s + 1) + " does not reach every state");
    }

    std::vector<double> pi(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);
    for (std::size_t it = 0; it < max_iter; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                next[j] += pi[i] * cpt(i, j);
        const double total = std::accumulate(next.begin(), next.end(), 0.0);
        double delta = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            next[j] /= total;
            delta = std::max(delta, std::abs(next[j] - pi[j]));
        }
        pi.swap(next);
        if (delta < tol)
            return DiscreteDistribution::validate(std::move(pi));
    }
    throw Error(Errc::NonConvergence,
                "power iteration did not converge in " + std::to_string(max_iter) + " iterations");
}

/// Four-state maintenance problem with a do-nothing / repair decision:
/// monotone degradation under do-nothing, repair restores the undamaged state
/// with probability 0.99. Inspection cost 7.
inline DecisionProcess synthetic_maintenance_process() {
    TransitionCpt do_nothing(4, {0.8, 0.18, 0.015, 0.005, //
                                 0.0, 0.8, 0.15, 0.05,    //
                                 0.0, 0.0, 0.8, 0.2,      //
                                 0.0, 0.0, 0.0, 1.0});
    TransitionCpt repair(4, {1.0, 0.0, 0.0, 0.0,   //
                             0.99, 0.01, 0.0, 0.0, //
                             0.99, 0.0, 0.01, 0.0, //
                             0.99, 0.0, 0.0, 0.01});
    return DecisionProcess({do_nothing, repair}, UtilityTable({0.0, -30.0}),
                           UtilityTable({10.0, 10.0, 5.0, -75.0}), 7.0);
}

/// Bridge maintenance problem: states are normal undamaged, cold undamaged,
/// incipient damage and advanced damage. Repair from a damaged state lands in
/// the undamaged states according to the long-run weather distribution.
/// Inspection cost 30.
inline DecisionProcess bridge_maintenance_process() {
    // The published row for the cold state lists 0.15 and 0.05 in the damage
    // columns (row sum 1.18); the degradation entries of the normal state are
    // used instead so the row is stochastic.
    TransitionCpt do_nothing(4, {0.7, 0.28, 0.015, 0.005, //
                                 0.43, 0.55, 0.015, 0.005, //
                                 0.0, 0.0, 0.8, 0.2,       //
                                 0.0, 0.0, 0.0, 1.0});
    TransitionCpt repair(4, {0.7143, 0.2857, 0.0, 0.0, //
                             0.4388, 0.5612, 0.0, 0.0, //
                             0.5996, 0.3904, 0.01, 0.0, //
                             0.5996, 0.3904, 0.0, 0.01});
    return DecisionProcess({do_nothing, repair}, UtilityTable({0.0, -100.0}),
                           UtilityTable({10.0, 10.0, -50.0, -1000.0}), 30.0);
}

} // namespace rbal
