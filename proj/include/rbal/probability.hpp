#pragma once

#include "rbal/error.hpp"

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace rbal {

/// Absolute tolerance on the sum of a probability vector.
inline constexpr double prob_sum_tol = 1e-9;

/// Health-state label, 1-based (1..K).
class ClassLabel {
public:
    constexpr ClassLabel() = default;
    constexpr explicit ClassLabel(int index) : index_(index) {}

    constexpr int index() const { return index_; }
    /// 0-based position for indexing per-class containers.
    constexpr std::size_t slot() const { return static_cast<std::size_t>(index_ - 1); }

    static ClassLabel checked(long index, int num_classes) {
        if (index < 1 || index > num_classes)
            throw Error(Errc::LabelOutOfRange, "label " + std::to_string(index) +
                                                   " outside 1.." + std::to_string(num_classes));
        return ClassLabel(static_cast<int>(index));
    }

    friend constexpr bool operator==(ClassLabel, ClassLabel) = default;
    friend constexpr auto operator<=>(ClassLabel, ClassLabel) = default;

private:
    int index_ = 1;
};

/// Decision alternative, 0-based (0 = do nothing).
class Action {
public:
    constexpr Action() = default;
    constexpr explicit Action(std::size_t index) : index_(index) {}

    constexpr std::size_t index() const { return index_; }

    friend constexpr bool operator==(Action, Action) = default;

private:
    std::size_t index_ = 0;
};

/// Validated probability vector over a fixed number of states.
class DiscreteDistribution {
public:
    /// Validates without renormalizing.
    static DiscreteDistribution validate(std::vector<double> probs) {
        if (probs.empty())
            throw Error(Errc::EmptyInput, "probability vector is empty");
        double sum = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (!(probs[i] >= 0.0) || !std::isfinite(probs[i]))
                throw Error(Errc::NegativeEntry, "entry " + std::to_string(i) + " is " +
                                                     std::to_string(probs[i]));
            sum += probs[i];
        }
        if (std::abs(sum - 1.0) > prob_sum_tol)
            throw Error(Errc::SumNotOne, "entries sum to " + std::to_string(sum) +
                                             " (deviation " + std::to_string(sum - 1.0) + ")");
        return DiscreteDistribution(std::move(probs));
    }

    static DiscreteDistribution point_mass(std::size_t size, std::size_t at) {
        std::vector<double> p(size, 0.0);
        p.at(at) = 1.0;
        return DiscreteDistribution(std::move(p));
    }

    static DiscreteDistribution uniform(std::size_t size) {
        return DiscreteDistribution(std::vector<double>(size, 1.0 / static_cast<double>(size)));
    }

    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    std::span<const double> probs() const { return probs_; }

private:
    explicit DiscreteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {}

    std::vector<double> probs_;
};

inline DiscreteDistribution validate_distribution(std::vector<double> p) {
    return DiscreteDistribution::validate(std::move(p));
}

/// Utilities indexed by state or by action.
class UtilityTable {
public:
    UtilityTable() = default;
    explicit UtilityTable(std::vector<double> values) : values_(std::move(values)) {
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i]))
                throw Error(Errc::InvalidParameter,
                            "utility entry " + std::to_string(i) + " is not finite");
    }

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }

private:
    std::vector<double> values_;
};

/// Row-stochastic K x K matrix, rows indexed by the current state.
class TransitionCpt {
public:
    TransitionCpt() = default;

    /// `row_major` holds K*K entries.
    TransitionCpt(std::size_t num_states, std::vector<double> row_major)
        : k_(num_states), p_(std::move(row_major)) {
        if (k_ == 0)
            throw Error(Errc::EmptyInput, "transition table has no states");
        if (p_.size() != k_ * k_)
            throw Error(Errc::LengthMismatch, "transition table needs " + std::to_string(k_ * k_) +
                                                  " entries, got " + std::to_string(p_.size()));
        for (std::size_t r = 0; r < k_; ++r) {
            double sum = 0.0;
            for (std::size_t c = 0; c < k_; ++c) {
                const double v = p_[r * k_ + c];
                if (!(v >= 0.0 && v <= 1.0))
                    throw Error(Errc::NegativeEntry, "transition entry (" + std::to_string(r) +
                                                         "," + std::to_string(c) +
                                                         ") outside [0,1]");
                sum += v;
            }
            if (std::abs(sum - 1.0) > prob_sum_tol)
                throw Error(Errc::SumNotOne, "transition row " + std::to_string(r) + " sums to " +
                                                 std::to_string(sum) + " (deviation " +
                                                 std::to_string(sum - 1.0) + ")");
        }
    }

    std::size_t size() const { return k_; }
    double operator()(std::size_t from, std::size_t to) const { return p_[from * k_ + to]; }
    std::span<const double> row(std::size_t from) const {
        return std::span<const double>(p_).subspan(from * k_, k_);
    }
    std::span<const double> row_major() const { return p_; }

private:
    std::size_t k_ = 0;
    std::vector<double> p_;
};

inline double expectation(std::span<const double> p, std::span<const double> u) {
    if (p.size() != u.size())
        throw Error(Errc::LengthMismatch, "distribution has " + std::to_string(p.size()) +
                                              " entries, utility table " +
                                              std::to_string(u.size()));
    return std::inner_product(p.begin(), p.end(), u.begin(), 0.0);
}

inline double expectation(const DiscreteDistribution& p, const UtilityTable& u) {
    return expectation(p.probs(), u.values());
}

/// Index of the maximum; exact ties resolve to the lowest index.
inline std::size_t argmax_with_tiebreak(std::span<const double> values) {
    if (values.empty())
        throw Error(Errc::EmptyInput, "argmax of an empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best])
            best = i;
    return best;
}

} // namespace rbal
