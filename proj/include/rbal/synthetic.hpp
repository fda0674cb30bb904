#pragma once

#include "rbal/error.hpp"
#include "rbal/gmm.hpp"
#include "rbal/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

namespace rbal {

/// Gaussian clusters, one per health state, with an optional row layout.
struct SyntheticSpec {
    struct ClassSpec {
        Eigen::VectorXd mean;
        Eigen::MatrixXd cov;
        std::size_t count = 0;
    };
    /// A run of consecutive rows drawn from one class.
    struct Segment {
        ClassLabel label;
        std::size_t count = 0;
    };

    std::vector<ClassSpec> classes;
    /// Row order of the generated set. Empty means all rows of class 1, then
    /// class 2, and so on.
    std::vector<Segment> segments;
    std::uint64_t seed = 0;

    std::size_t total_count() const {
        std::size_t n = 0;
        for (const auto& c : classes)
            n += c.count;
        return n;
    }
};

/// Draws every class from its own seed stream, so a class's points do not
/// depend on the other classes or on the row layout.
inline LabeledSet generate_synthetic(const SyntheticSpec& spec) {
    if (spec.classes.empty())
        throw Error(Errc::EmptyInput, "synthetic spec has no classes");
    const auto d = spec.classes.front().mean.size();
    const auto k = spec.classes.size();

    std::vector<Eigen::MatrixXd> chol;
    std::vector<Rng> streams;
    for (std::size_t c = 0; c < k; ++c) {
        const auto& cs = spec.classes[c];
        if (cs.mean.size() != d || cs.cov.rows() != d || cs.cov.cols() != d)
            throw Error(Errc::DimensionMismatch,
                        "class " + std::to_string(c + 1) + " has inconsistent dimensions");
        if (cs.count < 1)
            throw Error(Errc::InvalidParameter,
                        "class " + std::to_string(c + 1) + " has zero count");
        if ((cs.cov - cs.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw Error(Errc::NonPosDefCovariance,
                        "class " + std::to_string(c + 1) + " covariance is not symmetric");
        Eigen::LLT<Eigen::MatrixXd> llt(cs.cov);
        if (llt.info() != Eigen::Success)
            throw Error(Errc::NonPosDefCovariance,
                        "class " + std::to_string(c + 1) + " covariance is not positive definite");
        chol.emplace_back(llt.matrixL());
        streams.push_back(make_stream(spec.seed, StreamTag::SyntheticClass, c));
    }

    std::vector<SyntheticSpec::Segment> layout = spec.segments;
    if (layout.empty()) {
        for (std::size_t c = 0; c < k; ++c)
            layout.push_back({ClassLabel(static_cast<int>(c + 1)), spec.classes[c].count});
    } else {
        std::vector<std::size_t> per_class(k, 0);
        for (const auto& s : layout) {
            if (s.label.index() < 1 || static_cast<std::size_t>(s.label.index()) > k)
                throw Error(Errc::LabelOutOfRange,
                            "segment label " + std::to_string(s.label.index()));
            per_class[s.label.slot()] += s.count;
        }
        for (std::size_t c = 0; c < k; ++c)
            if (per_class[c] != spec.classes[c].count)
                throw Error(Errc::InvalidParameter,
                            "segments assign " + std::to_string(per_class[c]) + " rows to class " +
                                std::to_string(c + 1) + ", count is " +
                                std::to_string(spec.classes[c].count));
    }

    LabeledSet out;
    out.features.reserve(spec.total_count());
    out.labels.reserve(spec.total_count());
    std::normal_distribution<double> normal(0.0, 1.0);
    for (const auto& seg : layout) {
        const auto c = seg.label.slot();
        for (std::size_t i = 0; i < seg.count; ++i) {
            Eigen::VectorXd z(d);
            for (Eigen::Index j = 0; j < d; ++j)
                z[j] = normal(streams[c]);
            out.push_back(spec.classes[c].mean + chol[c] * z, seg.label);
        }
    }
    return out;
}

namespace detail {

inline SyntheticSpec::ClassSpec cluster(std::initializer_list<double> mean,
                                        std::initializer_list<double> cov_row_major,
                                        std::size_t count) {
    const auto d = static_cast<Eigen::Index>(mean.size());
    SyntheticSpec::ClassSpec c;
    c.mean = Eigen::Map<const Eigen::VectorXd>(mean.begin(), d);
    c.cov = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        cov_row_major.begin(), d, d);
    c.count = count;
    return c;
}

} // namespace detail

/// Four 2-D clusters along a progressive-damage path, 1997 points in total.
/// Neighbouring states 1/2 and 3/4 overlap; states 2 and 3 are separated by a
/// margin. These parameters are illustrative, not measured.
inline SyntheticSpec default_synthetic_spec(std::uint64_t seed = 1) {
    SyntheticSpec s;
    s.seed = seed;
    s.classes = {
        detail::cluster({-3.0, 0.5}, {0.5, 0.1, 0.1, 0.5}, 500),
        detail::cluster({-1.0, 0.0}, {0.5, -0.1, -0.1, 0.4}, 500),
        detail::cluster({2.5, 1.0}, {0.6, 0.15, 0.15, 0.5}, 500),
        detail::cluster({4.0, 2.0}, {0.6, 0.0, 0.0, 0.6}, 497),
    };
    return s;
}

/// Four natural frequencies (Hz) over a one-year campaign of 3932 records:
/// normal conditions, a cold spell that stiffens the deck (rows 1200-1499),
/// and staged damage from row 3476 split into incipient and advanced halves.
inline SyntheticSpec z24_like_spec(std::uint64_t seed = 1) {
    SyntheticSpec s;
    s.seed = seed;
    // clang-format off
    const std::initializer_list<double> normal_cov = {
        0.0040, 0.0020, 0.0030, 0.0020,
        0.0020, 0.0060, 0.0030, 0.0030,
        0.0030, 0.0030, 0.0200, 0.0100,
        0.0020, 0.0030, 0.0100, 0.0250};
    s.classes = {
        detail::cluster({3.95, 5.05, 9.85, 10.50}, normal_cov, 3176),
        detail::cluster({4.25, 5.25, 10.50, 11.20}, {
            0.0150, 0.0080, 0.0150, 0.0120,
            0.0080, 0.0150, 0.0120, 0.0100,
            0.0150, 0.0120, 0.0600, 0.0300,
            0.0120, 0.0100, 0.0300, 0.0700}, 300),
        detail::cluster({3.87, 4.95, 9.70, 10.30}, normal_cov, 228),
        detail::cluster({3.70, 4.80, 9.40, 10.00}, {
            0.0060, 0.0030, 0.0040, 0.0030,
            0.0030, 0.0080, 0.0040, 0.0040,
            0.0040, 0.0040, 0.0300, 0.0150,
            0.0030, 0.0040, 0.0150, 0.0350}, 228),
    };
    // clang-format on
    s.segments = {{ClassLabel(1), 1200}, {ClassLabel(2), 300}, {ClassLabel(1), 1976},
                  {ClassLabel(3), 228},  {ClassLabel(4), 228}};
    return s;
}

} // namespace rbal
