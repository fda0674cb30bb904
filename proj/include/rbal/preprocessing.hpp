#pragma once

#include "rbal/error.hpp"
#include "rbal/gmm.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace rbal {

/// Per-feature affine transform x -> (x - mean) / sd.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;

    FeatureVector apply(const FeatureVector& x) const {
        return (x - mean).cwiseQuotient(sd);
    }
    FeatureVector invert(const FeatureVector& z) const { return z.cwiseProduct(sd) + mean; }

    LabeledSet apply(const LabeledSet& data) const {
        LabeledSet out = data;
        for (auto& x : out.features)
            x = apply(x);
        return out;
    }
    LabeledSet invert(const LabeledSet& data) const {
        LabeledSet out = data;
        for (auto& z : out.features)
            z = invert(z);
        return out;
    }
};

/// Sample mean and sample standard deviation (n - 1 denominator) per feature.
inline Standardizer fit_standardizer(const LabeledSet& data) {
    if (data.size() < 2)
        throw Error(Errc::InvalidParameter, "standardization needs at least two observations");
    const auto d = data.dim();
    const double n = static_cast<double>(data.size());
    Standardizer s;
    s.mean = Eigen::VectorXd::Zero(d);
    for (const auto& x : data.features)
        s.mean += x;
    s.mean /= n;
    Eigen::VectorXd ss = Eigen::VectorXd::Zero(d);
    for (const auto& x : data.features)
        ss += (x - s.mean).cwiseAbs2();
    s.sd = (ss / (n - 1.0)).cwiseSqrt();
    for (Eigen::Index j = 0; j < d; ++j)
        if (!(s.sd[j] > 0.0))
            throw Error(Errc::ZeroVarianceFeature, "feature " + std::to_string(j + 1) +
                                                       " has zero variance");
    return s;
}

inline std::pair<LabeledSet, Standardizer> standardize(const LabeledSet& data) {
    auto s = fit_standardizer(data);
    return {s.apply(data), std::move(s)};
}

/// Linear map onto the top-2 principal directions.
struct Projection {
    Eigen::VectorXd mean;
    Eigen::MatrixXd loadings; // 2 x D, orthonormal rows
    Eigen::Vector2d explained; // fraction of total variance per direction

    Eigen::Vector2d project(const FeatureVector& x) const { return loadings * (x - mean); }

    /// Point of R^D on the principal plane with coordinates `coords`.
    FeatureVector lift(const Eigen::Vector2d& coords) const {
        return mean + loadings.transpose() * coords;
    }
};

inline Eigen::MatrixXd sample_covariance(const std::vector<FeatureVector>& xs,
                                         const Eigen::VectorXd& mean) {
    const auto d = mean.size();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
    for (const auto& x : xs) {
        const Eigen::VectorXd r = x - mean;
        c.noalias() += r * r.transpose();
    }
    return c / (static_cast<double>(xs.size()) - 1.0);
}

inline Projection pca_fit(const std::vector<FeatureVector>& xs) {
    if (xs.empty())
        throw Error(Errc::EmptyInput, "PCA of an empty set");
    const auto d = xs.front().size();
    if (d < 2)
        throw Error(Errc::DimensionMismatch, "PCA needs D >= 2");
    if (static_cast<Eigen::Index>(xs.size()) < d)
        throw Error(Errc::DegenerateCovariance, "PCA needs at least D observations");
    Projection p;
    p.mean = Eigen::VectorXd::Zero(d);
    for (const auto& x : xs) {
        if (x.size() != d)
            throw Error(Errc::DimensionMismatch, "observations disagree in dimension");
        p.mean += x;
    }
    p.mean /= static_cast<double>(xs.size());
    const Eigen::MatrixXd cov = sample_covariance(xs, p.mean);
    const double total = cov.trace();
    if (!(total > 0.0))
        throw Error(Errc::DegenerateCovariance, "data have zero total variance");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
        throw Error(Errc::DegenerateCovariance, "eigendecomposition failed");
    // eigenvalues ascending
    p.loadings.resize(2, d);
    for (int r = 0; r < 2; ++r) {
        const Eigen::Index col = d - 1 - r;
        Eigen::VectorXd v = eig.eigenvectors().col(col);
        Eigen::Index at = 0;
        v.cwiseAbs().maxCoeff(&at);
        if (v[at] < 0.0)
            v = -v;
        p.loadings.row(r) = v.transpose();
        p.explained[r] = std::max(0.0, eig.eigenvalues()[col]) / total;
    }
    return p;
}

inline Projection pca_fit(const LabeledSet& data) { return pca_fit(data.features); }

/// 2-D coordinates of every observation, labels kept.
inline LabeledSet pca_project(const Projection& p, const LabeledSet& data) {
    LabeledSet out;
    out.features.reserve(data.size());
    for (const auto& x : data.features) {
        if (x.size() != p.mean.size())
            throw Error(Errc::DimensionMismatch, "observation dimension differs from projection");
        out.features.push_back(p.project(x));
    }
    out.labels = data.labels;
    return out;
}

} // namespace rbal
