#pragma once

// Supervised Bayesian Gaussian mixture classifier. Each class carries a
// Normal-inverse-Wishart prior over (mean, covariance) and the mixing
// proportions carry a Dirichlet prior. Parameters are never point-estimated:
// prediction uses the Student-t posterior predictive of each class and the
// Dirichlet-multinomial label predictive.

#include "rbal/error.hpp"
#include "rbal/probability.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace rbal {

using FeatureVector = Eigen::VectorXd;

/// Normal-inverse-Wishart hyperparameters (m, kappa, v, S).
struct NiwParams {
    Eigen::VectorXd m;
    double kappa = 1.0;
    double v = 4.0;
    Eigen::MatrixXd S;

    Eigen::Index dim() const { return m.size(); }

    /// Zero mean, kappa = 1, v = D + 2, S = (v - D - 1) I; the prior mean of
    /// each class covariance is then exactly the identity.
    static NiwParams standard(Eigen::Index dim) {
        NiwParams p;
        p.m = Eigen::VectorXd::Zero(dim);
        p.kappa = 1.0;
        p.v = static_cast<double>(dim) + 2.0;
        p.S = (p.v - static_cast<double>(dim) - 1.0) * Eigen::MatrixXd::Identity(dim, dim);
        return p;
    }

    void validate() const {
        const auto d = dim();
        if (d < 1)
            throw Error(Errc::InvalidParameter, "NIW mean has zero dimension");
        if (S.rows() != d || S.cols() != d)
            throw Error(Errc::DimensionMismatch, "NIW scale matrix is not D x D");
        if (!m.allFinite() || !S.allFinite())
            throw Error(Errc::InvalidParameter, "NIW parameters contain non-finite values");
        if (!(kappa > 0.0))
            throw Error(Errc::InvalidParameter, "NIW kappa must be > 0");
        if (!(v > static_cast<double>(d) - 1.0))
            throw Error(Errc::InvalidParameter, "NIW degrees of freedom must exceed D - 1");
        if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-9)
            throw Error(Errc::InvalidParameter, "NIW scale matrix is not symmetric");
        Eigen::LLT<Eigen::MatrixXd> llt(S);
        if (llt.info() != Eigen::Success)
            throw Error(Errc::InvalidParameter, "NIW scale matrix is not positive definite");
    }
};

struct DirichletParams {
    std::vector<double> alpha;

    static DirichletParams symmetric(std::size_t num_classes, double a = 1.0) {
        return {std::vector<double>(num_classes, a)};
    }

    void validate() const {
        if (alpha.empty())
            throw Error(Errc::EmptyInput, "Dirichlet concentration vector is empty");
        for (double a : alpha)
            if (!(a > 0.0) || !std::isfinite(a))
                throw Error(Errc::InvalidParameter, "Dirichlet concentrations must be > 0");
    }
};

/// Feature vectors with ground-truth labels, stored column-wise by observation.
struct LabeledSet {
    std::vector<FeatureVector> features;
    std::vector<ClassLabel> labels;

    std::size_t size() const { return features.size(); }
    bool empty() const { return features.empty(); }
    Eigen::Index dim() const { return features.empty() ? 0 : features.front().size(); }

    void push_back(FeatureVector x, ClassLabel label) {
        if (!features.empty() && x.size() != dim())
            throw Error(Errc::DimensionMismatch, "observation has dimension " +
                                                     std::to_string(x.size()) + ", expected " +
                                                     std::to_string(dim()));
        features.push_back(std::move(x));
        labels.push_back(label);
    }

    LabeledSet subset(std::span<const std::size_t> idx) const {
        LabeledSet out;
        out.features.reserve(idx.size());
        out.labels.reserve(idx.size());
        for (auto i : idx) {
            out.features.push_back(features.at(i));
            out.labels.push_back(labels.at(i));
        }
        return out;
    }
};

using UnlabeledSet = std::vector<FeatureVector>;

/// Log density of a multivariate Student-t with location `loc`, scale matrix
/// `scale` and `dof` degrees of freedom.
inline double student_t_log_density(const Eigen::VectorXd& loc, const Eigen::MatrixXd& scale,
                                    double dof, const Eigen::VectorXd& x) {
    if (x.size() != loc.size() || scale.rows() != loc.size() || scale.cols() != loc.size())
        throw Error(Errc::DimensionMismatch, "Student-t argument dimensions disagree");
    Eigen::LLT<Eigen::MatrixXd> llt(scale);
    if (llt.info() != Eigen::Success)
        throw Error(Errc::NonPosDefScale, "Student-t scale matrix is not positive definite");
    const double d = static_cast<double>(loc.size());
    const Eigen::MatrixXd l = llt.matrixL();
    const double maha = l.triangularView<Eigen::Lower>().solve(x - loc).squaredNorm();
    const double log_det_half = l.diagonal().array().log().sum();
    return std::lgamma(0.5 * (dof + d)) - std::lgamma(0.5 * dof) -
           0.5 * d * std::log(dof * std::numbers::pi) - log_det_half -
           0.5 * (dof + d) * std::log1p(maha / dof);
}

/// Fitted classifier: per-class NIW posteriors plus label counts.
class GmmPosterior {
public:
    /// Cached Student-t posterior predictive of one class.
    struct Predictive {
        Eigen::VectorXd loc;
        Eigen::MatrixXd chol; // lower Cholesky factor of the scale matrix
        double dof = 0.0;
        double log_norm = 0.0; // every term not depending on the probe point
    };

    GmmPosterior(std::vector<NiwParams> per_class, std::vector<std::size_t> counts,
                 DirichletParams alpha)
        : per_class_(std::move(per_class)), counts_(std::move(counts)), alpha_(std::move(alpha)) {
        if (per_class_.empty() || per_class_.size() != counts_.size() ||
            per_class_.size() != alpha_.alpha.size())
            throw Error(Errc::LengthMismatch, "per-class blocks, counts and alpha disagree in K");
        alpha_.validate();
        dim_ = per_class_.front().dim();
        predictive_.reserve(per_class_.size());
        for (const auto& p : per_class_) {
            if (p.dim() != dim_)
                throw Error(Errc::DimensionMismatch, "class blocks disagree in dimension");
            predictive_.push_back(make_predictive(p));
        }
    }

    std::size_t num_classes() const { return per_class_.size(); }
    Eigen::Index dim() const { return dim_; }
    const NiwParams& niw(ClassLabel k) const { return per_class_.at(k.slot()); }
    std::size_t count(ClassLabel k) const { return counts_.at(k.slot()); }
    const std::vector<std::size_t>& counts() const { return counts_; }
    std::size_t total_count() const {
        return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
    }
    const DirichletParams& alpha() const { return alpha_; }
    const Predictive& predictive(ClassLabel k) const { return predictive_.at(k.slot()); }

    /// log p(x | H = k, D_l).
    double class_log_predictive(ClassLabel k, const FeatureVector& x) const {
        check_label(k);
        if (x.size() != dim_)
            throw Error(Errc::DimensionMismatch, "probe has dimension " +
                                                     std::to_string(x.size()) + ", expected " +
                                                     std::to_string(dim_));
        const auto& t = predictive_[k.slot()];
        const double maha = t.chol.triangularView<Eigen::Lower>().solve(x - t.loc).squaredNorm();
        return t.log_norm - 0.5 * (t.dof + static_cast<double>(dim_)) * std::log1p(maha / t.dof);
    }

    /// P(H = k | D_l) = (n_k + alpha_k) / (n + alpha_0).
    double class_prior_predictive(ClassLabel k) const {
        check_label(k);
        const double alpha0 = std::accumulate(alpha_.alpha.begin(), alpha_.alpha.end(), 0.0);
        return (static_cast<double>(counts_[k.slot()]) + alpha_.alpha[k.slot()]) /
               (static_cast<double>(total_count()) + alpha0);
    }

    /// Class posterior p(H = k | x, D_l) via Bayes' rule in log space.
    DiscreteDistribution predict(const FeatureVector& x) const {
        const std::size_t kk = num_classes();
        std::vector<double> logp(kk);
        for (std::size_t k = 0; k < kk; ++k) {
            const ClassLabel label(static_cast<int>(k + 1));
            logp[k] = class_log_predictive(label, x) + std::log(class_prior_predictive(label));
        }
        const double mx = *std::max_element(logp.begin(), logp.end());
        double z = 0.0;
        for (auto& l : logp) {
            l = std::exp(l - mx);
            z += l;
        }
        for (auto& l : logp)
            l /= z;
        return DiscreteDistribution::validate(std::move(logp));
    }

    /// Posterior mean of a class covariance, S_n / (v_n - D - 1). Undefined
    /// (NaN-filled) when v_n <= D + 1.
    Eigen::MatrixXd expected_covariance(ClassLabel k) const {
        const auto& p = niw(k);
        const double denom = p.v - static_cast<double>(dim_) - 1.0;
        if (denom <= 0.0)
            return Eigen::MatrixXd::Constant(dim_, dim_, std::numeric_limits<double>::quiet_NaN());
        return p.S / denom;
    }

private:
    void check_label(ClassLabel k) const {
        if (k.index() < 1 || static_cast<std::size_t>(k.index()) > num_classes())
            throw Error(Errc::LabelOutOfRange, "class " + std::to_string(k.index()) +
                                                   " outside 1.." + std::to_string(num_classes()));
    }

    static Predictive make_predictive(const NiwParams& p) {
        const double d = static_cast<double>(p.dim());
        Predictive t;
        t.loc = p.m;
        t.dof = p.v - d + 1.0;
        const Eigen::MatrixXd scale = ((p.kappa + 1.0) / (p.kappa * t.dof)) * p.S;
        Eigen::LLT<Eigen::MatrixXd> llt(scale);
        if (llt.info() != Eigen::Success)
            throw Error(Errc::NonPosDefScale, "predictive scale matrix is not positive definite");
        t.chol = llt.matrixL();
        t.log_norm = std::lgamma(0.5 * (t.dof + d)) - std::lgamma(0.5 * t.dof) -
                     0.5 * d * std::log(t.dof * std::numbers::pi) -
                     t.chol.diagonal().array().log().sum();
        return t;
    }

    std::vector<NiwParams> per_class_;
    std::vector<std::size_t> counts_;
    DirichletParams alpha_;
    Eigen::Index dim_ = 0;
    std::vector<Predictive> predictive_;
};

/// Conjugate update of every class from the fixed prior on the full labeled
/// set. Classes without observations keep the prior block unchanged.
inline GmmPosterior fit(const LabeledSet& data, const NiwParams& prior,
                        const DirichletParams& alpha, std::size_t num_classes) {
    prior.validate();
    alpha.validate();
    if (alpha.alpha.size() != num_classes)
        throw Error(Errc::LengthMismatch, "alpha has " + std::to_string(alpha.alpha.size()) +
                                              " entries for K = " + std::to_string(num_classes));
    const auto d = prior.dim();
    std::vector<std::size_t> n(num_classes, 0);
    std::vector<Eigen::VectorXd> sum(num_classes, Eigen::VectorXd::Zero(d));
    std::vector<Eigen::MatrixXd> scatter(num_classes, Eigen::MatrixXd::Zero(d, d));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& x = data.features[i];
        if (x.size() != d)
            throw Error(Errc::DimensionMismatch, "observation " + std::to_string(i) +
                                                     " has dimension " + std::to_string(x.size()) +
                                                     ", prior has " + std::to_string(d));
        const auto label = data.labels[i];
        if (label.index() < 1 || static_cast<std::size_t>(label.index()) > num_classes)
            throw Error(Errc::LabelOutOfRange, "observation " + std::to_string(i) + " has label " +
                                                   std::to_string(label.index()));
        const auto k = label.slot();
        ++n[k];
        sum[k] += x;
        scatter[k].noalias() += x * x.transpose();
    }

    std::vector<NiwParams> blocks;
    blocks.reserve(num_classes);
    for (std::size_t k = 0; k < num_classes; ++k) {
        if (n[k] == 0) {
            blocks.push_back(prior);
            continue;
        }
        const double nk = static_cast<double>(n[k]);
        const Eigen::VectorXd mean = sum[k] / nk;
        NiwParams post;
        post.kappa = prior.kappa + nk;
        post.v = prior.v + nk;
        post.m = (prior.kappa * prior.m + nk * mean) / post.kappa;
        Eigen::MatrixXd s = prior.S + scatter[k] + prior.kappa * prior.m * prior.m.transpose() -
                            post.kappa * post.m * post.m.transpose();
        post.S = 0.5 * (s + s.transpose());
        Eigen::LLT<Eigen::MatrixXd> llt(post.S);
        if (llt.info() != Eigen::Success)
            throw Error(Errc::NonPosDefResult,
                        "posterior scale of class " + std::to_string(k + 1) +
                            " is not positive definite");
        blocks.push_back(std::move(post));
    }
    return GmmPosterior(std::move(blocks), std::move(n), alpha);
}

} // namespace rbal
