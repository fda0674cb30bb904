#pragma once

#include "rbal/decision.hpp"
#include "rbal/error.hpp"
#include "rbal/gmm.hpp"
#include "rbal/preprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace rbal {

/// Regular grid over a 2-D (possibly projected) feature plane. Values are
/// taken at cell centers.
struct GridSpec {
    double x_min = -1.0, x_max = 1.0;
    double y_min = -1.0, y_max = 1.0;
    std::size_t nx = 100, ny = 100;

    double x_center(std::size_t ix) const {
        return x_min + (static_cast<double>(ix) + 0.5) * (x_max - x_min) / static_cast<double>(nx);
    }
    double y_center(std::size_t iy) const {
        return y_min + (static_cast<double>(iy) + 0.5) * (y_max - y_min) / static_cast<double>(ny);
    }

    void validate() const {
        if (!(std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(y_min) &&
              std::isfinite(y_max)) ||
            !(x_max > x_min) || !(y_max > y_min))
            throw Error(Errc::InvalidParameter, "grid ranges must be finite and increasing");
        if (nx == 0 || ny == 0)
            throw Error(Errc::InvalidParameter, "grid resolution must be positive");
    }
};

/// Bounding box of `points` (2-D) widened by `pad` of its extent on each side.
inline GridSpec grid_around(const std::vector<FeatureVector>& points, std::size_t nx,
                            std::size_t ny, double pad = 0.1) {
    if (points.empty())
        throw Error(Errc::EmptyInput, "no points to bound");
    GridSpec g;
    g.nx = nx;
    g.ny = ny;
    g.x_min = g.x_max = points.front()[0];
    g.y_min = g.y_max = points.front()[1];
    for (const auto& p : points) {
        g.x_min = std::min(g.x_min, p[0]);
        g.x_max = std::max(g.x_max, p[0]);
        g.y_min = std::min(g.y_min, p[1]);
        g.y_max = std::max(g.y_max, p[1]);
    }
    const double wx = std::max(g.x_max - g.x_min, 1e-6), wy = std::max(g.y_max - g.y_min, 1e-6);
    g.x_min -= pad * wx;
    g.x_max += pad * wx;
    g.y_min -= pad * wy;
    g.y_max += pad * wy;
    return g;
}

struct EvpiGrid {
    GridSpec spec;
    std::vector<double> values; // row-major, values[iy * nx + ix]

    double at(std::size_t ix, std::size_t iy) const { return values[iy * spec.nx + ix]; }
};

/// EVPI of every cell center. For D > 2 the center is lifted to the feature
/// space through `projection` (mean + loadings^T * coords).
inline EvpiGrid evpi_grid(const GmmPosterior& classifier, const DecisionProcess& dp,
                          const GridSpec& spec,
                          const std::optional<Projection>& projection = std::nullopt) {
    spec.validate();
    if (projection) {
        if (projection->mean.size() != classifier.dim())
            throw Error(Errc::DimensionMismatch, "projection and classifier disagree in dimension");
    } else if (classifier.dim() != 2) {
        throw Error(Errc::DimensionMismatch, "a projection is required when D != 2");
    }
    EvpiGrid g;
    g.spec = spec;
    g.values.resize(spec.nx * spec.ny);
    for (std::size_t iy = 0; iy < spec.ny; ++iy)
        for (std::size_t ix = 0; ix < spec.nx; ++ix) {
            const Eigen::Vector2d c(spec.x_center(ix), spec.y_center(iy));
            const FeatureVector x = projection ? projection->lift(c) : FeatureVector(c);
            g.values[iy * spec.nx + ix] = evpi(dp, classifier.predict(x));
        }
    return g;
}

} // namespace rbal
