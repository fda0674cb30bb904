#pragma once

// Delimited-text and JSON input/output. Every file is written to a temporary
// sibling and renamed into place, so readers never see a partial file.
// Numbers are printed with 17 significant digits, which round-trips doubles.

#include "rbal/active_learning.hpp"
#include "rbal/error.hpp"
#include "rbal/evpi_grid.hpp"
#include "rbal/gmm.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace rbal {

inline std::string format_double(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec)
            throw Error(Errc::IoError, "cannot create directory " +
                                           path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(Errc::IoError, "cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out)
            throw Error(Errc::IoError, "write to " + tmp.string() + " failed");
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(Errc::IoError, "cannot move file into " + path.string());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s == "inf" || s == "+inf") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    if (s == "-inf") {
        out = -std::numeric_limits<double>::infinity();
        return true;
    }
    if (s == "nan") {
        out = std::numeric_limits<double>::quiet_NaN();
        return true;
    }
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

} // namespace detail

// ---------------------------------------------------------------------------
// datasets

/// Reads `f1,...,fD,label` rows. Row order is preserved.
inline LabeledSet load_dataset(const std::filesystem::path& path, std::size_t dim,
                               std::size_t num_classes) {
    const auto lines = detail::lines_of(read_file(path));
    if (lines.empty() || detail::trim(lines.front()).empty())
        throw Error(Errc::ParseError, path.string() + ": empty file, expected a header row");
    const auto header = detail::split_commas(lines.front());
    if (header.size() != dim + 1)
        throw Error(Errc::ParseError, path.string() + ": header has " +
                                          std::to_string(header.size()) + " columns, expected " +
                                          std::to_string(dim + 1));
    LabeledSet out;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        if (detail::trim(lines[r]).empty())
            continue;
        const auto cells = detail::split_commas(lines[r]);
        const std::string where = path.string() + ": row " + std::to_string(r);
        if (cells.size() != dim + 1)
            throw Error(Errc::ParseError, where + " has " + std::to_string(cells.size()) +
                                              " columns, expected " + std::to_string(dim + 1));
        FeatureVector x(static_cast<Eigen::Index>(dim));
        for (std::size_t c = 0; c < dim; ++c) {
            double v = 0.0;
            if (!detail::parse_double(cells[c], v))
                throw Error(Errc::ParseError,
                            where + ", column " + std::to_string(c + 1) + ": not a number");
            if (!std::isfinite(v))
                throw Error(Errc::NonFiniteFeature,
                            where + ", column " + std::to_string(c + 1) + " is not finite");
            x[static_cast<Eigen::Index>(c)] = v;
        }
        long label = 0;
        const auto cell = detail::trim(cells[dim]);
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
        if (ec != std::errc() || ptr != cell.data() + cell.size())
            throw Error(Errc::ParseError, where + ": label is not an integer");
        if (label < 1 || static_cast<std::size_t>(label) > num_classes)
            throw Error(Errc::LabelOutOfRange, where + ": label " + std::to_string(label) +
                                                   " outside 1.." + std::to_string(num_classes));
        out.push_back(std::move(x), ClassLabel(static_cast<int>(label)));
    }
    if (out.empty())
        throw Error(Errc::ParseError, path.string() + ": no data rows");
    return out;
}

inline std::string dataset_csv(const LabeledSet& data) {
    std::string s;
    const auto d = data.dim();
    for (Eigen::Index j = 0; j < d; ++j)
        s += "f" + std::to_string(j + 1) + ",";
    s += "label\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < d; ++j)
            s += format_double(data.features[i][j]) + ",";
        s += std::to_string(data.labels[i].index()) + "\n";
    }
    return s;
}

inline void write_dataset(const std::filesystem::path& path, const LabeledSet& data) {
    write_file_atomic(path, dataset_csv(data));
}

// ---------------------------------------------------------------------------
// learning curves

inline constexpr std::string_view curve_header =
    "q,mean_active,sd_active,mean_random,sd_random,n_reps_at_q";

/// One table row per query count. An arm that has no value at q leaves its
/// cells empty.
struct CurveTable {
    struct Row {
        std::size_t q = 0;
        std::optional<double> mean_active, sd_active, mean_random, sd_random;
        std::size_t n_reps = 0;
    };
    std::vector<Row> rows;
};

inline CurveTable curve_table(const std::optional<LearningCurve>& active,
                              const std::optional<LearningCurve>& random) {
    CurveTable t;
    const std::size_t len = std::max(active ? active->size() : 0, random ? random->size() : 0);
    for (std::size_t q = 0; q < len; ++q) {
        CurveTable::Row r;
        r.q = q;
        if (active && q < active->size()) {
            r.mean_active = active->mean[q];
            r.sd_active = active->sd[q];
            r.n_reps = active->reps_at_q[q];
        }
        if (random && q < random->size()) {
            r.mean_random = random->mean[q];
            r.sd_random = random->sd[q];
            r.n_reps = std::max(r.n_reps, random->reps_at_q[q]);
        }
        t.rows.push_back(r);
    }
    return t;
}

inline std::string curves_csv(const CurveTable& t) {
    auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    std::string s(curve_header);
    s += "\n";
    for (const auto& r : t.rows)
        s += std::to_string(r.q) + "," + cell(r.mean_active) + "," + cell(r.sd_active) + "," +
             cell(r.mean_random) + "," + cell(r.sd_random) + "," + std::to_string(r.n_reps) + "\n";
    return s;
}

inline CurveTable parse_curves(const std::string& text) {
    const auto lines = detail::lines_of(text);
    if (lines.empty() || lines.front() != curve_header)
        throw Error(Errc::ParseError, "curve file header mismatch");
    CurveTable t;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty())
            continue;
        const auto cells = detail::split_commas(lines[i]);
        if (cells.size() != 6)
            throw Error(Errc::ParseError, "curve row " + std::to_string(i) + " has " +
                                              std::to_string(cells.size()) + " cells");
        auto opt = [&](std::size_t c) -> std::optional<double> {
            if (detail::trim(cells[c]).empty())
                return std::nullopt;
            double v = 0.0;
            if (!detail::parse_double(cells[c], v))
                throw Error(Errc::ParseError, "curve row " + std::to_string(i) + ": bad number");
            return v;
        };
        auto integer = [&](std::size_t c) {
            std::size_t v = 0;
            const auto s = detail::trim(cells[c]);
            const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size())
                throw Error(Errc::ParseError, "curve row " + std::to_string(i) + ": bad integer");
            return v;
        };
        t.rows.push_back({integer(0), opt(1), opt(2), opt(3), opt(4), integer(5)});
    }
    return t;
}

// ---------------------------------------------------------------------------
// query logs

inline std::string query_log_csv(const MonteCarloResult& mc) {
    std::string s = "rep,seed,arm,step,observation,evpi,queried,label\n";
    for (std::size_t r = 0; r < mc.runs.size(); ++r) {
        const auto& o = mc.runs[r];
        auto emit = [&](const char* arm, const RunResult& run) {
            for (const auto& e : run.log)
                s += std::to_string(r) + "," + std::to_string(o.seed) + "," + arm + "," +
                     std::to_string(e.step) + "," + std::to_string(e.observation) + "," +
                     format_double(e.evpi) + "," + (e.queried ? "1" : "0") + "," +
                     std::to_string(e.label) + "\n";
        };
        if (o.active)
            emit("active", *o.active);
        if (o.random)
            emit("random", *o.random);
    }
    return s;
}

// ---------------------------------------------------------------------------
// EVPI grids

inline std::string grid_csv(const EvpiGrid& g) {
    const auto& sp = g.spec;
    std::string s = "# evpi_grid nx=" + std::to_string(sp.nx) + " ny=" + std::to_string(sp.ny) +
                    " x_min=" + format_double(sp.x_min) + " x_max=" + format_double(sp.x_max) +
                    " y_min=" + format_double(sp.y_min) + " y_max=" + format_double(sp.y_max) +
                    "\nix,iy,x,y,evpi\n";
    for (std::size_t iy = 0; iy < sp.ny; ++iy)
        for (std::size_t ix = 0; ix < sp.nx; ++ix)
            s += std::to_string(ix) + "," + std::to_string(iy) + "," +
                 format_double(sp.x_center(ix)) + "," + format_double(sp.y_center(iy)) + "," +
                 format_double(g.at(ix, iy)) + "\n";
    return s;
}

inline EvpiGrid parse_grid(const std::string& text) {
    const auto lines = detail::lines_of(text);
    if (lines.size() < 2 || lines[0].rfind("# evpi_grid ", 0) != 0 ||
        lines[1] != "ix,iy,x,y,evpi")
        throw Error(Errc::ParseError, "grid file header mismatch");
    EvpiGrid g;
    std::istringstream meta(lines[0].substr(12));
    for (std::string kv; meta >> kv;) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw Error(Errc::ParseError, "grid metadata entry '" + kv + "'");
        const auto key = kv.substr(0, eq);
        double v = 0.0;
        if (!detail::parse_double(std::string_view(kv).substr(eq + 1), v))
            throw Error(Errc::ParseError, "grid metadata value for " + key);
        if (key == "nx") g.spec.nx = static_cast<std::size_t>(v);
        else if (key == "ny") g.spec.ny = static_cast<std::size_t>(v);
        else if (key == "x_min") g.spec.x_min = v;
        else if (key == "x_max") g.spec.x_max = v;
        else if (key == "y_min") g.spec.y_min = v;
        else if (key == "y_max") g.spec.y_max = v;
    }
    g.values.assign(g.spec.nx * g.spec.ny, 0.0);
    std::size_t cells = 0;
    for (std::size_t i = 2; i < lines.size(); ++i) {
        if (lines[i].empty())
            continue;
        const auto c = detail::split_commas(lines[i]);
        double ix = 0, iy = 0, v = 0;
        if (c.size() != 5 || !detail::parse_double(c[0], ix) || !detail::parse_double(c[1], iy) ||
            !detail::parse_double(c[4], v) || ix >= static_cast<double>(g.spec.nx) ||
            iy >= static_cast<double>(g.spec.ny))
            throw Error(Errc::ParseError, "grid row " + std::to_string(i));
        g.values[static_cast<std::size_t>(iy) * g.spec.nx + static_cast<std::size_t>(ix)] = v;
        ++cells;
    }
    if (cells != g.spec.nx * g.spec.ny)
        throw Error(Errc::ParseError, "grid has " + std::to_string(cells) + " cells, expected " +
                                          std::to_string(g.spec.nx * g.spec.ny));
    return g;
}

// ---------------------------------------------------------------------------
// classifier summaries

inline nlohmann::json to_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline nlohmann::json to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(std::isfinite(m(r, c)) ? nlohmann::json(m(r, c)) : nlohmann::json());
        rows.push_back(row);
    }
    return rows;
}

/// Posterior mean and expected covariance of every class, for plotting
/// component ellipses. `projection`, when given, maps both into the plane.
inline nlohmann::json map_summary(const GmmPosterior& post,
                                  const std::optional<Projection>& projection = std::nullopt) {
    nlohmann::json classes = nlohmann::json::array();
    for (std::size_t k = 0; k < post.num_classes(); ++k) {
        const ClassLabel label(static_cast<int>(k + 1));
        const auto& niw = post.niw(label);
        Eigen::VectorXd mean = niw.m;
        Eigen::MatrixXd cov = post.expected_covariance(label);
        if (projection) {
            mean = projection->project(mean);
            cov = projection->loadings * cov * projection->loadings.transpose();
        }
        classes.push_back({{"label", label.index()},
                           {"count", post.count(label)},
                           {"kappa", niw.kappa},
                           {"v", niw.v},
                           {"mean", to_json(mean)},
                           {"covariance", to_json(cov)},
                           {"label_probability", post.class_prior_predictive(label)}});
    }
    return {{"dim", projection ? 2 : post.dim()},
            {"projected", projection.has_value()},
            {"classes", classes}};
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

} // namespace rbal
