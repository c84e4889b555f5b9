#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "twinmet/errors.hpp"

namespace twinmet {

/// Open interval used as a per-coordinate sampling hint.
struct Interval {
    double lo = -1.0;
    double hi = 1.0;
};

/// A named coordinate chart: dimension, coordinate names, sampling hints.
class ChartSpec {
public:
    ChartSpec() = default;

    static ChartSpec make(std::string name, std::vector<std::string> coords,
                          std::vector<Interval> domain_hints = {}) {
        if (coords.empty())
            throw Error("chart '" + name + "': dimension must be >= 1");
        std::set<std::string> seen;
        for (const auto& c : coords) {
            if (c.empty() || !seen.insert(c).second)
                throw Error("chart '" + name + "': coordinate names must be distinct and nonempty");
        }
        if (domain_hints.empty()) domain_hints.assign(coords.size(), Interval{});
        if (domain_hints.size() != coords.size())
            throw Error("chart '" + name + "': domain hints must match dimension");
        for (const auto& iv : domain_hints)
            if (!(iv.lo < iv.hi))
                throw Error("chart '" + name + "': empty sampling interval");
        ChartSpec c;
        c.name_ = std::move(name);
        c.coords_ = std::move(coords);
        c.domain_ = std::move(domain_hints);
        return c;
    }

    const std::string& name() const { return name_; }
    int dim() const { return static_cast<int>(coords_.size()); }
    const std::vector<std::string>& coords() const { return coords_; }
    const std::string& coord_name(int i) const { return coords_.at(static_cast<std::size_t>(i)); }
    const Interval& domain(int i) const { return domain_.at(static_cast<std::size_t>(i)); }

    std::optional<int> coord_index(const std::string& s) const {
        for (std::size_t i = 0; i < coords_.size(); ++i)
            if (coords_[i] == s) return static_cast<int>(i);
        return std::nullopt;
    }

    bool same_as(const ChartSpec& o) const {
        return name_ == o.name_ && coords_ == o.coords_;
    }

private:
    std::string name_;
    std::vector<std::string> coords_;
    std::vector<Interval> domain_;
};

namespace detail {

/// Van der Corput radical inverse in the given base.
inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

inline constexpr std::uint64_t kHaltonBases[8] = {2, 3, 5, 7, 11, 13, 17, 19};

} // namespace detail

/// A deterministic set of evaluation points interior to a chart's domain
/// hints. Low-discrepancy (Halton) by default; the seed offsets the sequence.
class SamplePlan {
public:
    static SamplePlan halton(const ChartSpec& chart, std::size_t count = 64,
                             std::uint64_t seed = 0) {
        if (chart.dim() > 8)
            throw Error("sample plans support charts of dimension <= 8");
        SamplePlan p;
        p.seed_ = seed;
        p.points_.reserve(count);
        for (std::size_t j = 0; j < count; ++j) {
            Eigen::VectorXd x(chart.dim());
            const std::uint64_t idx = 1 + seed + static_cast<std::uint64_t>(j);
            for (int d = 0; d < chart.dim(); ++d) {
                const double u = detail::radical_inverse(idx, detail::kHaltonBases[d]);
                const Interval& iv = chart.domain(d);
                // shrink slightly so points stay strictly interior
                const double t = 0.02 + 0.96 * u;
                x[d] = iv.lo + t * (iv.hi - iv.lo);
            }
            p.points_.push_back(std::move(x));
        }
        return p;
    }

    static SamplePlan explicit_points(const ChartSpec& chart,
                                      std::vector<Eigen::VectorXd> pts,
                                      std::uint64_t seed = 0) {
        for (const auto& x : pts) {
            if (x.size() != chart.dim())
                throw Error("explicit sample point has wrong dimension");
            for (int d = 0; d < chart.dim(); ++d)
                if (!(x[d] > chart.domain(d).lo && x[d] < chart.domain(d).hi))
                    throw Error("explicit sample point not interior to domain hints");
        }
        SamplePlan p;
        p.seed_ = seed;
        p.points_ = std::move(pts);
        return p;
    }

    const std::vector<Eigen::VectorXd>& points() const { return points_; }
    std::size_t count() const { return points_.size(); }
    std::uint64_t seed() const { return seed_; }

private:
    std::vector<Eigen::VectorXd> points_;
    std::uint64_t seed_ = 0;
};

} // namespace twinmet
