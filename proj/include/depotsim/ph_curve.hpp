#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace depotsim {

/// Tabulated pH -> value map with piecewise-linear interpolation and
/// clamp-to-endpoint extrapolation. Used for the antibody charge z(pH) and the
/// binding rates k_a(pH), k_d(pH).
class PhCurve {
public:
    struct Sample {
        double ph;
        double value;
    };

    PhCurve() = default;
    /// Throws ConfigError unless there are at least two samples with strictly
    /// increasing pH.
    explicit PhCurve(std::vector<Sample> samples, std::string label = {});

    /// Constant curve over [3, 12]; handy for tests and fixed-rate runs.
    static PhCurve constant(double value, std::string label = {});

    /// Reads a CSV with header `ph,value`.
    static PhCurve from_csv(const std::filesystem::path& path);

    double operator()(double ph) const;

    /// pH at which the curve first crosses zero (linear interpolation within
    /// the crossing segment). Throws ConfigError if the curve has no sign change.
    double isoelectric_point() const;

    bool is_non_increasing() const;
    bool empty() const { return samples_.empty(); }
    const std::vector<Sample>& samples() const { return samples_; }
    const std::string& label() const { return label_; }

    double min_value() const;

    friend bool operator==(const PhCurve& a, const PhCurve& b);

private:
    std::vector<Sample> samples_;
    std::string label_;
};

}  // namespace depotsim
