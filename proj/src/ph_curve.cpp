#include "depotsim/ph_curve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "depotsim/errors.hpp"

namespace depotsim {

PhCurve::PhCurve(std::vector<Sample> samples, std::string label)
    : samples_(std::move(samples)), label_(std::move(label)) {
    if (samples_.size() < 2) {
        throw ConfigError("pH curve '" + label_ + "' needs at least 2 samples");
    }
    for (std::size_t k = 0; k < samples_.size(); ++k) {
        if (!std::isfinite(samples_[k].ph) || !std::isfinite(samples_[k].value)) {
            throw ConfigError("pH curve '" + label_ + "' has a non-finite sample");
        }
        if (k > 0 && !(samples_[k].ph > samples_[k - 1].ph)) {
            throw ConfigError("pH curve '" + label_ + "' must have strictly increasing pH");
        }
    }
}

PhCurve PhCurve::constant(double value, std::string label) {
    return PhCurve({{3.0, value}, {12.0, value}}, std::move(label));
}

PhCurve PhCurve::from_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open pH curve file " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<Sample> samples;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            std::string h = line;
            h.erase(std::remove_if(h.begin(), h.end(), ::isspace), h.end());
            if (h != "ph,value") {
                throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected header 'ph,value'");
            }
            header_seen = true;
            continue;
        }
        std::istringstream ss(line);
        Sample s{};
        char comma = 0;
        if (!(ss >> s.ph >> comma >> s.value) || comma != ',') {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": malformed row '" + line + "'");
        }
        samples.push_back(s);
    }
    if (!header_seen) {
        throw ConfigError(path.string() + ": empty curve file");
    }
    return PhCurve(std::move(samples), path.stem().string());
}

double PhCurve::operator()(double ph) const {
    if (ph <= samples_.front().ph) return samples_.front().value;
    if (ph >= samples_.back().ph) return samples_.back().value;
    auto hi = std::upper_bound(samples_.begin(), samples_.end(), ph,
                               [](double x, const Sample& s) { return x < s.ph; });
    auto lo = hi - 1;
    const double w = (ph - lo->ph) / (hi->ph - lo->ph);
    return lo->value + w * (hi->value - lo->value);
}

double PhCurve::isoelectric_point() const {
    for (std::size_t k = 0; k < samples_.size(); ++k) {
        if (samples_[k].value == 0.0) return samples_[k].ph;
        if (k + 1 < samples_.size()) {
            const Sample& a = samples_[k];
            const Sample& b = samples_[k + 1];
            if ((a.value > 0.0 && b.value < 0.0) || (a.value < 0.0 && b.value > 0.0)) {
                return a.ph + (b.ph - a.ph) * a.value / (a.value - b.value);
            }
        }
    }
    throw ConfigError("pH curve '" + label_ + "' has no sign change; pI undefined");
}

bool PhCurve::is_non_increasing() const {
    for (std::size_t k = 1; k < samples_.size(); ++k) {
        if (samples_[k].value > samples_[k - 1].value) return false;
    }
    return true;
}

double PhCurve::min_value() const {
    double m = samples_.front().value;
    for (const auto& s : samples_) m = std::min(m, s.value);
    return m;
}

bool operator==(const PhCurve& a, const PhCurve& b) {
    if (a.samples_.size() != b.samples_.size()) return false;
    for (std::size_t k = 0; k < a.samples_.size(); ++k) {
        if (a.samples_[k].ph != b.samples_[k].ph || a.samples_[k].value != b.samples_[k].value) {
            return false;
        }
    }
    return true;
}

}  // namespace depotsim
