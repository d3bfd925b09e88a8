#include "depotsim/binding.hpp"

#include <algorithm>
#include <cmath>

namespace depotsim {

double binding_sink(double c_mab, double c_b, double k_a, double k_d, double porosity, double b_max) {
    return k_d * c_b - k_a * porosity * c_mab * (b_max - c_b);
}

double advance_binding(double c_b, double c_mab, double k_a, double k_d, double k_e, double porosity,
                       double b_max, double dt) {
    const double on = k_a * porosity * c_mab;
    const double next = (c_b + dt * on * b_max) / (1.0 + dt * (on + k_d + k_e));
    return std::clamp(next, 0.0, b_max);
}

Exchange exchange_binding(double c_mab, double c_b, double k_a, double k_d, double k_e, double porosity,
                          double b_max, double dt) {
    // Free amount f = n c. Eliminating f' = M - s b' from the bound equation
    // gives A b'^2 - Bq b' + C = 0; the smaller root is the physical one and
    // is evaluated in the cancellation-free form 2C / (Bq + sqrt(disc)).
    const double f = porosity * c_mab;
    const double total = f + c_b;
    const double s = 1.0 + dt * k_e;
    const double a = dt * k_a * s;
    const double bq = 1.0 + dt * (k_d + k_e) + dt * k_a * (total + s * b_max);
    const double c = c_b + dt * k_a * total * b_max;
    const double disc = std::max(0.0, bq * bq - 4.0 * a * c);
    double b_new = c > 0.0 ? 2.0 * c / (bq + std::sqrt(disc)) : 0.0;
    b_new = std::clamp(b_new, 0.0, std::min(b_max, total / s));
    const double f_new = std::max(0.0, total - s * b_new);
    return {porosity > 0.0 ? f_new / porosity : 0.0, b_new};
}

NodalField advance_binding_field(std::span<const double> c_b, std::span<const double> c_mab,
                                 std::span<const double> ph, const BindingParams& params, double porosity,
                                 double dt) {
    NodalField out(c_b.size());
    for (std::size_t k = 0; k < c_b.size(); ++k) {
        const RatePair r = rates_at_ph(params, ph[k]);
        out[k] = advance_binding(c_b[k], c_mab[k], r.k_a, r.k_d, params.k_e, porosity, params.b_max, dt);
    }
    return out;
}

NodalField binding_sink_field(std::span<const double> c_mab, std::span<const double> c_b,
                              std::span<const double> ph, const BindingParams& params, double porosity) {
    NodalField out(c_b.size());
    for (std::size_t k = 0; k < c_b.size(); ++k) {
        const RatePair r = rates_at_ph(params, ph[k]);
        out[k] = binding_sink(c_mab[k], c_b[k], r.k_a, r.k_d, porosity, params.b_max);
    }
    return out;
}

}  // namespace depotsim
