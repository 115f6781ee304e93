#include "hsc/smooth_switch.hpp"

#include <algorithm>
#include <cmath>

#include "hsc/errors.hpp"

namespace hsc {

SwitchFunction::SwitchFunction(double upper, double lower) : upper_(upper), lower_(lower) {
    if (!std::isfinite(upper) || !std::isfinite(lower)) throw ConfigError("switch breaks must be finite");
    if (!(upper > lower)) throw ConfigError("switch requires upper break > lower break");
    // Extended precision: the monomial coefficients cancel heavily for narrow or offset breaks.
    const long double u = upper, l = lower;
    const long double den = (l - u) * (l - u) * (l - u);
    coeffs_[0] = static_cast<double>(u * u * (3.0L * l - u) / den);
    coeffs_[1] = static_cast<double>(-6.0L * l * u / den);
    coeffs_[2] = static_cast<double>(3.0L * (l + u) / den);
    coeffs_[3] = static_cast<double>(-2.0L / den);
}

double SwitchFunction::operator()(double chi) const {
    // Breaks map to their exact limits so the interior branch is bitwise 0.
    if (chi >= upper_) return 0.0;
    if (chi <= lower_) return 1.0;
    // Same cubic in the normalized variable; avoids cancellation between large monomial coefficients.
    const double tau = (chi - lower_) / (upper_ - lower_);
    return std::clamp(1.0 - tau * tau * (3.0 - 2.0 * tau), 0.0, 1.0);
}

double SwitchFunction::derivative(double chi) const {
    if (chi >= upper_ || chi <= lower_) return 0.0;
    const double w = upper_ - lower_;
    const double tau = (chi - lower_) / w;
    return -6.0 * tau * (1.0 - tau) / w;
}

SwitchFunction make_switch(double upper, double lower) { return SwitchFunction(upper, lower); }

double eval_switch(const SwitchFunction& s, double chi) { return s(chi); }

}  // namespace hsc
