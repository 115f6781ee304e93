#pragma once

#include <array>

namespace hsc {

/// C^1 cubic blend: 0 above `upper`, 1 below `lower`, with zero slope at both
/// breaks.
class SwitchFunction {
public:
    SwitchFunction(double upper, double lower);

    double operator()(double chi) const;
    double derivative(double chi) const;

    double upper() const { return upper_; }
    double lower() const { return lower_; }
    /// (a0, a1, a2, a3) of a0 + a1 chi + a2 chi^2 + a3 chi^3 on [lower, upper].
    const std::array<double, 4>& coefficients() const { return coeffs_; }

private:
    double upper_;
    double lower_;
    std::array<double, 4> coeffs_;
};

SwitchFunction make_switch(double upper, double lower);
double eval_switch(const SwitchFunction& s, double chi);

}  // namespace hsc
