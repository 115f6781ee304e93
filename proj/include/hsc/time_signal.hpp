#pragma once

#include <memory>
#include <vector>

namespace hsc {

/// Scalar function of time with an analytic derivative.
///
/// Signals are small immutable expression trees (sum, product, scaling of
/// constant / linear / sinusoidal leaves) so that every constraint built from
/// them keeps an exact partial time derivative. Copies share the tree.
class TimeSignal {
public:
    enum class Kind { constant, linear, sine, cosine, sum, product, scaled };

    /// Zero signal.
    TimeSignal();

    static TimeSignal constant(double value);
    /// offset + slope * t
    static TimeSignal linear(double slope, double offset = 0.0);
    /// offset + amplitude * sin(frequency * t + phase), frequency in rad/s
    static TimeSignal sine(double amplitude, double frequency, double phase = 0.0, double offset = 0.0);
    /// offset + amplitude * cos(frequency * t + phase)
    static TimeSignal cosine(double amplitude, double frequency, double phase = 0.0, double offset = 0.0);
    static TimeSignal sum(std::vector<TimeSignal> terms);
    static TimeSignal product(std::vector<TimeSignal> factors);
    static TimeSignal scaled(double factor, TimeSignal signal);

    double value(double t) const;
    double derivative(double t) const;

    Kind kind() const;
    /// True when derivative(t) == 0 for every t.
    bool is_static() const;

private:
    struct Node;
    explicit TimeSignal(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
};

TimeSignal operator+(const TimeSignal& a, const TimeSignal& b);
TimeSignal operator*(const TimeSignal& a, const TimeSignal& b);
TimeSignal operator*(double k, const TimeSignal& s);

}  // namespace hsc
