#include "hsc/time_signal.hpp"

#include <cmath>
#include <utility>

#include "hsc/errors.hpp"

namespace hsc {

struct TimeSignal::Node {
    Kind kind = Kind::constant;
    // leaf parameters
    double amplitude = 0.0;  // slope for linear
    double frequency = 0.0;
    double phase = 0.0;
    double offset = 0.0;  // value for constant
    // composite parameters
    double factor = 1.0;
    std::vector<TimeSignal> children;
};

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw ConfigError(std::string("time signal parameter '") + what + "' must be finite");
    }
}

}  // namespace

TimeSignal::TimeSignal() : TimeSignal(constant(0.0)) {}

TimeSignal::TimeSignal(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

TimeSignal TimeSignal::constant(double value) {
    require_finite(value, "value");
    auto n = std::make_shared<Node>();
    n->kind = Kind::constant;
    n->offset = value;
    return TimeSignal(std::move(n));
}

TimeSignal TimeSignal::linear(double slope, double offset) {
    require_finite(slope, "slope");
    require_finite(offset, "offset");
    auto n = std::make_shared<Node>();
    n->kind = Kind::linear;
    n->amplitude = slope;
    n->offset = offset;
    return TimeSignal(std::move(n));
}

namespace {

template <class NodeT>
std::shared_ptr<NodeT> make_wave(double amplitude, double frequency, double phase, double offset) {
    require_finite(amplitude, "amplitude");
    require_finite(frequency, "frequency");
    require_finite(phase, "phase");
    require_finite(offset, "offset");
    auto n = std::make_shared<NodeT>();
    n->amplitude = amplitude;
    n->frequency = frequency;
    n->phase = phase;
    n->offset = offset;
    return n;
}

}  // namespace

TimeSignal TimeSignal::sine(double amplitude, double frequency, double phase, double offset) {
    auto n = make_wave<Node>(amplitude, frequency, phase, offset);
    n->kind = Kind::sine;
    return TimeSignal(std::move(n));
}

TimeSignal TimeSignal::cosine(double amplitude, double frequency, double phase, double offset) {
    auto n = make_wave<Node>(amplitude, frequency, phase, offset);
    n->kind = Kind::cosine;
    return TimeSignal(std::move(n));
}

TimeSignal TimeSignal::sum(std::vector<TimeSignal> terms) {
    if (terms.empty()) return constant(0.0);
    auto n = std::make_shared<Node>();
    n->kind = Kind::sum;
    n->children = std::move(terms);
    return TimeSignal(std::move(n));
}

TimeSignal TimeSignal::product(std::vector<TimeSignal> factors) {
    if (factors.empty()) return constant(1.0);
    auto n = std::make_shared<Node>();
    n->kind = Kind::product;
    n->children = std::move(factors);
    return TimeSignal(std::move(n));
}

TimeSignal TimeSignal::scaled(double factor, TimeSignal signal) {
    require_finite(factor, "factor");
    auto n = std::make_shared<Node>();
    n->kind = Kind::scaled;
    n->factor = factor;
    n->children.push_back(std::move(signal));
    return TimeSignal(std::move(n));
}

TimeSignal::Kind TimeSignal::kind() const { return node_->kind; }

double TimeSignal::value(double t) const {
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::constant:
            return n.offset;
        case Kind::linear:
            return n.offset + n.amplitude * t;
        case Kind::sine:
            return n.offset + n.amplitude * std::sin(n.frequency * t + n.phase);
        case Kind::cosine:
            return n.offset + n.amplitude * std::cos(n.frequency * t + n.phase);
        case Kind::sum: {
            double acc = 0.0;
            for (const auto& c : n.children) acc += c.value(t);
            return acc;
        }
        case Kind::product: {
            double acc = 1.0;
            for (const auto& c : n.children) acc *= c.value(t);
            return acc;
        }
        case Kind::scaled:
            return n.factor * n.children.front().value(t);
    }
    return 0.0;
}

double TimeSignal::derivative(double t) const {
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::constant:
            return 0.0;
        case Kind::linear:
            return n.amplitude;
        case Kind::sine:
            return n.amplitude * n.frequency * std::cos(n.frequency * t + n.phase);
        case Kind::cosine:
            return -n.amplitude * n.frequency * std::sin(n.frequency * t + n.phase);
        case Kind::sum: {
            double acc = 0.0;
            for (const auto& c : n.children) acc += c.derivative(t);
            return acc;
        }
        case Kind::product: {
            // product rule over k factors
            double acc = 0.0;
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                double term = n.children[i].derivative(t);
                for (std::size_t j = 0; j < n.children.size() && term != 0.0; ++j) {
                    if (j != i) term *= n.children[j].value(t);
                }
                acc += term;
            }
            return acc;
        }
        case Kind::scaled:
            return n.factor * n.children.front().derivative(t);
    }
    return 0.0;
}

bool TimeSignal::is_static() const {
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::constant:
            return true;
        case Kind::linear:
            return n.amplitude == 0.0;
        case Kind::sine:
        case Kind::cosine:
            return n.amplitude == 0.0 || n.frequency == 0.0;
        case Kind::sum:
        case Kind::product:
            for (const auto& c : n.children) {
                if (!c.is_static()) return false;
            }
            return true;
        case Kind::scaled:
            return n.factor == 0.0 || n.children.front().is_static();
    }
    return false;
}

TimeSignal operator+(const TimeSignal& a, const TimeSignal& b) { return TimeSignal::sum({a, b}); }

TimeSignal operator*(const TimeSignal& a, const TimeSignal& b) { return TimeSignal::product({a, b}); }

TimeSignal operator*(double k, const TimeSignal& s) { return TimeSignal::scaled(k, s); }

}  // namespace hsc
