#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "hsc/time_signal.hpp"

namespace hsc {

enum class ConstraintClass { hard, soft };

const char* to_string(ConstraintClass c);

/// Time-varying point in R^n, one signal per coordinate.
using MovingPoint = std::vector<TimeSignal>;

MovingPoint static_point(const Eigen::VectorXd& p);

// ---------------------------------------------------------------------------
// Primitive shapes. Each evaluates psi(t, x) with exact gradient and dpsi/dt.
// ---------------------------------------------------------------------------

/// normal . x + offset(t)
struct Halfspace {
    Eigen::VectorXd normal;
    TimeSignal offset;
};

/// radius(t)^2 - |x - center(t)|^2
struct DiskInterior {
    MovingPoint center;
    TimeSignal radius;
};

/// |x - center(t)|^2 - radius(t)^2
struct DiskExterior {
    MovingPoint center;
    TimeSignal radius;
};

/// (x - c(t))^T A(t) (x - c(t)) - 1 with A(t) = R(angle(t)) diag(a, b) R(angle(t))^T. Planar only.
struct EllipseExterior {
    MovingPoint center;
    double a = 1.0;
    double b = 1.0;
    TimeSignal angle;
};

using QuadraticForm = std::variant<DiskInterior, DiskExterior, EllipseExterior>;

/// tanh(gain * q(t, x)); same zero level set as q.
struct TanhWrapped {
    double gain = 1.0;
    QuadraticForm inner;
};

/// (radius(t) - |x - center(t)|)^exponent, exponent an odd positive integer.
/// The gradient vanishes on the whole zero level set when exponent > 1.
struct RadialPower {
    MovingPoint center;
    TimeSignal radius;
    int exponent = 1;
};

/// c_aux - |x|^2, used to make a family coercive.
struct AuxiliaryCoercive {
    double c_aux = 1.0;
};

/// Arbitrary expression differentiated by central differences.
/// Code-only extension point; carries none of the exactness guarantees.
struct FiniteDifferenceShape {
    std::function<double(double, const Eigen::VectorXd&)> fn;
    std::string label = "custom";
};

using Shape = std::variant<Halfspace, DiskInterior, DiskExterior, EllipseExterior, TanhWrapped, RadialPower,
                           AuxiliaryCoercive, FiniteDifferenceShape>;

struct PrimitiveEval {
    double value = 0.0;
    Eigen::VectorXd gradient;
    double time_derivative = 0.0;
};

class ConstraintPrimitive {
public:
    ConstraintPrimitive(Shape shape, ConstraintClass cls);

    double value(double t, const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(double t, const Eigen::VectorXd& x) const;
    double time_derivative(double t, const Eigen::VectorXd& x) const;
    PrimitiveEval evaluate(double t, const Eigen::VectorXd& x) const;

    ConstraintClass constraint_class() const { return cls_; }
    const Shape& shape() const { return shape_; }
    /// Required x dimension, or 0 when any dimension is accepted.
    int dimension() const { return dim_; }
    std::string describe() const;

private:
    Shape shape_;
    ConstraintClass cls_;
    int dim_ = 0;
};

struct AlphaEval {
    double value = 0.0;
    Eigen::VectorXd gradient;
    double time_derivative = 0.0;
};

/// Log-Sum-Exp consolidation
///   alpha(t, x) = -(1/nu) ln sum_j exp(-nu psi_j(t, x))
/// of a family of same-class primitives. alpha under-approximates min_j psi_j
/// by at most ln(m)/nu.
class ConsolidatedConstraint {
public:
    ConsolidatedConstraint(std::vector<ConstraintPrimitive> primitives, double nu);

    double alpha(double t, const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(double t, const Eigen::VectorXd& x) const;
    double time_derivative(double t, const Eigen::VectorXd& x) const;
    /// Value, gradient and time derivative from a single pass over the family.
    AlphaEval evaluate(double t, const Eigen::VectorXd& x) const;

    /// Pointwise minimum of the raw primitives.
    double min_primitive(double t, const Eigen::VectorXd& x) const;

    const std::vector<ConstraintPrimitive>& primitives() const { return primitives_; }
    std::size_t size() const { return primitives_.size(); }
    double nu() const { return nu_; }
    ConstraintClass constraint_class() const { return cls_; }
    int dimension() const { return dim_; }

private:
    std::vector<ConstraintPrimitive> primitives_;
    double nu_;
    ConstraintClass cls_;
    int dim_ = 0;
};

double eval_alpha(const ConsolidatedConstraint& c, double t, const Eigen::VectorXd& x);
Eigen::VectorXd eval_alpha_gradient(const ConsolidatedConstraint& c, double t, const Eigen::VectorXd& x);
double eval_alpha_time_derivative(const ConsolidatedConstraint& c, double t, const Eigen::VectorXd& x);

struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

struct AlphaStar {
    double value = 0.0;
    Eigen::VectorXd argmax;
};

/// Grid search plus coordinate-ascent refinement of max_x alpha(t, x) inside
/// the box. The result is a lower bound on the true maximum.
AlphaStar estimate_alpha_star(const ConsolidatedConstraint& c, double t, const Box& search_box,
                              int grid_points_per_axis);

/// Grid points where alpha < 0 and |grad alpha| is a discrete local minimum
/// below `grad_tol` after refinement: candidate critical points outside the
/// positive level set. Sampling only; an empty result proves nothing.
std::vector<Eigen::VectorXd> find_negative_critical_points(const ConsolidatedConstraint& c, double t,
                                                           const Box& search_box, int grid_points_per_axis,
                                                           double grad_tol = 1e-4);

/// alpha at distance `radius` from the origin along `rays` directions is
/// below alpha at `interior`.
bool coercivity_spot_check(const ConsolidatedConstraint& c, double t, const Eigen::VectorXd& interior,
                           double radius = 1e3, int rays = 16);

}  // namespace hsc
