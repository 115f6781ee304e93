#include "hsc/constraint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hsc/errors.hpp"

namespace hsc {

const char* to_string(ConstraintClass c) { return c == ConstraintClass::hard ? "hard" : "soft"; }

MovingPoint static_point(const Eigen::VectorXd& p) {
    MovingPoint out;
    out.reserve(static_cast<std::size_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i) out.push_back(TimeSignal::constant(p[i]));
    return out;
}

namespace {

Eigen::VectorXd point_value(const MovingPoint& p, double t) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) v[static_cast<Eigen::Index>(i)] = p[i].value(t);
    return v;
}

Eigen::VectorXd point_rate(const MovingPoint& p, double t) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) v[static_cast<Eigen::Index>(i)] = p[i].derivative(t);
    return v;
}

void require_dim(const Eigen::VectorXd& x, int dim) {
    if (dim != 0 && x.size() != dim) {
        throw ConfigError("constraint expects x of dimension " + std::to_string(dim) + ", got " +
                          std::to_string(x.size()));
    }
}

PrimitiveEval eval_shape(const Halfspace& s, double t, const Eigen::VectorXd& x) {
    return {s.normal.dot(x) + s.offset.value(t), s.normal, s.offset.derivative(t)};
}

PrimitiveEval eval_shape(const DiskInterior& s, double t, const Eigen::VectorXd& x) {
    const Eigen::VectorXd d = x - point_value(s.center, t);
    const double r = s.radius.value(t);
    const double r_dot = s.radius.derivative(t);
    return {r * r - d.squaredNorm(), -2.0 * d, 2.0 * r * r_dot + 2.0 * d.dot(point_rate(s.center, t))};
}

PrimitiveEval eval_shape(const DiskExterior& s, double t, const Eigen::VectorXd& x) {
    PrimitiveEval e = eval_shape(DiskInterior{s.center, s.radius}, t, x);
    return {-e.value, -e.gradient, -e.time_derivative};
}

PrimitiveEval eval_shape(const EllipseExterior& s, double t, const Eigen::VectorXd& x) {
    const Eigen::Vector2d d = x - point_value(s.center, t);
    const Eigen::Vector2d c_dot = point_rate(s.center, t);
    const double th = s.angle.value(t);
    const double th_dot = s.angle.derivative(t);
    const double cs = std::cos(th);
    const double sn = std::sin(th);
    Eigen::Matrix2d rot;
    rot << cs, -sn, sn, cs;
    Eigen::Matrix2d rot_dot;
    rot_dot << -sn, -cs, cs, -sn;
    rot_dot *= th_dot;
    const Eigen::Matrix2d diag = Eigen::Vector2d(s.a, s.b).asDiagonal();
    const Eigen::Matrix2d a = rot * diag * rot.transpose();
    const Eigen::Matrix2d a_dot = rot_dot * diag * rot.transpose() + rot * diag * rot_dot.transpose();
    const Eigen::Vector2d ad = a * d;
    return {d.dot(ad) - 1.0, 2.0 * ad, d.dot(a_dot * d) - 2.0 * c_dot.dot(ad)};
}

PrimitiveEval eval_shape(const TanhWrapped& s, double t, const Eigen::VectorXd& x) {
    const PrimitiveEval q = std::visit([&](const auto& inner) { return eval_shape(inner, t, x); }, s.inner);
    const double th = std::tanh(s.gain * q.value);
    const double slope = s.gain * (1.0 - th * th);
    return {th, slope * q.gradient, slope * q.time_derivative};
}

PrimitiveEval eval_shape(const RadialPower& s, double t, const Eigen::VectorXd& x) {
    const Eigen::VectorXd d = x - point_value(s.center, t);
    const double dist = d.norm();
    const double g = s.radius.value(t) - dist;
    const int p = s.exponent;
    const double g_pm1 = std::pow(g, p - 1);
    PrimitiveEval out;
    out.value = g_pm1 * g;
    // |x - c| is not differentiable at the center; take the zero subgradient there.
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(x.size());
    if (dist > 0.0) unit = d / dist;
    out.gradient = -p * g_pm1 * unit;
    out.time_derivative = p * g_pm1 * (s.radius.derivative(t) + unit.dot(point_rate(s.center, t)));
    return out;
}

PrimitiveEval eval_shape(const AuxiliaryCoercive& s, double, const Eigen::VectorXd& x) {
    return {s.c_aux - x.squaredNorm(), -2.0 * x, 0.0};
}

PrimitiveEval eval_shape(const FiniteDifferenceShape& s, double t, const Eigen::VectorXd& x) {
    PrimitiveEval out;
    out.value = s.fn(t, x);
    out.gradient.resize(x.size());
    const double h = 1e-6 * std::max(1.0, x.norm());
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + h;
        const double fp = s.fn(t, xp);
        xp[i] = x[i] - h;
        const double fm = s.fn(t, xp);
        xp[i] = x[i];
        out.gradient[i] = (fp - fm) / (2.0 * h);
    }
    const double ht = 1e-6 * std::max(1.0, std::abs(t));
    out.time_derivative = (s.fn(t + ht, x) - s.fn(t - ht, x)) / (2.0 * ht);
    return out;
}

int point_dim(const MovingPoint& p) { return static_cast<int>(p.size()); }

int shape_dim(const Halfspace& s) { return static_cast<int>(s.normal.size()); }
int shape_dim(const DiskInterior& s) { return point_dim(s.center); }
int shape_dim(const DiskExterior& s) { return point_dim(s.center); }
int shape_dim(const EllipseExterior&) { return 2; }
int shape_dim(const TanhWrapped& s) {
    return std::visit([](const auto& inner) { return shape_dim(inner); }, s.inner);
}
int shape_dim(const RadialPower& s) { return point_dim(s.center); }
int shape_dim(const AuxiliaryCoercive&) { return 0; }
int shape_dim(const FiniteDifferenceShape&) { return 0; }

void validate_shape(const Halfspace& s) {
    if (s.normal.size() == 0) throw ConfigError("halfspace normal must be nonempty");
    if (!s.normal.allFinite()) throw ConfigError("halfspace normal must be finite");
}
void validate_shape(const DiskInterior& s) {
    if (s.center.empty()) throw ConfigError("disk center must be nonempty");
}
void validate_shape(const DiskExterior& s) {
    if (s.center.empty()) throw ConfigError("disk center must be nonempty");
}
void validate_shape(const EllipseExterior& s) {
    if (s.center.size() != 2) throw ConfigError("ellipse center must be planar");
    if (!(s.a > 0.0) || !(s.b > 0.0) || !std::isfinite(s.a) || !std::isfinite(s.b)) {
        throw ConfigError("ellipse coefficients must be positive");
    }
}
void validate_shape(const TanhWrapped& s) {
    if (!(s.gain > 0.0) || !std::isfinite(s.gain)) throw ConfigError("tanh gain must be positive");
    std::visit([](const auto& inner) { validate_shape(inner); }, s.inner);
}
void validate_shape(const RadialPower& s) {
    if (s.center.empty()) throw ConfigError("radial power center must be nonempty");
    if (s.exponent < 1 || s.exponent % 2 == 0) throw ConfigError("radial power exponent must be an odd positive integer");
}
void validate_shape(const AuxiliaryCoercive& s) {
    if (!(s.c_aux > 0.0) || !std::isfinite(s.c_aux)) throw ConfigError("auxiliary constant must be positive");
}
void validate_shape(const FiniteDifferenceShape& s) {
    if (!s.fn) throw ConfigError("finite-difference shape needs a function");
}

std::string describe_shape(const Halfspace&) { return "halfspace"; }
std::string describe_shape(const DiskInterior&) { return "disk_interior"; }
std::string describe_shape(const DiskExterior&) { return "disk_exterior"; }
std::string describe_shape(const EllipseExterior&) { return "ellipse_exterior"; }
std::string describe_shape(const TanhWrapped& s) {
    return "tanh(" + std::visit([](const auto& inner) { return describe_shape(inner); }, s.inner) + ")";
}
std::string describe_shape(const RadialPower& s) { return "radial_power^" + std::to_string(s.exponent); }
std::string describe_shape(const AuxiliaryCoercive&) { return "auxiliary"; }
std::string describe_shape(const FiniteDifferenceShape& s) { return s.label; }

void require_finite_input(double t, const Eigen::VectorXd& x) {
    if (!std::isfinite(t) || !x.allFinite()) throw NumericalError("non-finite constraint argument");
}

}  // namespace

// ---------------------------------------------------------------------------

ConstraintPrimitive::ConstraintPrimitive(Shape shape, ConstraintClass cls) : shape_(std::move(shape)), cls_(cls) {
    std::visit([](const auto& s) { validate_shape(s); }, shape_);
    dim_ = std::visit([](const auto& s) { return shape_dim(s); }, shape_);
}

PrimitiveEval ConstraintPrimitive::evaluate(double t, const Eigen::VectorXd& x) const {
    require_finite_input(t, x);
    require_dim(x, dim_);
    PrimitiveEval e = std::visit([&](const auto& s) { return eval_shape(s, t, x); }, shape_);
    if (!std::isfinite(e.value) || !e.gradient.allFinite() || !std::isfinite(e.time_derivative)) {
        throw NumericalError("non-finite value from " + describe() + " constraint");
    }
    return e;
}

double ConstraintPrimitive::value(double t, const Eigen::VectorXd& x) const { return evaluate(t, x).value; }

Eigen::VectorXd ConstraintPrimitive::gradient(double t, const Eigen::VectorXd& x) const {
    return evaluate(t, x).gradient;
}

double ConstraintPrimitive::time_derivative(double t, const Eigen::VectorXd& x) const {
    return evaluate(t, x).time_derivative;
}

std::string ConstraintPrimitive::describe() const {
    return std::string(to_string(cls_)) + " " + std::visit([](const auto& s) { return describe_shape(s); }, shape_);
}

// ---------------------------------------------------------------------------

ConsolidatedConstraint::ConsolidatedConstraint(std::vector<ConstraintPrimitive> primitives, double nu)
    : primitives_(std::move(primitives)), nu_(nu) {
    if (primitives_.empty()) throw ConfigError("a consolidated constraint needs at least one primitive");
    if (!(nu_ > 0.0) || !std::isfinite(nu_)) throw ConfigError("nu must be positive and finite");
    cls_ = primitives_.front().constraint_class();
    for (const auto& p : primitives_) {
        if (p.constraint_class() != cls_) throw ConfigError("cannot consolidate hard and soft primitives together");
        if (p.dimension() != 0) {
            if (dim_ != 0 && dim_ != p.dimension()) throw ConfigError("primitives disagree on the x dimension");
            dim_ = p.dimension();
        }
    }
}

AlphaEval ConsolidatedConstraint::evaluate(double t, const Eigen::VectorXd& x) const {
    require_finite_input(t, x);
    const std::size_t m = primitives_.size();
    std::vector<PrimitiveEval> evals;
    evals.reserve(m);
    double psi_min = std::numeric_limits<double>::infinity();
    for (const auto& p : primitives_) {
        evals.push_back(p.evaluate(t, x));
        psi_min = std::min(psi_min, evals.back().value);
    }
    // Shift by the smallest psi: every exponent is <= 0 and the minimizer contributes exactly 1.
    double total = 0.0;
    std::vector<double> weights(m);
    for (std::size_t j = 0; j < m; ++j) {
        weights[j] = std::exp(-nu_ * (evals[j].value - psi_min));
        total += weights[j];
    }
    AlphaEval out;
    out.value = psi_min - std::log(total) / nu_;
    out.gradient = Eigen::VectorXd::Zero(x.size());
    for (std::size_t j = 0; j < m; ++j) {
        const double w = weights[j] / total;
        out.gradient += w * evals[j].gradient;
        out.time_derivative += w * evals[j].time_derivative;
    }
    if (!std::isfinite(out.value)) throw NumericalError("non-finite consolidated constraint value");
    return out;
}

double ConsolidatedConstraint::alpha(double t, const Eigen::VectorXd& x) const { return evaluate(t, x).value; }

Eigen::VectorXd ConsolidatedConstraint::gradient(double t, const Eigen::VectorXd& x) const {
    return evaluate(t, x).gradient;
}

double ConsolidatedConstraint::time_derivative(double t, const Eigen::VectorXd& x) const {
    return evaluate(t, x).time_derivative;
}

double ConsolidatedConstraint::min_primitive(double t, const Eigen::VectorXd& x) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : primitives_) m = std::min(m, p.value(t, x));
    return m;
}

double eval_alpha(const ConsolidatedConstraint& c, double t, const Eigen::VectorXd& x) { return c.alpha(t, x); }

Eigen::VectorXd eval_alpha_gradient(const ConsolidatedConstraint& c, double t, const Eigen::VectorXd& x) {
    return c.gradient(t, x);
}

double eval_alpha_time_derivative(const ConsolidatedConstraint& c, double t, const Eigen::VectorXd& x) {
    return c.time_derivative(t, x);
}

// ---------------------------------------------------------------------------

namespace {

void validate_box(const Box& box, int grid_points_per_axis) {
    if (grid_points_per_axis < 2) throw ConfigError("grid_points_per_axis must be at least 2");
    if (box.lower.size() == 0 || box.lower.size() != box.upper.size()) throw ConfigError("malformed search box");
    if (!box.lower.allFinite() || !box.upper.allFinite()) throw ConfigError("search box must be finite");
    if ((box.upper.array() < box.lower.array()).any()) throw ConfigError("search box upper < lower");
}

// Visits every node of a regular grid; n-dimensional odometer.
template <class Fn>
void for_each_grid_point(const Box& box, int per_axis, Fn&& fn) {
    const Eigen::Index n = box.lower.size();
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    Eigen::VectorXd x(n);
    const Eigen::VectorXd step = (box.upper - box.lower) / static_cast<double>(per_axis - 1);
    while (true) {
        for (Eigen::Index k = 0; k < n; ++k) x[k] = box.lower[k] + step[k] * idx[static_cast<std::size_t>(k)];
        fn(x, idx);
        Eigen::Index k = 0;
        for (; k < n; ++k) {
            if (++idx[static_cast<std::size_t>(k)] < per_axis) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
        if (k == n) return;
    }
}

// Coordinate search maximizing f inside the box, starting from x with initial step h.
template <class Fn>
double coordinate_ascent(Fn&& f, const Box& box, Eigen::VectorXd& x, Eigen::VectorXd h, double best) {
    for (int iter = 0; iter < 2000 && h.maxCoeff() > 1e-10; ++iter) {
        bool improved = false;
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            for (double dir : {1.0, -1.0}) {
                Eigen::VectorXd cand = x;
                cand[k] = std::clamp(x[k] + dir * h[k], box.lower[k], box.upper[k]);
                const double v = f(cand);
                if (v > best) {
                    best = v;
                    x = cand;
                    improved = true;
                }
            }
        }
        if (!improved) h *= 0.5;
    }
    return best;
}

}  // namespace

AlphaStar estimate_alpha_star(const ConsolidatedConstraint& c, double t, const Box& search_box,
                              int grid_points_per_axis) {
    validate_box(search_box, grid_points_per_axis);
    AlphaStar best{-std::numeric_limits<double>::infinity(), search_box.lower};
    for_each_grid_point(search_box, grid_points_per_axis, [&](const Eigen::VectorXd& x, const std::vector<int>&) {
        const double v = c.alpha(t, x);
        if (v > best.value) best = {v, x};
    });
    const Eigen::VectorXd h = (search_box.upper - search_box.lower) / static_cast<double>(grid_points_per_axis - 1);
    best.value = coordinate_ascent([&](const Eigen::VectorXd& x) { return c.alpha(t, x); }, search_box, best.argmax, h,
                                   best.value);
    return best;
}

std::vector<Eigen::VectorXd> find_negative_critical_points(const ConsolidatedConstraint& c, double t,
                                                           const Box& search_box, int grid_points_per_axis,
                                                           double grad_tol) {
    validate_box(search_box, grid_points_per_axis);
    const Eigen::Index n = search_box.lower.size();
    std::vector<Eigen::VectorXd> points;
    std::vector<double> grad_norm;
    std::vector<double> value;
    for_each_grid_point(search_box, grid_points_per_axis, [&](const Eigen::VectorXd& x, const std::vector<int>&) {
        const AlphaEval e = c.evaluate(t, x);
        points.push_back(x);
        grad_norm.push_back(e.gradient.norm());
        value.push_back(e.value);
    });
    auto flat = [&](const std::vector<int>& idx) {
        std::size_t k = 0;
        for (Eigen::Index d = n - 1; d >= 0; --d) k = k * grid_points_per_axis + idx[static_cast<std::size_t>(d)];
        return k;
    };
    std::vector<Eigen::VectorXd> found;
    const Eigen::VectorXd h = (search_box.upper - search_box.lower) / static_cast<double>(grid_points_per_axis - 1);
    for_each_grid_point(search_box, grid_points_per_axis, [&](const Eigen::VectorXd&, const std::vector<int>& idx) {
        const std::size_t k = flat(idx);
        if (value[k] >= 0.0) return;
        for (Eigen::Index d = 0; d < n; ++d) {
            for (int dir : {-1, 1}) {
                std::vector<int> nb = idx;
                nb[static_cast<std::size_t>(d)] += dir;
                if (nb[static_cast<std::size_t>(d)] < 0 || nb[static_cast<std::size_t>(d)] >= grid_points_per_axis) {
                    continue;
                }
                if (grad_norm[flat(nb)] < grad_norm[k]) return;
            }
        }
        Eigen::VectorXd x = points[k];
        const double g = -coordinate_ascent([&](const Eigen::VectorXd& y) { return -c.gradient(t, y).norm(); },
                                            search_box, x, h, -grad_norm[k]);
        if (g < grad_tol && c.alpha(t, x) < 0.0) found.push_back(x);
    });
    return found;
}

bool coercivity_spot_check(const ConsolidatedConstraint& c, double t, const Eigen::VectorXd& interior, double radius,
                           int rays) {
    const double inside = c.alpha(t, interior);
    const Eigen::Index n = interior.size();
    for (int k = 0; k < rays; ++k) {
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
        if (n == 1) {
            dir[0] = (k % 2 == 0) ? 1.0 : -1.0;
        } else {
            const double ang = 2.0 * M_PI * k / rays;
            dir[0] = std::cos(ang);
            dir[1] = std::sin(ang);
        }
        if (!(c.alpha(t, radius * dir) < inside)) return false;
    }
    return true;
}

}  // namespace hsc
