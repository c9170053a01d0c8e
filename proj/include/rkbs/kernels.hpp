#pragma once

#include <Eigen/Core>

#include <limits>
#include <span>
#include <string>
#include <string_view>

namespace rkbs {

enum class KernelFamily {
    BrownianBridge,  // min{x,y} - xy, the t = 1 member of TFamily
    Exponential,     // exp(-|x-y|)
    TFamily,         // min{x,y} - t*x*y, t in [-1, 1]
    Wendland,        // max{1 - |x-y|, 0}
    Combination,     // C1*TFamily(t) + C2*Wendland
    Gaussian,        // exp(-((x-y)/sigma)^2); diagnostic only, not admissible
};

std::string_view family_name(KernelFamily family);
KernelFamily family_from_name(std::string_view name);

/// Open interval (lo, hi); either end may be infinite.
struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    bool contains(double x) const noexcept { return x > lo && x < hi; }
    bool bounded() const noexcept {
        return lo > -std::numeric_limits<double>::infinity() &&
               hi < std::numeric_limits<double>::infinity();
    }
    double width() const noexcept { return hi - lo; }

    static Interval unit() { return {0.0, 1.0}; }
    static Interval real_line() {
        return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    }
};

/// Parametric scalar kernel on an interval of the real line.
///
/// Immutable once built; use the named constructors, which validate the
/// parameters and the domain.
class ScalarKernelSpec {
public:
    static ScalarKernelSpec brownian_bridge(Interval domain = Interval::unit());
    static ScalarKernelSpec exponential(Interval domain = Interval::real_line());
    static ScalarKernelSpec t_family(double t, Interval domain = Interval::unit());
    static ScalarKernelSpec wendland(Interval domain = Interval::unit());
    static ScalarKernelSpec combination(double c1, double c2, double t = 1.0,
                                        Interval domain = Interval::unit());
    static ScalarKernelSpec gaussian(double sigma, Interval domain = Interval::unit());

    KernelFamily family() const noexcept { return family_; }
    double t() const noexcept { return t_; }
    double c1() const noexcept { return c1_; }
    double c2() const noexcept { return c2_; }
    double sigma() const noexcept { return sigma_; }
    const Interval& domain() const noexcept { return domain_; }

    /// G(x, y). Throws DomainError if either point is outside the open domain.
    double operator()(double x, double y) const;

    /// G(x, y) without the domain check, for inner loops whose inputs have
    /// already been validated.
    double eval_unchecked(double x, double y) const noexcept;

    /// Known a-priori bound on sup |G| over the domain, or +inf if none.
    double uniform_bound() const noexcept;

    /// True for the families shipped as admissible candidates (everything but
    /// Gaussian). Used to report A3 through the product-kernel implication.
    bool builtin_admissible_candidate() const noexcept;

    void check_in_domain(double x) const;

private:
    ScalarKernelSpec(KernelFamily family, Interval domain) : family_(family), domain_(domain) {}

    KernelFamily family_;
    Interval domain_;
    double t_ = 1.0;
    double c1_ = 1.0;
    double c2_ = 0.0;
    double sigma_ = 1.0;
};

double eval_scalar(const ScalarKernelSpec& spec, double x, double y);

/// Symmetric positive-definite task-coupling matrix with a cached inverse.
class TaskCoupling {
public:
    /// Throws ShapeError if `a` is not square/symmetric and SingularError if it
    /// is not positive definite or its inverse is not accurate to 1e-12.
    explicit TaskCoupling(Eigen::MatrixXd a);

    static TaskCoupling identity(Eigen::Index n);

    Eigen::Index n() const noexcept { return a_.rows(); }
    const Eigen::MatrixXd& matrix() const noexcept { return a_; }
    const Eigen::MatrixXd& inverse() const noexcept { return a_inv_; }

private:
    Eigen::MatrixXd a_;
    Eigen::MatrixXd a_inv_;
};

/// Group exponent of B_p. Any p in [1, inf] is accepted; solvers require
/// p in {1, 2}.
double validate_exponent(double p);

/// Conjugate exponent q with 1/p + 1/q = 1.
double conjugate_exponent(double p) noexcept;

/// Product kernel K(x, y) = G(x, y) * A acting on B_p.
struct OperatorKernel {
    ScalarKernelSpec scalar;
    TaskCoupling coupling;
    double p = 2.0;

    OperatorKernel(ScalarKernelSpec g, TaskCoupling a, double p_exponent)
        : scalar(std::move(g)), coupling(std::move(a)), p(validate_exponent(p_exponent)) {}

    Eigen::Index tasks() const noexcept { return coupling.n(); }
};

Eigen::MatrixXd eval_operator(const OperatorKernel& kernel, double x, double y);

/// Scalar vector (G(x, x_i))_i. The operator-valued K_x(x) is each entry
/// times the coupling matrix.
Eigen::VectorXd kernel_vector(const OperatorKernel& kernel, std::span<const double> centers, double x);

/// Throws DuplicateCenterError on exactly equal entries and DomainError on
/// points outside the domain.
void check_centers(const ScalarKernelSpec& spec, std::span<const double> centers);

}  // namespace rkbs
