#include "rkbs/kernels.hpp"

#include "rkbs/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace rkbs {

namespace {

std::string format_point(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

void require_sub_unit(const Interval& domain, std::string_view family) {
    if (!(domain.lo < domain.hi)) {
        throw UsageError("kernel domain must satisfy lo < hi");
    }
    if (domain.lo < 0.0 || domain.hi > 1.0) {
        throw UsageError(std::string(family) + " kernel is defined on (0,1); domain must be a subinterval");
    }
}

void require_interval(const Interval& domain) {
    if (!(domain.lo < domain.hi)) {
        throw UsageError("kernel domain must satisfy lo < hi");
    }
}

inline double t_kernel(double t, double x, double y) noexcept {
    return std::min(x, y) - t * (x * y);
}

inline double wendland_kernel(double x, double y) noexcept {
    return std::max(1.0 - std::abs(x - y), 0.0);
}

}  // namespace

std::string_view family_name(KernelFamily family) {
    switch (family) {
        case KernelFamily::BrownianBridge: return "brownian";
        case KernelFamily::Exponential: return "exponential";
        case KernelFamily::TFamily: return "tfamily";
        case KernelFamily::Wendland: return "wendland";
        case KernelFamily::Combination: return "combination";
        case KernelFamily::Gaussian: return "gaussian";
    }
    return "unknown";
}

KernelFamily family_from_name(std::string_view name) {
    if (name == "brownian" || name == "brownian_bridge" || name == "kmin") return KernelFamily::BrownianBridge;
    if (name == "exponential" || name == "exp") return KernelFamily::Exponential;
    if (name == "tfamily") return KernelFamily::TFamily;
    if (name == "wendland") return KernelFamily::Wendland;
    if (name == "combination") return KernelFamily::Combination;
    if (name == "gaussian") return KernelFamily::Gaussian;
    throw UsageError("unknown kernel family '" + std::string(name) + "'");
}

ScalarKernelSpec ScalarKernelSpec::brownian_bridge(Interval domain) {
    require_sub_unit(domain, "brownian");
    ScalarKernelSpec spec(KernelFamily::BrownianBridge, domain);
    spec.t_ = 1.0;
    return spec;
}

ScalarKernelSpec ScalarKernelSpec::exponential(Interval domain) {
    require_interval(domain);
    return ScalarKernelSpec(KernelFamily::Exponential, domain);
}

ScalarKernelSpec ScalarKernelSpec::t_family(double t, Interval domain) {
    if (!(t >= -1.0 && t <= 1.0)) {
        throw UsageError("tfamily parameter t must lie in [-1, 1]");
    }
    require_sub_unit(domain, "tfamily");
    ScalarKernelSpec spec(KernelFamily::TFamily, domain);
    spec.t_ = t;
    return spec;
}

ScalarKernelSpec ScalarKernelSpec::wendland(Interval domain) {
    require_sub_unit(domain, "wendland");
    return ScalarKernelSpec(KernelFamily::Wendland, domain);
}

ScalarKernelSpec ScalarKernelSpec::combination(double c1, double c2, double t, Interval domain) {
    if (!(c1 >= 0.0 && c2 >= 0.0 && c1 + c2 > 0.0) || !std::isfinite(c1 + c2)) {
        throw UsageError("combination weights need C1 >= 0, C2 >= 0, C1 + C2 > 0");
    }
    if (!(t >= -1.0 && t <= 1.0)) {
        throw UsageError("tfamily parameter t must lie in [-1, 1]");
    }
    require_sub_unit(domain, "combination");
    ScalarKernelSpec spec(KernelFamily::Combination, domain);
    spec.c1_ = c1;
    spec.c2_ = c2;
    spec.t_ = t;
    return spec;
}

ScalarKernelSpec ScalarKernelSpec::gaussian(double sigma, Interval domain) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw UsageError("gaussian width must be positive");
    }
    require_interval(domain);
    ScalarKernelSpec spec(KernelFamily::Gaussian, domain);
    spec.sigma_ = sigma;
    return spec;
}

void ScalarKernelSpec::check_in_domain(double x) const {
    if (!domain_.contains(x)) {
        throw DomainError("point " + format_point(x) + " outside kernel domain (" + format_point(domain_.lo) +
                          ", " + format_point(domain_.hi) + ")");
    }
}

double ScalarKernelSpec::operator()(double x, double y) const {
    check_in_domain(x);
    check_in_domain(y);
    return eval_unchecked(x, y);
}

double ScalarKernelSpec::eval_unchecked(double x, double y) const noexcept {
    switch (family_) {
        case KernelFamily::BrownianBridge:
        case KernelFamily::TFamily:
            return t_kernel(t_, x, y);
        case KernelFamily::Exponential:
            return std::exp(-std::abs(x - y));
        case KernelFamily::Wendland:
            return wendland_kernel(x, y);
        case KernelFamily::Combination:
            return c1_ * t_kernel(t_, x, y) + c2_ * wendland_kernel(x, y);
        case KernelFamily::Gaussian: {
            const double r = (x - y) / sigma_;
            return std::exp(-r * r);
        }
    }
    return 0.0;
}

double ScalarKernelSpec::uniform_bound() const noexcept {
    switch (family_) {
        case KernelFamily::BrownianBridge:
        case KernelFamily::TFamily:
            return 2.0;
        case KernelFamily::Combination:
            return 2.0 * (c1_ + c2_);
        case KernelFamily::Exponential:
        case KernelFamily::Wendland:
        case KernelFamily::Gaussian:
            return 1.0;
    }
    return std::numeric_limits<double>::infinity();
}

bool ScalarKernelSpec::builtin_admissible_candidate() const noexcept {
    return family_ != KernelFamily::Gaussian;
}

double eval_scalar(const ScalarKernelSpec& spec, double x, double y) {
    return spec(x, y);
}

TaskCoupling::TaskCoupling(Eigen::MatrixXd a) : a_(std::move(a)) {
    if (a_.rows() == 0 || a_.rows() != a_.cols()) {
        throw ShapeError("coupling matrix must be square and non-empty");
    }
    const double scale = std::max(1.0, a_.cwiseAbs().maxCoeff());
    if ((a_ - a_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ShapeError("coupling matrix must be symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(a_);
    if (llt.info() != Eigen::Success) {
        throw SingularError("coupling matrix is not positive definite");
    }
    a_inv_ = llt.solve(Eigen::MatrixXd::Identity(a_.rows(), a_.cols()));
    a_inv_ = 0.5 * (a_inv_ + a_inv_.transpose()).eval();
    const double err = (a_ * a_inv_ - Eigen::MatrixXd::Identity(a_.rows(), a_.cols())).cwiseAbs().maxCoeff();
    if (!(err <= 1e-12)) {
        throw SingularError("coupling matrix too ill-conditioned: |A*inv(A) - I| = " + format_point(err));
    }
}

TaskCoupling TaskCoupling::identity(Eigen::Index n) {
    if (n <= 0) {
        throw ShapeError("identity coupling needs n >= 1");
    }
    return TaskCoupling(Eigen::MatrixXd::Identity(n, n));
}

double validate_exponent(double p) {
    if (!(p >= 1.0)) {
        throw UsageError("group exponent p must be >= 1");
    }
    return p;
}

double conjugate_exponent(double p) noexcept {
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

Eigen::MatrixXd eval_operator(const OperatorKernel& kernel, double x, double y) {
    return kernel.scalar(x, y) * kernel.coupling.matrix();
}

void check_centers(const ScalarKernelSpec& spec, std::span<const double> centers) {
    for (double c : centers) {
        spec.check_in_domain(c);
    }
    std::vector<double> sorted(centers.begin(), centers.end());
    std::sort(sorted.begin(), sorted.end());
    const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end()) {
        throw DuplicateCenterError("duplicate center " + format_point(*dup));
    }
}

Eigen::VectorXd kernel_vector(const OperatorKernel& kernel, std::span<const double> centers, double x) {
    check_centers(kernel.scalar, centers);
    kernel.scalar.check_in_domain(x);
    Eigen::VectorXd out(static_cast<Eigen::Index>(centers.size()));
    for (std::size_t i = 0; i < centers.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = kernel.scalar.eval_unchecked(x, centers[i]);
    }
    return out;
}

}  // namespace rkbs
