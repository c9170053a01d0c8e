#include "rkbs/errors.hpp"
#include "rkbs/solvers.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <string>

namespace rkbs {

namespace {

// Residual balancing: keep primal and dual residuals within a factor 10.
// Rho is only revisited every few iterations and is frozen after a while;
// ADMM with a rho that keeps changing need not converge.
constexpr double kBalanceRatio = 10.0;
constexpr double kBalanceScale = 2.0;
constexpr std::size_t kBalanceEvery = 10;
constexpr std::size_t kBalanceUntil = 5000;

bool balance_now(std::size_t it) { return it < kBalanceUntil && it % kBalanceEvery == kBalanceEvery - 1; }

// Affine set {X : H X = B} for a full-row-rank H (m x M), with X in R^{M x n}.
class AffineProjector {
public:
    AffineProjector(const Eigen::MatrixXd& h, const Eigen::MatrixXd& b) {
        const Eigen::Index m = h.rows();
        const Eigen::Index big_m = h.cols();
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(h.transpose());
        qr.setThreshold(1e-12);
        if (qr.rank() < m) {
            throw RankError("constraint system has rank " + std::to_string(qr.rank()) + " < " + std::to_string(m));
        }
        q_ = qr.householderQ() * Eigen::MatrixXd::Identity(big_m, m);
        const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(m, m).triangularView<Eigen::Upper>();
        const Eigen::MatrixXd permuted_b = qr.colsPermutation().transpose() * b;
        // H = P R^T Q^T, so H X = B  <=>  Q^T X = R^{-T} P^T B.
        const Eigen::MatrixXd coords = r.transpose().triangularView<Eigen::Lower>().solve(permuted_b);
        particular_ = q_ * coords;
    }

    Eigen::MatrixXd operator()(const Eigen::MatrixXd& v) const {
        return v - q_ * (q_.transpose() * v) + particular_;
    }

private:
    Eigen::MatrixXd q_;
    Eigen::MatrixXd particular_;
};

}  // namespace

FitModel group_basis_pursuit(const OperatorKernel& kernel, std::span<const double> centers,
                             std::span<const double> constraints_x, const BlockVector& y, double p,
                             const AdmmOptions& options) {
    if (p != 1.0 && p != 2.0) throw UsageError("group basis pursuit supports p in {1, 2}");
    if (!(options.rho > 0.0) || !(options.tol > 0.0) || options.max_iters == 0) {
        throw UsageError("invalid ADMM options");
    }
    check_centers(kernel.scalar, centers);
    check_centers(kernel.scalar, constraints_x);
    if (constraints_x.size() > centers.size()) {
        throw ShapeError("need at least as many centers as constraint points");
    }
    for (double xc : constraints_x) {
        if (std::find(centers.begin(), centers.end(), xc) == centers.end()) {
            throw ShapeError("constraint points must be a subset of the centers");
        }
    }
    if (static_cast<std::size_t>(y.size()) != constraints_x.size() || y.dim() != kernel.tasks()) {
        throw ShapeError("data must have one block of dim n per constraint point");
    }

    const OperatorKernel model_kernel(kernel.scalar, kernel.coupling, p);
    const auto m = static_cast<Eigen::Index>(constraints_x.size());
    const auto big_m = static_cast<Eigen::Index>(centers.size());
    const Eigen::Index n = kernel.tasks();

    // Row i: expansion over `centers` evaluated at constraint point i. The
    // coupling cancels: G_sub C A = Y  <=>  G_sub C = Y A^{-1}.
    Eigen::MatrixXd h(m, big_m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < big_m; ++j) {
            h(i, j) = kernel.scalar.eval_unchecked(constraints_x[static_cast<std::size_t>(i)],
                                                    centers[static_cast<std::size_t>(j)]);
        }
    }
    const Eigen::MatrixXd target = y.matrix() * kernel.coupling.inverse();
    const AffineProjector project(h, target);

    double rho = options.rho;
    Eigen::MatrixXd xv = Eigen::MatrixXd::Zero(big_m, n);
    Eigen::MatrixXd z = project(xv);
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(big_m, n);
    double primal = 0.0;
    double dual = 0.0;
    std::size_t it = 0;
    bool converged = false;
    for (; it < options.max_iters; ++it) {
        xv = project(z - u);
        const Eigen::MatrixXd z_old = z;
        z = block_soft_threshold(BlockVector(xv + u, p), 1.0 / rho, p).matrix();
        u += xv - z;
        const double primal_raw = (xv - z).norm();
        const double dual_raw = rho * (z - z_old).norm();
        // Scaled residuals, so the tolerance does not depend on the size of Y.
        primal = primal_raw / std::max({1.0, xv.norm(), z.norm()});
        dual = dual_raw / std::max(1.0, rho * u.norm());
        if (primal <= options.tol && dual <= options.tol) {
            converged = true;
            ++it;
            break;
        }
        if (!balance_now(it)) continue;
        if (primal_raw > kBalanceRatio * dual_raw) {
            rho *= kBalanceScale;
            u /= kBalanceScale;
        } else if (dual_raw > kBalanceRatio * primal_raw) {
            rho /= kBalanceScale;
            u *= kBalanceScale;
        }
    }
    if (!converged) {
        throw NonconvergenceError("group basis pursuit ADMM did not converge", it, primal, dual);
    }

    BlockVector coeffs(project(z), p);
    const double norm = lp1_norm(coeffs);
    FitModel model{model_kernel, std::vector<double>(centers.begin(), centers.end()), std::move(coeffs), norm, {}};
    model.meta.solver = "admm-pursuit";
    model.meta.iterations = it;
    model.meta.primal_residual = primal;
    model.meta.dual_residual = dual;
    model.meta.objective = norm;
    return model;
}

FitModel fit_regularized_admm(const OperatorKernel& kernel, std::span<const double> x, const BlockVector& y,
                              const LearnConfig& cfg, double rho) {
    cfg.validate();
    const double p = kernel.p;
    if (p != 1.0 && p != 2.0) throw UsageError("solvers support p in {1, 2}");
    if (!(rho > 0.0)) throw UsageError("rho must be positive");
    if (static_cast<std::size_t>(y.size()) != x.size() || y.dim() != kernel.tasks()) {
        throw ShapeError("data must have one block of dim n per site");
    }
    const GramSystem system = gram_assemble(kernel, x);
    const Eigen::Index m = system.size();
    const Eigen::Index n = kernel.tasks();

    // Variables: C, residual r = K C - Y, split copy z = C.
    //   min loss(r) + lambda ||z||_{p,1}  s.t.  K C - r = Y,  C - z = 0.
    // The C-update solves (K^T K + I) C = rhs in the joint eigenbasis of G and A.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> g_eig(system.scalar_gram());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> a_eig(kernel.coupling.matrix());
    const Eigen::MatrixXd& ug = g_eig.eigenvectors();
    const Eigen::MatrixXd& va = a_eig.eigenvectors();
    Eigen::MatrixXd denom(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const double s = g_eig.eigenvalues()(i) * a_eig.eigenvalues()(k);
            denom(i, k) = s * s + 1.0;
        }
    }
    const auto apply_k = [&](const Eigen::MatrixXd& c) -> Eigen::MatrixXd {
        return system.scalar_gram() * c * kernel.coupling.matrix();
    };
    const auto solve_normal = [&](const Eigen::MatrixXd& rhs) -> Eigen::MatrixXd {
        const Eigen::MatrixXd rotated = ug.transpose() * rhs * va;
        return ug * rotated.cwiseQuotient(denom) * va.transpose();
    };
    const auto loss_prox = [&](const Eigen::MatrixXd& v, double r) -> Eigen::MatrixXd {
        if (cfg.loss == Loss::Squared) return (r / (1.0 + r)) * v;
        const double tau = 1.0 / r;
        return v.unaryExpr([tau](double e) { return std::copysign(std::max(std::abs(e) - tau, 0.0), e); });
    };

    const Eigen::MatrixXd& target = y.matrix();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m, n);
    Eigen::MatrixXd r = -target;
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(m, n);
    Eigen::MatrixXd u1 = Eigen::MatrixXd::Zero(m, n);
    Eigen::MatrixXd u2 = Eigen::MatrixXd::Zero(m, n);

    FitMeta meta;
    meta.solver = "admm";
    double primal = 0.0;
    double dual = 0.0;
    std::size_t it = 0;
    bool converged = false;
    for (; it < cfg.max_iters; ++it) {
        c = solve_normal(apply_k(target + r - u1) + (z - u2));
        const Eigen::MatrixXd kc = apply_k(c);
        const Eigen::MatrixXd r_old = r;
        const Eigen::MatrixXd z_old = z;
        r = loss_prox(kc - target + u1, rho);
        z = block_soft_threshold(BlockVector(c + u2, p), cfg.lambda / rho, p).matrix();
        const Eigen::MatrixXd res1 = kc - r - target;
        const Eigen::MatrixXd res2 = c - z;
        u1 += res1;
        u2 += res2;
        const double primal_raw = std::sqrt(res1.squaredNorm() + res2.squaredNorm());
        const double dual_raw = rho * (apply_k(r - r_old) + (z - z_old)).norm();
        primal = primal_raw / std::max({1.0, kc.norm(), target.norm(), c.norm()});
        dual = dual_raw / std::max(1.0, rho * std::sqrt(u1.squaredNorm() + u2.squaredNorm()));
        if (primal <= cfg.tol && dual <= cfg.tol) {
            converged = true;
            ++it;
            break;
        }
        if (!balance_now(it)) continue;
        if (primal_raw > kBalanceRatio * dual_raw) {
            rho *= kBalanceScale;
            u1 /= kBalanceScale;
            u2 /= kBalanceScale;
        } else if (dual_raw > kBalanceRatio * primal_raw) {
            rho /= kBalanceScale;
            u1 *= kBalanceScale;
            u2 *= kBalanceScale;
        }
    }
    if (!converged) {
        throw NonconvergenceError("regularized ADMM did not converge", it, primal, dual);
    }
    BlockVector coeffs(z, p);
    meta.objective = regularized_objective(system, coeffs, BlockVector(target, p), cfg);
    meta.iterations = it;
    meta.primal_residual = primal;
    meta.dual_residual = dual;
    meta.lambda = cfg.lambda;
    meta.loss = std::string(loss_name(cfg.loss));
    const double norm = lp1_norm(coeffs);
    FitModel model{kernel, std::vector<double>(x.begin(), x.end()), std::move(coeffs), norm, std::move(meta)};
    return model;
}

}  // namespace rkbs
