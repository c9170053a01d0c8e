#include "rkbs/solvers.hpp"

#include "rkbs/admissibility.hpp"
#include "rkbs/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace rkbs {

std::string_view loss_name(Loss loss) {
    switch (loss) {
        case Loss::Squared: return "squared";
        case Loss::Absolute: return "absolute";
    }
    return "unknown";
}

Loss loss_from_name(std::string_view name) {
    if (name == "squared") return Loss::Squared;
    if (name == "absolute") return Loss::Absolute;
    throw UsageError("unknown loss '" + std::string(name) + "'");
}

void LearnConfig::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw UsageError("lambda must be positive");
    if (!(tol > 0.0)) throw UsageError("tol must be positive");
    if (max_iters == 0) throw UsageError("max_iters must be >= 1");
}

namespace {

void require_solver_exponent(double p) {
    if (p != 1.0 && p != 2.0) {
        throw UsageError("solvers support p in {1, 2}");
    }
}

void require_data_shape(const OperatorKernel& kernel, std::size_t sites, const BlockVector& y) {
    if (static_cast<std::size_t>(y.size()) != sites || y.dim() != kernel.tasks()) {
        throw ShapeError("data has " + std::to_string(y.size()) + " blocks of dim " + std::to_string(y.dim()) +
                         ", expected " + std::to_string(sites) + " of dim " + std::to_string(kernel.tasks()));
    }
}

FitModel make_model(const OperatorKernel& kernel, std::span<const double> centers, BlockVector coeffs) {
    const double norm = lp1_norm(coeffs);
    return FitModel{kernel, std::vector<double>(centers.begin(), centers.end()), std::move(coeffs), norm, {}};
}

}  // namespace

FitModel min_norm_interpolant(const OperatorKernel& kernel, std::span<const double> x, const BlockVector& y) {
    require_data_shape(kernel, x.size(), y);
    const GramSystem system = gram_assemble(kernel, x);
    BlockVector coeffs = system.solve(BlockVector(y.matrix(), kernel.p));
    FitModel model = make_model(kernel, x, std::move(coeffs));
    model.meta.solver = "exact";
    const BlockVector residual(system.apply(model.coeffs).matrix() - y.matrix(), kernel.p);
    model.meta.primal_residual = residual.size() > 0 ? residual.matrix().cwiseAbs().maxCoeff() : 0.0;
    return model;
}

Eigen::VectorXd predict(const FitModel& model, double query) {
    model.kernel.scalar.check_in_domain(query);
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(model.kernel.tasks());
    for (std::size_t j = 0; j < model.centers.size(); ++j) {
        acc += model.kernel.scalar.eval_unchecked(model.centers[j], query) *
               model.coeffs.block(static_cast<Eigen::Index>(j));
    }
    return model.kernel.coupling.matrix() * acc.transpose();
}

BlockVector block_soft_threshold(const BlockVector& z, double tau, double p) {
    if (!(tau >= 0.0)) throw UsageError("threshold must be nonnegative");
    require_solver_exponent(p);
    BlockVector out(z.matrix(), z.p());
    if (tau == 0.0) return out;
    if (p == 1.0) {
        out.matrix() = z.matrix().unaryExpr([tau](double v) {
            return std::copysign(std::max(std::abs(v) - tau, 0.0), v);
        });
        return out;
    }
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double norm = z.block(i).norm();
        if (norm <= tau) {
            out.block(i).setZero();
        } else {
            out.block(i) *= 1.0 - tau / norm;
        }
    }
    return out;
}

double regularized_objective(const GramSystem& system, const BlockVector& c, const BlockVector& y,
                             const LearnConfig& cfg) {
    const Eigen::MatrixXd residual = system.apply(c).matrix() - y.matrix();
    const double loss = cfg.loss == Loss::Squared ? 0.5 * residual.squaredNorm() : residual.cwiseAbs().sum();
    return loss + cfg.lambda * lp1_norm(c);
}

FitModel fit_regularized(const OperatorKernel& kernel, std::span<const double> x, const BlockVector& y,
                         const LearnConfig& cfg) {
    cfg.validate();
    if (cfg.loss == Loss::Absolute) {
        return fit_regularized_admm(kernel, x, y, cfg);
    }
    require_solver_exponent(kernel.p);
    require_data_shape(kernel, x.size(), y);
    const GramSystem system = gram_assemble(kernel, x);
    const double p = kernel.p;
    const BlockVector target(y.matrix(), p);

    // Lipschitz constant of the gradient: lambda_max((G (x) A)^2).
    const auto g_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(system.scalar_gram(), Eigen::EigenvaluesOnly)
                           .eigenvalues()
                           .cwiseAbs()
                           .maxCoeff();
    const auto a_eig =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(kernel.coupling.matrix(), Eigen::EigenvaluesOnly)
            .eigenvalues()
            .cwiseAbs()
            .maxCoeff();
    const double lipschitz = g_eig * g_eig * a_eig * a_eig;
    const double step = 1.0 / lipschitz;

    auto objective = [&](const BlockVector& c) { return regularized_objective(system, c, target, cfg); };
    auto prox_grad = [&](const BlockVector& from) {
        const Eigen::MatrixXd residual = system.apply(from).matrix() - target.matrix();
        const BlockVector grad = system.apply(BlockVector(residual, p));
        return block_soft_threshold(BlockVector(from.matrix() - step * grad.matrix(), p), cfg.lambda * step, p);
    };

    const Eigen::Index m = static_cast<Eigen::Index>(x.size());
    const Eigen::Index n = kernel.tasks();
    BlockVector current = BlockVector::zeros(m, n, p);
    BlockVector extrap = current;
    double t = 1.0;
    double f_current = objective(current);
    FitMeta meta;
    meta.solver = cfg.restart ? "fista-restart" : "fista";
    meta.objective_history.push_back(f_current);

    bool converged = false;
    double last_change = 0.0;
    std::size_t it = 0;
    for (; it < cfg.max_iters; ++it) {
        BlockVector next = prox_grad(extrap);
        double f_next = objective(next);
        if (cfg.restart && f_next > f_current) {
            // Momentum overshot: fall back to a plain proximal-gradient step,
            // which cannot increase the objective.
            t = 1.0;
            next = prox_grad(current);
            f_next = objective(next);
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        extrap = BlockVector(next.matrix() + ((t - 1.0) / t_next) * (next.matrix() - current.matrix()), p);
        last_change = std::abs(f_current - f_next);
        const double scale = std::max(std::abs(f_current), std::abs(f_next));
        current = std::move(next);
        f_current = f_next;
        t = t_next;
        meta.objective_history.push_back(f_current);
        if (last_change <= cfg.tol * scale) {
            converged = true;
            ++it;
            break;
        }
    }
    if (!converged) {
        throw NonconvergenceError("FISTA did not reach the objective tolerance", it, last_change,
                                  (current.matrix() - prox_grad(current).matrix()).norm());
    }
    FitModel model = make_model(kernel, x, std::move(current));
    meta.iterations = it;
    meta.primal_residual = last_change;
    meta.dual_residual = (model.coeffs.matrix() - prox_grad(model.coeffs).matrix()).norm();
    meta.objective = f_current;
    meta.lambda = cfg.lambda;
    meta.loss = std::string(loss_name(cfg.loss));
    model.meta = std::move(meta);
    return model;
}

namespace {

// Probe points for sup-norm evaluation: sorted grid plus the centers.
std::vector<double> sup_probes(const FitModel& model, int grid_size, Interval& span_out) {
    const Interval& domain = model.kernel.scalar.domain();
    Interval span = domain;
    if (!domain.bounded()) {
        const auto [lo_it, hi_it] = std::minmax_element(model.centers.begin(), model.centers.end());
        span.lo = std::max(domain.lo, *lo_it - 50.0);
        span.hi = std::min(domain.hi, *hi_it + 50.0);
    }
    span_out = span;
    std::vector<double> probes = query_grid(span, grid_size);
    probes.insert(probes.end(), model.centers.begin(), model.centers.end());
    std::sort(probes.begin(), probes.end());
    probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
    return probes;
}

}  // namespace

double expansion_sup_norm(const FitModel& model, int grid_size) {
    if (grid_size < 2) throw UsageError("grid_size must be >= 2");
    if (model.centers.empty() || model.coeffs.matrix().cwiseAbs().maxCoeff() == 0.0) return 0.0;
    const double q = conjugate_exponent(model.kernel.p);
    const auto& g = model.kernel.scalar;
    const Eigen::MatrixXd& a = model.kernel.coupling.matrix();
    auto value = [&](double y) {
        if (!g.domain().contains(y)) return 0.0;
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(a.rows());
        for (std::size_t j = 0; j < model.centers.size(); ++j) {
            acc += g.eval_unchecked(y, model.centers[j]) * model.coeffs.block(static_cast<Eigen::Index>(j));
        }
        return block_norm((acc * a).eval(), q);
    };

    Interval span;
    const std::vector<double> probes = sup_probes(model, grid_size, span);
    std::vector<double> values(probes.size());
    double best = 0.0;
    for (std::size_t k = 0; k < probes.size(); ++k) {
        values[k] = value(probes[k]);
        best = std::max(best, values[k]);
    }
    for (std::size_t k = 0; k < probes.size(); ++k) {
        const bool left_ok = k == 0 || values[k] >= values[k - 1];
        const bool right_ok = k + 1 == probes.size() || values[k] >= values[k + 1];
        if (!(left_ok && right_ok)) continue;
        const double lo = k > 0 ? probes[k - 1] : span.lo;
        const double hi = k + 1 < probes.size() ? probes[k + 1] : span.hi;
        best = std::max(best, golden_section_max(value, lo, hi).second);
    }
    return best;
}

double pairing(const FitModel& f, const FitModel& g) {
    if (f.kernel.tasks() != g.kernel.tasks()) {
        throw ShapeError("pairing needs expansions with the same number of tasks");
    }
    const Eigen::MatrixXd& a = g.kernel.coupling.matrix();
    double total = 0.0;
    for (std::size_t i = 0; i < f.centers.size(); ++i) {
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(a.rows());
        for (std::size_t j = 0; j < g.centers.size(); ++j) {
            acc += g.kernel.scalar(f.centers[i], g.centers[j]) * g.coeffs.block(static_cast<Eigen::Index>(j));
        }
        total += f.coeffs.block(static_cast<Eigen::Index>(i)).dot(acc * a);
    }
    return total;
}

}  // namespace rkbs
