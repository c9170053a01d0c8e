#pragma once

#include "rkbs/blocklinalg.hpp"
#include "rkbs/kernels.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rkbs {

struct FitMeta {
    std::string solver;
    std::size_t iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double objective = 0.0;
    double lambda = 0.0;
    std::string loss;
    std::uint64_t seed = 0;
    std::vector<double> objective_history;  // not persisted
};

/// Finite expansion f(x) = sum_j G(x_j, x) A c_j.
struct FitModel {
    OperatorKernel kernel;
    std::vector<double> centers;
    BlockVector coeffs;
    double norm_lp1 = 0.0;
    FitMeta meta;
};

enum class Loss { Squared, Absolute };

std::string_view loss_name(Loss loss);
Loss loss_from_name(std::string_view name);

struct LearnConfig {
    double lambda = 1.0;
    Loss loss = Loss::Squared;
    std::size_t max_iters = 200000;
    double tol = 1e-12;
    bool restart = true;

    void validate() const;
};

struct AdmmOptions {
    double rho = 1.0;
    double tol = 1e-9;
    std::size_t max_iters = 20000000;  // near-degenerate instances need millions
};

FitModel min_norm_interpolant(const OperatorKernel& kernel, std::span<const double> x, const BlockVector& y);

/// sum_j G(x_j, query) A c_j.
Eigen::VectorXd predict(const FitModel& model, double query);

/// Proximal operator of tau * ||.||_{p,1}: block shrinkage for p = 2,
/// elementwise soft thresholding for p = 1.
BlockVector block_soft_threshold(const BlockVector& z, double tau, double p);

/// Minimizes ||C||_{p,1} over coefficients on `centers` subject to the
/// expansion matching Y at `constraints_x` (a subset of `centers`). Solved by
/// ADMM; the returned coefficients are the projection of the final iterate
/// onto the constraint set, so they interpolate exactly up to rounding.
/// Stops when the scaled residuals ||x - z|| / max(1, ||x||, ||z||) and
/// rho ||z - z_prev|| / max(1, ||rho u||) are both <= options.tol; these are
/// the values recorded in meta.
FitModel group_basis_pursuit(const OperatorKernel& kernel, std::span<const double> centers,
                             std::span<const double> constraints_x, const BlockVector& y, double p,
                             const AdmmOptions& options = {});

/// loss(K C - Y) + lambda ||C||_{p,1} with squared loss 0.5 ||.||_F^2 or
/// absolute loss ||.||_1 (entrywise).
double regularized_objective(const GramSystem& system, const BlockVector& c, const BlockVector& y,
                             const LearnConfig& cfg);

/// Regularized learning over the expansion coefficients at the training
/// sites. Squared loss runs FISTA (optionally with monotone adaptive
/// restart); absolute loss runs ADMM.
FitModel fit_regularized(const OperatorKernel& kernel, std::span<const double> x, const BlockVector& y,
                         const LearnConfig& cfg);

/// ADMM for either loss; used for absolute loss and as the cross-check for
/// the FISTA path. Stops when the primal and dual residuals, scaled as in
/// group_basis_pursuit, fall below cfg.tol.
FitModel fit_regularized_admm(const OperatorKernel& kernel, std::span<const double> x, const BlockVector& y,
                              const LearnConfig& cfg, double rho = 1.0);

/// sup_y ||sum_j G(y, x_j) A c_j||_q over a uniform grid, the model centers and
/// golden-section refinement around every local grid maximum. Unbounded
/// domains are probed on [min center - 50, max center + 50].
double expansion_sup_norm(const FitModel& model, int grid_size);

/// Bilinear pairing (f, g) = sum_ij <a_i, G(z_i, w_j) A b_j> between the
/// expansion f (coefficients a at sites z) and g (coefficients b at sites w).
double pairing(const FitModel& f, const FitModel& g);

}  // namespace rkbs
