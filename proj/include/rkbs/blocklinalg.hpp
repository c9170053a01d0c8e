#pragma once

#include "rkbs/kernels.hpp"

#include <Eigen/Core>
#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace rkbs {

/// Element of B_p^m: m coefficient blocks of dimension n stored as the rows of
/// an m x n matrix, together with the group exponent p.
class BlockVector {
public:
    BlockVector() = default;
    BlockVector(Eigen::Index m, Eigen::Index n, double p);
    BlockVector(Eigen::MatrixXd blocks, double p);

    static BlockVector zeros(Eigen::Index m, Eigen::Index n, double p) { return BlockVector(m, n, p); }

    Eigen::Index size() const noexcept { return blocks_.rows(); }
    Eigen::Index dim() const noexcept { return blocks_.cols(); }
    double p() const noexcept { return p_; }

    auto block(Eigen::Index i) { return blocks_.row(i); }
    auto block(Eigen::Index i) const { return blocks_.row(i); }

    const Eigen::MatrixXd& matrix() const noexcept { return blocks_; }
    Eigen::MatrixXd& matrix() noexcept { return blocks_; }

private:
    Eigen::MatrixXd blocks_;
    double p_ = 2.0;
};

/// l^p norm of a single block; p = inf is max-abs.
double block_norm(const Eigen::Ref<const Eigen::RowVectorXd>& block, double p);

/// sum_i ||c_i||_p.
double lp1_norm(const BlockVector& c);

/// Induced p->p operator norm for p in {1, 2, inf}.
double induced_norm(const Eigen::MatrixXd& a, double p);

/// Upper bound on the p->q operator norm of `a` (q conjugate to p). Exact for
/// p = 1 (max-abs entry) and p = 2 (spectral norm).
double coupling_operator_norm(const Eigen::MatrixXd& a, double p);

/// Sum_i |b_i|: the exact (p,1) norm of the operator column (b_i * I_p)_i,
/// which is what K[x]^{-1} K_x(q) reduces to for product kernels.
double operator_lp1_norm_product(std::span<const double> b);
double operator_lp1_norm_product(const Eigen::VectorXd& b);

/// Sampled lower bound on sup_{||c||_p = 1} sum_i ||B_i c||_p for a general
/// operator column. Probes the coordinate directions and `samples` random
/// directions drawn from `seed`.
double operator_lp1_norm_sampled(std::span<const Eigen::MatrixXd> column, double p, int samples,
                                 std::uint64_t seed);

/// Factorization of a square matrix: Cholesky when it succeeds, LU with
/// partial pivoting otherwise. Throws SingularError when a pivot falls below
/// 1e-12 * max|M|.
class Factorization {
public:
    explicit Factorization(const Eigen::MatrixXd& m);

    bool is_cholesky() const noexcept { return std::holds_alternative<Eigen::LLT<Eigen::MatrixXd>>(impl_); }
    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
    double determinant() const;
    Eigen::Index rows() const noexcept { return rows_; }

private:
    std::variant<Eigen::LLT<Eigen::MatrixXd>, Eigen::PartialPivLU<Eigen::MatrixXd>> impl_;
    Eigen::Index rows_ = 0;
};

/// K[x] = G[x] (x) A for a product kernel, never stored densely.
class GramSystem {
public:
    GramSystem(Eigen::MatrixXd scalar_gram, TaskCoupling coupling);

    const Eigen::MatrixXd& scalar_gram() const noexcept { return gram_; }
    const TaskCoupling& coupling() const noexcept { return coupling_; }
    const Factorization& factorization() const noexcept { return factor_; }
    Eigen::Index size() const noexcept { return gram_.rows(); }

    /// (G (x) A) C, i.e. G * C * A with blocks as rows.
    BlockVector apply(const BlockVector& c) const;

    /// Solves (G (x) A) C = Y as C = G^{-1} Y A^{-1}; the m x m scalar system
    /// is solved one task column at a time.
    BlockVector solve(const BlockVector& y) const;

    /// Solves G b = rhs for a scalar right-hand side.
    Eigen::VectorXd solve_scalar(const Eigen::VectorXd& rhs) const { return factor_.solve(rhs); }

private:
    Eigen::MatrixXd gram_;
    TaskCoupling coupling_;
    Factorization factor_;
};

/// Scalar Gram G[i][j] = G(x_i, x_j) with domain and duplicate checks.
Eigen::MatrixXd scalar_gram(const ScalarKernelSpec& spec, std::span<const double> centers);

GramSystem gram_assemble(const OperatorKernel& kernel, std::span<const double> centers);
BlockVector gram_solve(const GramSystem& system, const BlockVector& y);

struct BlockInverse {
    Eigen::MatrixXd top_left;
    Eigen::MatrixXd top_right;
    Eigen::MatrixXd bottom_left;
    Eigen::MatrixXd bottom_right;

    Eigen::MatrixXd assemble() const;
};

/// Inverse of [[A, B], [C, D]] through the Schur complement
/// M = (D - C A^{-1} B)^{-1}:
///   [[A^{-1} + A^{-1} B M C A^{-1}, -A^{-1} B M], [-M C A^{-1}, M]].
BlockInverse block_inverse_2x2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& c,
                               const Eigen::MatrixXd& d);

}  // namespace rkbs
