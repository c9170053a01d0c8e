#include "rkbs/blocklinalg.hpp"

#include "rkbs/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace rkbs {

BlockVector::BlockVector(Eigen::Index m, Eigen::Index n, double p)
    : blocks_(Eigen::MatrixXd::Zero(m, n)), p_(validate_exponent(p)) {}

BlockVector::BlockVector(Eigen::MatrixXd blocks, double p) : blocks_(std::move(blocks)), p_(validate_exponent(p)) {}

double block_norm(const Eigen::Ref<const Eigen::RowVectorXd>& block, double p) {
    if (block.size() == 0) return 0.0;
    if (p == 1.0) return block.cwiseAbs().sum();
    if (p == 2.0) return block.stableNorm();
    if (std::isinf(p)) return block.cwiseAbs().maxCoeff();
    // Scale by the max entry so large p does not overflow.
    const double scale = block.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    double acc = 0.0;
    for (Eigen::Index k = 0; k < block.size(); ++k) {
        acc += std::pow(std::abs(block(k)) / scale, p);
    }
    return scale * std::pow(acc, 1.0 / p);
}

double lp1_norm(const BlockVector& c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        total += block_norm(c.block(i), c.p());
    }
    return total;
}

double induced_norm(const Eigen::MatrixXd& a, double p) {
    if (a.size() == 0) return 0.0;
    if (p == 1.0) return a.cwiseAbs().colwise().sum().maxCoeff();
    if (std::isinf(p)) return a.cwiseAbs().rowwise().sum().maxCoeff();
    if (p == 2.0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
        return svd.singularValues()(0);
    }
    throw UsageError("induced_norm supports p in {1, 2, inf}");
}

double coupling_operator_norm(const Eigen::MatrixXd& a, double p) {
    if (a.size() == 0) return 0.0;
    if (p == 1.0) return a.cwiseAbs().maxCoeff();
    if (p == 2.0) return induced_norm(a, 2.0);
    // Hoelder on the column expansion: ||A c||_q <= ||c||_p * ||(||a_j||_q)_j||_q.
    const double q = conjugate_exponent(p);
    Eigen::RowVectorXd col_norms(a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        col_norms(j) = block_norm(a.col(j).transpose(), q);
    }
    return block_norm(col_norms, q);
}

double operator_lp1_norm_product(std::span<const double> b) {
    double total = 0.0;
    for (double v : b) total += std::abs(v);
    return total;
}

double operator_lp1_norm_product(const Eigen::VectorXd& b) {
    return operator_lp1_norm_product(std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

double operator_lp1_norm_sampled(std::span<const Eigen::MatrixXd> column, double p, int samples,
                                 std::uint64_t seed) {
    if (column.empty()) return 0.0;
    const Eigen::Index n = column.front().cols();
    for (const auto& op : column) {
        if (op.rows() != n || op.cols() != n) {
            throw ShapeError("operator column entries must all be n x n");
        }
    }
    auto value_at = [&](const Eigen::VectorXd& c) {
        const double denom = block_norm(c.transpose(), p);
        if (denom == 0.0) return 0.0;
        double total = 0.0;
        for (const auto& op : column) {
            total += block_norm((op * c).transpose(), p);
        }
        return total / denom;
    };
    double best = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        best = std::max(best, value_at(Eigen::VectorXd::Unit(n, k)));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd c(n);
    for (int s = 0; s < samples; ++s) {
        for (Eigen::Index k = 0; k < n; ++k) c(k) = normal(rng);
        best = std::max(best, value_at(c));
    }
    return best;
}

namespace {

bool exactly_symmetric(const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            if (m(i, j) != m(j, i)) return false;
        }
    }
    return true;
}

}  // namespace

Factorization::Factorization(const Eigen::MatrixXd& m) : rows_(m.rows()) {
    if (m.rows() != m.cols()) {
        throw ShapeError("factorization needs a square matrix");
    }
    if (m.size() == 0) {
        impl_ = Eigen::LLT<Eigen::MatrixXd>(m);
        return;
    }
    const double threshold = 1e-12 * m.cwiseAbs().maxCoeff();
    if (!(threshold > 0.0) || !std::isfinite(threshold)) {
        throw SingularError("matrix is zero or non-finite");
    }
    if (exactly_symmetric(m)) {
        Eigen::LLT<Eigen::MatrixXd> llt(m);
        if (llt.info() == Eigen::Success) {
            const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
            if ((diag.array() * diag.array()).minCoeff() >= threshold) {
                impl_ = std::move(llt);
                return;
            }
        }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot >= threshold)) {
        throw SingularError("pivot " + std::to_string(min_pivot) + " below 1e-12 * max|M|");
    }
    impl_ = std::move(lu);
}

Eigen::MatrixXd Factorization::solve(const Eigen::MatrixXd& rhs) const {
    return std::visit([&](const auto& f) -> Eigen::MatrixXd { return f.solve(rhs); }, impl_);
}

Eigen::VectorXd Factorization::solve(const Eigen::VectorXd& rhs) const {
    return std::visit([&](const auto& f) -> Eigen::VectorXd { return f.solve(rhs); }, impl_);
}

double Factorization::determinant() const {
    if (rows_ == 0) return 1.0;
    if (const auto* llt = std::get_if<Eigen::LLT<Eigen::MatrixXd>>(&impl_)) {
        const double d = llt->matrixLLT().diagonal().prod();
        return d * d;
    }
    return std::get<Eigen::PartialPivLU<Eigen::MatrixXd>>(impl_).determinant();
}

GramSystem::GramSystem(Eigen::MatrixXd scalar_gram, TaskCoupling coupling)
    : gram_(std::move(scalar_gram)), coupling_(std::move(coupling)), factor_(gram_) {}

BlockVector GramSystem::apply(const BlockVector& c) const {
    if (c.size() != size() || c.dim() != coupling_.n()) {
        throw ShapeError("block vector shape does not match Gram system");
    }
    return BlockVector(gram_ * c.matrix() * coupling_.matrix(), c.p());
}

BlockVector GramSystem::solve(const BlockVector& y) const {
    if (y.size() != size() || y.dim() != coupling_.n()) {
        throw ShapeError("right-hand side has " + std::to_string(y.size()) + " blocks of dim " +
                         std::to_string(y.dim()) + ", expected " + std::to_string(size()) + " of dim " +
                         std::to_string(coupling_.n()));
    }
    Eigen::MatrixXd scalar_solved(y.size(), y.dim());
    for (Eigen::Index k = 0; k < y.dim(); ++k) {
        scalar_solved.col(k) = factor_.solve(Eigen::VectorXd(y.matrix().col(k)));
    }
    return BlockVector(scalar_solved * coupling_.inverse(), y.p());
}

Eigen::MatrixXd scalar_gram(const ScalarKernelSpec& spec, std::span<const double> centers) {
    check_centers(spec, centers);
    const auto m = static_cast<Eigen::Index>(centers.size());
    Eigen::MatrixXd g(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = spec.eval_unchecked(centers[static_cast<std::size_t>(i)], centers[static_cast<std::size_t>(j)]);
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

GramSystem gram_assemble(const OperatorKernel& kernel, std::span<const double> centers) {
    Eigen::MatrixXd g = scalar_gram(kernel.scalar, centers);
    try {
        return GramSystem(std::move(g), kernel.coupling);
    } catch (const SingularError& e) {
        throw SingularError(std::string("Gram matrix not invertible (A1): ") + e.what(),
                            std::vector<double>(centers.begin(), centers.end()));
    }
}

BlockVector gram_solve(const GramSystem& system, const BlockVector& y) {
    return system.solve(y);
}

Eigen::MatrixXd BlockInverse::assemble() const {
    const Eigen::Index k = top_left.rows();
    const Eigen::Index l = bottom_right.rows();
    Eigen::MatrixXd out(k + l, k + l);
    out.topLeftCorner(k, k) = top_left;
    out.topRightCorner(k, l) = top_right;
    out.bottomLeftCorner(l, k) = bottom_left;
    out.bottomRightCorner(l, l) = bottom_right;
    return out;
}

BlockInverse block_inverse_2x2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& c,
                               const Eigen::MatrixXd& d) {
    const Eigen::Index k = a.rows();
    const Eigen::Index l = d.rows();
    if (a.cols() != k || d.cols() != l || b.rows() != k || b.cols() != l || c.rows() != l || c.cols() != k) {
        throw ShapeError("block shapes must be A: k x k, B: k x l, C: l x k, D: l x l");
    }
    const Factorization a_factor(a);
    const Eigen::MatrixXd a_inv = a_factor.solve(Eigen::MatrixXd::Identity(k, k).eval());
    const Eigen::MatrixXd a_inv_b = a_factor.solve(b);
    const Eigen::MatrixXd ca = c * a_inv;

    const Eigen::MatrixXd schur = d - c * a_inv_b;
    const Factorization schur_factor(schur);
    const Eigen::MatrixXd m = schur_factor.solve(Eigen::MatrixXd::Identity(l, l).eval());

    BlockInverse inv;
    inv.top_left = a_inv + a_inv_b * m * ca;
    inv.top_right = -a_inv_b * m;
    inv.bottom_left = -m * ca;
    inv.bottom_right = m;
    return inv;
}

}  // namespace rkbs
