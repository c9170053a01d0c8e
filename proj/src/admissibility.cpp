#include "rkbs/admissibility.hpp"

#include "rkbs/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <random>
#include <string>


namespace rkbs {

void CertificationConfig::validate() const {
    if (max_centers < 1 || grid_size < 1 || trials < 1) {
        throw UsageError("certification counts (max_centers, grid_size, trials) must be >= 1");
    }
    if (!(tolerance > 0.0)) {
        throw UsageError("certification tolerance must be positive");
    }
}

double det_tfamily_closed_form(std::span<const double> sorted_centers, double t) {
    if (!(t >= -1.0 && t <= 1.0)) {
        throw DomainError("t must lie in [-1, 1]");
    }
    if (sorted_centers.empty()) return 1.0;
    for (double x : sorted_centers) {
        if (!(x > 0.0 && x < 1.0)) {
            throw DomainError("centers must lie in (0, 1)");
        }
    }
    for (std::size_t i = 1; i < sorted_centers.size(); ++i) {
        if (!(sorted_centers[i] > sorted_centers[i - 1])) {
            throw OrderError("centers must be strictly increasing");
        }
    }
    double det = sorted_centers.front() * (1.0 - t * sorted_centers.back());
    for (std::size_t i = 1; i < sorted_centers.size(); ++i) {
        det *= sorted_centers[i] - sorted_centers[i - 1];
    }
    return det;
}

double lebesgue_at(const OperatorKernel& kernel, std::span<const double> centers, double query) {
    check_centers(kernel.scalar, centers);
    kernel.scalar.check_in_domain(query);
    if (std::find(centers.begin(), centers.end(), query) != centers.end()) {
        return 1.0;
    }
    const Factorization factor(scalar_gram(kernel.scalar, centers));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(centers.size()));
    for (std::size_t i = 0; i < centers.size(); ++i) {
        rhs(static_cast<Eigen::Index>(i)) = kernel.scalar.eval_unchecked(centers[i], query);
    }
    return operator_lp1_norm_product(factor.solve(rhs));
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform on the open interval (0, 1).
double open_unit(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

bool is_center(const std::vector<double>& centers, double q) {
    return std::find(centers.begin(), centers.end(), q) != centers.end();
}

// Lebesgue values for one center set at every grid point, then golden-section
// refinement around the largest.
CenterSetRecord probe_center_set(const ScalarKernelSpec& g, const std::vector<double>& grid,
                                 std::vector<double> centers, int m, int trial) {
    CenterSetRecord rec;
    rec.m = m;
    rec.trial = trial;
    rec.centers = std::move(centers);

    const Eigen::MatrixXd gram = scalar_gram(g, rec.centers);
    std::optional<Factorization> factor;
    try {
        factor.emplace(gram);
    } catch (const SingularError&) {
        rec.singular = true;
        return rec;
    }
    rec.cholesky = factor->is_cholesky();
    const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly)
                                    .eigenvalues()
                                    .cwiseAbs();
    rec.condition = eig.maxCoeff() / eig.minCoeff();

    const auto mm = static_cast<Eigen::Index>(m);
    const auto nq = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd rhs(mm, nq);
    for (Eigen::Index k = 0; k < nq; ++k) {
        for (Eigen::Index i = 0; i < mm; ++i) {
            rhs(i, k) = g.eval_unchecked(rec.centers[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(k)]);
        }
    }
    const Eigen::MatrixXd coeffs = factor->solve(rhs);

    Eigen::Index best_k = 0;
    double best = -1.0;
    for (Eigen::Index k = 0; k < nq; ++k) {
        const double q = grid[static_cast<std::size_t>(k)];
        const double v = is_center(rec.centers, q) ? 1.0 : coeffs.col(k).cwiseAbs().sum();
        if (v > best) {
            best = v;
            best_k = k;
        }
    }
    rec.worst_lebesgue = best;
    rec.worst_query = grid[static_cast<std::size_t>(best_k)];

    const double lo = best_k > 0 ? grid[static_cast<std::size_t>(best_k - 1)] : g.domain().lo;
    const double hi = best_k + 1 < nq ? grid[static_cast<std::size_t>(best_k + 1)] : g.domain().hi;
    Eigen::VectorXd col(mm);
    const auto lebesgue = [&](double q) {
        if (!g.domain().contains(q)) return 0.0;
        if (is_center(rec.centers, q)) return 1.0;
        for (Eigen::Index i = 0; i < mm; ++i) {
            col(i) = g.eval_unchecked(rec.centers[static_cast<std::size_t>(i)], q);
        }
        return factor->solve(col).cwiseAbs().sum();
    };
    const auto [q_ref, v_ref] = golden_section_max(lebesgue, lo, hi);
    if (v_ref > rec.worst_lebesgue) {
        rec.worst_lebesgue = v_ref;
        rec.worst_query = q_ref;
    }
    return rec;
}

ScanResult reduce_records(std::vector<CenterSetRecord> records) {
    ScanResult out;
    for (const auto& rec : records) {
        if (!rec.singular && rec.worst_lebesgue > out.worst.value) {
            out.worst.value = rec.worst_lebesgue;
            out.worst.centers = rec.centers;
            out.worst.query = rec.worst_query;
        }
    }
    out.records = std::move(records);
    return out;
}

void require_bounded(const Interval& domain) {
    if (!domain.bounded()) {
        throw UsageError("scans need a bounded kernel domain; set an explicit interval");
    }
}

}  // namespace

std::vector<double> draw_center_set(const Interval& domain, int m, std::uint64_t seed, int trial) {
    if (m < 1) throw UsageError("center set size must be >= 1");
    require_bounded(domain);
    const std::uint64_t key = (static_cast<std::uint64_t>(m) << 32) | static_cast<std::uint32_t>(trial);
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(key)));
    const double sep = domain.width() / (10.0 * m);
    const double free_len = domain.width() - (m - 1) * sep;
    std::vector<double> u(static_cast<std::size_t>(m));
    for (auto& v : u) v = open_unit(rng);
    std::sort(u.begin(), u.end());
    std::vector<double> centers(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        centers[i] = domain.lo + u[i] * free_len + static_cast<double>(i) * sep;
    }
    return centers;
}

std::vector<double> query_grid(const Interval& domain, int grid_size) {
    if (grid_size < 1) throw UsageError("grid_size must be >= 1");
    require_bounded(domain);
    std::vector<double> grid(static_cast<std::size_t>(grid_size));
    for (int k = 1; k <= grid_size; ++k) {
        grid[static_cast<std::size_t>(k - 1)] = domain.lo + domain.width() * k / (grid_size + 1);
    }
    return grid;
}

std::pair<double, double> golden_section_max(const std::function<double(double)>& f, double a, double b,
                                             int iterations) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    double best_x = fc >= fd ? c : d;
    double best_f = std::max(fc, fd);
    for (int it = 0; it < iterations; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
            if (fc > best_f) {
                best_f = fc;
                best_x = c;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
            if (fd > best_f) {
                best_f = fd;
                best_x = d;
            }
        }
    }
    return {best_x, best_f};
}

ScanResult lebesgue_scan_recording(const OperatorKernel& kernel, const CertificationConfig& cfg) {
    cfg.validate();
    const Interval& domain = kernel.scalar.domain();
    require_bounded(domain);
    const std::vector<double> grid = query_grid(domain, cfg.grid_size);
    const long total = static_cast<long>(cfg.max_centers) * cfg.trials;
    std::vector<CenterSetRecord> records(static_cast<std::size_t>(total));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(total));

#pragma omp parallel for schedule(dynamic)
    for (long idx = 0; idx < total; ++idx) {
        const int m = static_cast<int>(idx / cfg.trials) + 1;
        const int trial = static_cast<int>(idx % cfg.trials);
        try {
            records[static_cast<std::size_t>(idx)] =
                probe_center_set(kernel.scalar, grid, draw_center_set(domain, m, cfg.seed, trial), m, trial);
        } catch (...) {
            errors[static_cast<std::size_t>(idx)] = std::current_exception();
        }
    }
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    return reduce_records(std::move(records));
}

ScanResult lebesgue_scan(const OperatorKernel& kernel, const CertificationConfig& cfg) {
    ScanResult result = lebesgue_scan_recording(kernel, cfg);
    for (const auto& rec : result.records) {
        if (rec.singular) {
            throw SingularError("Gram matrix singular at m = " + std::to_string(rec.m) + ", trial " +
                                    std::to_string(rec.trial),
                                rec.centers);
        }
    }
    return result;
}

KappaEstimate kappa_scan(const OperatorKernel& kernel, int grid_size) {
    const std::vector<double> grid = query_grid(kernel.scalar.domain(), grid_size);
    const auto n = static_cast<long>(grid.size());
    std::vector<double> row_max(grid.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        double best = 0.0;
        for (long j = 0; j <= i; ++j) {
            best = std::max(best, std::abs(kernel.scalar.eval_unchecked(grid[static_cast<std::size_t>(i)],
                                                                        grid[static_cast<std::size_t>(j)])));
        }
        row_max[static_cast<std::size_t>(i)] = best;
    }
    KappaEstimate est;
    est.scalar_sup = *std::max_element(row_max.begin(), row_max.end());
    est.coupling_norm = coupling_operator_norm(kernel.coupling.matrix(), kernel.p);
    est.kappa = est.scalar_sup * est.coupling_norm;
    return est;
}

std::string_view a3_status_name(A3Status status) {
    switch (status) {
        case A3Status::ImpliedByProduct: return "implied";
        case A3Status::NotTestable: return "not_testable";
    }
    return "unknown";
}

CertificationReport certify(const OperatorKernel& kernel, const CertificationConfig& cfg) {
    cfg.validate();
    CertificationReport report;
    report.config = cfg;

    ScanResult scan = lebesgue_scan_recording(kernel, cfg);
    for (const auto& rec : scan.records) {
        ++report.a1.center_sets;
        if (rec.singular) {
            report.a1.singular_sets.push_back(rec.centers);
            continue;
        }
        if (!rec.cholesky) ++report.a1.cholesky_failures;
        report.a1.worst_condition = std::max(report.a1.worst_condition, rec.condition);
    }

    report.a2 = kappa_scan(kernel, cfg.grid_size);

    report.a4.worst = scan.worst;
    report.a4.center_sets = scan.records.size() - report.a1.singular_sets.size();
    report.a4.queries_per_set = static_cast<std::size_t>(cfg.grid_size);

    report.verdict.a1 = report.a1.singular_sets.empty() && report.a1.cholesky_failures == 0;
    report.verdict.a2 = std::isfinite(report.a2.kappa) &&
                        report.a2.scalar_sup <= kernel.scalar.uniform_bound() * (1.0 + 1e-12);
    report.verdict.a3 =
        kernel.scalar.builtin_admissible_candidate() ? A3Status::ImpliedByProduct : A3Status::NotTestable;
    report.verdict.a4 = report.a4.center_sets > 0 && report.a4.worst.value <= 1.0 + cfg.tolerance;
    report.records = std::move(scan.records);
    return report;
}

}  // namespace rkbs
