#include "rkbs/admissibility.hpp"

#include "rkbs/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rkbs::reference {

ScanResult lebesgue_scan_serial(const OperatorKernel& kernel, const CertificationConfig& cfg) {
    cfg.validate();
    const Interval& domain = kernel.scalar.domain();
    const std::vector<double> grid = query_grid(domain, cfg.grid_size);
    ScanResult out;
    for (int m = 1; m <= cfg.max_centers; ++m) {
        for (int trial = 0; trial < cfg.trials; ++trial) {
            CenterSetRecord rec;
            rec.m = m;
            rec.trial = trial;
            rec.centers = draw_center_set(domain, m, cfg.seed, trial);
            std::size_t best_k = 0;
            double best = -1.0;
            try {
                for (std::size_t k = 0; k < grid.size(); ++k) {
                    const double v = lebesgue_at(kernel, rec.centers, grid[k]);
                    if (v > best) {
                        best = v;
                        best_k = k;
                    }
                }
            } catch (const SingularError&) {
                rec.singular = true;
                out.records.push_back(std::move(rec));
                continue;
            }
            rec.worst_lebesgue = best;
            rec.worst_query = grid[best_k];
            const double lo = best_k > 0 ? grid[best_k - 1] : domain.lo;
            const double hi = best_k + 1 < grid.size() ? grid[best_k + 1] : domain.hi;
            const auto [q, v] = golden_section_max(
                [&](double x) { return domain.contains(x) ? lebesgue_at(kernel, rec.centers, x) : 0.0; }, lo, hi);
            if (v > rec.worst_lebesgue) {
                rec.worst_lebesgue = v;
                rec.worst_query = q;
            }
            if (rec.worst_lebesgue > out.worst.value) {
                out.worst.value = rec.worst_lebesgue;
                out.worst.centers = rec.centers;
                out.worst.query = rec.worst_query;
            }
            out.records.push_back(std::move(rec));
        }
    }
    return out;
}

KappaEstimate kappa_scan_serial(const OperatorKernel& kernel, int grid_size) {
    const std::vector<double> grid = query_grid(kernel.scalar.domain(), grid_size);
    KappaEstimate est;
    for (double x : grid) {
        for (double y : grid) {
            est.scalar_sup = std::max(est.scalar_sup, std::abs(kernel.scalar(x, y)));
        }
    }
    est.coupling_norm = coupling_operator_norm(kernel.coupling.matrix(), kernel.p);
    est.kappa = est.scalar_sup * est.coupling_norm;
    return est;
}

}  // namespace rkbs::reference
