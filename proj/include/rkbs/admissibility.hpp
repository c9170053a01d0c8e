#pragma once

#include "rkbs/blocklinalg.hpp"
#include "rkbs/kernels.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace rkbs {

struct CertificationConfig {
    int max_centers = 6;
    int grid_size = 512;
    int trials = 200;
    std::uint64_t seed = 0;
    double tolerance = 1e-8;

    void validate() const;
};

/// Closed-form determinant of the K_t Gram on sorted centers:
/// x_1 (1 - t x_m) (x_2 - x_1) ... (x_m - x_{m-1}).
double det_tfamily_closed_form(std::span<const double> sorted_centers, double t);

/// Lebesgue function value || K[x]^{-1} K_x(query) ||_{p,1}. For product
/// kernels this is sum_i |b_i| with G[x] b = G_x(query), independent of the
/// coupling and of p. Returns exactly 1 when the query is a center.
double lebesgue_at(const OperatorKernel& kernel, std::span<const double> centers, double query);

/// Deterministic center set for (seed, m, trial): m sorted points drawn
/// uniformly from the interior with pairwise gaps >= width / (10 m). Each
/// (m, trial) pair gets its own generator, so sets do not depend on the order
/// in which they are drawn.
std::vector<double> draw_center_set(const Interval& domain, int m, std::uint64_t seed, int trial);

/// grid_size interior points lo + width * k / (grid_size + 1), k = 1..grid_size.
std::vector<double> query_grid(const Interval& domain, int grid_size);

/// Golden-section maximization of `f` on [a, b]. Only interior points are
/// evaluated (the ends may be open domain boundaries); returns the best
/// (argmax, max) seen.
std::pair<double, double> golden_section_max(const std::function<double(double)>& f, double a, double b,
                                             int iterations = 30);

struct LebesgueWitness {
    double value = 0.0;
    std::vector<double> centers;
    double query = std::numeric_limits<double>::quiet_NaN();
};

/// Evidence gathered for one sampled center set.
struct CenterSetRecord {
    int m = 0;
    int trial = 0;
    std::vector<double> centers;
    bool singular = false;
    bool cholesky = false;
    double condition = std::numeric_limits<double>::infinity();
    double worst_lebesgue = 0.0;
    double worst_query = std::numeric_limits<double>::quiet_NaN();
};

struct ScanResult {
    LebesgueWitness worst;
    std::vector<CenterSetRecord> records;  // ordered by (m, trial)
};

/// Supremum search for the Lebesgue constant over cfg.trials random center
/// sets of each size m = 1..cfg.max_centers, probing cfg.grid_size query
/// points per set and refining around the grid maximizer. Center sets are
/// processed in parallel; the result does not depend on the thread count.
/// Throws SingularError (with the offending set) if a Gram cannot be factored.
ScanResult lebesgue_scan(const OperatorKernel& kernel, const CertificationConfig& cfg);

/// Same scan, but singular center sets are recorded instead of thrown.
ScanResult lebesgue_scan_recording(const OperatorKernel& kernel, const CertificationConfig& cfg);

/// sup |G| over grid pairs, scaled by the coupling's p->q operator norm.
struct KappaEstimate {
    double scalar_sup = 0.0;
    double coupling_norm = 0.0;
    double kappa = 0.0;
};
KappaEstimate kappa_scan(const OperatorKernel& kernel, int grid_size);

enum class A3Status { ImpliedByProduct, NotTestable };
std::string_view a3_status_name(A3Status status);

struct A1Evidence {
    double worst_condition = 1.0;
    std::size_t center_sets = 0;
    std::size_t cholesky_failures = 0;
    std::vector<std::vector<double>> singular_sets;
};

struct A4Evidence {
    LebesgueWitness worst;
    std::size_t center_sets = 0;
    std::size_t queries_per_set = 0;
};

struct Verdict {
    bool a1 = false;
    bool a2 = false;
    A3Status a3 = A3Status::NotTestable;
    bool a4 = false;

    bool all_pass() const noexcept { return a1 && a2 && a4; }
};

struct CertificationReport {
    CertificationConfig config;
    A1Evidence a1;
    KappaEstimate a2;
    A4Evidence a4;
    Verdict verdict;
    std::vector<CenterSetRecord> records;
};

/// Numeric evidence for A1, A2 and A4, plus the A3 status. Failures are report
/// entries, never exceptions (other than an invalid config or unbounded domain).
CertificationReport certify(const OperatorKernel& kernel, const CertificationConfig& cfg);

namespace reference {

// Single-threaded, per-query implementations used as oracles for the parallel
// versions above. They recompute every Lebesgue value through lebesgue_at.
ScanResult lebesgue_scan_serial(const OperatorKernel& kernel, const CertificationConfig& cfg);
KappaEstimate kappa_scan_serial(const OperatorKernel& kernel, int grid_size);

}  // namespace reference

}  // namespace rkbs
