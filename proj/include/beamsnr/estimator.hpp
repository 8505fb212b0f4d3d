#ifndef BEAMSNR_ESTIMATOR_HPP
#define BEAMSNR_ESTIMATOR_HPP

#include <beamsnr/beamspace.hpp>
#include <beamsnr/types.hpp>

#include <utility>

namespace beamsnr::estimator {

using beamspace::SortedPowerVector;

// H(m, M) = sum_{k=1}^{m} sum_{j=M-k+1}^{M} 1/j  (expected cumulative sum of
// the m smallest of M unit-rate exponentials). Inner sums reused incrementally.
double harmonic_gap_sum(int m, int num_elements);

// gamma(m) = -ln(alpha) / ((M - m) * H(m, M)), the per-index threshold-to-mean
// ratio delta_m / mu_m.
double gamma_coefficient(int m, int num_elements, double alpha);

// Exact probability that the streaming hit test m*Delta_m >= coeff*S_m fires
// at index m on a pure-noise sample (i.i.d. exponential powers), from the
// independent-spacings representation. Scale-free.
double noise_hit_probability(int m, int num_elements, double coeff);

// The coefficient at which noise_hit_probability equals per_index_alpha.
double calibrated_coefficient(int m, int num_elements, double per_index_alpha);

// Piecewise-constant, power-of-two hit thresholds over the three index
// intervals [1,M1], (M1,M2], (M2,M-1].
struct ThresholdSchedule {
    double gamma1 = 0, gamma2 = 0, gamma3 = 0; // exact powers of two
    int m1 = 0, m2 = 0;                        // 1 <= m1 < m2 < M
    int num_elements = 0;                      // M
    double alpha = 0;

    double level(int m) const { return m <= m1 ? gamma1 : (m <= m2 ? gamma2 : gamma3); }
    void validate() const;
};

enum class ScheduleRule {
    // Levels solve the exact pure-noise false-hit budget: per-index hit
    // probability alpha_idx = 1-(1-alpha)^(1/(M-1)); gamma1, gamma2 cover the
    // worst index of their interval, gamma3 the median of the tail interval
    // (tail false hits leave the estimate within a fraction of a dB and tail
    // sensitivity drives boundary detection).
    FalseAlarmBudget,
    // Levels are interval medians of gamma_coefficient(m), the direct
    // rendition of the threshold-to-mean ratio construction.
    CoefficientMedian,
};

// Defaults when m1, m2 < 0: m1 = M/2, m2 = min(ceil(7M/8), M-2).
ThresholdSchedule build_schedule(int num_elements, double alpha, int m1 = -1, int m2 = -1,
                                 ScheduleRule rule = ScheduleRule::FalseAlarmBudget);

// All three levels equal to gamma (must be positive); used for the
// fixed-threshold estimator variant and manual overrides.
ThresholdSchedule constant_schedule(int num_elements, double gamma);

struct BoundaryResult {
    int m_star = 0;
    bool hit = false;
    double s_mstar = 0.0; // cumulative power up to m_star
    double s_total = 0.0; // S_M
};

// Single forward pass over the sorted powers maintaining S_m; declares a hit
// at the first m < M with S_m > 0 and m*Delta_m >= level(m)*S_m, else falls
// back to m_star = M. The S_m > 0 guard keeps all-zero prefixes from firing
// on the first positive gap.
BoundaryResult detect_boundary(const SortedPowerVector& sorted,
                               const ThresholdSchedule& schedule);

// Reference implementation recomputing mu_m from scratch at every index and
// testing Delta_m >= level(m)*mu_m; equivalence oracle for detect_boundary.
BoundaryResult naive_detect_boundary(const SortedPowerVector& sorted,
                                     const ThresholdSchedule& schedule);

// N0_hat = S_{m*}/m*, the mean of the first m* sorted powers.
std::pair<double, BoundaryResult> estimate_noise_power(const SortedPowerVector& sorted,
                                                       const ThresholdSchedule& schedule);

// Px_hat = max(S_M/M - N0_hat, 0)
double estimate_signal_power(double s_total, double n0_hat, int num_elements);

// rho_hat = Px_hat/N0_hat; +inf when N0_hat == 0 and Px_hat > 0, 0 when both 0.
double estimate_snr(double px_hat, double n0_hat);

// mean of the first m0 sorted powers (the estimator that uses a known
// noise/signal boundary)
double oracle_noise_power(const SortedPowerVector& sorted, int m0);

struct EstimateResult {
    double n0_hat = 0.0;
    double px_hat = 0.0;
    double rho_hat = 0.0;
    BoundaryResult boundary;
};

EstimateResult estimate_all(const SortedPowerVector& sorted, const ThresholdSchedule& schedule);

} // namespace beamsnr::estimator

#endif
