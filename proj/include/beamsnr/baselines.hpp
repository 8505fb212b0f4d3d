#ifndef BEAMSNR_BASELINES_HPP
#define BEAMSNR_BASELINES_HPP

#include <beamsnr/beamspace.hpp>
#include <beamsnr/types.hpp>

#include <vector>

namespace beamsnr::baselines {

struct BaselineConfig {
    double mad_consistency = 0.67449; // Phi^-1(3/4), Gaussian MAD-to-sigma
    double trunc_alpha = 0.01;        // tail probability for the trim cutoff
    int trunc_iters = 3;

    void validate() const;
};

// Median of a copy; for even length the lower of the two central values.
double lower_median(std::vector<double> values);

// Solves observed = mu*(1-(T/mu+1)e^{-T/mu})/(1-e^{-T/mu}) for mu, i.e. inverts
// the mean of an Exp(mu) sample truncated at T. 20 bisection steps on
// (0, 10*observed].
double truncated_exp_mean_inverse(double observed_mean, double cutoff);

// sigma from the MAD of the 2M real components, N0 = 2*sigma^2.
double mad_noise_power(const cvec& ybar, const BaselineConfig& cfg = {});

// One refinement pass: trim powers above -ln(trunc_alpha)*N0_mad, then invert
// the truncated-exponential mean on the kept samples. Falls back to the MAD
// value when everything is trimmed.
double mad_refined_noise_power(const cvec& ybar, const BaselineConfig& cfg = {});

// Iterated trimming: mu <- truncated-mean inverse of samples <= -ln(alpha)*mu,
// starting from the full mean; empty kept-set returns the previous iterate.
double truncated_mean_noise_power(const beamspace::SortedPowerVector& sorted,
                                  const BaselineConfig& cfg = {});

} // namespace beamsnr::baselines

#endif
