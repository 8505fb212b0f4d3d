#include <beamsnr/baselines.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace beamsnr::baselines {

void BaselineConfig::validate() const {
    if (!(mad_consistency > 0.0))
        throw std::invalid_argument("BaselineConfig: mad_consistency must be > 0");
    if (!(trunc_alpha > 0.0 && trunc_alpha < 1.0))
        throw std::invalid_argument("BaselineConfig: trunc_alpha must be in (0, 1)");
    if (trunc_iters < 1) throw std::invalid_argument("BaselineConfig: trunc_iters must be >= 1");
}

double lower_median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("lower_median: empty input");
    const size_t k = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + ptrdiff_t(k), values.end());
    return values[k];
}

double truncated_exp_mean_inverse(double observed_mean, double cutoff) {
    if (observed_mean <= 0.0) return 0.0;
    // truncated mean of Exp(mu) at T, increasing in mu
    auto fwd = [cutoff](double mu) {
        const double r = cutoff / mu;
        if (r > 700.0) return mu; // truncation negligible
        const double e = std::exp(-r);
        return mu * (1.0 - (r + 1.0) * e) / (1.0 - e);
    };
    double lo = 0.0, hi = 10.0 * observed_mean;
    for (int it = 0; it < 20; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (fwd(mid) < observed_mean)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double mad_noise_power(const cvec& ybar, const BaselineConfig& cfg) {
    cfg.validate();
    if (ybar.size() < 2) throw std::invalid_argument("mad_noise_power: need M >= 2");
    std::vector<double> v;
    v.reserve(2 * ybar.size());
    for (const auto& z : ybar) {
        v.push_back(z.real());
        v.push_back(z.imag());
    }
    const double med = lower_median(v);
    for (auto& x : v) x = std::abs(x - med);
    const double sigma = lower_median(std::move(v)) / cfg.mad_consistency;
    return 2.0 * sigma * sigma;
}

double mad_refined_noise_power(const cvec& ybar, const BaselineConfig& cfg) {
    const double n0_mad = mad_noise_power(ybar, cfg);
    const double cutoff = -std::log(cfg.trunc_alpha) * n0_mad;
    double kept_sum = 0.0;
    long kept = 0;
    for (const auto& z : ybar) {
        const double p = std::norm(z);
        if (p <= cutoff) {
            kept_sum += p;
            ++kept;
        }
    }
    if (kept == 0) return n0_mad;
    return truncated_exp_mean_inverse(kept_sum / double(kept), cutoff);
}

double truncated_mean_noise_power(const beamspace::SortedPowerVector& sorted,
                                  const BaselineConfig& cfg) {
    cfg.validate();
    const auto& v = sorted.values;
    if (v.size() < 2) throw std::invalid_argument("truncated_mean_noise_power: need M >= 2");
    double mu = sorted.total / double(v.size());
    for (int it = 0; it < cfg.trunc_iters; ++it) {
        const double cutoff = -std::log(cfg.trunc_alpha) * mu;
        // ascending input: the kept set is a prefix
        const auto end = std::upper_bound(v.begin(), v.end(), cutoff);
        if (end == v.begin()) return mu;
        double sum = 0.0;
        for (auto it2 = v.begin(); it2 != end; ++it2) sum += *it2;
        mu = truncated_exp_mean_inverse(sum / double(end - v.begin()), cutoff);
    }
    return mu;
}

} // namespace beamsnr::baselines
