#include <beamsnr/estimator.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace beamsnr::estimator {

double harmonic_gap_sum(int m, int num_elements) {
    const int M = num_elements;
    if (m < 1 || m >= M) throw std::invalid_argument("harmonic_gap_sum: need 1 <= m < M");
    double inner = 0.0; // sum_{j=M-k+1}^{M} 1/j for the current k
    double total = 0.0;
    for (int k = 1; k <= m; ++k) {
        inner += 1.0 / double(M - k + 1);
        total += inner;
    }
    return total;
}

double gamma_coefficient(int m, int num_elements, double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("gamma_coefficient: need 0 < alpha < 1");
    const int M = num_elements;
    if (m < 1 || m >= M) throw std::invalid_argument("gamma_coefficient: need 1 <= m < M");
    return -std::log(alpha) / (double(M - m) * harmonic_gap_sum(m, M));
}

double noise_hit_probability(int m, int num_elements, double coeff) {
    const int M = num_elements;
    if (m < 1 || m >= M) throw std::invalid_argument("noise_hit_probability: need 1 <= m < M");
    if (!(coeff > 0.0)) throw std::invalid_argument("noise_hit_probability: coeff must be > 0");
    // S_m = sum_{j=0}^{m-1} (m-j) Y_j and Delta_m = Y_m with independent
    // Y_j ~ Exp(M-j); P(m Y_m >= c S_m) = prod_j (M-j) / ((M-j) + c (M-m)(m-j)/m).
    double p = 1.0;
    for (int j = 0; j < m; ++j) {
        const double lam = double(M - j);
        p *= lam / (lam + coeff * double(M - m) * double(m - j) / double(m));
    }
    return p;
}

double calibrated_coefficient(int m, int num_elements, double per_index_alpha) {
    if (!(per_index_alpha > 0.0) || !(per_index_alpha < 1.0))
        throw std::invalid_argument("calibrated_coefficient: need 0 < alpha < 1");
    double lo = 1e-9, hi = 1e12;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (noise_hit_probability(m, num_elements, mid) > per_index_alpha)
            lo = mid;
        else
            hi = mid;
    }
    return std::sqrt(lo * hi);
}

void ThresholdSchedule::validate() const {
    auto pow2_ok = [](double g) {
        if (!(g > 0.0)) return false;
        const double l = std::log2(g);
        return l == std::floor(l);
    };
    if (!pow2_ok(gamma1) || !pow2_ok(gamma2) || !pow2_ok(gamma3))
        throw std::invalid_argument("ThresholdSchedule: levels must be exact powers of two");
    if (!(1 <= m1 && m1 < m2 && m2 < num_elements))
        throw std::invalid_argument("ThresholdSchedule: need 1 <= M1 < M2 < M");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("ThresholdSchedule: need 0 < alpha < 1");
}

namespace {

// round log2 to the nearest integer, ties toward -inf
double pow2_round(double x) {
    return std::ldexp(1.0, int(std::ceil(std::log2(x) - 0.5)));
}

double lower_median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
}

void default_breakpoints(int M, int& m1, int& m2) {
    if (m1 < 0) m1 = M / 2;
    if (m2 < 0) {
        m2 = std::min((7 * M + 7) / 8, M - 2);
        if (m2 <= m1) m2 = m1 + 1;
    }
}

} // namespace

ThresholdSchedule build_schedule(int num_elements, double alpha, int m1, int m2,
                                 ScheduleRule rule) {
    const int M = num_elements;
    if (M < 4) throw std::invalid_argument("build_schedule: need M >= 4");
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("build_schedule: need 0 < alpha < 1");
    default_breakpoints(M, m1, m2);
    if (!(1 <= m1 && m1 < m2 && m2 < M))
        throw std::invalid_argument("build_schedule: need 1 <= M1 < M2 < M");

    std::vector<double> coeff(static_cast<size_t>(M - 1));
    if (rule == ScheduleRule::FalseAlarmBudget) {
        const double per_index = 1.0 - std::pow(1.0 - alpha, 1.0 / double(M - 1));
        for (int m = 1; m < M; ++m)
            coeff[size_t(m - 1)] = calibrated_coefficient(m, M, per_index);
    } else {
        for (int m = 1; m < M; ++m) coeff[size_t(m - 1)] = gamma_coefficient(m, M, alpha);
    }

    auto slice = [&](int lo, int hi) { // indices lo..hi inclusive
        return std::vector<double>(coeff.begin() + (lo - 1), coeff.begin() + hi);
    };

    ThresholdSchedule s;
    s.m1 = m1;
    s.m2 = m2;
    s.num_elements = M;
    s.alpha = alpha;
    if (rule == ScheduleRule::FalseAlarmBudget) {
        const auto i1 = slice(1, m1);
        const auto i2 = slice(m1 + 1, m2);
        s.gamma1 = pow2_round(*std::max_element(i1.begin(), i1.end()));
        s.gamma2 = pow2_round(*std::max_element(i2.begin(), i2.end()));
        s.gamma3 = (m2 >= M - 1) ? s.gamma2 : pow2_round(lower_median_of(slice(m2 + 1, M - 1)));
    } else {
        s.gamma1 = pow2_round(lower_median_of(slice(1, m1)));
        s.gamma2 = pow2_round(lower_median_of(slice(m1 + 1, m2)));
        s.gamma3 = (m2 >= M - 1) ? s.gamma2 : pow2_round(lower_median_of(slice(m2 + 1, M - 1)));
    }
    return s;
}

ThresholdSchedule constant_schedule(int num_elements, double gamma) {
    if (num_elements < 4) throw std::invalid_argument("constant_schedule: need M >= 4");
    if (!(gamma > 0.0) || std::log2(gamma) != std::floor(std::log2(gamma)))
        throw std::invalid_argument("constant_schedule: gamma must be a positive power of two");
    ThresholdSchedule s;
    s.gamma1 = s.gamma2 = s.gamma3 = gamma;
    s.m1 = num_elements / 2;
    s.m2 = std::min((7 * num_elements + 7) / 8, num_elements - 2);
    if (s.m2 <= s.m1) s.m2 = s.m1 + 1;
    s.num_elements = num_elements;
    s.alpha = 0.5; // unused by the constant schedule
    return s;
}

BoundaryResult detect_boundary(const SortedPowerVector& sorted,
                               const ThresholdSchedule& schedule) {
    const auto& v = sorted.values;
    const int M = int(v.size());
    if (M == 0) throw std::invalid_argument("detect_boundary: empty input");

    BoundaryResult r;
    double s = 0.0;
    for (int m = 1; m < M; ++m) {
        s += v[size_t(m - 1)];
        if (!r.hit) {
            const double delta = v[size_t(m)] - v[size_t(m - 1)];
            if (s > 0.0 && double(m) * delta >= schedule.level(m) * s) {
                r.hit = true;
                r.m_star = m;
                r.s_mstar = s;
            }
        }
    }
    s += v[size_t(M - 1)];
    r.s_total = s;
    if (!r.hit) {
        r.m_star = M;
        r.s_mstar = s;
    }
    return r;
}

BoundaryResult naive_detect_boundary(const SortedPowerVector& sorted,
                                     const ThresholdSchedule& schedule) {
    const auto& v = sorted.values;
    const int M = int(v.size());
    if (M == 0) throw std::invalid_argument("naive_detect_boundary: empty input");

    BoundaryResult r;
    for (int m = 1; m < M && !r.hit; ++m) {
        double sum = 0.0;
        for (int i = 0; i < m; ++i) sum += v[size_t(i)];
        const double mu = sum / double(m);
        const double delta = v[size_t(m)] - v[size_t(m - 1)];
        if (mu > 0.0 && delta >= schedule.level(m) * mu) {
            r.hit = true;
            r.m_star = m;
            r.s_mstar = sum;
        }
    }
    double total = 0.0;
    for (double x : v) total += x;
    r.s_total = total;
    if (!r.hit) {
        r.m_star = M;
        r.s_mstar = total;
    }
    return r;
}

std::pair<double, BoundaryResult> estimate_noise_power(const SortedPowerVector& sorted,
                                                       const ThresholdSchedule& schedule) {
    const BoundaryResult b = detect_boundary(sorted, schedule);
    return {b.s_mstar / double(b.m_star), b};
}

double estimate_signal_power(double s_total, double n0_hat, int num_elements) {
    return std::max(s_total / double(num_elements) - n0_hat, 0.0);
}

double estimate_snr(double px_hat, double n0_hat) {
    if (n0_hat > 0.0) return px_hat / n0_hat;
    return px_hat > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

double oracle_noise_power(const SortedPowerVector& sorted, int m0) {
    const int M = int(sorted.values.size());
    if (m0 < 1 || m0 > M) throw std::invalid_argument("oracle_noise_power: need 1 <= m0 <= M");
    double sum = 0.0;
    for (int i = 0; i < m0; ++i) sum += sorted.values[size_t(i)];
    return sum / double(m0);
}

EstimateResult estimate_all(const SortedPowerVector& sorted, const ThresholdSchedule& schedule) {
    EstimateResult out;
    auto [n0, boundary] = estimate_noise_power(sorted, schedule);
    out.n0_hat = n0;
    out.boundary = boundary;
    out.px_hat = estimate_signal_power(boundary.s_total, n0, int(sorted.values.size()));
    out.rho_hat = estimate_snr(out.px_hat, n0);
    return out;
}

} // namespace beamsnr::estimator
