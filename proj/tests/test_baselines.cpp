#include <doctest.h>

#include <beamsnr/baselines.hpp>
#include <beamsnr/rng.hpp>

#include <cmath>

using namespace beamsnr;
using namespace beamsnr::baselines;

namespace {

// forward map: mean of Exp(mu) truncated at T
double truncated_mean_forward(double mu, double T) {
    const double r = T / mu;
    const double e = std::exp(-r);
    return mu * (1.0 - (r + 1.0) * e) / (1.0 - e);
}

cvec noise_sample(Rng& rng, int M, double n0) {
    cvec v(static_cast<size_t>(M));
    for (auto& z : v) z = rng.cgaussian(n0);
    return v;
}

} // namespace

TEST_CASE("lower median convention") {
    CHECK(lower_median({-1, -1, 1, 1}) == -1.0);
    CHECK(lower_median({3, 1, 2}) == 2.0);
    CHECK(lower_median({5}) == 5.0);
    CHECK(lower_median({2, 1}) == 1.0);
    CHECK_THROWS_AS(lower_median({}), std::invalid_argument);
}

TEST_CASE("truncated-exponential mean inversion round trip") {
    for (double mu : {0.5, 1.0, 3.0}) {
        for (double ratio : {2.0, 5.0, 10.0}) {
            const double T = ratio * mu;
            const double target = truncated_mean_forward(mu, T);
            const double got = truncated_exp_mean_inverse(target, T);
            CHECK(got == doctest::Approx(mu).epsilon(1e-4));
        }
    }
    CHECK(truncated_exp_mean_inverse(0.0, 1.0) == 0.0);
}

TEST_CASE("MAD estimator degenerate and tie cases") {
    // all components equal: MAD is zero
    const cvec flat(8, cplx{0.3, 0.3});
    CHECK(mad_noise_power(flat) == 0.0);

    // even-length median tie resolved toward the lower central value
    const cvec v{{-1, -1}, {1, 1}};
    const double n0 = mad_noise_power(v);
    // components [-1,-1,1,1]: median -1, deviations [0,0,2,2], MAD 0
    CHECK(n0 == 0.0);

    CHECK_THROWS_AS(mad_noise_power(cvec{cplx{1, 1}}), std::invalid_argument);
}

TEST_CASE("MAD family is consistent on pure noise") {
    const int M = 64;
    Rng rng(1234);
    double acc_mad = 0, acc_ref = 0, acc_trunc = 0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        const cvec y = noise_sample(rng, M, 1.0);
        acc_mad += mad_noise_power(y);
        acc_ref += mad_refined_noise_power(y);
        acc_trunc += truncated_mean_noise_power(beamspace::power_sort(y));
    }
    CHECK(std::abs(acc_mad / trials - 1.0) < 0.03);
    CHECK(std::abs(acc_ref / trials - 1.0) < 0.03);
    CHECK(std::abs(acc_trunc / trials - 1.0) < 0.03);
}

TEST_CASE("refinement pass reduces to the corrected solve when nothing is trimmed") {
    Rng rng(5);
    const cvec y = noise_sample(rng, 64, 1.0);
    BaselineConfig cfg;
    const double n0_mad = mad_noise_power(y, cfg);
    const double cutoff = -std::log(cfg.trunc_alpha) * n0_mad;
    double kept_sum = 0;
    long kept = 0;
    for (const auto& z : y) {
        const double p = std::norm(z);
        if (p <= cutoff) {
            kept_sum += p;
            ++kept;
        }
    }
    REQUIRE(kept > 0);
    const double expect = truncated_exp_mean_inverse(kept_sum / double(kept), cutoff);
    CHECK(mad_refined_noise_power(y, cfg) == doctest::Approx(expect).epsilon(1e-12));

    const cvec zeros(8, cplx{0, 0});
    CHECK(mad_refined_noise_power(zeros) == 0.0);
}

TEST_CASE("truncated mean converges on all-equal samples") {
    // fixed point of the correction map, followed independently in the test
    BaselineConfig cfg;
    const double p = 2.0;
    auto spv = beamspace::sort_powers(std::vector<double>(16, p));
    double mu = p;
    for (int it = 0; it < cfg.trunc_iters; ++it) {
        const double T = -std::log(cfg.trunc_alpha) * mu;
        REQUIRE(T > p); // nothing trimmed
        mu = truncated_exp_mean_inverse(p, T);
    }
    CHECK(truncated_mean_noise_power(spv, cfg) == doctest::Approx(mu).epsilon(1e-12));
    CHECK(mu > p); // corrected value exceeds the truncated observation
}

TEST_CASE("truncated mean trims a lone outlier on the first pass") {
    std::vector<double> v(64, 1.0);
    v[63] = 1e4;
    const auto spv = beamspace::sort_powers(std::move(v));
    BaselineConfig cfg;
    // iteration 1: mu0 = (63 + 1e4)/64 ~ 157, cutoff ~ 724 < 1e4 trims the spike
    const double mu0 = spv.total / 64.0;
    CHECK(-std::log(cfg.trunc_alpha) * mu0 < 1e4);
    const double est = truncated_mean_noise_power(spv, cfg);
    CHECK(est > 0.9);
    CHECK(est < 1.2);
}

TEST_CASE("baselines are nonnegative and scale equivariant") {
    Rng rng(77);
    BaselineConfig cfg;
    for (int it = 0; it < 100; ++it) {
        cvec y = noise_sample(rng, 32, 1.0);
        y[0] *= 20.0; // one strong component
        const double a1 = mad_noise_power(y, cfg);
        const double a2 = mad_refined_noise_power(y, cfg);
        const auto spv = beamspace::power_sort(y);
        const double a3 = truncated_mean_noise_power(spv, cfg);
        CHECK(a1 >= 0.0);
        CHECK(a2 >= 0.0);
        CHECK(a3 >= 0.0);
        for (double c : {0.0625, 3.0, 1024.0}) {
            cvec ys(y.size());
            const double cs = std::sqrt(c);
            for (size_t i = 0; i < y.size(); ++i) ys[i] = cs * y[i];
            std::vector<double> ps(spv.values.size());
            for (size_t i = 0; i < ps.size(); ++i) ps[i] = c * spv.values[i];
            CHECK(mad_noise_power(ys, cfg) == doctest::Approx(c * a1).epsilon(1e-9));
            if (a2 > 0)
                CHECK(mad_refined_noise_power(ys, cfg) == doctest::Approx(c * a2).epsilon(1e-9));
            CHECK(truncated_mean_noise_power(beamspace::sort_powers(ps), cfg) ==
                  doctest::Approx(c * a3).epsilon(1e-9));
        }
    }
}
