#include <doctest.h>

#include <beamsnr/channel.hpp>
#include <beamsnr/rng.hpp>

#include <cmath>
#include <set>

using namespace beamsnr;
using namespace beamsnr::channel;

TEST_CASE("steering vector closed forms") {
    const cvec a0 = steering_vector(0.0, 4);
    for (const auto& v : a0) {
        CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(v.imag() == doctest::Approx(0.0).epsilon(1e-15));
    }

    const cvec a1 = steering_vector(1.0, 2);
    CHECK(std::abs(a1[0] - cplx{1, 0}) < 1e-12);
    CHECK(std::abs(a1[1] - cplx{-1, 0}) < 1e-12);

    // oracle: direct evaluation of exp(-j*pi*phi*m)
    const cvec a = steering_vector(0.5, 4);
    for (int m = 0; m < 4; ++m) {
        const cplx want = std::polar(1.0, -M_PI * 0.5 * m);
        CHECK(std::abs(a[size_t(m)] - want) < 1e-12);
    }
    CHECK(std::abs(a[1] - cplx{0, -1}) < 1e-12);
    CHECK(std::abs(a[2] - cplx{-1, 0}) < 1e-12);
    CHECK(std::abs(a[3] - cplx{0, 1}) < 1e-12);
}

TEST_CASE("steering vector entries are unit modulus") {
    Rng rng(11);
    for (int it = 0; it < 200; ++it) {
        const double phi = rng.uniform(-1.0, 1.0);
        for (const auto& v : steering_vector(phi, 16))
            CHECK(std::abs(std::abs(v) - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(steering_vector(std::nan(""), 4), std::invalid_argument);
    CHECK_THROWS_AS(steering_vector(0.0, 0), std::invalid_argument);
}

TEST_CASE("channel composition") {
    const cvec ones = compose_channel({cplx{1, 0}}, {0.0}, 4);
    for (const auto& v : ones) CHECK(std::abs(v - cplx{1, 0}) < 1e-12);

    const cvec two = compose_channel({cplx{1, 0}, cplx{1, 0}}, {0.0, 1.0}, 2);
    CHECK(std::abs(two[0] - cplx{2, 0}) < 1e-12);
    CHECK(std::abs(two[1] - cplx{0, 0}) < 1e-12);
}

TEST_CASE("synth_channel is deterministic per seed") {
    ChannelConfig cfg;
    cfg.num_antennas = 16;
    cfg.num_paths = 3;
    Rng r1(77), r2(77);
    const cvec h1 = synth_channel(cfg, r1);
    const cvec h2 = synth_channel(cfg, r2);
    REQUIRE(h1.size() == h2.size());
    for (size_t i = 0; i < h1.size(); ++i) CHECK(h1[i] == h2[i]);

    ChannelConfig bad = cfg;
    bad.num_paths = 5; // > M/4
    Rng r3(1);
    CHECK_THROWS_AS(synth_channel(bad, r3), std::invalid_argument);
}

TEST_CASE("scale_to_snr pins the realized average signal power") {
    const cvec h(4, cplx{1, 0});
    const cvec x = scale_to_snr(h, cplx{1, 0}, 1.0, 1.0);
    double norm2 = 0;
    for (const auto& v : x) norm2 += std::norm(v);
    CHECK(norm2 == doctest::Approx(4.0).epsilon(1e-12));

    const cvec zero = scale_to_snr(h, cplx{1, 0}, 0.0, 1.0);
    for (const auto& v : zero) CHECK(std::abs(v) == 0.0);

    Rng rng(5);
    for (int it = 0; it < 50; ++it) {
        cvec hr(8);
        for (auto& v : hr) v = rng.cgaussian(1.0);
        const cvec xs = scale_to_snr(hr, random_qpsk(rng), 4.0, 1.0);
        double p = 0;
        for (const auto& v : xs) p += std::norm(v);
        CHECK(p / 8.0 == doctest::Approx(4.0).epsilon(1e-12));
    }

    const cvec null_h(4, cplx{0, 0});
    CHECK_THROWS_AS(scale_to_snr(null_h, cplx{1, 0}, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("add_awgn basics") {
    const cvec x(8, cplx{1, 2});
    Rng rng(3);
    const cvec y0 = add_awgn(x, 0.0, rng);
    for (size_t i = 0; i < x.size(); ++i) CHECK(y0[i] == x[i]);

    Rng ra(9), rb(9);
    const cvec ya = add_awgn(x, 1.0, ra);
    const cvec yb = add_awgn(x, 1.0, rb);
    for (size_t i = 0; i < x.size(); ++i) CHECK(ya[i] == yb[i]);

    Rng rc(1);
    CHECK_THROWS_AS(add_awgn(x, -0.5, rc), std::invalid_argument);
}

TEST_CASE("add_awgn empirical noise power matches N0") {
    const int M = 64;
    const cvec x(static_cast<size_t>(M), cplx{0, 0});
    Rng rng(2024);
    double acc = 0.0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        const cvec y = add_awgn(x, 1.0, rng);
        double p = 0;
        for (const auto& v : y) p += std::norm(v);
        acc += p / M;
    }
    CHECK(std::abs(acc / trials - 1.0) < 0.01);
}

TEST_CASE("ideal sparse signal construction") {
    Rng rng(8);
    IdealSparseSpec s0{8, 0, 100.0};
    const auto z = ideal_sparse_signal(s0, rng);
    CHECK(z.signal_index.empty());
    CHECK(z.noise_index.size() == 8);
    for (const auto& v : z.x) CHECK(std::abs(v) == 0.0);

    IdealSparseSpec s2{8, 2, 100.0};
    const auto g = ideal_sparse_signal(s2, rng);
    CHECK(g.signal_index.size() == 2);
    int nonzero = 0;
    for (const auto& v : g.x)
        if (std::abs(v) > 0) {
            ++nonzero;
            CHECK(std::norm(v) == doctest::Approx(100.0).epsilon(1e-12));
        }
    CHECK(nonzero == 2);

    IdealSparseSpec bad{4, 5, 1.0};
    CHECK_THROWS_AS(ideal_sparse_signal(bad, rng), std::invalid_argument);
}

TEST_CASE("ideal sparse signal support properties") {
    Rng rng(404);
    for (int it = 0; it < 1000; ++it) {
        const int M = 4 << rng.uniform_int(5); // 4..64
        const int k = int(rng.uniform_int(uint32_t(M + 1)));
        IdealSparseSpec spec{M, k, 1.0 + rng.uniform01() * 99.0};
        const auto sig = ideal_sparse_signal(spec, rng);
        int nonzero = 0;
        for (const auto& v : sig.x)
            if (std::abs(v) > 0) ++nonzero;
        CHECK(nonzero == k);
        CHECK(int(sig.signal_index.size()) == k);
        CHECK(int(sig.noise_index.size()) == M - k);
        std::set<int> all(sig.signal_index.begin(), sig.signal_index.end());
        all.insert(sig.noise_index.begin(), sig.noise_index.end());
        CHECK(int(all.size()) == M); // disjoint cover of 0..M-1
        CHECK(*all.begin() == 0);
        CHECK(*all.rbegin() == M - 1);
    }
}
