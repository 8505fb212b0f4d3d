#include <beamsnr/channel.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace beamsnr::channel {

void ChannelConfig::validate() const {
    if (num_antennas < 2 || !is_power_of_two(num_antennas))
        throw std::invalid_argument("ChannelConfig: num_antennas must be a power of two >= 2");
    if (num_paths < 1 || num_paths > num_antennas / 4)
        throw std::invalid_argument("ChannelConfig: need 1 <= num_paths <= num_antennas/4");
    if (!(gain_decay > 0.0) || gain_decay > 1.0)
        throw std::invalid_argument("ChannelConfig: gain_decay must be in (0, 1]");
    if (!(phi_lo < phi_hi) || !std::isfinite(phi_lo) || !std::isfinite(phi_hi))
        throw std::invalid_argument("ChannelConfig: invalid phi range");
    if (grid_offset_max < 0.0 || grid_offset_max > 0.5)
        throw std::invalid_argument("ChannelConfig: grid_offset_max must be in [0, 0.5]");
}

cvec steering_vector(double phi, int num_antennas) {
    if (num_antennas < 1) throw std::invalid_argument("steering_vector: num_antennas >= 1");
    if (!std::isfinite(phi)) throw std::invalid_argument("steering_vector: phi must be finite");
    cvec a(static_cast<size_t>(num_antennas));
    for (int m = 0; m < num_antennas; ++m)
        a[size_t(m)] = std::polar(1.0, -M_PI * phi * m);
    return a;
}

cvec compose_channel(const std::vector<cplx>& gains, const std::vector<double>& phis,
                     int num_antennas) {
    if (gains.size() != phis.size())
        throw std::invalid_argument("compose_channel: gains/phis size mismatch");
    cvec h(static_cast<size_t>(num_antennas), cplx{0.0, 0.0});
    for (size_t l = 0; l < gains.size(); ++l) {
        const cvec a = steering_vector(phis[l], num_antennas);
        for (size_t m = 0; m < h.size(); ++m) h[m] += gains[l] * a[m];
    }
    return h;
}

cvec synth_channel(const ChannelConfig& cfg, Rng& rng) {
    cfg.validate();
    const int L = cfg.num_paths;
    const int M = cfg.num_antennas;

    // unit-power profile with geometric decay
    std::vector<double> profile(static_cast<size_t>(L));
    double total = 0.0;
    for (int l = 0; l < L; ++l) {
        profile[size_t(l)] = std::pow(cfg.gain_decay, l);
        total += profile[size_t(l)];
    }
    for (auto& p : profile) p /= total;

    std::vector<double> phis(static_cast<size_t>(L));
    std::vector<cplx> gains(static_cast<size_t>(L));
    const double beam_width = 2.0 / M;
    for (int l = 0; l < L; ++l) {
        if (cfg.grid_offset_max >= 0.5) {
            phis[size_t(l)] = rng.uniform(cfg.phi_lo, cfg.phi_hi);
        } else {
            const int cell = int(rng.uniform_int(uint32_t(M)));
            double off = 0.0;
            if (cfg.grid_offset_max > 0.0)
                off = rng.uniform(-cfg.grid_offset_max, cfg.grid_offset_max);
            phis[size_t(l)] = -1.0 + (cell + off) * beam_width;
        }
        gains[size_t(l)] = rng.cgaussian(profile[size_t(l)]);
    }
    return compose_channel(gains, phis, M);
}

cplx random_qpsk(Rng& rng) {
    static const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
    switch (rng.uniform_int(4)) {
        case 0: return {kInvSqrt2, kInvSqrt2};
        case 1: return {-kInvSqrt2, kInvSqrt2};
        case 2: return {-kInvSqrt2, -kInvSqrt2};
        default: return {kInvSqrt2, -kInvSqrt2};
    }
}

cvec scale_to_snr(const cvec& h, cplx symbol, double rho, double n0) {
    if (rho < 0.0) throw std::invalid_argument("scale_to_snr: rho must be >= 0");
    if (!(n0 > 0.0)) throw std::invalid_argument("scale_to_snr: n0 must be > 0");
    double norm2 = 0.0;
    for (const auto& v : h) norm2 += std::norm(v);
    if (!(norm2 > 0.0)) throw std::invalid_argument("scale_to_snr: zero channel vector");
    const double target = double(h.size()) * rho * n0; // ||x||^2
    const double c = std::sqrt(target / norm2);
    cvec x(h.size());
    for (size_t m = 0; m < h.size(); ++m) x[m] = c * h[m] * symbol;
    return x;
}

cvec add_awgn(const cvec& x, double n0, Rng& rng) {
    if (n0 < 0.0) throw std::invalid_argument("add_awgn: n0 must be >= 0");
    cvec y(x.size());
    if (n0 == 0.0) return x;
    for (size_t m = 0; m < x.size(); ++m) y[m] = x[m] + rng.cgaussian(n0);
    return y;
}

void IdealSparseSpec::validate() const {
    if (num_elements < 1) throw std::invalid_argument("IdealSparseSpec: num_elements >= 1");
    if (num_nonzero < 0 || num_nonzero > num_elements)
        throw std::invalid_argument("IdealSparseSpec: need 0 <= num_nonzero <= num_elements");
    if (num_nonzero > 0 && !(entry_power > 0.0))
        throw std::invalid_argument("IdealSparseSpec: entry_power must be > 0");
}

IdealSparseSignal ideal_sparse_signal(const IdealSparseSpec& spec, Rng& rng) {
    spec.validate();
    IdealSparseSignal out;
    out.x.assign(static_cast<size_t>(spec.num_elements), cplx{0.0, 0.0});

    // partial Fisher-Yates for k distinct indices
    std::vector<int> idx(static_cast<size_t>(spec.num_elements));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < spec.num_nonzero; ++i) {
        const int j = i + int(rng.uniform_int(uint32_t(spec.num_elements - i)));
        std::swap(idx[size_t(i)], idx[size_t(j)]);
    }
    out.signal_index.assign(idx.begin(), idx.begin() + spec.num_nonzero);
    std::sort(out.signal_index.begin(), out.signal_index.end());
    out.noise_index.assign(idx.begin() + spec.num_nonzero, idx.end());
    std::sort(out.noise_index.begin(), out.noise_index.end());

    const double mag = std::sqrt(spec.entry_power);
    for (int i : out.signal_index)
        out.x[size_t(i)] = std::polar(mag, rng.uniform(0.0, 2.0 * M_PI));
    return out;
}

} // namespace beamsnr::channel
