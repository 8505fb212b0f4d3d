#ifndef BEAMSNR_CHANNEL_HPP
#define BEAMSNR_CHANNEL_HPP

#include <beamsnr/rng.hpp>
#include <beamsnr/types.hpp>

#include <vector>

namespace beamsnr::channel {

// Multipath geometry for the uplink channel h = sum_l g_l * a(phi_l).
//
// Path gains are circular Gaussian with geometric power decay across paths,
// normalized to unit total mean power. Spatial frequencies are placed on the
// M-point beamspace grid plus a uniform offset of up to grid_offset_max beam
// widths; grid_offset_max = 0.5 is equivalent to phi uniform on phi_range.
struct ChannelConfig {
    int num_antennas = 64; // M, power of two
    int num_paths = 3;     // L
    double gain_decay = 0.5;
    double phi_lo = -1.0;
    double phi_hi = 1.0;
    double grid_offset_max = 0.0;

    void validate() const; // throws std::invalid_argument
};

// element m is exp(-j*pi*phi*m), m = 0..M-1
cvec steering_vector(double phi, int num_antennas);

// h = sum_l gains[l] * a(phis[l])
cvec compose_channel(const std::vector<cplx>& gains, const std::vector<double>& phis,
                     int num_antennas);

cvec synth_channel(const ChannelConfig& cfg, Rng& rng);

// a uniformly random unit-modulus QPSK symbol, {(+-1 +-j)/sqrt(2)}
cplx random_qpsk(Rng& rng);

// x = c*h*s with c > 0 chosen so that (1/M)||x||^2 == rho * n0 exactly
// for this realization.
cvec scale_to_snr(const cvec& h, cplx symbol, double rho, double n0);

// y = x + n, n circular complex Gaussian with per-element variance n0
cvec add_awgn(const cvec& x, double n0, Rng& rng);

struct IdealSparseSpec {
    int num_elements = 64; // M
    int num_nonzero = 4;   // k
    double entry_power = 100.0;

    void validate() const;
};

struct IdealSparseSignal {
    cvec x;                         // beamspace-domain, exactly k nonzero entries
    std::vector<int> signal_index;  // I_s
    std::vector<int> noise_index;   // I_n
};

IdealSparseSignal ideal_sparse_signal(const IdealSparseSpec& spec, Rng& rng);

} // namespace beamsnr::channel

#endif
