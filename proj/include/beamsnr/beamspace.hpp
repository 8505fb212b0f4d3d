#ifndef BEAMSNR_BEAMSPACE_HPP
#define BEAMSNR_BEAMSPACE_HPP

#include <beamsnr/types.hpp>

#include <vector>

namespace beamsnr::beamspace {

// Element-wise squared magnitudes in ascending order plus their sum.
struct SortedPowerVector {
    std::vector<double> values; // non-decreasing, >= 0
    double total = 0.0;         // S_M = sum of values = ||ybar||^2
};

// Unitary DFT, kernel exp(-j*2*pi*k*m/M)/sqrt(M). Radix-2 FFT for power-of-two
// sizes, direct evaluation otherwise.
cvec dft_unitary(const cvec& y);

SortedPowerVector power_sort(const cvec& ybar);

// Builds a SortedPowerVector from already-computed powers (sorts ascending).
SortedPowerVector sort_powers(std::vector<double> powers);

} // namespace beamsnr::beamspace

#endif
