#ifndef BEAMSNR_TYPES_HPP
#define BEAMSNR_TYPES_HPP

#include <complex>
#include <vector>

namespace beamsnr {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline int int_log2(int n) {
    int z = 0;
    while ((1 << z) < n) ++z;
    return z;
}

inline double to_db(double x) { return 10.0 * std::log10(x); }
inline double from_db(double x) { return std::pow(10.0, x / 10.0); }

} // namespace beamsnr

#endif
