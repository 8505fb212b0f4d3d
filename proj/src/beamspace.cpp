#include <beamsnr/beamspace.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace beamsnr::beamspace {

namespace {

// iterative radix-2 decimation-in-time FFT, kernel exp(-j*2*pi*k*m/M)
void fft_pow2_inplace(cvec& a) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / double(len);
        const cplx wlen = std::polar(1.0, ang);
        for (size_t i = 0; i < n; i += len) {
            cplx w{1.0, 0.0};
            for (size_t k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

cvec dft_direct(const cvec& y) {
    const size_t n = y.size();
    cvec out(n, cplx{0.0, 0.0});
    for (size_t k = 0; k < n; ++k) {
        cplx acc{0.0, 0.0};
        for (size_t m = 0; m < n; ++m)
            acc += y[m] * std::polar(1.0, -2.0 * M_PI * double(k) * double(m) / double(n));
        out[k] = acc;
    }
    return out;
}

} // namespace

cvec dft_unitary(const cvec& y) {
    if (y.empty()) throw std::invalid_argument("dft_unitary: empty input");
    cvec out;
    if (is_power_of_two(int(y.size()))) {
        out = y;
        fft_pow2_inplace(out);
    } else {
        out = dft_direct(y);
    }
    const double scale = 1.0 / std::sqrt(double(y.size()));
    for (auto& v : out) v *= scale;
    return out;
}

SortedPowerVector power_sort(const cvec& ybar) {
    std::vector<double> p(ybar.size());
    for (size_t m = 0; m < ybar.size(); ++m) p[m] = std::norm(ybar[m]);
    return sort_powers(std::move(p));
}

SortedPowerVector sort_powers(std::vector<double> powers) {
    std::sort(powers.begin(), powers.end());
    SortedPowerVector out;
    out.values = std::move(powers);
    double total = 0.0;
    for (double v : out.values) total += v;
    out.total = total;
    return out;
}

} // namespace beamsnr::beamspace
