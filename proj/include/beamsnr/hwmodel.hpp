#ifndef BEAMSNR_HWMODEL_HPP
#define BEAMSNR_HWMODEL_HPP

#include <beamsnr/estimator.hpp>
#include <beamsnr/types.hpp>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace beamsnr::hw {

// Two's-complement (or unsigned) fixed-point format descriptor.
struct FxFormat {
    int total_bits;
    int frac_bits;
    bool is_signed;

    constexpr int64_t max_raw() const {
        return is_signed ? (int64_t(1) << (total_bits - 1)) - 1
                         : (int64_t(1) << total_bits) - 1;
    }
    constexpr int64_t min_raw() const {
        return is_signed ? -(int64_t(1) << (total_bits - 1)) : 0;
    }
    double lsb() const { return std::ldexp(1.0, -frac_bits); }
    double to_value(int64_t raw) const { return std::ldexp(double(raw), -frac_bits); }
};

// Datapath word lengths: antenna I/Q Q16.8, beamspace I/Q Q10.8 (FFT scaling),
// powers and estimates Q16.8 unsigned, SNR Q24.8 unsigned. The running power
// sum is carried in the 32-bit accumulator format.
inline constexpr FxFormat kAntennaFmt{16, 8, true};
inline constexpr FxFormat kBeamFmt{10, 8, true};
inline constexpr FxFormat kPowerFmt{16, 8, false};
inline constexpr FxFormat kSumFmt{32, 8, false};
inline constexpr FxFormat kSnrFmt{24, 8, false};

struct FxValue {
    int64_t raw = 0;
    FxFormat format{16, 8, true};
    double value() const { return format.to_value(raw); }
};

struct FxStats {
    long saturations = 0;     // values clipped at a quantizer or port
    bool accum_overflow = false;
    long steps = 0;           // pipeline step counter, relative comparisons only

    void merge(const FxStats& o) {
        saturations += o.saturations;
        accum_overflow = accum_overflow || o.accum_overflow;
        steps += o.steps;
    }
};

// Round half away from zero, saturate at the format bounds (counted).
FxValue fx_quantize(double x, FxFormat fmt, FxStats* stats = nullptr);

// Precomputed 1/m table, m = 1..M, unsigned with 16 fractional bits in an
// 18-bit word; entry(1) = 2^16 exactly, entries strictly decreasing.
class ReciprocalLut {
public:
    explicit ReciprocalLut(int num_elements);
    uint32_t entry(int m) const { return entries_.at(size_t(m - 1)); }
    int size() const { return int(entries_.size()); }

private:
    std::vector<uint32_t> entries_;
};

// Per-interval shift amounts z_i with gamma_i = 2^{z_i}.
struct ShiftSchedule {
    int z1 = 0, z2 = 0, z3 = 0;
    int m1 = 0, m2 = 0;
    int num_elements = 0;

    int shift(int m) const { return m <= m1 ? z1 : (m <= m2 ? z2 : z3); }
};

// Exact conversion; the schedule levels are powers of two by construction.
ShiftSchedule to_shifts(const estimator::ThresholdSchedule& schedule);

// Scaled streaming DFT front end: per-stage halving (total 1/M), beamspace
// quantized to Q10.8, element-wise re^2+im^2 with a log2(M)-bit left shift
// restoring the unitary power scale, emitted as Q16.8 powers.
std::vector<uint32_t> fx_front_end(const cvec& y, FxStats& stats,
                                   std::ostream* trace = nullptr);

// Systolic insertion sorter: cascade of compare-and-keep-smaller stages with
// load, flush and output phases, one comparison per stage per step.
std::vector<uint32_t> fx_systolic_sort(const std::vector<uint32_t>& stream, FxStats& stats,
                                       std::ostream* trace = nullptr);

struct FxSeparation {
    uint32_t n0_raw = 0;    // Q16.8
    uint64_t s_mstar_raw = 0;
    uint64_t s_total_raw = 0;
    int m_star = 0;
    bool hit = false;
};

// Streaming accumulation of S_m with the shift-based hit test
// m*Delta_m >= S_m << z (first hit, S_m > 0); N0 = S_{m*} * lut(m*) >> 16
// rounded half up. Hit-test operands are evaluated in 64-bit integers.
FxSeparation fx_separating_unit(const std::vector<uint32_t>& sorted_raw,
                                const ShiftSchedule& shifts, const ReciprocalLut& lut,
                                FxStats& stats, std::ostream* trace = nullptr);

struct FxSignalSnr {
    uint32_t px_raw = 0;  // Q16.8
    uint32_t rho_raw = 0; // Q24.8
};

// Px = max(S_M >> log2M - N0, 0); rho = (Px << 8) / N0 truncated toward zero,
// saturating to format max when N0 == 0 and Px > 0.
FxSignalSnr fx_signal_snr_unit(uint64_t s_total_raw, uint32_t n0_raw, int log2_m,
                               FxStats& stats);

struct FxEstimate {
    FxValue n0;
    FxValue px;
    FxValue rho;
    FxValue s_total;
    int m_star = 0;
    bool hit = false;
    FxStats stats;
};

FxEstimate fx_pipeline_estimate(const cvec& y, const ShiftSchedule& shifts,
                                const ReciprocalLut& lut, std::ostream* trace = nullptr);

} // namespace beamsnr::hw

#endif
