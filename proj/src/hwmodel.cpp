#include <beamsnr/hwmodel.hpp>

#include <beamsnr/beamspace.hpp>

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace beamsnr::hw {

FxValue fx_quantize(double x, FxFormat fmt, FxStats* stats) {
    // round half away from zero
    double r = std::floor(std::abs(x) * std::ldexp(1.0, fmt.frac_bits) + 0.5);
    if (x < 0.0) r = -r;
    int64_t raw = int64_t(r);
    if (raw > fmt.max_raw()) {
        raw = fmt.max_raw();
        if (stats) ++stats->saturations;
    } else if (raw < fmt.min_raw()) {
        raw = fmt.min_raw();
        if (stats) ++stats->saturations;
    }
    return {raw, fmt};
}

ReciprocalLut::ReciprocalLut(int num_elements) {
    if (num_elements < 1) throw std::invalid_argument("ReciprocalLut: need M >= 1");
    entries_.resize(static_cast<size_t>(num_elements));
    for (int m = 1; m <= num_elements; ++m)
        entries_[size_t(m - 1)] = uint32_t((131072u + uint32_t(m)) / (2u * uint32_t(m)));
}

ShiftSchedule to_shifts(const estimator::ThresholdSchedule& schedule) {
    auto exact_log2 = [](double g) {
        const double l = std::log2(g);
        if (l != std::floor(l) || std::abs(l) > 30)
            throw std::invalid_argument("to_shifts: schedule level is not a usable power of two");
        return int(l);
    };
    ShiftSchedule s;
    s.z1 = exact_log2(schedule.gamma1);
    s.z2 = exact_log2(schedule.gamma2);
    s.z3 = exact_log2(schedule.gamma3);
    s.m1 = schedule.m1;
    s.m2 = schedule.m2;
    s.num_elements = schedule.num_elements;
    return s;
}

std::vector<uint32_t> fx_front_end(const cvec& y, FxStats& stats, std::ostream* trace) {
    const int M = int(y.size());
    if (!is_power_of_two(M)) throw std::invalid_argument("fx_front_end: M must be a power of two");
    const int log2m = int_log2(M);

    cvec yq(static_cast<size_t>(M));
    for (int m = 0; m < M; ++m) {
        const FxValue re = fx_quantize(y[size_t(m)].real(), kAntennaFmt, &stats);
        const FxValue im = fx_quantize(y[size_t(m)].imag(), kAntennaFmt, &stats);
        yq[size_t(m)] = {re.value(), im.value()};
    }

    // per-stage halving in the streaming core totals 1/M: unnormalized DFT / M
    const cvec bu = beamspace::dft_unitary(yq);
    const double scale = 1.0 / std::sqrt(double(M));

    std::vector<uint32_t> powers(static_cast<size_t>(M));
    for (int k = 0; k < M; ++k) {
        const cplx b = bu[size_t(k)] * scale;
        const FxValue re = fx_quantize(b.real(), kBeamFmt, &stats);
        const FxValue im = fx_quantize(b.imag(), kBeamFmt, &stats);
        // re^2+im^2 in 2^-16 units, shifted log2(M) bits back to the unitary
        // power scale, rounded half up into Q16.8
        const int64_t p16 = (re.raw * re.raw + im.raw * im.raw) << log2m;
        int64_t praw = (p16 + 128) >> 8;
        bool sat = false;
        if (praw > kPowerFmt.max_raw()) {
            praw = kPowerFmt.max_raw();
            ++stats.saturations;
            sat = true;
        }
        powers[size_t(k)] = uint32_t(praw);
        ++stats.steps;
        if (trace)
            *trace << "step " << stats.steps << " fe k=" << k << " re=" << re.raw
                   << " im=" << im.raw << " p=" << praw << " sat=" << int(sat) << "\n";
    }
    return powers;
}

std::vector<uint32_t> fx_systolic_sort(const std::vector<uint32_t>& stream, FxStats& stats,
                                       std::ostream* trace) {
    const int M = int(stream.size());
    std::vector<uint32_t> reg(static_cast<size_t>(M), 0);
    std::vector<char> valid(static_cast<size_t>(M), 0);
    std::vector<uint32_t> inflight(size_t(M) + 1, 0);
    std::vector<char> pending(size_t(M) + 1, 0);

    int fed = 0;
    int in_flight = 0;
    // load + flush: one new sample per step during loading, each stage keeps
    // the smaller value and forwards the larger one stage per step
    while (fed < M || in_flight > 0) {
        if (fed < M) {
            inflight[0] = stream[size_t(fed)];
            pending[0] = 1;
            ++fed;
            ++in_flight;
        }
        for (int i = M - 1; i >= 0; --i) {
            if (!pending[size_t(i)]) continue;
            pending[size_t(i)] = 0;
            const uint32_t x = inflight[size_t(i)];
            if (!valid[size_t(i)]) {
                reg[size_t(i)] = x;
                valid[size_t(i)] = 1;
                --in_flight;
            } else if (x < reg[size_t(i)]) {
                inflight[size_t(i) + 1] = reg[size_t(i)];
                pending[size_t(i) + 1] = 1;
                reg[size_t(i)] = x;
            } else {
                inflight[size_t(i) + 1] = x;
                pending[size_t(i) + 1] = 1;
            }
        }
        ++stats.steps;
    }
    // output phase, one element per step
    for (int i = 0; i < M; ++i) {
        ++stats.steps;
        if (trace) *trace << "step " << stats.steps << " sort i=" << i << " v=" << reg[size_t(i)] << "\n";
    }
    return reg;
}

FxSeparation fx_separating_unit(const std::vector<uint32_t>& sorted_raw,
                                const ShiftSchedule& shifts, const ReciprocalLut& lut,
                                FxStats& stats, std::ostream* trace) {
    const int M = int(sorted_raw.size());
    if (M < 1) throw std::invalid_argument("fx_separating_unit: empty stream");
    if (lut.size() < M) throw std::invalid_argument("fx_separating_unit: LUT smaller than M");

    FxSeparation r;
    uint64_t s = 0;
    for (int m = 1; m <= M; ++m) {
        s += sorted_raw[size_t(m - 1)];
        if (s > uint64_t(kSumFmt.max_raw())) {
            s = uint64_t(kSumFmt.max_raw());
            stats.accum_overflow = true;
        }
        bool fired = false;
        if (m < M && !r.hit) {
            const uint64_t delta = sorted_raw[size_t(m)] - sorted_raw[size_t(m - 1)];
            const int z = shifts.shift(m);
            // 64-bit operands keep the shift-based test exact: |z| <= 30
            // (to_shifts), S <= 2^32-1 (accumulator), m*delta < 2^28
            const uint64_t lhs = (uint64_t(m) * delta) << (z < 0 ? -z : 0);
            const uint64_t rhs = s << (z > 0 ? z : 0);
            if (s > 0 && lhs >= rhs) {
                r.hit = true;
                r.m_star = m;
                r.s_mstar_raw = s;
                fired = true;
            }
        }
        ++stats.steps;
        if (trace)
            *trace << "step " << stats.steps << " sep m=" << m << " S=" << s
                   << " hit=" << int(fired) << "\n";
    }
    r.s_total_raw = s;
    if (!r.hit) {
        r.m_star = M;
        r.s_mstar_raw = s;
    }

    // N0 = S_{m*} * (1/m*) from the LUT, product >> 16 rounded half up
    const uint64_t prod = r.s_mstar_raw * uint64_t(lut.entry(r.m_star));
    uint64_t n0 = (prod + (uint64_t(1) << 15)) >> 16;
    if (n0 > uint64_t(kPowerFmt.max_raw())) {
        n0 = uint64_t(kPowerFmt.max_raw());
        ++stats.saturations;
    }
    r.n0_raw = uint32_t(n0);
    ++stats.steps;
    if (trace)
        *trace << "step " << stats.steps << " sep mstar=" << r.m_star << " n0=" << r.n0_raw
               << " SM=" << r.s_total_raw << "\n";
    return r;
}

FxSignalSnr fx_signal_snr_unit(uint64_t s_total_raw, uint32_t n0_raw, int log2_m,
                               FxStats& stats) {
    if (log2_m < 0) throw std::invalid_argument("fx_signal_snr_unit: log2_m must be >= 0");
    FxSignalSnr out;
    const uint64_t avg = s_total_raw >> log2_m; // division by M as a right shift
    uint64_t px = avg > n0_raw ? avg - n0_raw : 0;
    if (px > uint64_t(kPowerFmt.max_raw())) {
        px = uint64_t(kPowerFmt.max_raw());
        ++stats.saturations;
    }
    out.px_raw = uint32_t(px);

    uint64_t rho;
    if (n0_raw == 0) {
        rho = px > 0 ? uint64_t(kSnrFmt.max_raw()) : 0;
        if (px > 0) ++stats.saturations;
    } else {
        rho = (px << 8) / n0_raw; // truncation toward zero
        if (rho > uint64_t(kSnrFmt.max_raw())) {
            rho = uint64_t(kSnrFmt.max_raw());
            ++stats.saturations;
        }
    }
    out.rho_raw = uint32_t(rho);
    ++stats.steps;
    return out;
}

FxEstimate fx_pipeline_estimate(const cvec& y, const ShiftSchedule& shifts,
                                const ReciprocalLut& lut, std::ostream* trace) {
    FxEstimate out;
    const auto powers = fx_front_end(y, out.stats, trace);
    const auto sorted = fx_systolic_sort(powers, out.stats, trace);
    const auto sep = fx_separating_unit(sorted, shifts, lut, out.stats, trace);
    const auto ss = fx_signal_snr_unit(sep.s_total_raw, sep.n0_raw, int_log2(int(y.size())), out.stats);
    out.n0 = {int64_t(sep.n0_raw), kPowerFmt};
    out.px = {int64_t(ss.px_raw), kPowerFmt};
    out.rho = {int64_t(ss.rho_raw), kSnrFmt};
    out.s_total = {int64_t(sep.s_total_raw), kSumFmt};
    out.m_star = sep.m_star;
    out.hit = sep.hit;
    if (trace)
        *trace << "step " << out.stats.steps << " out n0=" << sep.n0_raw << " px=" << ss.px_raw
               << " rho=" << ss.rho_raw << " mstar=" << sep.m_star << " sat="
               << out.stats.saturations << "\n";
    return out;
}

} // namespace beamsnr::hw
