#include <beamsnr/harness.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace beamsnr::harness {

using json = nlohmann::json;

namespace {

std::string fmt_double(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

double pairwise_sum(const double* v, size_t n) {
    if (n <= 32) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return pairwise_sum(v.data(), v.size()) / double(v.size());
}

double lower_median_of(std::vector<double> v) {
    const size_t k = (v.size() - 1) / 2;
    std::nth_element(v.begin(), v.begin() + ptrdiff_t(k), v.end());
    return v[k];
}

double rmse_vs(const std::vector<double>& v, double truth) {
    if (v.empty()) return 0.0;
    std::vector<double> sq(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        const double e = v[i] - truth;
        sq[i] = e * e;
    }
    return std::sqrt(mean_of(sq));
}

void parallel_trials(int trials, int threads, const std::function<void(int)>& body) {
    if (threads <= 1) {
        for (int t = 0; t < trials; ++t) body(t);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            try {
                for (;;) {
                    const int t = next.fetch_add(64);
                    if (t >= trials) return;
                    const int hi = std::min(t + 64, trials);
                    for (int i = t; i < hi; ++i) body(i);
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(trials); // stop the other workers
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::ProposedDynamic: return "proposed_dynamic";
        case EstimatorKind::ProposedFixed: return "proposed_fixed";
        case EstimatorKind::Oracle: return "oracle";
        case EstimatorKind::Mad: return "mad";
        case EstimatorKind::MadRefined: return "mad_refined";
        case EstimatorKind::TruncatedMean: return "truncated_mean";
        case EstimatorKind::FxPipeline: return "fx_pipeline";
    }
    return "unknown";
}

EstimatorKind estimator_from_string(const std::string& name) {
    for (EstimatorKind k : all_estimators())
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown estimator '" + name + "'");
}

std::vector<EstimatorKind> all_estimators() {
    return {EstimatorKind::ProposedDynamic, EstimatorKind::ProposedFixed, EstimatorKind::Oracle,
            EstimatorKind::Mad, EstimatorKind::MadRefined, EstimatorKind::TruncatedMean,
            EstimatorKind::FxPipeline};
}

SweepConfig::SweepConfig() {
    for (int db = -10; db <= 30; db += 2) snr_grid.push_back(double(db));
}

void SweepConfig::validate() const {
    if (!is_power_of_two(M) || M < 4)
        throw std::invalid_argument("SweepConfig: M must be a power of two >= 4");
    if (L < 1 || L > M / 4) throw std::invalid_argument("SweepConfig: need 1 <= L <= M/4");
    if (snr_grid.empty()) throw std::invalid_argument("SweepConfig: snr_grid must be non-empty");
    if (trials < 1) throw std::invalid_argument("SweepConfig: trials must be >= 1");
    if (estimators.empty()) throw std::invalid_argument("SweepConfig: no estimators enabled");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("SweepConfig: alpha must be in (0, 1)");
    if (!(gamma_fixed > 0.0)) throw std::invalid_argument("SweepConfig: gamma_fixed must be > 0");
    if (!(N0 > 0.0)) throw std::invalid_argument("SweepConfig: N0 must be > 0");
    if (threads < 1) throw std::invalid_argument("SweepConfig: threads must be >= 1");
    if (grid_offset_max < 0.0 || grid_offset_max > 0.5)
        throw std::invalid_argument("SweepConfig: grid_offset_max must be in [0, 0.5]");
}

SweepConfig sweep_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    SweepConfig cfg;
    for (const auto& [key, val] : j.items()) {
        if (key == "M") cfg.M = val.get<int>();
        else if (key == "L") cfg.L = val.get<int>();
        else if (key == "snr_grid") cfg.snr_grid = val.get<std::vector<double>>();
        else if (key == "trials") cfg.trials = val.get<int>();
        else if (key == "seed") cfg.seed = val.get<uint64_t>();
        else if (key == "estimators") {
            cfg.estimators.clear();
            for (const auto& name : val) cfg.estimators.push_back(estimator_from_string(name.get<std::string>()));
        } else if (key == "alpha") cfg.alpha = val.get<double>();
        else if (key == "M1") cfg.M1 = val.get<int>();
        else if (key == "M2") cfg.M2 = val.get<int>();
        else if (key == "gamma_fixed") cfg.gamma_fixed = val.get<double>();
        else if (key == "N0") cfg.N0 = val.get<double>();
        else if (key == "threads") cfg.threads = val.get<int>();
        else if (key == "grid_offset_max") cfg.grid_offset_max = val.get<double>();
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

TrialSample synth_trial(const SweepConfig& cfg, int snr_index, int trial_index) {
    Rng rng = Rng::derive(cfg.seed, uint64_t(snr_index), uint64_t(trial_index));
    channel::ChannelConfig ch;
    ch.num_antennas = cfg.M;
    ch.num_paths = cfg.L;
    ch.grid_offset_max = cfg.grid_offset_max;
    const cvec h = channel::synth_channel(ch, rng);
    const cplx sym = channel::random_qpsk(rng);
    const double rho = from_db(cfg.snr_grid[size_t(snr_index)]);
    const cvec x = channel::scale_to_snr(h, sym, rho, cfg.N0);

    TrialSample ts;
    ts.rho = rho;
    ts.noise.resize(static_cast<size_t>(cfg.M));
    ts.y.resize(static_cast<size_t>(cfg.M));
    for (int m = 0; m < cfg.M; ++m) {
        ts.noise[size_t(m)] = rng.cgaussian(cfg.N0);
        ts.y[size_t(m)] = x[size_t(m)] + ts.noise[size_t(m)];
    }
    return ts;
}

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    using clock = std::chrono::steady_clock;

    const auto dyn = estimator::build_schedule(cfg.M, cfg.alpha, cfg.M1, cfg.M2);
    const auto fixed = estimator::constant_schedule(cfg.M, cfg.gamma_fixed);
    const hw::ShiftSchedule shifts = hw::to_shifts(dyn);
    const hw::ReciprocalLut lut(cfg.M);
    const baselines::BaselineConfig bcfg;

    const size_t n_est = cfg.estimators.size();
    std::vector<SweepRecord> records;
    records.reserve(cfg.snr_grid.size() * n_est);

    for (size_t si = 0; si < cfg.snr_grid.size(); ++si) {
        // per-estimator per-trial values, filled keyed by trial index
        std::vector<std::vector<double>> n0(n_est), px(n_est), rho(n_est);
        for (size_t e = 0; e < n_est; ++e) {
            n0[e].assign(static_cast<size_t>(cfg.trials), 0.0);
            px[e].assign(static_cast<size_t>(cfg.trials), 0.0);
            rho[e].assign(static_cast<size_t>(cfg.trials), 0.0);
        }
        std::vector<std::atomic<long>> est_ns(n_est);
        for (auto& a : est_ns) a = 0;

        parallel_trials(cfg.trials, cfg.threads, [&](int t) {
            const TrialSample ts = synth_trial(cfg, int(si), t);
            const cvec ybar = beamspace::dft_unitary(ts.y);
            const auto sorted = beamspace::power_sort(ybar);
            for (size_t e = 0; e < n_est; ++e) {
                const auto t0 = clock::now();
                double vn0 = 0, vpx = 0, vrho = 0;
                switch (cfg.estimators[e]) {
                    case EstimatorKind::ProposedDynamic: {
                        const auto r = estimator::estimate_all(sorted, dyn);
                        vn0 = r.n0_hat; vpx = r.px_hat; vrho = r.rho_hat;
                        break;
                    }
                    case EstimatorKind::ProposedFixed: {
                        const auto r = estimator::estimate_all(sorted, fixed);
                        vn0 = r.n0_hat; vpx = r.px_hat; vrho = r.rho_hat;
                        break;
                    }
                    case EstimatorKind::Oracle: {
                        double npow = 0.0;
                        for (const auto& z : ts.noise) npow += std::norm(z);
                        vn0 = npow / double(cfg.M);
                        vpx = estimator::estimate_signal_power(sorted.total, vn0, cfg.M);
                        vrho = estimator::estimate_snr(vpx, vn0);
                        break;
                    }
                    case EstimatorKind::Mad: {
                        vn0 = baselines::mad_noise_power(ybar, bcfg);
                        vpx = estimator::estimate_signal_power(sorted.total, vn0, cfg.M);
                        vrho = estimator::estimate_snr(vpx, vn0);
                        break;
                    }
                    case EstimatorKind::MadRefined: {
                        vn0 = baselines::mad_refined_noise_power(ybar, bcfg);
                        vpx = estimator::estimate_signal_power(sorted.total, vn0, cfg.M);
                        vrho = estimator::estimate_snr(vpx, vn0);
                        break;
                    }
                    case EstimatorKind::TruncatedMean: {
                        vn0 = baselines::truncated_mean_noise_power(sorted, bcfg);
                        vpx = estimator::estimate_signal_power(sorted.total, vn0, cfg.M);
                        vrho = estimator::estimate_snr(vpx, vn0);
                        break;
                    }
                    case EstimatorKind::FxPipeline: {
                        const auto r = hw::fx_pipeline_estimate(ts.y, shifts, lut);
                        vn0 = r.n0.value(); vpx = r.px.value(); vrho = r.rho.value();
                        break;
                    }
                }
                n0[e][size_t(t)] = vn0;
                px[e][size_t(t)] = vpx;
                rho[e][size_t(t)] = vrho;
                est_ns[e] += std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0).count();
            }
        });

        const double snr_db = cfg.snr_grid[si];
        const double rho_true = from_db(snr_db);
        for (size_t e = 0; e < n_est; ++e) {
            SweepRecord rec;
            rec.snr_db = snr_db;
            rec.estimator = cfg.estimators[e];
            rec.trials = cfg.trials;
            rec.n0_mean = mean_of(n0[e]);
            rec.n0_median = lower_median_of(n0[e]);
            rec.n0_rmse = rmse_vs(n0[e], cfg.N0);
            rec.px_mean = mean_of(px[e]);
            rec.px_rmse = rmse_vs(px[e], rho_true * cfg.N0);

            std::vector<double> snr_vals;
            snr_vals.reserve(rho[e].size());
            for (double r : rho[e])
                if (std::isfinite(r) && r > 0.0) snr_vals.push_back(to_db(r));
            rec.dropped = long(rho[e].size() - snr_vals.size());
            if (!snr_vals.empty()) {
                rec.snr_mean_db = mean_of(snr_vals);
                rec.snr_rmse_db = rmse_vs(snr_vals, snr_db);
            }
            rec.wall_ms = double(est_ns[e].load()) * 1e-6;
            records.push_back(rec);
        }
    }
    return records;
}

void write_sweep_csv(const std::vector<SweepRecord>& records, std::ostream& out) {
    out << "snr_db,estimator,n0_mean,n0_median,n0_rmse,px_mean,px_rmse,"
           "snr_mean_db,snr_rmse_db,trials,dropped,wall_ms\n";
    for (const auto& r : records) {
        out << fmt_double(r.snr_db) << ',' << csv_field(to_string(r.estimator)) << ','
            << fmt_double(r.n0_mean) << ',' << fmt_double(r.n0_median) << ','
            << fmt_double(r.n0_rmse) << ',' << fmt_double(r.px_mean) << ','
            << fmt_double(r.px_rmse) << ',' << fmt_double(r.snr_mean_db) << ','
            << fmt_double(r.snr_rmse_db) << ',' << r.trials << ',' << r.dropped << ','
            << fmt_double(r.wall_ms) << '\n';
    }
}

void write_sweep_json(const std::vector<SweepRecord>& records, std::ostream& out) {
    json arr = json::array();
    for (const auto& r : records) {
        arr.push_back({{"snr_db", r.snr_db},
                       {"estimator", to_string(r.estimator)},
                       {"n0_mean", r.n0_mean},
                       {"n0_median", r.n0_median},
                       {"n0_rmse", r.n0_rmse},
                       {"px_mean", r.px_mean},
                       {"px_rmse", r.px_rmse},
                       {"snr_mean_db", r.snr_mean_db},
                       {"snr_rmse_db", r.snr_rmse_db},
                       {"trials", r.trials},
                       {"dropped", r.dropped},
                       {"wall_ms", r.wall_ms}});
    }
    out << arr.dump(2) << '\n';
}

OrderstatReport run_orderstat_validation(int M, double n0, long trials, uint64_t seed) {
    if (M < 2) throw std::invalid_argument("run_orderstat_validation: need M >= 2");
    if (trials < 1) throw std::invalid_argument("run_orderstat_validation: need trials >= 1");
    if (!(n0 > 0.0)) throw std::invalid_argument("run_orderstat_validation: need n0 > 0");

    const int G = M - 1; // number of gaps
    std::vector<double> sum(static_cast<size_t>(G), 0.0), sumsq(static_cast<size_t>(G), 0.0);
    std::vector<double> cross(size_t(G) * size_t(G), 0.0); // upper triangle used
    std::vector<double> delta(static_cast<size_t>(G));
    std::vector<double> powers(static_cast<size_t>(M));

    for (long t = 0; t < trials; ++t) {
        Rng rng = Rng::derive(seed, 0, uint64_t(t));
        // pure-noise beamspace sample: AWGN is invariant under the unitary DFT
        for (int m = 0; m < M; ++m) powers[size_t(m)] = std::norm(rng.cgaussian(n0));
        std::sort(powers.begin(), powers.end());
        for (int m = 0; m < G; ++m) {
            delta[size_t(m)] = powers[size_t(m + 1)] - powers[size_t(m)];
            sum[size_t(m)] += delta[size_t(m)];
            sumsq[size_t(m)] += delta[size_t(m)] * delta[size_t(m)];
        }
        for (int i = 0; i < G; ++i) {
            const double di = delta[size_t(i)];
            double* row = cross.data() + size_t(i) * size_t(G);
            for (int j = i + 1; j < G; ++j) row[j] += di * delta[size_t(j)];
        }
    }

    OrderstatReport rep;
    rep.M = M;
    rep.n0 = n0;
    rep.trials = trials;
    rep.rows.resize(static_cast<size_t>(G));
    const double n = double(trials);
    for (int m = 1; m <= G; ++m) {
        auto& row = rep.rows[size_t(m - 1)];
        row.m = m;
        row.mean = sum[size_t(m - 1)] / n;
        row.expected_mean = n0 / double(M - m);
        row.mean_se = row.expected_mean / std::sqrt(n); // Exp: sd == mean
        row.variance = sumsq[size_t(m - 1)] / n - row.mean * row.mean;
        row.expected_var = row.expected_mean * row.expected_mean;
    }

    rep.mean_ok = rep.var_ok = true;
    for (int m = 1; m <= std::min(G, M - 4); ++m) {
        const auto& row = rep.rows[size_t(m - 1)];
        if (std::abs(row.mean - row.expected_mean) > 5.0 * row.mean_se) rep.mean_ok = false;
        if (std::abs(row.variance / row.expected_var - 1.0) > 0.10) rep.var_ok = false;
    }

    rep.max_abs_corr = 0.0;
    for (int i = 0; i < G; ++i) {
        const double mi = sum[size_t(i)] / n;
        const double vi = sumsq[size_t(i)] / n - mi * mi;
        for (int j = i + 1; j < G; ++j) {
            const double mj = sum[size_t(j)] / n;
            const double vj = sumsq[size_t(j)] / n - mj * mj;
            const double cov = cross[size_t(i) * size_t(G) + size_t(j)] / n - mi * mj;
            const double r = cov / std::sqrt(vi * vj);
            rep.max_abs_corr = std::max(rep.max_abs_corr, std::abs(r));
        }
    }
    rep.corr_ok = rep.max_abs_corr <= 0.02;
    rep.pass = rep.mean_ok && rep.var_ok && rep.corr_ok;
    return rep;
}

void write_orderstat_csv(const OrderstatReport& rep, std::ostream& out) {
    out << "m,mean,expected_mean,mean_se,variance,expected_var\n";
    for (const auto& r : rep.rows)
        out << r.m << ',' << fmt_double(r.mean) << ',' << fmt_double(r.expected_mean) << ','
            << fmt_double(r.mean_se) << ',' << fmt_double(r.variance) << ','
            << fmt_double(r.expected_var) << '\n';
}

void write_orderstat_json(const OrderstatReport& rep, std::ostream& out) {
    json rows = json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"m", r.m},
                        {"mean", r.mean},
                        {"expected_mean", r.expected_mean},
                        {"mean_se", r.mean_se},
                        {"variance", r.variance},
                        {"expected_var", r.expected_var}});
    json j{{"M", rep.M},          {"n0", rep.n0},
           {"trials", rep.trials}, {"max_abs_corr", rep.max_abs_corr},
           {"mean_ok", rep.mean_ok}, {"var_ok", rep.var_ok},
           {"corr_ok", rep.corr_ok}, {"pass", rep.pass},
           {"rows", rows}};
    out << j.dump(2) << '\n';
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, int line, int col, const std::string& what) {
    std::ostringstream os;
    os << path << ": parse error at line " << line << ", column " << col << ": " << what;
    throw std::runtime_error(os.str());
}

} // namespace

cvec read_sample_file(const std::string& path, bool binary) {
    if (binary) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error(path + ": cannot open");
        in.seekg(0, std::ios::end);
        const std::streamoff bytes = in.tellg();
        in.seekg(0);
        if (bytes % 16 != 0)
            throw std::runtime_error(path + ": binary sample must be interleaved re/im "
                                            "little-endian 64-bit floats (16 bytes per element)");
        const size_t n = size_t(bytes) / 16;
        std::vector<double> raw(2 * n);
        in.read(reinterpret_cast<char*>(raw.data()), bytes);
        if (!in) throw std::runtime_error(path + ": short read");
        cvec v(n);
        for (size_t i = 0; i < n; ++i) v[i] = {raw[2 * i], raw[2 * i + 1]};
        return v;
    }

    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    cvec v;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const size_t comma = line.find(',');
        if (comma == std::string::npos)
            parse_fail(path, lineno, int(line.size()) + 1, "expected 're,im'");
        const std::string re_s = line.substr(0, comma);
        const std::string im_s = line.substr(comma + 1);
        size_t used = 0;
        double re = 0, im = 0;
        try {
            re = std::stod(re_s, &used);
        } catch (const std::exception&) {
            parse_fail(path, lineno, 1, "bad real field '" + re_s + "'");
        }
        if (re_s.find_first_not_of(" \t", used) != std::string::npos)
            parse_fail(path, lineno, int(used) + 1, "trailing junk in real field");
        try {
            im = std::stod(im_s, &used);
        } catch (const std::exception&) {
            parse_fail(path, lineno, int(comma) + 2, "bad imaginary field '" + im_s + "'");
        }
        if (im_s.find_first_not_of(" \t", used) != std::string::npos)
            parse_fail(path, lineno, int(comma) + int(used) + 2, "trailing junk in imaginary field");
        if (!std::isfinite(re) || !std::isfinite(im))
            parse_fail(path, lineno, 1, "non-finite element");
        v.emplace_back(re, im);
    }
    return v;
}

FileEstimate estimate_file(const std::string& path, const EstimateOptions& opts) {
    const cvec y = read_sample_file(path, opts.binary);
    const int M = int(y.size());
    if (M == 0) throw std::runtime_error(path + ": empty sample");
    if (!is_power_of_two(M) || M < 4)
        throw std::runtime_error(path + ": sample length " + std::to_string(M) +
                                 " violates the constraint that M is a power of two >= 4");

    const auto schedule = opts.gamma_override > 0.0
                              ? estimator::constant_schedule(M, opts.gamma_override)
                              : estimator::build_schedule(M, opts.alpha, opts.M1, opts.M2);

    FileEstimate fe;
    fe.M = M;
    const cvec ybar = beamspace::dft_unitary(y);
    const auto sorted = beamspace::power_sort(ybar);
    fe.result = estimator::estimate_all(sorted, schedule);
    if (opts.with_fx) {
        const hw::ReciprocalLut lut(M);
        std::ofstream trace;
        std::ostream* trace_ptr = nullptr;
        if (!opts.trace_path.empty()) {
            trace.open(opts.trace_path);
            if (!trace) throw std::runtime_error(opts.trace_path + ": cannot open for writing");
            trace_ptr = &trace;
        }
        fe.fx = hw::fx_pipeline_estimate(y, hw::to_shifts(schedule), lut, trace_ptr);
    }
    return fe;
}

void write_estimate_json(const FileEstimate& fe, std::ostream& out) {
    json j{{"M", fe.M},
           {"n0_hat", fe.result.n0_hat},
           {"px_hat", fe.result.px_hat},
           {"rho_hat", std::isfinite(fe.result.rho_hat) ? json(fe.result.rho_hat) : json("inf")},
           {"m_star", fe.result.boundary.m_star},
           {"hit", fe.result.boundary.hit},
           {"s_mstar", fe.result.boundary.s_mstar},
           {"s_total", fe.result.boundary.s_total}};
    if (fe.fx) {
        j["fx"] = {{"n0_raw", fe.fx->n0.raw},       {"n0", fe.fx->n0.value()},
                   {"px_raw", fe.fx->px.raw},       {"px", fe.fx->px.value()},
                   {"rho_raw", fe.fx->rho.raw},     {"rho", fe.fx->rho.value()},
                   {"m_star", fe.fx->m_star},       {"hit", fe.fx->hit},
                   {"saturations", fe.fx->stats.saturations},
                   {"steps", fe.fx->stats.steps}};
    }
    out << j.dump(2) << '\n';
}

std::vector<FxCompareRecord> run_fxcompare(const FxCompareConfig& cfg) {
    SweepConfig sc;
    sc.M = cfg.M;
    sc.L = cfg.L;
    sc.snr_grid = cfg.snr_grid;
    sc.trials = cfg.trials;
    sc.seed = cfg.seed;
    sc.alpha = cfg.alpha;
    sc.M1 = cfg.M1;
    sc.M2 = cfg.M2;
    sc.N0 = cfg.N0;
    sc.grid_offset_max = cfg.grid_offset_max;
    sc.validate();

    const auto schedule = estimator::build_schedule(cfg.M, cfg.alpha, cfg.M1, cfg.M2);
    const auto shifts = hw::to_shifts(schedule);
    const hw::ReciprocalLut lut(cfg.M);
    const double beam_limit = hw::kBeamFmt.to_value(hw::kBeamFmt.max_raw());
    const double power_limit = hw::kPowerFmt.to_value(hw::kPowerFmt.max_raw());
    const double beam_lsb = hw::kBeamFmt.lsb();
    const double power_lsb = hw::kPowerFmt.lsb();
    const double inv_sqrt_m = 1.0 / std::sqrt(double(cfg.M));

    std::vector<FxCompareRecord> records;
    for (size_t si = 0; si < cfg.snr_grid.size(); ++si) {
        FxCompareRecord rec;
        rec.snr_db = cfg.snr_grid[si];
        rec.trials = cfg.trials;
        for (int t = 0; t < cfg.trials; ++t) {
            const TrialSample ts = synth_trial(sc, int(si), t);

            hw::FxStats stats;
            const auto powers = hw::fx_front_end(ts.y, stats);
            auto sorted_fx = hw::fx_systolic_sort(powers, stats);
            std::vector<uint32_t> ref = powers;
            std::sort(ref.begin(), ref.end());
            if (ref != sorted_fx) ++rec.sort_mismatches;

            // headroom prediction from the exact front end on the raw sample.
            // The guard bands cover the worst-case transport of the antenna
            // quantization through the DFT (<= ~1.3 beam LSB, and its square
            // near the power clip edge), so any flag outside them would point
            // at clipping in the wrong place.
            bool expected_sat = false;
            {
                const cvec b = beamspace::dft_unitary(ts.y);
                for (const auto& z : b) {
                    const cplx v = z * inv_sqrt_m;
                    if (std::abs(v.real()) > beam_limit - 2.0 * beam_lsb ||
                        std::abs(v.imag()) > beam_limit - 2.0 * beam_lsb)
                        expected_sat = true;
                    if (std::norm(z) > power_limit - 512.0 * power_lsb) expected_sat = true;
                }
            }
            if (stats.saturations > 0) {
                ++rec.trials_with_saturation;
                if (!expected_sat) ++rec.unexpected_saturations;
            }

            // float reference on the same quantized power stream
            std::vector<double> pv(sorted_fx.size());
            for (size_t i = 0; i < sorted_fx.size(); ++i)
                pv[i] = hw::kPowerFmt.to_value(int64_t(sorted_fx[i]));
            beamspace::SortedPowerVector spv;
            spv.values = std::move(pv);
            for (double x : spv.values) spv.total += x;
            const auto flt = estimator::estimate_all(spv, schedule);

            const auto sep = hw::fx_separating_unit(sorted_fx, shifts, lut, stats);
            const auto ss = hw::fx_signal_snr_unit(sep.s_total_raw, sep.n0_raw,
                                                   int_log2(cfg.M), stats);
            if (sep.m_star == flt.boundary.m_star) ++rec.mstar_matches;

            const double n0_fx = hw::kPowerFmt.to_value(int64_t(sep.n0_raw));
            const double diff = std::abs(n0_fx - flt.n0_hat);
            rec.max_n0_diff = std::max(rec.max_n0_diff, diff);
            if (diff <= std::ldexp(1.0, -4)) ++rec.n0_within;

            const double rho_fx = hw::kSnrFmt.to_value(int64_t(ss.rho_raw));
            if (std::isfinite(flt.rho_hat)) {
                if (std::abs(rho_fx - flt.rho_hat) <=
                    std::max(std::ldexp(1.0, -3), 0.05 * flt.rho_hat))
                    ++rec.rho_within;
            } else if (ss.rho_raw == uint32_t(hw::kSnrFmt.max_raw())) {
                ++rec.rho_within;
            }
        }
        records.push_back(rec);
    }
    return records;
}

void write_fxcompare_csv(const std::vector<FxCompareRecord>& records, std::ostream& out) {
    out << "snr_db,trials,sort_mismatches,mstar_matches,n0_within,rho_within,"
           "trials_with_saturation,unexpected_saturations,max_n0_diff\n";
    for (const auto& r : records)
        out << fmt_double(r.snr_db) << ',' << r.trials << ',' << r.sort_mismatches << ','
            << r.mstar_matches << ',' << r.n0_within << ',' << r.rho_within << ','
            << r.trials_with_saturation << ',' << r.unexpected_saturations << ','
            << fmt_double(r.max_n0_diff) << '\n';
}

void write_fxcompare_json(const std::vector<FxCompareRecord>& records, std::ostream& out) {
    json arr = json::array();
    for (const auto& r : records)
        arr.push_back({{"snr_db", r.snr_db},
                       {"trials", r.trials},
                       {"sort_mismatches", r.sort_mismatches},
                       {"mstar_matches", r.mstar_matches},
                       {"n0_within", r.n0_within},
                       {"rho_within", r.rho_within},
                       {"trials_with_saturation", r.trials_with_saturation},
                       {"unexpected_saturations", r.unexpected_saturations},
                       {"max_n0_diff", r.max_n0_diff}});
    out << arr.dump(2) << '\n';
}

} // namespace beamsnr::harness
