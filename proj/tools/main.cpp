#include <beamsnr/harness.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace beamsnr;
using json = nlohmann::json;

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// writes via a callback so nothing is created when computation throws
void with_output(const std::string& out_path, const std::function<void(std::ostream&)>& fn) {
    if (out_path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error(out_path + ": cannot open for writing");
    fn(out);
}

std::vector<harness::EstimatorKind> parse_estimators(const std::string& csv) {
    std::vector<harness::EstimatorKind> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(harness::estimator_from_string(tok));
    if (out.empty()) throw std::invalid_argument("empty estimator list");
    return out;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Single-sample blind noise power / signal power / SNR estimation "
                 "for sparse-beamspace multi-antenna receivers"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_path, format = "csv";
    uint64_t seed = 1;
    app.add_option("--config", config_path, "JSON config file (sweep/fxcompare)");
    app.add_option("--out", out_path, "output file (default stdout)");
    app.add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    auto* seed_opt = app.add_option("--seed", seed, "master seed");

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "Monte-Carlo SNR sweep over the estimators");
    int sw_M = -1, sw_L = -1, sw_trials = -1, sw_threads = -1, sw_m1 = -2, sw_m2 = -2;
    double sw_alpha = -1, sw_gfix = -1, sw_n0 = -1, sw_off = -1;
    std::vector<double> sw_snr;
    std::string sw_est;
    sweep->add_option("--M", sw_M, "antenna count (power of two)");
    sweep->add_option("--L", sw_L, "path count");
    sweep->add_option("--snr", sw_snr, "SNR grid in dB");
    sweep->add_option("--trials", sw_trials, "trials per SNR point");
    sweep->add_option("--threads", sw_threads, "worker threads");
    sweep->add_option("--estimators", sw_est, "comma list of estimator names");
    sweep->add_option("--alpha", sw_alpha, "schedule rare-event budget");
    sweep->add_option("--m1", sw_m1, "schedule breakpoint M1");
    sweep->add_option("--m2", sw_m2, "schedule breakpoint M2");
    sweep->add_option("--gamma-fixed", sw_gfix, "power-of-two level for the fixed-threshold variant");
    sweep->add_option("--n0", sw_n0, "true average noise power");
    sweep->add_option("--grid-offset", sw_off, "path grid offset, 0..0.5 beam widths");

    // ---- orderstat ----
    auto* ost = app.add_subcommand("orderstat", "validate sorted-noise gap statistics");
    int os_M = 64;
    double os_n0 = 1.0;
    long os_trials = 100000;
    ost->add_option("--M", os_M, "element count");
    ost->add_option("--n0", os_n0, "noise power");
    ost->add_option("--trials", os_trials, "Monte-Carlo trials");

    // ---- estimate ----
    auto* est = app.add_subcommand("estimate", "run the estimator on a sample file");
    std::string est_input;
    harness::EstimateOptions eopts;
    est->add_option("input", est_input, "sample file, 're,im' per line")->required();
    est->add_option("--alpha", eopts.alpha, "schedule rare-event budget");
    est->add_option("--m1", eopts.M1, "schedule breakpoint M1");
    est->add_option("--m2", eopts.M2, "schedule breakpoint M2");
    est->add_option("--gamma", eopts.gamma_override, "constant power-of-two threshold override");
    est->add_flag("--fx", eopts.with_fx, "also run the fixed-point pipeline");
    est->add_flag("--binary", eopts.binary, "input is interleaved little-endian f64");
    est->add_option("--trace", eopts.trace_path, "write the fixed-point pipeline trace here");

    // ---- fxcompare ----
    auto* fxc = app.add_subcommand("fxcompare", "fixed-point vs float comparison run");
    harness::FxCompareConfig fcfg;
    fxc->add_option("--M", fcfg.M, "antenna count");
    fxc->add_option("--L", fcfg.L, "path count");
    fxc->add_option("--snr", fcfg.snr_grid, "SNR grid in dB");
    fxc->add_option("--trials", fcfg.trials, "trials per SNR point");
    fxc->add_option("--alpha", fcfg.alpha, "schedule rare-event budget");
    fxc->add_option("--m1", fcfg.M1, "schedule breakpoint M1");
    fxc->add_option("--m2", fcfg.M2, "schedule breakpoint M2");
    fxc->add_option("--grid-offset", fcfg.grid_offset_max, "path grid offset");

    // ---- schedule ----
    auto* sch = app.add_subcommand("schedule", "print the threshold schedule for M, alpha");
    int sc_M = 64, sc_m1 = -1, sc_m2 = -1;
    double sc_alpha = 0.01;
    std::string sc_rule = "budget";
    sch->add_option("--M", sc_M, "element count");
    sch->add_option("--alpha", sc_alpha, "rare-event budget");
    sch->add_option("--m1", sc_m1, "breakpoint M1");
    sch->add_option("--m2", sc_m2, "breakpoint M2");
    sch->add_option("--rule", sc_rule, "budget|median")
        ->check(CLI::IsMember({"budget", "median"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) {
            harness::SweepConfig cfg;
            if (!config_path.empty()) cfg = harness::sweep_config_from_json(read_text_file(config_path));
            if (seed_opt->count()) cfg.seed = seed;
            if (sw_M > 0) cfg.M = sw_M;
            if (sw_L > 0) cfg.L = sw_L;
            if (!sw_snr.empty()) cfg.snr_grid = sw_snr;
            if (sw_trials > 0) cfg.trials = sw_trials;
            if (sw_threads > 0) cfg.threads = sw_threads;
            if (!sw_est.empty()) cfg.estimators = parse_estimators(sw_est);
            if (sw_alpha > 0) cfg.alpha = sw_alpha;
            if (sw_m1 > -2) cfg.M1 = sw_m1;
            if (sw_m2 > -2) cfg.M2 = sw_m2;
            if (sw_gfix > 0) cfg.gamma_fixed = sw_gfix;
            if (sw_n0 > 0) cfg.N0 = sw_n0;
            if (sw_off >= 0) cfg.grid_offset_max = sw_off;
            const auto records = harness::run_sweep(cfg);
            with_output(out_path, [&](std::ostream& os) {
                format == "json" ? harness::write_sweep_json(records, os)
                                 : harness::write_sweep_csv(records, os);
            });
        } else if (ost->parsed()) {
            const auto rep = harness::run_orderstat_validation(os_M, os_n0, os_trials, seed);
            with_output(out_path, [&](std::ostream& os) {
                format == "json" ? harness::write_orderstat_json(rep, os)
                                 : harness::write_orderstat_csv(rep, os);
            });
            if (format == "csv")
                std::cerr << "max|corr|=" << rep.max_abs_corr << " mean_ok=" << rep.mean_ok
                          << " var_ok=" << rep.var_ok << " corr_ok=" << rep.corr_ok
                          << " pass=" << rep.pass << "\n";
        } else if (est->parsed()) {
            const auto fe = harness::estimate_file(est_input, eopts);
            with_output(out_path, [&](std::ostream& os) { harness::write_estimate_json(fe, os); });
        } else if (fxc->parsed()) {
            if (!config_path.empty()) {
                const auto sc2 = harness::sweep_config_from_json(read_text_file(config_path));
                fcfg.M = sc2.M;
                fcfg.L = sc2.L;
                fcfg.trials = sc2.trials;
                fcfg.seed = sc2.seed;
                fcfg.alpha = sc2.alpha;
                fcfg.M1 = sc2.M1;
                fcfg.M2 = sc2.M2;
                fcfg.N0 = sc2.N0;
                fcfg.grid_offset_max = sc2.grid_offset_max;
                if (!sc2.snr_grid.empty()) fcfg.snr_grid = sc2.snr_grid;
            }
            if (seed_opt->count()) fcfg.seed = seed;
            const auto records = harness::run_fxcompare(fcfg);
            with_output(out_path, [&](std::ostream& os) {
                format == "json" ? harness::write_fxcompare_json(records, os)
                                 : harness::write_fxcompare_csv(records, os);
            });
        } else if (sch->parsed()) {
            const auto rule = sc_rule == "median" ? estimator::ScheduleRule::CoefficientMedian
                                                  : estimator::ScheduleRule::FalseAlarmBudget;
            const auto s = estimator::build_schedule(sc_M, sc_alpha, sc_m1, sc_m2, rule);
            const auto shifts = hw::to_shifts(s);
            with_output(out_path, [&](std::ostream& os) {
                if (format == "json") {
                    json j{{"M", s.num_elements}, {"alpha", s.alpha},
                           {"gamma1", s.gamma1},  {"gamma2", s.gamma2},
                           {"gamma3", s.gamma3},  {"M1", s.m1},
                           {"M2", s.m2},          {"shift1", shifts.z1},
                           {"shift2", shifts.z2}, {"shift3", shifts.z3}};
                    os << j.dump(2) << '\n';
                } else {
                    os << "M,alpha,gamma1,gamma2,gamma3,M1,M2,shift1,shift2,shift3\n"
                       << s.num_elements << ',' << s.alpha << ',' << s.gamma1 << ',' << s.gamma2
                       << ',' << s.gamma3 << ',' << s.m1 << ',' << s.m2 << ',' << shifts.z1 << ','
                       << shifts.z2 << ',' << shifts.z3 << '\n';
                }
            });
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
