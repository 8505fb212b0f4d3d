#ifndef BEAMSNR_HARNESS_HPP
#define BEAMSNR_HARNESS_HPP

#include <beamsnr/baselines.hpp>
#include <beamsnr/channel.hpp>
#include <beamsnr/estimator.hpp>
#include <beamsnr/hwmodel.hpp>
#include <beamsnr/types.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace beamsnr::harness {

enum class EstimatorKind {
    ProposedDynamic,
    ProposedFixed,
    Oracle,
    Mad,
    MadRefined,
    TruncatedMean,
    FxPipeline,
};

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);
std::vector<EstimatorKind> all_estimators();

struct SweepConfig {
    int M = 64;
    int L = 3;
    std::vector<double> snr_grid; // dB
    int trials = 10000;
    uint64_t seed = 1;
    std::vector<EstimatorKind> estimators = all_estimators();
    double alpha = 0.01;
    int M1 = -1; // < 0: default M/2
    int M2 = -1; // < 0: default min(ceil(7M/8), M-2)
    double gamma_fixed = 4.0;
    double N0 = 1.0;
    int threads = 1;
    double grid_offset_max = 0.0;

    SweepConfig(); // fills snr_grid with the default -10..30 dB in 2 dB steps
    void validate() const;
};

// Parses a JSON object whose keys mirror the SweepConfig field names.
SweepConfig sweep_config_from_json(const std::string& text);

struct SweepRecord {
    double snr_db = 0;
    EstimatorKind estimator = EstimatorKind::ProposedDynamic;
    double n0_mean = 0, n0_median = 0, n0_rmse = 0;
    double px_mean = 0, px_rmse = 0;
    double snr_mean_db = 0, snr_rmse_db = 0;
    long trials = 0;
    long dropped = 0; // trials with no finite positive rho_hat (excluded from dB stats)
    double wall_ms = 0;
};

// One fresh channel/symbol/noise realization per (snr index, trial index),
// every enabled estimator consuming the identical sample. Deterministic for a
// given seed independent of thread count: per-trial streams are derived by
// counter, aggregation order is fixed.
std::vector<SweepRecord> run_sweep(const SweepConfig& cfg);

void write_sweep_csv(const std::vector<SweepRecord>& records, std::ostream& out);
void write_sweep_json(const std::vector<SweepRecord>& records, std::ostream& out);

struct OrderstatRow {
    int m = 0;
    double mean = 0, expected_mean = 0, mean_se = 0;
    double variance = 0, expected_var = 0;
};

struct OrderstatReport {
    int M = 0;
    double n0 = 1.0;
    long trials = 0;
    std::vector<OrderstatRow> rows; // M-1 rows
    double max_abs_corr = 0;
    bool mean_ok = false; // each gap mean within 5 SE of N0/(M-m), m <= M-4
    bool var_ok = false;  // each gap variance within 10%, m <= M-4
    bool corr_ok = false; // max |pairwise corr| <= 0.02
    bool pass = false;
};

// Draws pure-noise beamspace samples and checks the spacing statistics of the
// sorted powers against the exponential order-statistics predictions.
OrderstatReport run_orderstat_validation(int M, double n0, long trials, uint64_t seed);

void write_orderstat_csv(const OrderstatReport& report, std::ostream& out);
void write_orderstat_json(const OrderstatReport& report, std::ostream& out);

struct EstimateOptions {
    double alpha = 0.01;
    int M1 = -1, M2 = -1;
    double gamma_override = 0.0; // > 0: constant-gamma schedule
    bool with_fx = false;
    bool binary = false;
    std::string trace_path; // with_fx: per-step pipeline trace written here
};

struct FileEstimate {
    int M = 0;
    estimator::EstimateResult result;
    std::optional<hw::FxEstimate> fx;
};

// Text format: one element per line, "re,im" decimal fields. Binary format:
// little-endian 64-bit floats interleaved re/im. Parse failures throw with
// line and column.
cvec read_sample_file(const std::string& path, bool binary);

FileEstimate estimate_file(const std::string& path, const EstimateOptions& opts);
void write_estimate_json(const FileEstimate& fe, std::ostream& out);

struct FxCompareConfig {
    int M = 64;
    int L = 3;
    std::vector<double> snr_grid{-10, 0, 10, 20, 30};
    int trials = 10000;
    uint64_t seed = 1;
    double alpha = 0.01;
    int M1 = -1, M2 = -1;
    double N0 = 1.0;
    double grid_offset_max = 0.0;
};

struct FxCompareRecord {
    double snr_db = 0;
    long trials = 0;
    long sort_mismatches = 0;        // systolic sorter vs reference sort
    long mstar_matches = 0;          // fx boundary vs float on the same powers
    long n0_within = 0;              // |N0_fx - N0_float| <= 2^-4
    long rho_within = 0;             // |rho_fx - rho_float| <= max(2^-3, 5% rel)
    long trials_with_saturation = 0;
    long unexpected_saturations = 0; // flags not predicted by the float front end
    double max_n0_diff = 0;
};

// Runs the fixed-point pipeline against the float estimator on the same
// Q16.8 power stream (golden-reference comparison at matched stimulus).
std::vector<FxCompareRecord> run_fxcompare(const FxCompareConfig& cfg);

void write_fxcompare_csv(const std::vector<FxCompareRecord>& records, std::ostream& out);
void write_fxcompare_json(const std::vector<FxCompareRecord>& records, std::ostream& out);

// Trial synthesis shared by run_sweep and the acceptance suite. The returned
// noise vector backs the genie reference (||n||^2 / M).
struct TrialSample {
    cvec y;
    cvec noise;
    double rho = 0;
};
TrialSample synth_trial(const SweepConfig& cfg, int snr_index, int trial_index);

} // namespace beamsnr::harness

#endif
