#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pid/analysis.hpp"
#include "pid/dynamics.hpp"
#include "pid/model.hpp"

namespace pid {

inline constexpr const char* kEngineVersion = "0.1.0";

/// One shock-magnitude sweep over a preset (plus overrides).
struct SweepSpec {
    std::string preset;
    nlohmann::json overrides = nlohmann::json::object();
    std::vector<double> amplitudes;  // N, strictly increasing, nonempty
    bool subject_ps = true;
    bool subject_integrated = true;
    std::string output_dir;
    int workers = 1;
    AnalysisOptions analysis;
};

/// Outcome of one simulate+analyze pipeline. Per-subject analysis failures
/// (e.g. insufficient decay within t_max) are recorded without failing the
/// run; a simulation abort fills `error` instead.
struct RunRecord {
    bool ok = false;
    std::string error;
    double f0 = 0.0;
    double e_in = 0.0;
    double r_pid = 0.0;  // %
    double r_ps = 0.0;   // %
    long collisions = 0;
    std::optional<BandwidthReport> ps_report;
    std::optional<BandwidthReport> integrated_report;
    std::string ps_error;
    std::string integrated_error;
    std::string config_digest;
    std::string engine_version = kEngineVersion;
    double wall_ms = 0.0;  // excluded from exports
};

SweepSpec load_sweep_spec(const std::string& path);
void validate_spec(const SweepSpec& spec);

/// Independent simulate+analyze pipelines, one per amplitude, OpenMP-parallel
/// across runs when workers > 1. Records are ordered by amplitude and
/// identical regardless of the worker count.
std::vector<RunRecord> run_sweep(const SweepSpec& spec);
/// Reference loop without the thread pool (kept for testing).
std::vector<RunRecord> run_sweep_serial(const SweepSpec& spec);

/// Analyze one completed run into a record (no I/O).
RunRecord analyze_run(const SystemConfig& cfg, const SimulationResult& result,
                      bool subject_ps = true, bool subject_integrated = true,
                      const AnalysisOptions& opts = {});

/// CSV time series: t, z, zdot, F, F_d, energy components and normalized
/// measures, then per-granule state blocks. Atomic write (temp + rename).
void export_timeseries(const Trajectory& traj, const EnergyLedger& ledger,
                       const SystemConfig& cfg, const std::string& path);

/// JSON array of sweep records. Atomic write; byte-identical across reruns
/// of the same spec.
void export_report(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> load_report(const std::string& path);

void export_wavelet(const WaveletSpectrum& ws, const std::string& csv_path);

/// FNV-1a hash of the canonical config JSON; identifies a resolved config.
std::string config_digest(const SystemConfig& cfg);

struct LoadedTimeseries {
    UniformSeries ps_velocity;
    UniformSeries e_ps;
    UniformSeries e_sys;
};
LoadedTimeseries load_timeseries(const std::string& path);

}  // namespace pid
