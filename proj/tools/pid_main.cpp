#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pid/analysis.hpp"
#include "pid/campaign.hpp"
#include "pid/dynamics.hpp"
#include "pid/errors.hpp"
#include "pid/log.hpp"
#include "pid/model.hpp"

using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSimulation = 3;

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw pid::ConfigError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw pid::ConfigError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

pid::SystemConfig resolve_config(const std::string& config_path, const std::string& preset,
                                 std::optional<double> f0) {
    if (config_path.empty() && preset.empty())
        throw pid::ConfigError("simulate: provide --preset and/or --config");
    json overrides = json::object();
    if (!config_path.empty()) overrides = load_json_file(config_path);
    if (f0) overrides["shock"]["amplitude"] = *f0;

    if (!preset.empty()) return pid::build_preset(preset, overrides);

    // bare config file: must be a complete document
    pid::SystemConfig cfg;
    try {
        cfg = pid::config_from_json(overrides);
    } catch (const json::exception& e) {
        throw pid::ConfigError(std::string("incomplete or malformed config document: ") +
                               e.what());
    }
    const auto violations = pid::validate_config(cfg);
    for (const auto& v : violations)
        if (v.severity == pid::Violation::Severity::Warning)
            PID_LOG_WARN("%s: %s", v.field.c_str(), v.message.c_str());
    if (pid::has_errors(violations)) {
        std::string msg = "invalid configuration:";
        for (const auto& v : violations)
            if (v.severity == pid::Violation::Severity::Error)
                msg += "\n  " + v.field + ": " + v.message;
        throw pid::ConfigError(msg);
    }
    return cfg;
}

int cmd_presets() {
    for (const auto& id : pid::preset_catalog()) {
        const pid::SystemConfig cfg = pid::build_preset(id);
        std::printf(
            "%-18s granules=%d R=%.1f mm m=%.3g kg d0=%.1f mm dv=%.1f mm d1=%.1f mm d2=%.1f mm "
            "mode=%s\n",
            id.c_str(), cfg.layout.count, cfg.layout.radius * 1e3, cfg.layout.mass,
            cfg.container.neighbor_clearance * 1e3, cfg.container.ceiling_gap * 1e3,
            cfg.container.length * 1e3, cfg.container.height * 1e3,
            cfg.layout.mode == pid::LayoutMode::OneDimensional ? "1d" : "2d");
    }
    return 0;
}

int cmd_baseline(const std::string& preset) {
    const pid::SystemConfig cfg = pid::build_preset(preset.empty() ? "ps_only" : preset);
    const auto [dw, dtau] = pid::linear_baseline(cfg.ps);
    std::printf("half_power_bandwidth_rad_per_s %.6g\n", dw);
    std::printf("decay_time_s %.6g\n", dtau);
    std::printf("tb_product %.6g\n", dw * dtau);
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& preset,
                 std::optional<double> f0, const std::string& out_dir) {
    const pid::SystemConfig cfg = resolve_config(config_path, preset, f0);
    PID_LOG_INFO("simulating (f0=%g N, %d granules)", cfg.shock.amplitude, cfg.layout.count);
    const pid::SimulationResult result = pid::simulate(cfg);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::ofstream cfg_out(fs::path(out_dir) / "config.json");
    cfg_out << pid::config_to_json(cfg).dump(2) << "\n";
    pid::export_timeseries(result.trajectory, result.ledger, cfg,
                           (fs::path(out_dir) / "timeseries.csv").string());
    const pid::RunRecord rec = pid::analyze_run(cfg, result);
    pid::export_report({rec}, (fs::path(out_dir) / "report.json").string());

    std::printf("t_end %.6g s, E_in %.6g J, collisions %ld, r_PID %.4g %%, r_PS %.4g %%\n",
                result.trajectory.times.back(), result.ledger.e_in,
                result.trajectory.collision_count(), result.ledger.r_pid_final,
                result.ledger.r_ps_final);
    if (rec.ps_report)
        std::printf("PS: bandwidth %.6g rad/s, decay %.6g s, T-B %.6g\n",
                    rec.ps_report->rms_bandwidth, rec.ps_report->decay_time,
                    rec.ps_report->tb_product);
    if (rec.integrated_report)
        std::printf("integrated: bandwidth %.6g rad/s, decay %.6g s, T-B %.6g\n",
                    rec.integrated_report->rms_bandwidth, rec.integrated_report->decay_time,
                    rec.integrated_report->tb_product);
    return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_dir, int workers_flag) {
    pid::SweepSpec spec = pid::load_sweep_spec(spec_path);
    if (!out_dir.empty()) spec.output_dir = out_dir;
    if (workers_flag > 0) spec.workers = workers_flag;
    if (spec.output_dir.empty()) throw pid::ConfigError("sweep: no output directory given");

    const auto records = pid::run_sweep(spec);
    namespace fs = std::filesystem;
    pid::export_report(records, (fs::path(spec.output_dir) / "report.json").string());
    int failures = 0;
    for (const auto& r : records) {
        if (!r.ok) {
            ++failures;
            std::printf("f0 %.6g N: FAILED (%s)\n", r.f0, r.error.c_str());
            continue;
        }
        std::printf("f0 %.6g N: E_in %.6g J, r_PID %.4g %%, collisions %ld\n", r.f0, r.e_in,
                    r.r_pid, r.collisions);
    }
    if (failures) PID_LOG_WARN("%d of %zu runs failed; see report.json", failures, records.size());
    return 0;
}

int cmd_analyze(const std::string& ts_path, const std::string& subject,
                const std::string& report_out, const std::string& wavelet_out, double wavelet_lo,
                double wavelet_hi, int voices) {
    const pid::LoadedTimeseries ts = pid::load_timeseries(ts_path);

    json out;
    if (subject == "ps") {
        const double bw = pid::rms_bandwidth(ts.ps_velocity);
        const auto [decay, t_ref] = pid::decay_time_constant(ts.e_ps);
        out = {{"subject", "ps"},
               {"rms_bandwidth", bw},
               {"decay_time", decay},
               {"tb_product", bw * decay},
               {"reference_time", t_ref}};
    } else if (subject == "integrated") {
        pid::UniformSeries sig = ts.e_sys;
        for (auto& v : sig.values) v = std::sqrt(std::max(0.0, v));
        const double bw = pid::rms_bandwidth_of_envelope(sig);
        const auto [decay, t_ref] = pid::decay_time_constant(ts.e_sys);
        out = {{"subject", "integrated"},
               {"rms_bandwidth", bw},
               {"decay_time", decay},
               {"tb_product", bw * decay},
               {"reference_time", t_ref}};
    } else {
        throw pid::ConfigError("analyze: subject must be ps or integrated");
    }

    if (!wavelet_out.empty()) {
        const pid::UniformSeries& sig = ts.ps_velocity;
        const double nyquist = std::numbers::pi / sig.sample_interval;
        const double hi = wavelet_hi > 0 ? wavelet_hi : std::min(200.0, 0.45 * nyquist);
        const int stride = std::max<int>(1, static_cast<int>(sig.values.size() / 2000));
        const pid::WaveletSpectrum ws =
            pid::wavelet_spectrum(sig, wavelet_lo, hi, voices, stride);
        pid::export_wavelet(ws, wavelet_out);
        out["wavelet_csv"] = wavelet_out;
    }

    const std::string payload = out.dump(2) + "\n";
    if (report_out.empty()) {
        std::fputs(payload.c_str(), stdout);
    } else {
        std::ofstream f(report_out);
        f << payload;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Granular impact-damper simulator and bandwidth analyzer"};
    app.require_subcommand(1);

    auto* presets = app.add_subcommand("presets", "List catalog presets with resolved parameters");

    auto* baseline =
        app.add_subcommand("baseline", "Print the linear bandwidth/decay baseline of the bare PS");
    std::string baseline_preset;
    baseline->add_option("--preset", baseline_preset, "Preset supplying the PS parameters");

    auto* sim = app.add_subcommand("simulate", "Run one shock simulation and export its outputs");
    std::string sim_config, sim_preset, sim_out;
    double sim_f0 = -1.0;
    sim->add_option("--config", sim_config, "Config JSON (full document, or overrides with --preset)");
    sim->add_option("--preset", sim_preset, "Preset id");
    sim->add_option("--f0", sim_f0, "Shock amplitude override [N]");
    sim->add_option("--out", sim_out, "Output directory")->required();

    auto* sweep = app.add_subcommand("sweep", "Run a shock-magnitude sweep from a spec file");
    std::string sweep_spec, sweep_out;
    int sweep_workers = 0;
    sweep->add_option("--spec", sweep_spec, "Sweep spec JSON")->required();
    sweep->add_option("--out", sweep_out, "Output directory (overrides the spec)");
    sweep->add_option("--workers", sweep_workers, "Parallel worker count");

    auto* analyze = app.add_subcommand("analyze", "Compute bandwidth metrics from a timeseries CSV");
    std::string an_ts, an_subject = "ps", an_out, an_wavelet;
    double an_lo = 1.0, an_hi = -1.0;
    int an_voices = 16;
    analyze->add_option("--timeseries", an_ts, "timeseries.csv from a simulate run")->required();
    analyze->add_option("--subject", an_subject, "ps|integrated");
    analyze->add_option("--out", an_out, "Report JSON path (default: stdout)");
    analyze->add_option("--wavelet", an_wavelet, "Export a wavelet-spectrum CSV to this path");
    analyze->add_option("--wavelet-lo", an_lo, "Lowest wavelet frequency [rad/s]");
    analyze->add_option("--wavelet-hi", an_hi, "Highest wavelet frequency [rad/s]");
    analyze->add_option("--voices", an_voices, "Wavelet voices per octave");

    CLI11_PARSE(app, argc, argv);

    try {
        if (presets->parsed()) return cmd_presets();
        if (baseline->parsed()) return cmd_baseline(baseline_preset);
        if (sim->parsed())
            return cmd_simulate(sim_config, sim_preset,
                                sim_f0 >= 0 ? std::optional<double>(sim_f0) : std::nullopt,
                                sim_out);
        if (sweep->parsed()) return cmd_sweep(sweep_spec, sweep_out, sweep_workers);
        if (analyze->parsed())
            return cmd_analyze(an_ts, an_subject, an_out, an_wavelet, an_lo, an_hi, an_voices);
    } catch (const pid::ConfigError& e) {
        PID_LOG_ERROR("%s", e.what());
        return kExitValidation;
    } catch (const pid::SimulationError& e) {
        PID_LOG_ERROR("%s", e.what());
        return kExitSimulation;
    } catch (const pid::AnalysisError& e) {
        PID_LOG_ERROR("%s", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        PID_LOG_ERROR("%s", e.what());
        return 1;
    }
    return 0;
}
