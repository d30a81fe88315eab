#include "pid/campaign.hpp"

#include <omp.h>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pid/errors.hpp"
#include "pid/log.hpp"

namespace pid {

using nlohmann::json;

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Spec / digest
// ---------------------------------------------------------------------------

SweepSpec load_sweep_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sweep spec: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed sweep spec " + path + ": " + e.what());
    }
    SweepSpec spec;
    spec.preset = j.value("preset", std::string{});
    spec.overrides = j.value("overrides", json::object());
    spec.amplitudes = j.value("amplitudes", std::vector<double>{});
    spec.output_dir = j.value("output_dir", std::string{});
    spec.workers = j.value("workers", 1);
    if (j.contains("subjects")) {
        spec.subject_ps = false;
        spec.subject_integrated = false;
        for (const auto& s : j.at("subjects")) {
            if (s == "ps") spec.subject_ps = true;
            else if (s == "integrated") spec.subject_integrated = true;
            else throw ConfigError("sweep spec: unknown subject " + s.get<std::string>());
        }
    }
    if (j.value("integrated_signal", std::string("sqrt_energy")) == "energy")
        spec.analysis.integrated_signal = AnalysisOptions::IntegratedSignal::Energy;
    validate_spec(spec);
    return spec;
}

void validate_spec(const SweepSpec& spec) {
    if (spec.preset.empty()) throw ConfigError("sweep spec: missing preset");
    if (spec.amplitudes.empty()) throw ConfigError("sweep spec: empty amplitude list");
    for (size_t k = 0; k < spec.amplitudes.size(); ++k) {
        if (!(spec.amplitudes[k] > 0.0))
            throw ConfigError("sweep spec: amplitudes must be strictly positive");
        if (k > 0 && !(spec.amplitudes[k] > spec.amplitudes[k - 1]))
            throw ConfigError("sweep spec: amplitudes must be strictly increasing");
    }
    if (spec.workers < 1) throw ConfigError("sweep spec: workers must be >= 1");
}

std::string config_digest(const SystemConfig& cfg) {
    const std::string doc = config_to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
    for (unsigned char c : doc) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Run pipeline
// ---------------------------------------------------------------------------

RunRecord analyze_run(const SystemConfig& cfg, const SimulationResult& result, bool subject_ps,
                      bool subject_integrated, const AnalysisOptions& opts) {
    RunRecord rec;
    rec.ok = true;
    rec.f0 = cfg.shock.amplitude;
    rec.config_digest = config_digest(cfg);
    rec.e_in = result.ledger.e_in;
    rec.r_pid = result.ledger.r_pid_final;
    rec.r_ps = result.ledger.r_ps_final;
    rec.collisions = result.trajectory.collision_count();
    if (subject_ps) {
        try {
            rec.ps_report = tb_product(cfg, result.trajectory, result.ledger, Subject::PS, opts);
        } catch (const AnalysisError& e) {
            rec.ps_error = e.what();
        }
    }
    if (subject_integrated) {
        try {
            rec.integrated_report =
                tb_product(cfg, result.trajectory, result.ledger, Subject::Integrated, opts);
        } catch (const AnalysisError& e) {
            rec.integrated_error = e.what();
        }
    }
    return rec;
}

namespace {

RunRecord one_run(const SweepSpec& spec, double f0) {
    const auto start = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.f0 = f0;
    try {
        json overrides = spec.overrides.is_null() ? json::object() : spec.overrides;
        overrides["shock"]["amplitude"] = f0;
        const SystemConfig cfg = build_preset(spec.preset, overrides);
        SimulateOptions opts;
        opts.record_granules = false;
        const SimulationResult result = simulate(cfg, opts);
        rec = analyze_run(cfg, result, spec.subject_ps, spec.subject_integrated, spec.analysis);
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
        PID_LOG_WARN("sweep run f0=%g failed: %s", f0, e.what());
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    return rec;
}

}  // namespace

std::vector<RunRecord> run_sweep_serial(const SweepSpec& spec) {
    validate_spec(spec);
    std::vector<RunRecord> records(spec.amplitudes.size());
    for (size_t k = 0; k < spec.amplitudes.size(); ++k)
        records[k] = one_run(spec, spec.amplitudes[k]);
    return records;
}

std::vector<RunRecord> run_sweep(const SweepSpec& spec) {
    validate_spec(spec);
    if (spec.workers <= 1) return run_sweep_serial(spec);
    std::vector<RunRecord> records(spec.amplitudes.size());
    const int n = static_cast<int>(spec.amplitudes.size());
#pragma omp parallel for schedule(dynamic) num_threads(spec.workers)
    for (int k = 0; k < n; ++k) records[k] = one_run(spec, spec.amplitudes[k]);
    return records;
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

namespace {

void atomic_write(const std::string& path, const std::string& payload) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << payload;
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

// decimal scientific, 9 significant digits
void append_num(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.8e", v);
    out += buf;
}

json report_to_json(const RunRecord& r) {
    auto bw = [](const std::optional<BandwidthReport>& rep, const std::string& err) -> json {
        if (!rep) {
            if (err.empty()) return nullptr;
            return json{{"error", err}};
        }
        return json{{"rms_bandwidth", rep->rms_bandwidth},
                    {"decay_time", rep->decay_time},
                    {"tb_product", rep->tb_product},
                    {"reference_time", rep->reference_time},
                    {"end_fraction", rep->end_fraction},
                    {"grid_domega", rep->grid_domega}};
    };
    json j{{"ok", r.ok},
           {"f0", r.f0},
           {"e_in", r.e_in},
           {"r_pid", r.r_pid},
           {"r_ps", r.r_ps},
           {"collisions", r.collisions},
           {"ps", bw(r.ps_report, r.ps_error)},
           {"integrated", bw(r.integrated_report, r.integrated_error)},
           {"config_digest", r.config_digest},
           {"engine_version", r.engine_version}};
    if (!r.ok) j["error"] = r.error;
    return j;
}

BandwidthReport report_from_json(const json& j, Subject subject) {
    BandwidthReport rep;
    rep.subject = subject;
    rep.rms_bandwidth = j.at("rms_bandwidth").get<double>();
    rep.decay_time = j.at("decay_time").get<double>();
    rep.tb_product = j.at("tb_product").get<double>();
    rep.reference_time = j.value("reference_time", 0.0);
    rep.end_fraction = j.value("end_fraction", 0.0);
    rep.grid_domega = j.value("grid_domega", 0.0);
    return rep;
}

}  // namespace

void export_report(const std::vector<RunRecord>& records, const std::string& path) {
    if (records.empty()) throw ConfigError("export_report: no records");
    json arr = json::array();
    for (const auto& r : records) arr.push_back(report_to_json(r));
    atomic_write(path, arr.dump(2) + "\n");
}

std::vector<RunRecord> load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report: " + path);
    json arr;
    in >> arr;
    std::vector<RunRecord> records;
    for (const auto& j : arr) {
        RunRecord r;
        r.ok = j.at("ok").get<bool>();
        r.f0 = j.at("f0").get<double>();
        r.e_in = j.at("e_in").get<double>();
        r.r_pid = j.at("r_pid").get<double>();
        r.r_ps = j.at("r_ps").get<double>();
        r.collisions = j.at("collisions").get<long>();
        if (j.contains("ps") && j.at("ps").is_object() && !j.at("ps").contains("error"))
            r.ps_report = report_from_json(j.at("ps"), Subject::PS);
        else if (j.contains("ps") && j.at("ps").is_object())
            r.ps_error = j.at("ps").at("error").get<std::string>();
        if (j.contains("integrated") && j.at("integrated").is_object() &&
            !j.at("integrated").contains("error"))
            r.integrated_report = report_from_json(j.at("integrated"), Subject::Integrated);
        else if (j.contains("integrated") && j.at("integrated").is_object())
            r.integrated_error = j.at("integrated").at("error").get<std::string>();
        r.config_digest = j.value("config_digest", std::string{});
        r.engine_version = j.value("engine_version", std::string{});
        if (!r.ok) r.error = j.value("error", std::string{});
        records.push_back(std::move(r));
    }
    return records;
}

void export_timeseries(const Trajectory& traj, const EnergyLedger& ledger,
                       const SystemConfig& cfg, const std::string& path) {
    const size_t n = traj.times.size();
    if (ledger.samples.size() != n)
        throw std::runtime_error("export_timeseries: trajectory/ledger sample mismatch");
    const int ng = cfg.layout.count;
    const bool with_granules = !traj.granule_samples.empty();

    std::string out;
    out.reserve(n * (16 * 13 + (with_granules ? 16 * 6 * ng : 0)));
    out += "t,z,zdot,F,F_d,E_PS,E_PID,W_PS,W_vis,W_f,eta_PS,eta_PID,eta_sys";
    if (with_granules) {
        for (int i = 0; i < ng; ++i) {
            const std::string s = std::to_string(i);
            out += ",x_" + s + ",y_" + s + ",vx_" + s + ",vy_" + s + ",theta_" + s + ",omega_" + s;
        }
    }
    out += "\n";

    const double e_in = ledger.e_in;
    const double eta_scale = e_in > 0.0 ? 100.0 / e_in : 0.0;
    for (size_t k = 0; k < n; ++k) {
        const EnergySample& es = ledger.samples[k];
        append_num(out, traj.times[k]);
        out += ',';
        append_num(out, traj.ps_displacement[k]);
        out += ',';
        append_num(out, traj.ps_velocity[k]);
        out += ',';
        append_num(out, shock_force(traj.times[k], cfg.shock));
        out += ',';
        append_num(out, es.f_d);
        out += ',';
        append_num(out, es.e_ps);
        out += ',';
        append_num(out, es.e_pid);
        out += ',';
        append_num(out, es.w_ps);
        out += ',';
        append_num(out, es.w_vis);
        out += ',';
        append_num(out, es.w_f);
        out += ',';
        append_num(out, eta_scale * es.e_ps);
        out += ',';
        append_num(out, eta_scale * es.e_pid);
        out += ',';
        append_num(out, eta_scale * (es.e_ps + es.e_pid));
        if (with_granules) {
            const auto& gs = traj.granule_samples[k];
            for (int i = 0; i < ng; ++i) {
                out += ',';
                append_num(out, gs[i].position.x);
                out += ',';
                append_num(out, gs[i].position.y);
                out += ',';
                append_num(out, gs[i].velocity.x);
                out += ',';
                append_num(out, gs[i].velocity.y);
                out += ',';
                append_num(out, gs[i].angle);
                out += ',';
                append_num(out, gs[i].spin);
            }
        }
        out += '\n';
    }
    atomic_write(path, out);
}

void export_wavelet(const WaveletSpectrum& ws, const std::string& csv_path) {
    std::string out;
    out.reserve(ws.times.size() * ws.omegas.size() * 16);
    for (size_t r = 0; r < ws.magnitude.size(); ++r) {
        const auto& row = ws.magnitude[r];
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            append_num(out, row[c]);
        }
        out += '\n';
    }
    atomic_write(csv_path, out);

    json axes{{"rows", "angular_frequency_rad_per_s_descending"},
              {"columns", "time_s"},
              {"omega", ws.omegas},
              {"time", ws.times},
              {"normalization", "global_max_is_one"}};
    atomic_write(csv_path + ".axes.json", axes.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// CSV ingest for the analyze subcommand
// ---------------------------------------------------------------------------

LoadedTimeseries load_timeseries(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open timeseries: " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty timeseries: " + path);

    std::vector<std::string> cols;
    {
        std::stringstream ss(header);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    auto col_index = [&](const std::string& name) {
        for (size_t k = 0; k < cols.size(); ++k)
            if (cols[k] == name) return static_cast<int>(k);
        throw std::runtime_error("timeseries missing column " + name);
    };
    const int it = col_index("t");
    const int izdot = col_index("zdot");
    const int ieps = col_index("E_PS");
    const int iepid = col_index("E_PID");

    std::vector<double> t, zdot, eps, epid;
    std::string line;
    std::vector<double> row(cols.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const char* p = line.c_str();
        char* end = nullptr;
        for (size_t k = 0; k < cols.size(); ++k) {
            row[k] = std::strtod(p, &end);
            p = (*end == ',') ? end + 1 : end;
        }
        t.push_back(row[it]);
        zdot.push_back(row[izdot]);
        eps.push_back(row[ieps]);
        epid.push_back(row[iepid]);
    }
    if (t.size() < 2) throw std::runtime_error("timeseries too short: " + path);

    LoadedTimeseries out;
    const double dt = t[1] - t[0];
    out.ps_velocity = {t[0], dt, std::move(zdot)};
    out.e_ps = {t[0], dt, eps};
    std::vector<double> esys(eps.size());
    for (size_t k = 0; k < eps.size(); ++k) esys[k] = eps[k] + epid[k];
    out.e_sys = {t[0], dt, std::move(esys)};
    return out;
}

}  // namespace pid
