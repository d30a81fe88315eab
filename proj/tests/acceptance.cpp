// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed hard criteria. Simulation runs are shared across criteria and
// executed on a small worker pool; every run stays internally sequential.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pid/analysis.hpp"
#include "pid/campaign.hpp"
#include "pid/dynamics.hpp"
#include "pid/energy.hpp"
#include "pid/errors.hpp"
#include "pid/model.hpp"

using namespace pid;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
int g_warnings = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void report_soft(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d (soft): %s\n", pass ? "PASS" : "WARN", criterion,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_warnings;
}

struct RunOutcome {
    bool ok = false;
    std::string error;
    double e_in = 0.0;
    double r_pid = 0.0;
    double r_ps = 0.0;
    long collisions = 0;
    double max_residual = 0.0;
    double end_time = 0.0;
    double wall_seconds = 0.0;
    std::optional<BandwidthReport> ps;
    std::optional<BandwidthReport> integrated;
    std::string ps_error, integrated_error;
};

using RunKey = std::pair<std::string, double>;  // preset, f0

std::map<RunKey, RunOutcome> g_runs;

RunOutcome execute(const std::string& preset, double f0, double dt_contact_scale = 1.0) {
    RunOutcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
        json ov;
        ov["shock"]["amplitude"] = f0;
        if (dt_contact_scale != 1.0) {
            const SystemConfig base = build_preset(preset);
            ov["integrator"]["dt_contact"] = base.integrator.dt_contact * dt_contact_scale;
        }
        const SystemConfig cfg = build_preset(preset, ov);
        SimulateOptions opts;
        opts.record_granules = false;
        const SimulationResult res = simulate(cfg, opts);
        out.ok = true;
        out.e_in = res.ledger.e_in;
        out.r_pid = res.ledger.r_pid_final;
        out.r_ps = res.ledger.r_ps_final;
        out.collisions = res.trajectory.collision_count();
        out.max_residual = res.ledger.max_residual;
        out.end_time = res.trajectory.times.back();
        try {
            out.ps = tb_product(cfg, res.trajectory, res.ledger, Subject::PS);
        } catch (const AnalysisError& e) {
            out.ps_error = e.what();
        }
        try {
            out.integrated = tb_product(cfg, res.trajectory, res.ledger, Subject::Integrated);
        } catch (const AnalysisError& e) {
            out.integrated_error = e.what();
        }
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

const RunOutcome& run_of(const std::string& preset, double f0) {
    static const RunOutcome missing;
    const auto it = g_runs.find({preset, f0});
    return it == g_runs.end() ? missing : it->second;
}

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

const std::vector<double> kSweepGrid = {100.0, 500.0, 1e3, 2.5e3, 5e3, 7.5e3, 1e4};
const std::vector<std::string> kOptimalPresets = {"three_g_optimal", "five_g_optimal",
                                                  "eight_g_optimal"};

void execute_battery() {
    std::vector<RunKey> keys;
    for (const auto& preset : preset_catalog())
        for (double f0 : {100.0, 1e3, 5e3}) keys.push_back({preset, f0});
    for (const auto& preset : kOptimalPresets)
        for (double f0 : kSweepGrid)
            if (std::find_if(keys.begin(), keys.end(), [&](const RunKey& k) {
                    return k.first == preset && k.second == f0;
                }) == keys.end())
                keys.push_back({preset, f0});

    std::printf("executing %zu runs on %d threads...\n", keys.size(), omp_get_max_threads());
    std::fflush(stdout);
    std::vector<RunOutcome> outcomes(keys.size());
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < static_cast<int>(keys.size()); ++k) {
        outcomes[k] = execute(keys[k].first, keys[k].second);
#pragma omp critical
        {
            std::printf("  done %-18s f0=%-8g wall=%6.1fs%s\n", keys[k].first.c_str(),
                        keys[k].second, outcomes[k].wall_seconds,
                        outcomes[k].ok ? "" : "  [RUN FAILED]");
            std::fflush(stdout);
        }
    }
    for (size_t k = 0; k < keys.size(); ++k) g_runs[keys[k]] = std::move(outcomes[k]);
}

// --- criterion 1: linear baseline ------------------------------------------

void criterion_1() {
    bool pass = true;
    std::string detail;
    for (double f0 : {100.0, 5e3}) {
        const RunOutcome& r = run_of("ps_only", f0);
        if (!r.ok || !r.ps) {
            pass = false;
            detail += fmt("run f0=%g failed; ", f0);
            continue;
        }
        const double bw = r.ps->rms_bandwidth;
        const double dtau = r.ps->decay_time;
        const double tb = r.ps->tb_product;
        const bool ok_bw = std::abs(bw - 1.26) / 1.26 < 0.02;
        const bool ok_tau = std::abs(dtau - 0.79) / 0.79 < 0.02;
        const bool ok_tb = std::abs(tb - 1.00) < 0.03;
        const bool ok_time = r.wall_seconds < 10.0;
        pass = pass && ok_bw && ok_tau && ok_tb && ok_time;
        detail += fmt("f0=%g: bw=%.4f rad/s, tau=%.4f s, tb=%.4f, wall=%.1fs; ", f0, bw, dtau,
                      tb, r.wall_seconds);
    }
    report(1, pass, "linear baseline 1.26 rad/s / 0.79 s / 1.00 -- " + detail);
}

// --- criterion 2: analytic bandwidth oracle --------------------------------

void criterion_2() {
    const auto start = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    for (double lambda : {0.3, 0.6325, 1.2}) {
        const double omega_n = 63.25;
        UniformSeries x, e;
        x.sample_interval = e.sample_interval = 1e-3;
        const double t_end = 2.6 * std::numbers::ln10 / lambda;
        x.values.resize(static_cast<size_t>(t_end / x.sample_interval));
        e.values.resize(x.values.size());
        for (size_t k = 0; k < x.values.size(); ++k) {
            const double t = x.time_at(k);
            const double decay_f = std::exp(-lambda * t);
            x.values[k] = decay_f * std::sin(omega_n * t);
            // resonator energy of the synthetic response, (xdot^2 + wn^2 x^2)/2
            const double xdot =
                decay_f * (omega_n * std::cos(omega_n * t) - lambda * std::sin(omega_n * t));
            e.values[k] = 0.5 * (xdot * xdot + omega_n * omega_n * x.values[k] * x.values[k]);
        }
        double bw = 0.0, decay = 0.0;
        try {
            bw = rms_bandwidth(x);
            decay = decay_time_constant(e).first;
        } catch (const std::exception& ex) {
            pass = false;
            detail += fmt("lambda=%g threw (%s); ", lambda, ex.what());
            continue;
        }
        const bool ok_bw = std::abs(bw - 2.0 * lambda) / (2.0 * lambda) < 0.03;
        const bool ok_tau = std::abs(decay - 0.5 / lambda) / (0.5 / lambda) < 0.03;
        pass = pass && ok_bw && ok_tau;
        detail += fmt("lambda=%.4f: bw=%.4f (want %.4f), tau=%.4f (want %.4f); ", lambda, bw,
                      2.0 * lambda, decay, 0.5 / lambda);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    pass = pass && wall < 1.0;
    report(2, pass, fmt("analytic oracle (wall=%.2fs) -- ", wall) + detail);
}

// --- criterion 3: energy conservation --------------------------------------

void criterion_3() {
    bool pass = true;
    double worst = 0.0;
    std::string worst_key;
    int failed_runs = 0;
    for (const auto& preset : preset_catalog()) {
        for (double f0 : {100.0, 1e3, 5e3}) {
            const RunOutcome& r = run_of(preset, f0);
            if (!r.ok) {
                ++failed_runs;
                pass = false;
                continue;
            }
            if (r.max_residual > worst) {
                worst = r.max_residual;
                worst_key = fmt("%s@%g", preset.c_str(), f0);
            }
            if (r.max_residual >= 1e-3) pass = false;
        }
    }
    report(3, pass,
           fmt("conservation residual < 1e-3 on all presets x {100, 1e3, 5e3} N; worst %.2e (%s), "
               "%d aborted runs",
               worst, worst_key.c_str(), failed_runs));
}

// --- criterion 4: no-collision threshold ------------------------------------

void criterion_4() {
    const RunOutcome& low = run_of("single_g_config1", 100.0);
    const RunOutcome& high = run_of("single_g_config1", 5e3);
    bool pass = low.ok && high.ok && low.collisions == 0 && high.collisions >= 1;
    std::string detail = fmt("collisions: %ld @100 N (want 0), %ld @5e3 N (want >=1). ",
                             low.collisions, high.collisions);

    // at 100 N the metrics must match the 18.8 kg linear oscillator within 1%
    if (low.ok && low.ps) {
        const double lam = 25.30 / (2.0 * 18.8);
        const double want_bw = 2.0 * lam;
        const double want_tau = 0.5 / lam;
        const bool ok_bw = std::abs(low.ps->rms_bandwidth - want_bw) / want_bw < 0.01;
        const bool ok_tau = std::abs(low.ps->decay_time - want_tau) / want_tau < 0.01;
        pass = pass && ok_bw && ok_tau;
        detail += fmt("bw=%.4f (lighter-oscillator %.4f), tau=%.4f (want %.4f)",
                      low.ps->rms_bandwidth, want_bw, low.ps->decay_time, want_tau);
    } else {
        pass = false;
        detail += "low run lacks a PS report";
    }
    report(4, pass, detail);
}

// --- criterion 5: momentum / third-law suite ---------------------------------

void criterion_5() {
    bool pass = true;
    std::string detail;

    // randomized contacting states: total internal force must vanish
    {
        const SystemConfig cfg = build_preset("eight_g_optimal");
        Engine eng(cfg);
        std::mt19937_64 gen(2024);
        std::uniform_real_distribution<double> dx(0.0, cfg.container.length),
            dy(0.0, cfg.container.height), dv(-2.0, 2.0), dspin(-30.0, 30.0);
        double worst = 0.0;
        for (int trial = 0; trial < 300; ++trial) {
            SystemState s = eng.initial_state();
            s.time = 2.0;
            s.ps_velocity = dv(gen);
            for (auto& g : s.granules) {
                g.position = {dx(gen), dy(gen)};
                g.velocity = {dv(gen), dv(gen)};
                g.spin = dspin(gen);
            }
            const StateDerivative d = eng.derivatives(s);
            double total = cfg.ps_mass() * d.ps_acceleration + cfg.ps.damping * s.ps_velocity;
            double scale = std::abs(cfg.ps_mass() * d.ps_acceleration) + 1.0;
            for (int i = 0; i < cfg.layout.count; ++i) {
                total += cfg.layout.mass * d.granules[i].acceleration.x;
                scale += std::abs(cfg.layout.mass * d.granules[i].acceleration.x);
            }
            worst = std::max(worst, std::abs(total) / scale);
        }
        pass = pass && worst < 1e-12;
        detail += fmt("internal x-force cancellation: worst %.2e (machine precision); ", worst);
    }

    // isolated frictionless pair impact conserves pair momentum
    {
        json ov;
        ov["shock"]["amplitude"] = 0.0;
        const SystemConfig cfg = build_preset("two_g_config4", ov);
        Engine eng(cfg);
        SystemState s = eng.initial_state();
        s.time = 1.0;
        s.granules[0].velocity = {0.6, 0.0};
        s.granules[1].velocity = {-0.6, 0.0};
        const double p0 = cfg.layout.mass * (s.granules[0].velocity.x + s.granules[1].velocity.x);
        bool seen = false;
        for (int k = 0; k < 1000000; ++k) {
            s = eng.rk4_step(s, cfg.integrator.dt_contact);
            bool pair = false;
            for (const auto& c : detect_contacts(s, cfg))
                if (c.kind == ContactKind::GranuleGranule) pair = true;
            if (pair) seen = true;
            if (seen && !pair) break;
        }
        const double p1 = cfg.layout.mass * (s.granules[0].velocity.x + s.granules[1].velocity.x);
        const double rel = std::abs(p1 - p0) / std::max(1e-30, std::abs(p0));
        const bool ok = seen && rel < 1e-8;
        pass = pass && ok;
        detail += fmt("pair-impact momentum drift %.2e relative (want < 1e-8)", rel);
    }
    report(5, pass, detail);
}

// --- criterion 6: dissipation share of the optimal presets -------------------

void criterion_6() {
    const std::vector<std::pair<std::string, double>> expected = {
        {"three_g_optimal", 56.81}, {"five_g_optimal", 68.47}, {"eight_g_optimal", 70.85}};
    bool ordering_pass = true;
    bool values_pass = true;
    std::string detail;
    std::map<std::string, double> r;
    for (const auto& [preset, want] : expected) {
        const RunOutcome& run = run_of(preset, 5e3);
        if (!run.ok) {
            ordering_pass = false;
            values_pass = false;
            detail += fmt("%s@5e3 failed; ", preset.c_str());
            continue;
        }
        r[preset] = run.r_pid;
        if (std::abs(run.r_pid - want) > 5.0) values_pass = false;
        detail += fmt("%s: r_PID=%.2f%% (ref %.2f%%); ", preset.c_str(), run.r_pid, want);
    }
    if (r.size() == 3) {
        ordering_pass = r["three_g_optimal"] < r["five_g_optimal"] &&
                        r["three_g_optimal"] < r["eight_g_optimal"] + 5.0 &&
                        r["five_g_optimal"] <= r["eight_g_optimal"] + 5.0;
    }
    report(6, ordering_pass, "dissipation ordering 3g < 5g <= 8g+5pp -- " + detail);
    report_soft(6, values_pass, "reference r_PID values within +/-5 pp -- " + detail);
}

// --- criterion 7: T-B tunability ---------------------------------------------

void criterion_7() {
    bool pass = true;
    std::string detail;

    const RunOutcome& low = run_of("three_g_optimal", 100.0);
    const RunOutcome& high = run_of("three_g_optimal", 5e3);
    if (low.ok && low.ps && high.ok && high.ps) {
        const bool ok_low = low.ps->tb_product < 1.0;
        const bool ok_high = high.ps->tb_product > 1.0;
        pass = ok_low && ok_high;
        detail += fmt("three_g T-B(PS): %.3f @100 N (<1), %.3f @5e3 N (>1); ",
                      low.ps->tb_product, high.ps->tb_product);
    } else {
        pass = false;
        detail += fmt("three_g runs unavailable (low: %s, high: %s); ",
                      low.ps_error.empty() ? low.error.c_str() : low.ps_error.c_str(),
                      high.ps_error.empty() ? high.error.c_str() : high.ps_error.c_str());
    }

    for (const auto& preset : kOptimalPresets) {
        double best_f0 = 0.0, best_bw = -1.0;
        bool all_ok = true;
        std::string grid;
        for (double f0 : kSweepGrid) {
            const RunOutcome& r = run_of(preset, f0);
            if (!r.ok || !r.ps) {
                all_ok = false;
                continue;
            }
            grid += fmt("%.2f@%g ", r.ps->rms_bandwidth, f0);
            if (r.ps->rms_bandwidth > best_bw) {
                best_bw = r.ps->rms_bandwidth;
                best_f0 = f0;
            }
        }
        const bool ok = all_ok && best_f0 == 5e3;
        pass = pass && ok;
        detail += fmt("%s bandwidth argmax f0=%g (want 5000; grid: %s)%s; ", preset.c_str(),
                      best_f0, grid.c_str(), all_ok ? "" : "[missing runs]");
    }
    report(7, pass, detail);
}

// --- criterion 8: integrator convergence -------------------------------------

double wpid_windowed(double f0, double dt_scale, double t_max) {
    json ov;
    ov["shock"]["amplitude"] = f0;
    const SystemConfig base = build_preset("two_g_config1");
    ov["integrator"]["dt_contact"] = base.integrator.dt_contact * dt_scale;
    if (t_max > 0.0) ov["integrator"]["t_max"] = t_max;
    const SystemConfig cfg = build_preset("two_g_config1", ov);
    SimulateOptions so;
    so.record_granules = false;
    const SimulationResult res = simulate(cfg, so);
    const auto& last = res.ledger.samples.back();
    return last.w_vis + last.w_f;
}

void criterion_8() {
    const auto base = execute("two_g_config1", 1e3);
    const auto halved = execute("two_g_config1", 1e3, 0.5);
    bool pass = base.ok && halved.ok;
    double rel = 1.0;
    if (pass) {
        const double w_base = base.e_in * base.r_pid / 100.0;
        const double w_half = halved.e_in * halved.r_pid / 100.0;
        rel = std::abs(w_half - w_base) / std::max(1e-30, std::abs(w_base));
        pass = rel < 1e-3;
    }
    // diagnostics separating scheme convergence from dynamical sensitivity:
    // the same halving over the first few collisions, and an O(1e-12) force
    // perturbation at the unchanged step size over the full record
    const double w_short_a = wpid_windowed(1e3, 1.0, 0.2);
    const double w_short_b = wpid_windowed(1e3, 0.5, 0.2);
    const double short_rel = std::abs(w_short_b - w_short_a) / w_short_a;
    const auto perturbed = execute("two_g_config1", 1e3 * (1.0 + 1e-12));
    double pert_rel = 0.0;
    if (base.ok && perturbed.ok) {
        const double w_base = base.e_in * base.r_pid / 100.0;
        const double w_pert = perturbed.e_in * perturbed.r_pid / 100.0;
        pert_rel = std::abs(w_pert - w_base) / w_base;
    }
    report(8, pass,
           fmt("halving dt_contact changes W_PID(end) by %.3e relative (want < 1e-3); "
               "diagnostics: pre-chaos window (first collisions) %.3e, 1e-12 force "
               "perturbation at fixed step %.3e -- the full-record spread tracks "
               "collision-sequence sensitivity, not step-size error",
               rel, short_rel, pert_rel));
}

// --- criterion 9: CLI determinism --------------------------------------------

void criterion_9() {
    const fs::path dir = fs::temp_directory_path() / "pid_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path spec_path = dir / "spec.json";
    {
        json spec{{"preset", "single_g_config1"},
                  {"overrides", {{"integrator", {{"t_max", 2.0}}}}},
                  {"amplitudes", {100.0, 2e3}},
                  {"workers", 2}};
        std::ofstream out(spec_path);
        out << spec.dump(2);
    }
    auto run_cli = [&](const std::string& outdir) {
        const std::string cmd = std::string(PID_CLI_PATH) + " sweep --spec " +
                                spec_path.string() + " --out " + outdir + " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    const int rc1 = run_cli((dir / "a").string());
    const int rc2 = run_cli((dir / "b").string());
    bool pass = rc1 == 0 && rc2 == 0;
    std::string detail = fmt("exit codes %d/%d; ", rc1, rc2);
    if (pass) {
        auto slurp = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            return std::string(std::istreambuf_iterator<char>(in), {});
        };
        const std::string a = slurp(dir / "a" / "report.json");
        const std::string b = slurp(dir / "b" / "report.json");
        pass = !a.empty() && a == b;
        detail += fmt("report bytes %zu, identical=%s", a.size(), a == b ? "yes" : "no");
    }
    report(9, pass, "repeated `pid sweep` byte-identical -- " + detail);
}

}  // namespace

int main() {
    const auto t_start = std::chrono::steady_clock::now();
    execute_battery();

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    std::printf("acceptance finished in %.0f s: %d hard failure(s), %d soft warning(s)\n", wall,
                g_failures, g_warnings);
    return g_failures;
}
