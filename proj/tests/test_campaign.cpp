#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "pid/campaign.hpp"
#include "pid/dynamics.hpp"
#include "pid/errors.hpp"
#include "pid/model.hpp"

using namespace pid;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

SweepSpec tiny_spec() {
    SweepSpec spec;
    spec.preset = "ps_only";
    spec.overrides["integrator"]["t_max"] = 8.0;
    spec.amplitudes = {100.0, 1e4};  // two decades; linear metrics must not move
    spec.workers = 1;
    return spec;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("pid_test_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("sweep spec validation") {
    SweepSpec spec = tiny_spec();
    spec.amplitudes = {};
    CHECK_THROWS_AS(validate_spec(spec), ConfigError);
    spec.amplitudes = {100.0, 50.0};
    CHECK_THROWS_AS(validate_spec(spec), ConfigError);
    spec.amplitudes = {-1.0, 50.0};
    CHECK_THROWS_AS(validate_spec(spec), ConfigError);
    spec.amplitudes = {50.0, 100.0};
    CHECK_NOTHROW(validate_spec(spec));
}

TEST_CASE("records are ordered and worker count does not matter") {
    SweepSpec spec = tiny_spec();
    const auto serial = run_sweep_serial(spec);
    spec.workers = 4;
    const auto parallel = run_sweep(spec);

    REQUIRE(serial.size() == 2);
    REQUIRE(parallel.size() == 2);
    for (size_t k = 0; k < serial.size(); ++k) {
        CHECK(serial[k].ok);
        CHECK(serial[k].f0 == spec.amplitudes[k]);
        CHECK(serial[k].e_in == parallel[k].e_in);
        CHECK(serial[k].r_ps == parallel[k].r_ps);
        CHECK(serial[k].config_digest == parallel[k].config_digest);
        REQUIRE(serial[k].ps_report.has_value());
        REQUIRE(parallel[k].ps_report.has_value());
        CHECK(serial[k].ps_report->rms_bandwidth == parallel[k].ps_report->rms_bandwidth);
    }
    // linearity: the bare oscillator metrics do not depend on the amplitude
    CHECK(serial[0].ps_report->tb_product ==
          doctest::Approx(serial[1].ps_report->tb_product).epsilon(1e-6));
}

TEST_CASE("failed runs are isolated into failure records") {
    SweepSpec spec = tiny_spec();
    spec.overrides["integrator"]["conservation_tol"] = 1e-300;  // every run aborts
    const auto records = run_sweep(spec);
    REQUIRE(records.size() == 2);
    for (const auto& r : records) {
        CHECK(!r.ok);
        CHECK(!r.error.empty());
    }
}

TEST_CASE("report export round trip and determinism") {
    TempDir tmp;
    SweepSpec spec = tiny_spec();
    const auto records = run_sweep(spec);

    const auto p1 = tmp.path / "report1.json";
    const auto p2 = tmp.path / "report2.json";
    export_report(records, p1.string());
    export_report(records, p2.string());
    CHECK(read_file(p1) == read_file(p2));
    CHECK(!fs::exists(p1.string() + ".tmp"));

    const auto loaded = load_report(p1.string());
    REQUIRE(loaded.size() == records.size());
    for (size_t k = 0; k < records.size(); ++k) {
        CHECK(loaded[k].f0 == records[k].f0);
        CHECK(loaded[k].e_in == records[k].e_in);
        CHECK(loaded[k].r_pid == records[k].r_pid);
        CHECK(loaded[k].collisions == records[k].collisions);
        REQUIRE(loaded[k].ps_report.has_value());
        CHECK(loaded[k].ps_report->tb_product == records[k].ps_report->tb_product);
        CHECK(loaded[k].config_digest == records[k].config_digest);
    }
}

TEST_CASE("timeseries export") {
    TempDir tmp;
    json ov;
    ov["shock"]["amplitude"] = 100.0;
    ov["integrator"]["t_max"] = 0.05;

    SUBCASE("bare oscillator has no granule columns and starts from rest") {
        const SystemConfig cfg = build_preset("ps_only", ov);
        const SimulationResult res = simulate(cfg);
        const auto path = tmp.path / "ps.csv";
        export_timeseries(res.trajectory, res.ledger, cfg, path.string());

        std::ifstream in(path);
        std::string header, row0;
        std::getline(in, header);
        std::getline(in, row0);
        CHECK(header == "t,z,zdot,F,F_d,E_PS,E_PID,W_PS,W_vis,W_f,eta_PS,eta_PID,eta_sys");
        CHECK(row0.substr(0, 13) == "0.00000000e+0");

        SUBCASE("re-export is byte identical") {
            const auto path2 = tmp.path / "ps2.csv";
            export_timeseries(res.trajectory, res.ledger, cfg, path2.string());
            CHECK(read_file(path) == read_file(path2));
        }
    }

    SUBCASE("granule runs carry per-granule blocks") {
        const SystemConfig cfg = build_preset("two_g_config1", ov);
        const SimulationResult res = simulate(cfg);
        const auto path = tmp.path / "two.csv";
        export_timeseries(res.trajectory, res.ledger, cfg, path.string());
        std::ifstream in(path);
        std::string header;
        std::getline(in, header);
        CHECK(header.find("x_0") != std::string::npos);
        CHECK(header.find("omega_1") != std::string::npos);

        const LoadedTimeseries ts = load_timeseries(path.string());
        CHECK(ts.ps_velocity.values.size() == res.trajectory.times.size());
        CHECK(ts.e_sys.values[0] == doctest::Approx(0.0));
    }
}

TEST_CASE("config digest identifies the resolved config") {
    const SystemConfig a = build_preset("ps_only");
    const SystemConfig b = build_preset("single_g_config1");
    CHECK(config_digest(a) == config_digest(a));
    CHECK(config_digest(a) != config_digest(b));

    json ov;
    ov["shock"]["amplitude"] = 123.0;
    CHECK(config_digest(build_preset("ps_only", ov)) != config_digest(a));
}

TEST_CASE("analyze_run records per-subject outcomes") {
    json ov;
    ov["shock"]["amplitude"] = 100.0;
    const SystemConfig cfg = build_preset("ps_only", ov);
    const SimulationResult res = simulate(cfg, SimulateOptions{false});
    const RunRecord rec = analyze_run(cfg, res);
    CHECK(rec.ok);
    REQUIRE(rec.ps_report.has_value());
    REQUIRE(rec.integrated_report.has_value());
    CHECK(rec.ps_report->tb_product == doctest::Approx(1.0).epsilon(0.03));
    CHECK(rec.integrated_report->tb_product == doctest::Approx(1.0).epsilon(0.03));
    CHECK(rec.r_ps == doctest::Approx(100.0).epsilon(1e-3));
    CHECK(rec.collisions == 0);

    SUBCASE("energy-signal variant doubles the linear integrated bandwidth") {
        AnalysisOptions opts;
        opts.integrated_signal = AnalysisOptions::IntegratedSignal::Energy;
        const RunRecord rec2 = analyze_run(cfg, res, true, true, opts);
        REQUIRE(rec2.integrated_report.has_value());
        // E ~ exp(-2 lambda t) has twice the spectral width of its square root
        CHECK(rec2.integrated_report->rms_bandwidth ==
              doctest::Approx(2.0 * rec.integrated_report->rms_bandwidth).epsilon(0.02));
        CHECK(rec2.integrated_report->tb_product == doctest::Approx(2.0).epsilon(0.05));
    }
}
