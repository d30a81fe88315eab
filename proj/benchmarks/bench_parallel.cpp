// Compares the serial reference paths against their OpenMP counterparts:
// sweep execution (one worker per run) and the wavelet transform (one worker
// per scale row). Outputs are asserted identical before timings are printed.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "json.hpp"
#include "pid/analysis.hpp"
#include "pid/campaign.hpp"
#include "pid/model.hpp"

using namespace pid;

namespace {

template <typename F>
double timed(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
    std::printf("hardware threads: %d\n", omp_get_max_threads());

    // sweep: independent single-granule runs across shock amplitudes
    SweepSpec spec;
    spec.preset = "single_g_config1";
    spec.overrides["integrator"]["t_max"] = 1.0;
    spec.amplitudes = {500.0, 1e3, 1.5e3, 2e3};
    spec.workers = 1;

    std::vector<RunRecord> serial, parallel;
    const double t_serial = timed([&] { serial = run_sweep_serial(spec); });
    spec.workers = omp_get_max_threads();
    const double t_parallel = timed([&] { parallel = run_sweep(spec); });

    bool identical = serial.size() == parallel.size();
    for (size_t k = 0; identical && k < serial.size(); ++k)
        identical = serial[k].e_in == parallel[k].e_in && serial[k].r_pid == parallel[k].r_pid &&
                    serial[k].collisions == parallel[k].collisions;
    std::printf("sweep (%zu runs): serial %.2fs, %d workers %.2fs, speedup %.2fx, identical=%s\n",
                spec.amplitudes.size(), t_serial, spec.workers, t_parallel,
                t_serial / t_parallel, identical ? "yes" : "NO");

    // wavelet: scale rows of a long decaying record
    UniformSeries x;
    x.sample_interval = 2e-5;
    x.values.resize(1 << 19);
    for (size_t k = 0; k < x.values.size(); ++k) {
        const double t = x.time_at(k);
        x.values[k] = std::exp(-0.63 * t) * std::sin(63.25 * t);
    }
    WaveletSpectrum ws_serial, ws_parallel;
    const double t_cwt_serial =
        timed([&] { ws_serial = wavelet_spectrum_serial(x, 2.0, 2000.0, 16, 64); });
    const double t_cwt_parallel =
        timed([&] { ws_parallel = wavelet_spectrum(x, 2.0, 2000.0, 16, 64); });
    bool same = ws_serial.magnitude == ws_parallel.magnitude;
    std::printf("wavelet (%zu scales x %zu cols): serial %.2fs, parallel %.2fs, speedup %.2fx, "
                "identical=%s\n",
                ws_serial.omegas.size(), ws_serial.times.size(), t_cwt_serial, t_cwt_parallel,
                t_cwt_serial / t_cwt_parallel, same ? "yes" : "NO");

    return identical && same ? 0 : 1;
}
