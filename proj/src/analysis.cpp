#include "pid/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <numbers>

#include "pid/errors.hpp"
#include "pid/fft.hpp"

namespace pid {

namespace {

constexpr double kDecayFraction = 1e-2;  // required end-of-record signal fraction

void check_series(const UniformSeries& x, const char* who) {
    if (x.sample_interval <= 0.0) throw AnalysisError(std::string(who) + ": nonpositive interval");
    if (x.values.size() < 16) throw AnalysisError(std::string(who) + ": series too short");
}

double peak_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double tail_abs(const std::vector<double>& v) {
    const size_t window = std::max<size_t>(1, v.size() / 100);
    double m = 0.0;
    for (size_t k = v.size() - window; k < v.size(); ++k) m = std::max(m, std::abs(v[k]));
    return m;
}

double spectral_moments_bandwidth(const UniformSeries& envelope) {
    const Spectrum sp = energy_spectrum(envelope);
    // two-sided trapezoid with E^2 inside both integrals; interior bins of the
    // symmetric spectrum count twice
    double num = 0.0, den = 0.0;
    const size_t n = sp.values.size();
    for (size_t k = 0; k < n; ++k) {
        const double e2 = sp.values[k] * sp.values[k];
        const double weight = (k == 0 || k + 1 == n) ? 1.0 : 2.0;
        num += weight * sp.omega[k] * sp.omega[k] * e2;
        den += weight * e2;
    }
    if (den <= 0.0) throw AnalysisError("rms_bandwidth: empty spectrum (constant signal?)");
    return 2.0 * std::sqrt(num / den);
}

}  // namespace

UniformSeries analytic_envelope(const UniformSeries& x) {
    check_series(x, "analytic_envelope");
    UniformSeries out;
    out.start_time = x.start_time;
    out.sample_interval = x.sample_interval;
    out.values = hilbert_envelope(x.values);
    return out;
}

Spectrum energy_spectrum(const UniformSeries& envelope, int min_pad_factor) {
    check_series(envelope, "energy_spectrum");
    const size_t nfft = next_pow2(envelope.values.size() * static_cast<size_t>(min_pad_factor));
    const auto half = rfft_halfspectrum(envelope.values, nfft);
    Spectrum sp;
    sp.domega = 2.0 * std::numbers::pi / (static_cast<double>(nfft) * envelope.sample_interval);
    sp.omega.resize(half.size());
    sp.values.resize(half.size());
    for (size_t k = 0; k < half.size(); ++k) {
        sp.omega[k] = sp.domega * static_cast<double>(k);
        sp.values[k] = std::norm(half[k]);
    }
    return sp;
}

double rms_bandwidth(const UniformSeries& signal) {
    check_series(signal, "rms_bandwidth");
    const double peak = peak_abs(signal.values);
    if (peak <= 0.0) throw AnalysisError("rms_bandwidth: zero signal");
    if (tail_abs(signal.values) >= kDecayFraction * peak)
        throw AnalysisError(
            "rms_bandwidth: signal has not decayed below 1e-2 of its peak by record end");
    return spectral_moments_bandwidth(analytic_envelope(signal));
}

double rms_bandwidth_of_envelope(const UniformSeries& envelope) {
    check_series(envelope, "rms_bandwidth");
    const double peak = peak_abs(envelope.values);
    if (peak <= 0.0) throw AnalysisError("rms_bandwidth: zero signal");
    if (tail_abs(envelope.values) >= kDecayFraction * peak)
        throw AnalysisError(
            "rms_bandwidth: signal has not decayed below 1e-2 of its peak by record end");
    return spectral_moments_bandwidth(envelope);
}

std::pair<double, double> decay_time_constant(const UniformSeries& energy) {
    check_series(energy, "decay_time_constant");
    const auto& v = energy.values;
    const size_t n = v.size();

    // running maximum of the remaining record; its corner points are the
    // crest samples the upper envelope interpolates through
    std::vector<double> env(n);
    env[n - 1] = v[n - 1];
    for (size_t k = n - 1; k-- > 0;) env[k] = std::max(v[k], env[k + 1]);

    const double peak = env[0];
    if (!(peak > 0.0)) throw AnalysisError("decay_time_constant: no positive energy peak");
    size_t ref = 0;
    while (ref < n && v[ref] != peak) ++ref;
    const double threshold = peak / std::numbers::e;
    if (env[n - 1] > threshold)
        throw AnalysisError("decay_time_constant: energy never decays below 1/e of its peak");

    double prev_t = energy.time_at(ref);
    double prev_v = peak;
    const double t_ref = prev_t;
    for (size_t k = ref; k + 1 < n; ++k) {
        if (!(env[k] > env[k + 1])) continue;  // not a corner
        const double t = energy.time_at(k);
        const double val = env[k];
        if (val <= threshold) {
            const double dv = prev_v - val;
            const double tc = (dv > 0.0) ? prev_t + (prev_v - threshold) / dv * (t - prev_t) : t;
            return {tc - t_ref, t_ref};
        }
        prev_t = t;
        prev_v = val;
    }
    // crossing inside the final segment
    const double t = energy.time_at(n - 1);
    const double val = env[n - 1];
    const double dv = prev_v - val;
    const double tc = (dv > 0.0) ? prev_t + (prev_v - threshold) / dv * (t - prev_t) : t;
    return {tc - t_ref, t_ref};
}

UniformSeries moving_maximum(const UniformSeries& x, size_t window) {
    UniformSeries out = x;
    if (window <= 1 || x.values.empty()) return out;
    const auto& v = x.values;
    std::deque<size_t> q;  // indices of decreasing values inside the look-ahead
    const size_t n = v.size();
    // forward window [i, i+window)
    for (size_t i = 0, j = 0; i < n; ++i) {
        while (j < std::min(n, i + window)) {
            while (!q.empty() && v[q.back()] <= v[j]) q.pop_back();
            q.push_back(j);
            ++j;
        }
        while (!q.empty() && q.front() < i) q.pop_front();
        out.values[i] = v[q.front()];
    }
    return out;
}

BandwidthReport tb_product(const SystemConfig& cfg, const Trajectory& traj,
                           const EnergyLedger& ledger, Subject subject,
                           const AnalysisOptions& opts) {
    BandwidthReport rep;
    rep.subject = subject;

    UniformSeries energy =
        subject == Subject::PS ? ledger.e_ps_series() : ledger.e_sys_series();
    size_t signal_len = 0;

    if (subject == Subject::PS) {
        const UniformSeries signal = traj.ps_velocity_series();
        rep.rms_bandwidth = rms_bandwidth(signal);
        rep.end_fraction = tail_abs(signal.values) / peak_abs(signal.values);
        signal_len = signal.size();
    } else {
        // smooth intra-cycle ripple with a one-period moving maximum before
        // taking the amplitude-like square root
        const double omega_n = std::sqrt(cfg.ps.stiffness / cfg.ps_mass());
        const double period = 2.0 * std::numbers::pi / omega_n;
        const size_t window =
            std::max<size_t>(2, static_cast<size_t>(std::ceil(period / ledger.sample_interval)));
        UniformSeries signal = moving_maximum(energy, window);
        if (opts.integrated_signal == AnalysisOptions::IntegratedSignal::SqrtEnergy)
            for (auto& v : signal.values) v = std::sqrt(std::max(0.0, v));
        rep.rms_bandwidth = rms_bandwidth_of_envelope(signal);
        rep.end_fraction = tail_abs(signal.values) / peak_abs(signal.values);
        signal_len = signal.size();
    }

    const auto [decay, t_ref] = decay_time_constant(energy);
    rep.decay_time = decay;
    rep.reference_time = t_ref;
    rep.tb_product = rep.rms_bandwidth * rep.decay_time;
    rep.grid_domega =
        2.0 * std::numbers::pi /
        (static_cast<double>(next_pow2(4 * signal_len)) * ledger.sample_interval);
    return rep;
}

// ---------------------------------------------------------------------------
// Wavelet spectrum
// ---------------------------------------------------------------------------

namespace {

constexpr double kMorletCenter = 6.0;  // admissible analytic Morlet parameter

WaveletSpectrum cwt_impl(const UniformSeries& x, double omega_lo, double omega_hi,
                         int voices_per_octave, int time_stride, bool parallel) {
    check_series(x, "wavelet_spectrum");
    if (time_stride < 1) throw AnalysisError("wavelet_spectrum: time_stride must be >= 1");
    const double nyquist = std::numbers::pi / x.sample_interval;
    if (!(omega_lo > 0.0) || !(omega_hi > omega_lo) || omega_hi >= nyquist)
        throw AnalysisError("wavelet_spectrum: frequency range must satisfy 0 < lo < hi < Nyquist");
    if (voices_per_octave < 1) throw AnalysisError("wavelet_spectrum: voices must be >= 1");

    const size_t n = x.values.size();
    const size_t nfft = next_pow2(2 * n);
    std::vector<std::complex<double>> X(nfft, 0.0);
    for (size_t k = 0; k < n; ++k) X[k] = x.values[k];
    fft(X, false);

    std::vector<double> omegas;  // descending
    const int count =
        static_cast<int>(std::floor(voices_per_octave * std::log2(omega_hi / omega_lo))) + 1;
    for (int j = count - 1; j >= 0; --j)
        omegas.push_back(omega_lo * std::pow(2.0, static_cast<double>(j) / voices_per_octave));

    WaveletSpectrum ws;
    ws.omegas = omegas;
    for (size_t k = 0; k < n; k += static_cast<size_t>(time_stride))
        ws.times.push_back(x.time_at(k));
    ws.magnitude.assign(omegas.size(), {});

    const double domega = 2.0 * std::numbers::pi / (static_cast<double>(nfft) * x.sample_interval);
    const double norm_pi = std::pow(std::numbers::pi, -0.25);

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int r = 0; r < static_cast<int>(omegas.size()); ++r) {
        const double scale = kMorletCenter / omegas[r];
        std::vector<std::complex<double>> row(nfft, 0.0);
        const double amp = norm_pi * std::sqrt(scale);
        for (size_t k = 1; k <= nfft / 2; ++k) {  // analytic: positive frequencies only
            const double arg = scale * domega * static_cast<double>(k) - kMorletCenter;
            row[k] = X[k] * (amp * std::exp(-0.5 * arg * arg));
        }
        fft(row, true);
        auto& mag = ws.magnitude[r];
        mag.reserve(ws.times.size());
        for (size_t k = 0; k < n; k += static_cast<size_t>(time_stride))
            mag.push_back(std::abs(row[k]));
    }

    double global_max = 0.0;
    for (const auto& row : ws.magnitude)
        for (double v : row) global_max = std::max(global_max, v);
    if (global_max > 0.0) {
        const double inv = 1.0 / global_max;
        for (auto& row : ws.magnitude)
            for (double& v : row) v *= inv;
    }
    return ws;
}

}  // namespace

WaveletSpectrum wavelet_spectrum(const UniformSeries& x, double omega_lo, double omega_hi,
                                 int voices_per_octave, int time_stride) {
    return cwt_impl(x, omega_lo, omega_hi, voices_per_octave, time_stride, true);
}

WaveletSpectrum wavelet_spectrum_serial(const UniformSeries& x, double omega_lo, double omega_hi,
                                        int voices_per_octave, int time_stride) {
    return cwt_impl(x, omega_lo, omega_hi, voices_per_octave, time_stride, false);
}

std::pair<double, double> linear_baseline(const PrimaryStructureParams& ps) {
    if (!(ps.damping < 2.0 * std::sqrt(ps.stiffness * ps.total_mass)))
        throw AnalysisError("linear_baseline: oscillator is not underdamped");
    return {ps.damping / ps.total_mass, ps.total_mass / ps.damping};
}

}  // namespace pid
