#pragma once

#include <utility>
#include <vector>

#include "pid/dynamics.hpp"
#include "pid/energy.hpp"
#include "pid/model.hpp"
#include "pid/series.hpp"

namespace pid {

enum class Subject { PS, Integrated };

struct AnalysisOptions {
    /// Amplitude-like signal used for the integrated-system bandwidth: the
    /// square root of the smoothed system energy (default, keeps the linear
    /// baseline at a unit time-bandwidth product) or the energy itself.
    enum class IntegratedSignal { SqrtEnergy, Energy };
    IntegratedSignal integrated_signal = IntegratedSignal::SqrtEnergy;
};

/// Energy spectrum E(w) = |F[envelope]|^2 on a uniform angular-frequency
/// grid. Stored one-sided (0..Nyquist); the spectrum of a real signal is
/// symmetric, and the moment quadratures weight interior bins twice.
struct Spectrum {
    double domega = 0.0;         // rad/s grid spacing
    std::vector<double> omega;   // rad/s, ascending from 0
    std::vector<double> values;  // >= 0
};

struct BandwidthReport {
    Subject subject = Subject::PS;
    double rms_bandwidth = 0.0;   // rad/s
    double decay_time = 0.0;      // s
    double tb_product = 0.0;      // [-]
    double reference_time = 0.0;  // s, decay-measurement origin (post-shock energy peak)
    double end_fraction = 0.0;    // residual signal fraction at record end (diagnostic)
    double grid_domega = 0.0;     // spectral resolution used (diagnostic)
};

/// Time/frequency magnitude map, normalized to a global maximum of one.
/// Frequency rows are stored descending to match the CSV export layout.
struct WaveletSpectrum {
    std::vector<double> times;   // s
    std::vector<double> omegas;  // rad/s, descending
    std::vector<std::vector<double>> magnitude;
};

/// Magnitude of the analytic signal of the full record (slowly varying
/// amplitude of a zero-mean oscillatory input).
UniformSeries analytic_envelope(const UniformSeries& x);

Spectrum energy_spectrum(const UniformSeries& envelope, int min_pad_factor = 4);

/// RMS bandwidth 2 sqrt(int w^2 E^2 dw / int E^2 dw) of the envelope's
/// energy spectrum. Errors if the signal has not decayed below 1e-2 of its
/// peak by the record end (spectral truncation would bias the moments).
double rms_bandwidth(const UniformSeries& signal);

/// Same moments for a signal that already is an envelope (no analytic-signal
/// step); used for the integrated-system energy signal.
double rms_bandwidth_of_envelope(const UniformSeries& envelope);

/// (decay time to 1/e of the post-peak energy envelope, reference time).
/// The upper envelope interpolates the running-maximum corner points, which
/// rides energy crests and is exact for monotone decay.
std::pair<double, double> decay_time_constant(const UniformSeries& energy);

/// Forward moving maximum over `window` samples.
UniformSeries moving_maximum(const UniformSeries& x, size_t window);

BandwidthReport tb_product(const SystemConfig& cfg, const Trajectory& traj,
                           const EnergyLedger& ledger, Subject subject,
                           const AnalysisOptions& opts = {});

WaveletSpectrum wavelet_spectrum(const UniformSeries& x, double omega_lo, double omega_hi,
                                 int voices_per_octave, int time_stride = 1);
/// Reference single-thread implementation (kept for testing the parallel path).
WaveletSpectrum wavelet_spectrum_serial(const UniformSeries& x, double omega_lo, double omega_hi,
                                        int voices_per_octave, int time_stride = 1);

/// Classical half-power bandwidth C/M and storage time M/C of the bare
/// underdamped oscillator; their product is one.
std::pair<double, double> linear_baseline(const PrimaryStructureParams& ps);

}  // namespace pid
