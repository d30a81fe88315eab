#pragma once

#include <complex>
#include <span>
#include <vector>

namespace pid {

/// In-place complex DFT (unnormalized forward, 1/N-normalized inverse).
void fft(std::vector<std::complex<double>>& data, bool inverse);

/// Forward DFT of a real signal zero-padded to nfft; returns the one-sided
/// half spectrum, bins 0..nfft/2.
std::vector<std::complex<double>> rfft_halfspectrum(std::span<const double> x, size_t nfft);

/// Magnitude of the analytic signal obtained by one-sided spectral masking of
/// the full record.
std::vector<double> hilbert_envelope(std::span<const double> x);

size_t next_pow2(size_t n);

}  // namespace pid
