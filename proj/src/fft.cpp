#include "pid/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace pid {

namespace {
// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft(std::vector<std::complex<double>>& data, bool inverse) {
    const size_t n = data.size();
    if (n == 0) return;
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n), ptr, ptr,
                                inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& v : data) v *= scale;
    }
}

std::vector<std::complex<double>> rfft_halfspectrum(std::span<const double> x, size_t nfft) {
    std::vector<double> in(nfft, 0.0);
    std::copy(x.begin(), x.end(), in.begin());
    std::vector<std::complex<double>> out(nfft / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in.data(),
                                    reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

std::vector<double> hilbert_envelope(std::span<const double> x) {
    const size_t n = x.size();
    std::vector<std::complex<double>> a(n);
    for (size_t k = 0; k < n; ++k) a[k] = x[k];
    fft(a, false);
    // keep DC (and Nyquist for even n), double positive, drop negative frequencies
    const size_t half = n / 2;
    for (size_t k = 1; k < half; ++k) a[k] *= 2.0;
    if (n % 2 == 1 && n > 1) a[half] *= 2.0;
    for (size_t k = half + 1; k < n; ++k) a[k] = 0.0;
    fft(a, true);
    std::vector<double> env(n);
    for (size_t k = 0; k < n; ++k) env[k] = std::abs(a[k]);
    return env;
}

}  // namespace pid
