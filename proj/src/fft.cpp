#include "ptchaos/fft.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>

namespace ptchaos::fft {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559005768;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

/// Iterative radix-2 Cooley-Tukey; n must be a power of two. Twiddle
/// factors come from a single full-resolution table so rounding does not
/// accumulate across levels.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n < 2) return;

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    std::vector<std::complex<double>> tw(n / 2);
    const double sgn = inverse ? 1.0 : -1.0;
    for (std::size_t j = 0; j < n / 2; ++j) {
        const double ang = sgn * kTwoPi * static_cast<double>(j) / static_cast<double>(n);
        tw[j] = {std::cos(ang), std::sin(ang)};
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> w = tw[j * stride];
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }

    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& z : a) z *= scale;
    }
}

/// Bluestein chirp-z transform for arbitrary n, built on zero-padded
/// power-of-two convolutions.
void fft_bluestein(std::vector<std::complex<double>>& x, bool inverse) {
    const std::size_t n = x.size();
    const std::size_t m = next_pow2(2 * n + 1);
    const double sgn = inverse ? 1.0 : -1.0;

    // chirp_j = exp(sgn * i * pi * j^2 / n), with j^2 reduced mod 2n to
    // keep the argument small and exact.
    std::vector<std::complex<double>> chirp(n);
    const auto two_n = static_cast<std::uint64_t>(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::uint64_t jm = static_cast<std::uint64_t>(j) % two_n;
        const std::uint64_t j2 = (jm * jm) % two_n;
        const double ang = sgn * kTwoPi * 0.5 * static_cast<double>(j2) /
                           static_cast<double>(n);
        chirp[j] = {std::cos(ang), std::sin(ang)};
    }

    std::vector<std::complex<double>> a(m, {0.0, 0.0});
    std::vector<std::complex<double>> b(m, {0.0, 0.0});
    for (std::size_t j = 0; j < n; ++j) a[j] = x[j] * chirp[j];
    b[0] = std::conj(chirp[0]);
    for (std::size_t j = 1; j < n; ++j) {
        b[j] = std::conj(chirp[j]);
        b[m - j] = b[j];
    }

    fft_pow2(a, false);
    fft_pow2(b, false);
    for (std::size_t j = 0; j < m; ++j) a[j] *= b[j];
    fft_pow2(a, true);

    for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& z : x) z *= scale;
    }
}

}  // namespace

void transform(std::vector<std::complex<double>>& a, bool inverse) {
    if (a.empty()) throw std::invalid_argument("fft: empty input");
    if (is_pow2(a.size())) {
        fft_pow2(a, inverse);
    } else {
        fft_bluestein(a, inverse);
    }
}

}  // namespace ptchaos::fft
