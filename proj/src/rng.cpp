#include "fpbandits/rng.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

namespace fpbandits {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
    x += kGamma;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

RngStream RngStream::from_parts(std::uint64_t base_seed, std::uint64_t run_id,
                                std::string_view stream_name) {
    std::uint64_t key = mix64(mix64(base_seed + run_id) ^ fnv1a(stream_name));
    RngStream s(key);
    s.key_ = key;
    return s;
}

std::uint64_t RngStream::next_u64() {
    state_ += kGamma;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_normal_ = true;
    return radius * std::cos(angle);
}

int RngStream::next_index(int n) {
    assert(n >= 1);
    // Rejection on the top range keeps the draw exactly uniform.
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return static_cast<int>(x % bound);
}

long RngStream::next_poisson(double lambda) {
    assert(lambda >= 0.0);
    constexpr double kStep = 500.0;
    long k = 0;
    double remaining = lambda;
    double p = 1.0;
    do {
        ++k;
        p *= next_double();
        while (p < 1.0 && remaining > 0.0) {
            if (remaining > kStep) {
                p *= std::exp(kStep);
                remaining -= kStep;
            } else {
                p *= std::exp(remaining);
                remaining = 0.0;
            }
        }
    } while (p > 1.0);
    return k - 1;
}

}  // namespace fpbandits
