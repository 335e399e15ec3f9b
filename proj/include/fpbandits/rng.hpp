#pragma once

#include <cstdint>
#include <string_view>

namespace fpbandits {

// Counter-based deterministic random stream (SplitMix64 core).
//
// Each stream is keyed by (base_seed, run_id, stream_name) so that parallel
// simulation runs own disjoint streams and adding a consumer of one stream
// never perturbs draws from another. Output i is a bijective mix of
// key + i*gamma, so the sequence is reproducible and skippable.
class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t key) : state_(key) {}

    // Derives a stream key from the run seed and a stream name
    // ("instance", "policy-noise", "reward-noise", ...).
    static RngStream from_parts(std::uint64_t base_seed, std::uint64_t run_id,
                                std::string_view stream_name);

    std::uint64_t next_u64();

    // Uniform on [0, 1), 53-bit mantissa.
    double next_double();

    // Standard normal via Box-Muller; the paired draw is cached.
    double next_normal();

    // Uniform index in {0, ..., n-1}, n >= 1.
    int next_index(int n);

    // Poisson(lambda), Knuth's method with chunking for large lambda.
    long next_poisson(double lambda);

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t state_ = 0;
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

// SplitMix64 finalizer; also used to combine seed parts.
std::uint64_t mix64(std::uint64_t x);

}  // namespace fpbandits
