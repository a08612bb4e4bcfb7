#pragma once

#include <complex>
#include <cstdint>
#include <limits>

namespace mom {

// Counter-based SplitMix64. Output n of stream (seed, index) is
// mix64(key + n * golden) with key = mix64(seed ^ mix64(index + golden)),
// so any trial's stream can be produced without touching the others.
class Rng {
public:
    using result_type = std::uint64_t;

    Rng(std::uint64_t seed, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    // uniform in [0,1) with 53 random bits
    double uniform();
    // standard normal, Box-Muller (no std distributions: their output is
    // implementation-defined, which would make seeds non-portable)
    double normal();
    std::complex<double> complex_normal();
    double phase();

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace mom
