#ifndef ROBUSTGAN_RNG_HPP
#define ROBUSTGAN_RNG_HPP

#include <cstdint>
#include <random>

#include "robustgan/matrix.hpp"

namespace robustgan {

// splitmix64 mix step; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t& state);

// Deterministic per-stream seed from (base, index); replications use
// consecutive indices so parallel and serial runs agree bit-for-bit.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

// Seeded generator with splittable streams. Uniform and normal variates are
// produced by explicit transforms (not std::*_distribution) so that a fixed
// seed yields the same sequence on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Independent stream derived from (seed, stream_id).
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();
    double uniform01();  // [0, 1)
    double normal();     // standard normal, Marsaglia polar

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// n x p matrix of iid standard normal entries, row-major draw order.
Matrix sample_std_normal(std::size_t n, std::size_t p, Rng& rng);

}  // namespace robustgan

#endif
