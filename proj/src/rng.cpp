#include "robustgan/rng.hpp"

#include <cmath>

namespace robustgan {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t state = base;
    (void)splitmix64(state);
    state ^= 0xd1b54a32d192ed03ULL * (index + 1);
    return splitmix64(state);
}

Rng::Rng(std::uint64_t seed) : eng_(seed) {}

Rng Rng::stream(std::uint64_t seed, std::uint64_t stream_id) {
    return Rng(derive_seed(seed, stream_id));
}

std::uint64_t Rng::next_u64() { return eng_(); }

double Rng::uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
}

Matrix sample_std_normal(std::size_t n, std::size_t p, Rng& rng) {
    Matrix out(n, p);
    double* d = out.data();
    for (std::size_t i = 0; i < n * p; ++i) d[i] = rng.normal();
    return out;
}

}  // namespace robustgan
