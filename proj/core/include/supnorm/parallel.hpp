#ifndef SUPNORM_PARALLEL_HPP
#define SUPNORM_PARALLEL_HPP

#include <cstdint>
#include <functional>
#include <vector>

namespace supnorm {

// Worker count for data-parallel loops. Honours the SUPNORM_THREADS
// environment variable (values < 1 are ignored); re-read on every call so
// tests can change it at runtime.
int worker_count();

// Runs f(i) for i in [0, n) on worker_count() threads with a static block
// partition. Each index must write only to its own output slots; under that
// contract results are bitwise identical for any thread count.
void parallel_for(int n, const std::function<void(int)>& f);

// Small deterministic RNG (splitmix64). Used instead of <random> engines so
// sequences are identical across standard library implementations.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double uniform() { return (next() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
};

template <class T>
void deterministic_shuffle(std::vector<T>& v, std::uint64_t seed) {
    SplitMix64 rng(seed);
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
        int j = rng.below(i + 1);
        std::swap(v[i], v[static_cast<std::size_t>(j)]);
    }
}

}  // namespace supnorm

#endif
