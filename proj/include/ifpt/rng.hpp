#pragma once

#include <cstdint>
#include <random>

namespace ifpt {

// Identity of an independent random stream: the user seed plus a stream
// index (typically the path number) and an optional substream (e.g. the
// solver's record-refresh counter).
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::uint64_t substream = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 make_engine(const RngStream& id) {
    std::uint64_t key = splitmix64(id.seed);
    key = splitmix64(key ^ id.stream);
    key = splitmix64(key ^ (id.substream * 0xd1b54a32d192ed03ULL));
    return std::mt19937_64(key);
}

}  // namespace ifpt
