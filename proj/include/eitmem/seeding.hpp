#ifndef EITMEM_SEEDING_HPP
#define EITMEM_SEEDING_HPP

#include <cstdint>

namespace eitmem {

/// Independent random streams per realization.
enum class Stream : std::uint64_t {
    signal = 1,
    blank = 2,
    calibration = 3,
    input = 4,
    sweep_point = 5,
    sampling = 6,
};

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// seed = hash(master, index, stream); depends on nothing else, so any
/// worker can regenerate any realization.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, Stream stream)
{
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ index);
    return splitmix64(h ^ (static_cast<std::uint64_t>(stream) * 0xd6e8feb86659fd93ULL));
}

} // namespace eitmem

#endif // EITMEM_SEEDING_HPP
