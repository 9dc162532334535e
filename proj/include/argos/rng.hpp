#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace argos {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to spread structured seeds over the full range.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t tag(std::string_view name) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derives an independent stream seed from a master seed and a path of
/// integer labels. Streams depend only on the labels, never on scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(master);
    for (auto v : path) s = mix64(s ^ mix64(v + 0x632be59bd9b4e019ULL));
    return s;
}

}  // namespace argos
