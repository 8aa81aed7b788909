#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>

namespace depthscope::bits {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t word_count(std::size_t nbits) { return (nbits + kWordBits - 1) / kWordBits; }

inline bool test(std::span<const Word> w, std::size_t i) { return (w[i / kWordBits] >> (i % kWordBits)) & 1u; }
inline void set(std::span<Word> w, std::size_t i) { w[i / kWordBits] |= Word{1} << (i % kWordBits); }

inline std::size_t popcount(std::span<const Word> w)
{
    std::size_t c = 0;
    for (Word x : w) c += static_cast<std::size_t>(std::popcount(x));
    return c;
}

inline std::size_t popcount_and(std::span<const Word> a, std::span<const Word> m)
{
    std::size_t c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) c += static_cast<std::size_t>(std::popcount(a[i] & m[i]));
    return c;
}

/// popcount((a ^ b) & m)
inline std::size_t popcount_xor_and(std::span<const Word> a, std::span<const Word> b, std::span<const Word> m)
{
    std::size_t c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) c += static_cast<std::size_t>(std::popcount((a[i] ^ b[i]) & m[i]));
    return c;
}

/// popcount((a | b) & m)
inline std::size_t popcount_or_and(std::span<const Word> a, std::span<const Word> b, std::span<const Word> m)
{
    std::size_t c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) c += static_cast<std::size_t>(std::popcount((a[i] | b[i]) & m[i]));
    return c;
}

} // namespace depthscope::bits
