/*
 Copyright 2026 The smpc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef SMPC_RNG_HPP_
#define SMPC_RNG_HPP_

#include <array>
#include <cmath>
#include <cstdint>

namespace smpc
{
    /// Philox4x32-10 block function (Salmon et al.). Pure: output depends only on counter and key.
    inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                                   std::array<std::uint32_t, 2> key)
    {
        constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
        constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round)
        {
            const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += W0;
            key[1] += W1;
        }
        return ctr;
    }

    /// splitmix64 finalizer, used to derive independent sub-stream ids.
    inline std::uint64_t mix64(std::uint64_t z)
    {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /**
     * Counter-based random stream. Draw (i, j) is a pure function of (seed, stream, i, j):
     * sample index i and dimension j address the counter directly, so results never depend
     * on evaluation order or thread count.
     */
    class RngStream
    {
    public:
        explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

        std::uint64_t seed() const noexcept { return seed_; }
        std::uint64_t stream() const noexcept { return stream_; }

        /// Child stream, e.g. one per rollout or per MPC step.
        RngStream substream(std::uint64_t id) const { return RngStream(seed_, mix64(stream_ ^ mix64(id + 1))); }

        /// Uniform on the open interval (0,1), 53 random bits.
        double uniform(std::uint64_t i, std::uint64_t j) const
        {
            const auto r = block(i, j);
            return toUnit(r[0], r[1]);
        }

        /// Standard normal via Box-Muller on the two uniforms of block (i, j).
        double normal(std::uint64_t i, std::uint64_t j) const
        {
            const auto r = block(i, j);
            const double u1 = toUnit(r[0], r[1]);
            const double u2 = toUnit(r[2], r[3]);
            return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925 * u2);
        }

    private:
        std::array<std::uint32_t, 4> block(std::uint64_t i, std::uint64_t j) const
        {
            const std::uint64_t s = stream_ ^ (j * 0x9E3779B97F4A7C15ull);
            return philox4x32({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32),
                               static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)},
                              {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
        }

        static double toUnit(std::uint32_t a, std::uint32_t b)
        {
            const std::uint64_t bits = ((static_cast<std::uint64_t>(a) << 32) | b) >> 11;
            return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
        }

        std::uint64_t seed_;
        std::uint64_t stream_;
    };
} // namespace smpc

#endif // SMPC_RNG_HPP_
