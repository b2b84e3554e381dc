#pragma once

// Counter-based random number generation (Philox4x64, 10 rounds).
//
// Every uniform this library consumes is addressed, not sequenced: draw
// slot j of stream s in domain d under seed q is
//
//   block   = philox4x64({j >> 2, s, 0, 0}, key = {q, d})
//   uniform = (block[j & 3] >> 11) * 2^-53        in [0, 1)
//
// so any draw can be regenerated in isolation. That is what makes batch,
// scalar and sharded generation produce bit-identical output: they all
// evaluate the same (seed, domain, stream, slot) addresses, in whatever
// order they like. Domains keep independent consumers (joint sampling,
// axial rotations, toy clouds, shuffles, searches) off each other's
// streams.
//
// The permutation is the Philox4x64-10 function of Salmon et al.; the
// implementation is checked in the tests against reference outputs from
// NumPy's Philox bit generator.

#include <array>
#include <cstdint>

namespace betabox::rng {

using Block = std::array<std::uint64_t, 4>;
using Key = std::array<std::uint64_t, 2>;

namespace detail {
inline constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
inline constexpr std::uint64_t kMul1 = 0xCA5A826395121157ull;
inline constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
inline constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}
}  // namespace detail

inline Block philox4x64(Block counter, Key key) {
    using namespace detail;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, counter[0], hi0, lo0);
        mulhilo(kMul1, counter[2], hi1, lo1);
        counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return counter;
}

// Maps a 64 bit word to a double in [0, 1) with 53 random bits.
inline double to_unit(std::uint64_t word) {
    return static_cast<double>(word >> 11) * 0x1.0p-53;
}

// Draw-slot address spaces. Values are part of the output contract: schema
// or domain changes renumber every stream, so only append.
enum class Domain : std::uint64_t {
    sampling = 0,      // joint-space samplers, one stream per requested sample
    rotations = 1,     // axial rotation draws in the workspace pipeline
    toys = 2,          // synthetic square / disk / planar arc clouds
    permutations = 3,  // shuffles for convergence curves, one stream per permutation
    search = 4,        // randomized searches (pattern counterexamples)
};

inline double uniform_at(std::uint64_t seed, Domain domain, std::uint64_t stream, std::uint64_t slot) {
    Block b = philox4x64({slot >> 2, stream, 0, 0}, {seed, static_cast<std::uint64_t>(domain)});
    return to_unit(b[slot & 3]);
}

// Sequential view of one stream. Caches the current block, so consuming
// slots in order costs one Philox evaluation per four draws.
class Stream {
  public:
    Stream(std::uint64_t seed, Domain domain, std::uint64_t stream, std::uint64_t first_slot = 0)
        : key_{seed, static_cast<std::uint64_t>(domain)}, stream_(stream), slot_(first_slot) {}

    double next() { return to_unit(next_word()); }

    std::uint64_t next_word() {
        std::uint64_t block_index = slot_ >> 2;
        if (block_index != cached_block_) {
            cache_ = philox4x64({block_index, stream_, 0, 0}, key_);
            cached_block_ = block_index;
        }
        return cache_[slot_++ & 3];
    }

    // Bulk variant of next(): writes n consecutive draws to dst. Produces
    // exactly the values n calls to next() would, but the block-aligned
    // middle stretch skips the per-draw cache check.
    void fill(double* dst, std::size_t n) {
        while (n > 0 && (slot_ & 3) != 0) {
            *dst++ = next();
            --n;
        }
        while (n >= 4) {
            Block b = philox4x64({slot_ >> 2, stream_, 0, 0}, key_);
            dst[0] = to_unit(b[0]);
            dst[1] = to_unit(b[1]);
            dst[2] = to_unit(b[2]);
            dst[3] = to_unit(b[3]);
            dst += 4;
            n -= 4;
            slot_ += 4;
        }
        while (n > 0) {
            *dst++ = next();
            --n;
        }
    }

    std::uint64_t slot() const { return slot_; }

  private:
    Key key_;
    std::uint64_t stream_;
    std::uint64_t slot_ = 0;
    std::uint64_t cached_block_ = ~0ull;
    Block cache_{};
};

}  // namespace betabox::rng
