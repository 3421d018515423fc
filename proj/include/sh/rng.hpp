#pragma once
// Counter-based random number streams.
//
// Every random quantity in the project is a pure function of
// (stream key, counter).  Streams are derived from a user seed plus a purpose
// tag (and optionally replica / component indices), counters address draws by
// position (sequence index, lattice site, ...).  This gives bit-identical
// replays regardless of evaluation order or parallelism degree, and lets
// overlapping lattice windows agree site-wise.
//
// The block cipher is Philox-4x32-10; each block yields two 64-bit words,
// mapped to uniforms on (0,1), exponentials, or Box-Muller Gaussian pairs.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>

#include <Eigen/Dense>

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace sh::rng {

namespace detail {

inline constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
inline constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct Ctr4 {
  std::uint32_t v[4];
};

inline Ctr4 philox10(Ctr4 c, std::uint32_t k0, std::uint32_t k1) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k0 += kPhiloxW32A;
      k1 += kPhiloxW32B;
    }
    const std::uint64_t p0 = std::uint64_t(kPhiloxM4x32A) * c.v[0];
    const std::uint64_t p1 = std::uint64_t(kPhiloxM4x32B) * c.v[2];
    const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    const Ctr4 n{{hi1 ^ c.v[1] ^ k0, lo1, hi0 ^ c.v[3] ^ k1, lo0}};
    c = n;
  }
  return c;
}

}  // namespace detail

// Purpose tags; combined with the user seed to derive independent streams.
enum StreamTag : std::uint64_t {
  kTagBulk = 1,       // lattice bulk weights
  kTagBoundaryH = 2,  // horizontal boundary increments
  kTagBoundaryV = 3,  // vertical boundary increments
  kTagBm = 4,         // Brownian increments
  kTagSeq = 5,        // queueing input sequences
  kTagBacklog = 6,    // stationary backlog draws
  kTagMisc = 7,
};

struct Block {
  std::uint64_t a, b;
};

// A stream is a Philox key.
struct Stream {
  std::uint32_t k0 = 0, k1 = 0;
};

inline Stream stream(std::uint64_t seed, std::uint64_t tag) {
  const std::uint64_t h =
      detail::splitmix64(detail::splitmix64(seed) ^ detail::splitmix64(tag));
  return Stream{std::uint32_t(h), std::uint32_t(h >> 32)};
}

// Derived stream for replica / component n.
inline Stream substream(Stream s, std::uint64_t n) {
  const std::uint64_t base = std::uint64_t(s.k0) | (std::uint64_t(s.k1) << 32);
  const std::uint64_t h = detail::splitmix64(
      base ^ detail::splitmix64(n ^ 0x517CC1B727220A95ull));
  return Stream{std::uint32_t(h), std::uint32_t(h >> 32)};
}

inline Block block_at(Stream s, std::uint64_t index, std::uint64_t slot = 0) {
  detail::Ctr4 c{{std::uint32_t(index), std::uint32_t(index >> 32),
                  std::uint32_t(slot), std::uint32_t(slot >> 32)}};
  c = detail::philox10(c, s.k0, s.k1);
  return Block{std::uint64_t(c.v[0]) | (std::uint64_t(c.v[1]) << 32),
               std::uint64_t(c.v[2]) | (std::uint64_t(c.v[3]) << 32)};
}

// One block per lattice site; negative coordinates map via two's complement,
// so any window over the same (seed-derived) stream sees identical weights.
inline Block block_at_site(Stream s, std::int64_t col, std::int64_t row) {
  return block_at(s, std::uint64_t(col), std::uint64_t(row));
}

// Uniform on the open interval (0,1): never 0, never 1, so log() is safe.
inline double u01(std::uint64_t bits) {
  return (double(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform_at(Stream s, std::uint64_t index, std::uint64_t slot = 0) {
  return u01(block_at(s, index, slot).a);
}

inline double exp_at(Stream s, std::uint64_t index, double rate,
                     std::uint64_t slot = 0) {
  return -std::log(u01(block_at(s, index, slot).a)) / rate;
}

inline double exp_at_site(Stream s, std::int64_t col, std::int64_t row,
                          double rate) {
  return -std::log(u01(block_at_site(s, col, row).a)) / rate;
}

namespace detail {

#if defined(__AVX2__)

// Lane-wise high 32 bits of unsigned 32x32 products.  The multiplier must sit
// in the even 32-bit lane of each 64-bit element (set1_epi32 satisfies this).
inline __m256i mulhi_epu32(__m256i a, __m256i m) {
  const __m256i pe = _mm256_mul_epu32(a, m);
  const __m256i po = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), m);
  const __m256i hi_mask =
      _mm256_set1_epi64x(static_cast<long long>(0xFFFFFFFF00000000ull));
  return _mm256_or_si256(_mm256_srli_epi64(pe, 32),
                         _mm256_and_si256(po, hi_mask));
}

// Runs the cipher on eight consecutive block indices at once and writes the
// sixteen uniforms in scalar order (block words a then b) into out[0..16).
// Bit-identical to eight block_at calls followed by u01 on each word.
inline void philox8_u01(std::uint32_t key0, std::uint32_t key1,
                        std::uint64_t first_index, std::uint64_t slot,
                        double* out) {
  alignas(32) std::uint32_t idx_lo[8], idx_hi[8];
  for (int j = 0; j < 8; ++j) {
    const std::uint64_t idx = first_index + static_cast<std::uint64_t>(j);
    idx_lo[j] = static_cast<std::uint32_t>(idx);
    idx_hi[j] = static_cast<std::uint32_t>(idx >> 32);
  }
  __m256i c0 = _mm256_load_si256(reinterpret_cast<const __m256i*>(idx_lo));
  __m256i c1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(idx_hi));
  __m256i c2 = _mm256_set1_epi32(static_cast<int>(std::uint32_t(slot)));
  __m256i c3 = _mm256_set1_epi32(static_cast<int>(std::uint32_t(slot >> 32)));
  __m256i k0 = _mm256_set1_epi32(static_cast<int>(key0));
  __m256i k1 = _mm256_set1_epi32(static_cast<int>(key1));
  const __m256i ma = _mm256_set1_epi32(static_cast<int>(kPhiloxM4x32A));
  const __m256i mb = _mm256_set1_epi32(static_cast<int>(kPhiloxM4x32B));
  const __m256i wa = _mm256_set1_epi32(static_cast<int>(kPhiloxW32A));
  const __m256i wb = _mm256_set1_epi32(static_cast<int>(kPhiloxW32B));
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k0 = _mm256_add_epi32(k0, wa);
      k1 = _mm256_add_epi32(k1, wb);
    }
    const __m256i hi0 = mulhi_epu32(c0, ma);
    const __m256i lo0 = _mm256_mullo_epi32(c0, ma);
    const __m256i hi1 = mulhi_epu32(c2, mb);
    const __m256i lo1 = _mm256_mullo_epi32(c2, mb);
    const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0);
    const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1);
    c0 = n0;
    c1 = lo1;
    c2 = n2;
    c3 = lo0;
  }
  alignas(32) std::uint32_t v0[8], v1[8], v2[8], v3[8];
  _mm256_store_si256(reinterpret_cast<__m256i*>(v0), c0);
  _mm256_store_si256(reinterpret_cast<__m256i*>(v1), c1);
  _mm256_store_si256(reinterpret_cast<__m256i*>(v2), c2);
  _mm256_store_si256(reinterpret_cast<__m256i*>(v3), c3);
  for (int j = 0; j < 8; ++j) {
    const std::uint64_t a =
        std::uint64_t(v0[j]) | (std::uint64_t(v1[j]) << 32);
    const std::uint64_t b =
        std::uint64_t(v2[j]) | (std::uint64_t(v3[j]) << 32);
    out[2 * j] = u01(a);
    out[2 * j + 1] = u01(b);
  }
}

#endif  // __AVX2__

}  // namespace detail

// Fills out[0..n) with i.i.d. Exp(rate); draw i comes from block
// first_index + i/2 (word a then word b).  Vectorized log via Eigen.
inline void fill_exp(Stream s, std::uint64_t first_index, double rate,
                     double* out, std::size_t n, std::uint64_t slot = 0) {
  std::size_t i = 0;
  std::uint64_t idx = first_index;
#if defined(__AVX2__)
  for (; i + 16 <= n; i += 16, idx += 8)
    detail::philox8_u01(s.k0, s.k1, idx, slot, out + i);
#endif
  while (i + 1 < n) {
    const Block blk = block_at(s, idx++, slot);
    out[i] = u01(blk.a);
    out[i + 1] = u01(blk.b);
    i += 2;
  }
  if (i < n) out[i] = u01(block_at(s, idx, slot).a);
  Eigen::Map<Eigen::ArrayXd> m(out, static_cast<Eigen::Index>(n));
  m = -m.log() / rate;
}

// Fills out[0..n) with i.i.d. N(0,1).  Draws 2i and 2i+1 come from the
// Box-Muller transform of block first_index + i, so each block is a pair.
inline void fill_normal(Stream s, std::uint64_t first_index, double* out,
                        std::size_t n, std::uint64_t slot = 0) {
  constexpr std::size_t kChunk = 4096;  // pairs per vectorized batch
  Eigen::ArrayXd u1(kChunk), u2(kChunk), r(kChunk);
  std::size_t produced = 0;
  std::uint64_t idx = first_index;
  while (produced < n) {
    const std::size_t pairs = std::min(kChunk, (n - produced + 1) / 2);
    std::size_t j = 0;
#if defined(__AVX2__)
    alignas(32) double tmp[16];
    for (; j + 8 <= pairs; j += 8, idx += 8) {
      detail::philox8_u01(s.k0, s.k1, idx, slot, tmp);
      for (int t = 0; t < 8; ++t) {
        u1[static_cast<Eigen::Index>(j + t)] = tmp[2 * t];
        u2[static_cast<Eigen::Index>(j + t)] = tmp[2 * t + 1];
      }
    }
#endif
    for (; j < pairs; ++j) {
      const Block blk = block_at(s, idx++, slot);
      u1[static_cast<Eigen::Index>(j)] = u01(blk.a);
      u2[static_cast<Eigen::Index>(j)] = u01(blk.b);
    }
    auto h1 = u1.head(static_cast<Eigen::Index>(pairs));
    r.head(static_cast<Eigen::Index>(pairs)) = (-2.0 * h1.log()).sqrt();
    const double two_pi = 6.283185307179586476925287;
    for (std::size_t j = 0; j < pairs; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double rv = r[jj], th = two_pi * u2[jj];
      out[produced + 2 * j] = rv * std::cos(th);
      if (produced + 2 * j + 1 < n) out[produced + 2 * j + 1] = rv * std::sin(th);
    }
    produced += 2 * pairs;
  }
}

// Single N(0,1) pair from one block (used where only a couple draws are needed).
inline std::array<double, 2> normal_pair_at(Stream s, std::uint64_t index,
                                            std::uint64_t slot = 0) {
  const Block blk = block_at(s, index, slot);
  const double v1 = u01(blk.a), v2 = u01(blk.b);
  const double r = std::sqrt(-2.0 * std::log(v1));
  const double th = 6.283185307179586476925287 * v2;
  return {r * std::cos(th), r * std::sin(th)};
}

}  // namespace sh::rng
