#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <utility>
#include <vector>

namespace svaug {

// splitmix64 stream. std::mt19937 and the std:: distributions are
// implementation-defined across standard libraries, which would break the
// byte-identical-reports guarantee, so all randomness goes through this.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). Rejection sampling keeps it unbiased.
  uint64_t bounded(uint64_t n) {
    if (n == 0) return 0;
    uint64_t threshold = (0ULL - n) % n;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct values from [0, n), in draw order (partial Fisher-Yates).
  std::vector<uint32_t> sample_indices(uint32_t n, uint32_t k) {
    if (k > n) k = n;
    std::vector<uint32_t> pool(n);
    for (uint32_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<uint32_t> out;
    out.reserve(k);
    for (uint32_t i = 0; i < k; ++i) {
      uint32_t j = i + static_cast<uint32_t>(bounded(n - i));
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

  // Index drawn proportionally to the given nonnegative weights; falls back
  // to uniform when every weight is zero.
  size_t weighted_choice(const std::vector<uint64_t>& weights) {
    uint64_t total = 0;
    for (uint64_t w : weights) total += w;
    if (total == 0) return static_cast<size_t>(bounded(weights.size()));
    uint64_t r = bounded(total);
    uint64_t acc = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (r < acc) return i;
    }
    return weights.size() - 1;
  }

 private:
  uint64_t state_;
};

// FNV-1a over raw bytes; used both for content hashes and seed derivation.
inline uint64_t fnv1a(std::string_view bytes,
                      uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t fnv1a_u64(uint64_t value, uint64_t h) {
  for (int i = 0; i < 8; ++i) {
    h ^= (value >> (i * 8)) & 0xff;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Order-sensitive combination of seed components.
inline uint64_t mix_seed(std::initializer_list<uint64_t> parts) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (uint64_t p : parts) h = fnv1a_u64(p, h);
  return h;
}

inline uint64_t mix_seed_str(uint64_t seed, std::string_view tag) {
  return fnv1a(tag, fnv1a_u64(seed, 0xcbf29ce484222325ULL));
}

}  // namespace svaug
