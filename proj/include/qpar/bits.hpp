#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qpar {

using Word = std::uint64_t;

// Dynamic bit string. Bit i of the string lives at word i/64, position i%64
// (little-endian throughout). Unused tail bits of the last word stay zero.
struct Bits {
  int n = 0;
  std::vector<Word> w;

  Bits() = default;
  explicit Bits(int bits) : n(bits), w((bits + 63) / 64, 0) {}

  static Bits zeros(int bits) { return Bits(bits); }

  static Bits ones(int bits) {
    Bits b(bits);
    for (auto& x : b.w) x = ~Word(0);
    b.trim();
    return b;
  }

  // Low 'bits' bits of idx; requires bits <= 64.
  static Bits from_index(int bits, std::uint64_t idx) {
    Bits b(bits);
    if (bits > 0) b.w[0] = (bits >= 64) ? idx : (idx & ((Word(1) << bits) - 1));
    return b;
  }

  std::uint64_t index() const {  // requires n <= 64
    return n == 0 ? 0 : w[0];
  }

  int get(int i) const { return int((w[i >> 6] >> (i & 63)) & 1); }

  void set(int i, int v) {
    Word m = Word(1) << (i & 63);
    if (v)
      w[i >> 6] |= m;
    else
      w[i >> 6] &= ~m;
  }

  void flip(int i) { w[i >> 6] ^= Word(1) << (i & 63); }

  // Low 'len' bits starting at pos, len <= 64.
  std::uint64_t slice(int pos, int len) const {
    if (len == 0) return 0;
    int wi = pos >> 6, off = pos & 63;
    std::uint64_t v = w[wi] >> off;
    if (off + len > 64 && wi + 1 < (int)w.size()) v |= w[wi + 1] << (64 - off);
    return (len >= 64) ? v : (v & ((Word(1) << len) - 1));
  }

  void set_slice(int pos, int len, std::uint64_t v) {
    for (int i = 0; i < len; ++i) set(pos + i, int((v >> i) & 1));
  }

  Bits slice_bits(int pos, int len) const {
    Bits r(len);
    for (int i = 0; i < len; ++i) r.set(i, get(pos + i));
    return r;
  }

  void set_range(int pos, const Bits& v) {
    for (int i = 0; i < v.n; ++i) set(pos + i, v.get(i));
  }

  void xor_mask(const Bits& m) {  // requires m.n == n
    for (std::size_t i = 0; i < w.size(); ++i) w[i] ^= m.w[i];
  }

  int popcount() const {
    int c = 0;
    for (Word x : w) c += __builtin_popcountll(x);
    return c;
  }

  void trim() {
    if (n & 63) w.back() &= (Word(1) << (n & 63)) - 1;
  }

  bool operator==(const Bits& o) const { return n == o.n && w == o.w; }
  bool operator!=(const Bits& o) const { return !(*this == o); }
  bool operator<(const Bits& o) const {  // for ordered containers / canonical sorting
    if (n != o.n) return n < o.n;
    for (int i = (int)w.size() - 1; i >= 0; --i)
      if (w[i] != o.w[i]) return w[i] < o.w[i];
    return false;
  }

  // Bit 0 first, e.g. x_0 x_1 ... x_{n-1}.
  std::string to_string() const {
    std::string s(n, '0');
    for (int i = 0; i < n; ++i) s[i] = char('0' + get(i));
    return s;
  }
};

struct BitsHash {
  std::size_t operator()(const Bits& b) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull ^ (std::uint64_t)b.n;
    for (Word x : b.w) {
      h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return (std::size_t)h;
  }
};

// Calls fn(mask) for every n-bit mask with exactly k bits set, ascending; n <= 64.
template <typename F>
void for_each_subset_of_size(int n, int k, F&& fn) {
  if (k == 0) {
    fn(std::uint64_t(0));
    return;
  }
  if (k > n) return;
  std::uint64_t v = (k >= 64) ? ~std::uint64_t(0) : ((std::uint64_t(1) << k) - 1);
  std::uint64_t limit = (n >= 64) ? ~std::uint64_t(0) : ((std::uint64_t(1) << n) - 1);
  while (true) {
    fn(v);
    if (n >= 64 && k == n) break;
    // Gosper's hack: next mask with the same popcount.
    std::uint64_t c = v & -v;
    std::uint64_t r = v + c;
    if (r > limit || r < v) break;
    v = (((r ^ v) >> 2) / c) | r;
    if (v > limit) break;
  }
}

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (std::uint64_t)(n - k + i) / (std::uint64_t)i;
  return r;
}

inline int ceil_log2(std::uint64_t v) {
  int b = 0;
  while ((std::uint64_t(1) << b) < v) ++b;
  return b;
}

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

}  // namespace qpar
