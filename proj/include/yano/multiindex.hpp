#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

// Canonical storage for antisymmetric tensor components in dimensions n <= 4.
// A degree-r component slot is a strictly increasing index tuple, encoded as an
// n-bit mask; tuples are enumerated in lexicographic order of the tuple.

namespace yano {

inline int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long v = 1;
  for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
  return static_cast<int>(v);
}

// Sign picked up when prepending index a to the sorted tuple J (a not in J):
// number of elements of J below a.
inline int insert_sign(int a, unsigned mask_j) {
  const unsigned below = mask_j & ((1u << a) - 1u);
  return (std::popcount(below) & 1) ? -1 : 1;
}

// Sign of the merge permutation taking (sorted A, sorted B) to sorted(A|B).
// A and B must be disjoint.
inline int merge_sign(unsigned mask_a, unsigned mask_b) {
  int inv = 0;
  for (int b = 0; b < 8; ++b) {
    if (!(mask_b & (1u << b))) continue;
    inv += std::popcount(mask_a & ~((1u << (b + 1)) - 1u));
  }
  return (inv & 1) ? -1 : 1;
}

// Component table for degree-r forms in dimension n.
struct DegreeIndex {
  int n = 0;
  int r = 0;
  std::vector<unsigned> masks;      // lex order of the underlying tuples
  std::array<int, 32> index_of{};   // mask -> component index, -1 elsewhere

  int count() const { return static_cast<int>(masks.size()); }
};

inline DegreeIndex make_degree_index(int n, int r) {
  if (n < 1 || n > 4 || r < 0 || r > n)
    throw std::invalid_argument("make_degree_index: need 1 <= n <= 4, 0 <= r <= n");
  DegreeIndex di;
  di.n = n;
  di.r = r;
  di.index_of.fill(-1);
  // enumerate tuples lexicographically via odometer
  std::vector<int> t(r);
  for (int i = 0; i < r; ++i) t[i] = i;
  auto push = [&] {
    unsigned m = 0;
    for (int v : t) m |= (1u << v);
    di.index_of[m] = static_cast<int>(di.masks.size());
    di.masks.push_back(m);
  };
  if (r == 0) {
    di.index_of[0] = 0;
    di.masks.push_back(0);
    return di;
  }
  while (true) {
    push();
    int i = r - 1;
    while (i >= 0 && t[i] == n - r + i) --i;
    if (i < 0) break;
    ++t[i];
    for (int j = i + 1; j < r; ++j) t[j] = t[j - 1] + 1;
  }
  return di;
}

// (component index, sign) pair used throughout the operator tables.
struct SignedComp {
  int comp = -1;
  int sign = 0;
};

// omega_{a, J} for sorted J not containing a, expressed on sorted(a|J).
inline SignedComp prepend(const DegreeIndex& target, int a, unsigned mask_j) {
  SignedComp sc;
  if (mask_j & (1u << a)) return sc;  // repeated index
  sc.comp = target.index_of[mask_j | (1u << a)];
  sc.sign = insert_sign(a, mask_j);
  return sc;
}

}  // namespace yano
