#pragma once

#include <cstdint>
#include <vector>

#include "qipl/random.hpp"

namespace qipl {

struct FingerprintParams {
  std::uint64_t p = 2;  // prime in [(b*ell)^2, 2*(b*ell)^2]
  std::uint64_t r = 1;  // in [1, p-1]
  int b = 1;            // bits per element
  std::uint64_t ell = 1;
};

bool is_prime(std::uint64_t n);

// prod (x_i + r) mod p. Order independent; the empty multiset maps to 1.
// Throws RangeError for an element outside [0, 2^b).
std::uint64_t fingerprint(const std::vector<std::int64_t>& multiset,
                          const FingerprintParams& params);

// p uniform over the primes of [(b ell)^2, 2 (b ell)^2] by rejection
// sampling (at most 10^4 trials), then r uniform in [1, p-1].
FingerprintParams choose_fingerprint_params(int b, std::uint64_t ell, Rng& rng);

// (log b + log ell)/(b ell) + 1/(b^2 ell) with base-2 logarithms: the
// collision bound for distinct multisets with its constant set to 1.
double fingerprint_collision_bound(int b, std::uint64_t ell);

}  // namespace qipl
