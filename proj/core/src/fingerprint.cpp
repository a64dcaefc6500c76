#include "qipl/fingerprint.hpp"

#include <fmt/format.h>

#include <cmath>

#include "qipl/errors.hpp"

namespace qipl {

namespace {
__extension__ using u128 = unsigned __int128;
}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint64_t d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

std::uint64_t fingerprint(const std::vector<std::int64_t>& multiset,
                          const FingerprintParams& params) {
  if (params.p < 2) throw ArgumentError("fingerprint modulus must be at least 2");
  const std::int64_t limit = params.b >= 63 ? INT64_MAX : (std::int64_t{1} << params.b);
  u128 acc = 1;
  for (std::int64_t x : multiset) {
    if (x < 0 || x >= limit)
      throw RangeError(fmt::format("element {} does not fit in {} bits", x, params.b));
    const u128 term = (static_cast<u128>(x) + params.r) % params.p;
    acc = (acc * term) % params.p;
  }
  return static_cast<std::uint64_t>(acc % params.p);
}

FingerprintParams choose_fingerprint_params(int b, std::uint64_t ell, Rng& rng) {
  const std::uint64_t be = std::uint64_t(b) * ell;
  if (b < 1 || be < 2) throw ArgumentError("fingerprinting needs b * ell >= 2");
  const std::uint64_t lo = be * be;
  const std::uint64_t hi = 2 * lo;
  std::uniform_int_distribution<std::uint64_t> pick(lo, hi);
  FingerprintParams out;
  out.b = b;
  out.ell = ell;
  for (int trial = 0; trial < 10'000; ++trial) {
    const std::uint64_t cand = pick(rng);
    if (!is_prime(cand)) continue;
    out.p = cand;
    out.r = std::uniform_int_distribution<std::uint64_t>(1, cand - 1)(rng);
    return out;
  }
  throw RangeError(fmt::format("no prime found in [{}, {}] after 10000 draws", lo, hi));
}

double fingerprint_collision_bound(int b, std::uint64_t ell) {
  const double bd = b, ld = double(ell);
  return (std::log2(bd) + std::log2(ld)) / (bd * ld) + 1.0 / (bd * bd * ld);
}

}  // namespace qipl
