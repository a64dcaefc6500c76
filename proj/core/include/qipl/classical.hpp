#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qipl/errors.hpp"

namespace qipl {

// A verifier that reads every incoming message in the computational basis,
// so that classical prover strategies are all that matter. The verifier's
// private randomness is an index into [0, coin_count).
struct ClassicalState {
  std::vector<std::int64_t> vars;
  bool rejected = false;

  friend bool operator<(const ClassicalState& a, const ClassicalState& b) {
    return a.rejected != b.rejected ? a.rejected < b.rejected : a.vars < b.vars;
  }
  friend bool operator==(const ClassicalState& a, const ClassicalState& b) {
    return a.rejected == b.rejected && a.vars == b.vars;
  }
};

enum class Party { Prover, Verifier };

struct ClassicalTurn {
  Party who = Party::Prover;
  int alphabet = 1;  // messages are 0 .. alphabet-1
};

struct ClassicalProtocolSpec {
  std::string name;
  std::vector<ClassicalTurn> turns;
  std::uint64_t coin_count = 1;
  std::function<ClassicalState(std::uint64_t coin)> initial;
  // The verifier absorbs prover message `msg` sent at turn `turn`.
  std::function<void(ClassicalState&, std::size_t turn, int msg)> receive;
  // The verifier's message at turn `turn`; may update its state.
  std::function<int(ClassicalState&, std::size_t turn)> send;
  std::function<bool(const ClassicalState&)> accepts;
};

struct EnumerationOptions {
  std::uint64_t node_cap = 10'000'000;
  std::uint64_t exact_coin_limit = std::uint64_t{1} << 16;
  std::uint64_t monte_carlo_samples = 4096;
  std::uint64_t seed = 0;
};

struct EnumerationResult {
  double value = 0.0;
  // Exact value accepted_weight / total_weight when every coin was enumerated.
  bool exact = true;
  std::uint64_t accepted_weight = 0;
  std::uint64_t total_weight = 0;
  double ci_half_width = 0.0;  // 95% interval in Monte-Carlo mode
  std::uint64_t nodes = 0;
  // Best deterministic strategy along the histories it reaches. Keys are the
  // messages exchanged so far, comma separated.
  std::map<std::string, int> strategy;
};

// Maximum acceptance probability over deterministic classical provers.
// Throws SizeError when the search would visit more than node_cap nodes.
EnumerationResult enumerate_classical(const ClassicalProtocolSpec& protocol,
                                      const EnumerationOptions& options = {});

// Replays one prover message sequence against every coin; returns the
// number of coins that end in acceptance.
std::uint64_t count_accepting(const ClassicalProtocolSpec& protocol,
                              const std::vector<int>& prover_messages);

}  // namespace qipl
