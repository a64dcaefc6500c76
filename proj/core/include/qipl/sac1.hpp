#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qipl/classical.hpp"
#include "qipl/errors.hpp"

namespace qipl {

enum class Sac1Kind { Or, And, Input };

struct Sac1Gate {
  Sac1Kind kind = Sac1Kind::Input;
  std::vector<int> children;  // gate indices
  int var = 1;                // inputs only, 1-based
  bool negated = false;
};

struct Sac1Circuit {
  std::vector<Sac1Gate> gates;
  int output = 0;
  int num_inputs = 0;

  // Longest path (in edges) from the output gate to an input.
  int depth() const;
};

// Throws ValidationError: cycles, AND fan-in other than 2, empty OR, bad
// indices or literals, depth above depth_cap.
void validate_sac1(const Sac1Circuit& c, int depth_cap = 32);

struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  double value() const { return double(num) / double(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};
Rational make_rational(std::uint64_t num, std::uint64_t den);

// Game value: max over OR children, mean over the two AND children, literal
// truth at the inputs.
Rational sac1_game_value(const Sac1Circuit& c, const std::vector<bool>& input);

// Top-down game: at each level the prover names an OR child and the verifier
// flips a coin at AND gates. One coin bit per level.
ClassicalProtocolSpec build_sac1_protocol(const Sac1Circuit& c, const std::vector<bool>& input);

// Plain evaluation of the circuit.
bool sac1_evaluate(const Sac1Circuit& c, const std::vector<bool>& input);

}  // namespace qipl
