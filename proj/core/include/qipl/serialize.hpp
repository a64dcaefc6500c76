#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qipl/circuits.hpp"
#include "qipl/sac1.hpp"
#include "qipl/sdp.hpp"
#include "qipl/statetest.hpp"

namespace qipl {

using json = nlohmann::json;

// All *_from_json functions throw ParseError on malformed input, with the
// offending path in the message where it is known.

// Rows of [re, im] pairs.
json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const json& j);

// {"kind": "H"|"T"|"X"|"RY"|"CNOT"|"SWAP"|"RAW"|"MEASURE"|"ANCILLA",
//  "wires": [...], "matrix": (RAW), "theta": (RY)}. X and RY are read into
// RAW gates.
json gate_to_json(const Gate& g);
Gate gate_from_json(const json& j);

json action_to_json(const CircuitAction& a);
CircuitAction action_from_json(const json& j);

json verifier_to_json(const VerifierSpec& v);
VerifierSpec verifier_from_json(const json& j);

json strategy_to_json(const ProverStrategy& p);
ProverStrategy strategy_from_json(const json& j);

// {"num_inputs", "output": id, "gates": [{"id", "kind": "or"|"and"|"input",
//  "children": [ids] | "literal": +-var}]}
json sac1_to_json(const Sac1Circuit& c);
Sac1Circuit sac1_from_json(const json& j);

// {"circuit": action, "outputs": [...]}
json prep_to_json(const StatePrepCircuit& c);
StatePrepCircuit prep_from_json(const json& j);

// {"k", "alpha", "delta", "pairs": [{"Q": prep, "Qp": prep}]}
json instance_to_json(const IndivProdInstance& inst);
IndivProdInstance instance_from_json(const json& j);

// Candidate solution of a branch program: {"u", "c", "blocks": [matrix]}.
struct WitnessFile {
  std::string u;
  double c = 1.0;
  std::vector<ComplexMatrix> blocks;
};
json witness_to_json(const WitnessFile& w);
WitnessFile witness_from_json(const json& j);

json sdp_program_to_json(const SdpProgram& p);
SdpProgram sdp_program_from_json(const json& j);

json parse_json_text(const std::string& text);
std::string read_text_file(const std::string& path);

std::uint64_t fnv1a64(std::string_view bytes);
// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string spec_hash(const VerifierSpec& v);

}  // namespace qipl
