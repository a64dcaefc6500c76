#pragma once

#include <array>
#include <string>
#include <vector>

#include "qipl/classical.hpp"
#include "qipl/fingerprint.hpp"

namespace qipl {

// Literals are signed 1-based variable indices: -3 means "not x3".
struct Cnf3Formula {
  int num_vars = 0;
  std::vector<std::array<int, 3>> clauses;

  int num_clauses() const { return int(clauses.size()); }
  bool satisfied_by(const std::vector<bool>& assignment) const;
};

// Throws ValidationError on literal indices outside [1, n] or n < 1.
void validate_formula(const Cnf3Formula& f);

// DIMACS CNF with exactly three literals per clause.
Cnf3Formula parse_dimacs(const std::string& text);
std::string to_dimacs(const Cnf3Formula& f);

// (l, i, v): literal l of clause i has value v under the assignment.
struct Triple {
  int var = 1;  // 1-based
  bool negated = false;
  int clause = 1;  // 1-based
  bool value = false;

  bool implied_assignment() const { return value != negated; }
  friend bool operator==(const Triple&, const Triple&) = default;
};

struct SatEncoding {
  int b = 0;            // element width: max(2 ceil(log n) + ceil(log k) + 1, bits used)
  std::uint64_t ell = 0;  // 3k
  int clause_bits = 0;  // ceil(log2 k)
};

SatEncoding sat_encoding(const Cnf3Formula& f);
// a_(l,i,v) = (2 (var-1) + neg) << (clause_bits + 1) | (i-1) << 1 | v
std::int64_t encode_triple(const Triple& t, const SatEncoding& enc);

struct SatTranscript {
  std::vector<Triple> consistency;                // 3k triples, ordered by (var, clause)
  std::vector<std::array<Triple, 3>> satisfiability;  // one group per clause
};

// Literal occurrences (var, clause, position) sorted by variable then clause.
struct Occurrence {
  int var;
  bool negated;
  int clause;
  int position;
};
std::vector<Occurrence> consistency_order(const Cnf3Formula& f);

// Throws PreconditionError when the assignment does not satisfy f.
SatTranscript honest_3sat_prover(const Cnf3Formula& f, const std::vector<bool>& assignment);

struct SatVerdict {
  bool accepted = false;
  std::string reason;
  std::uint64_t f_var = 1, f_cl = 1;
};

// Runs the verifier's checks on a full transcript for fixed (p, r).
SatVerdict run_3sat_verifier(const Cnf3Formula& f, const FingerprintParams& params,
                             const SatTranscript& transcript);

// Fingerprint parameters for this formula drawn from rng.
FingerprintParams draw_3sat_params(const Cnf3Formula& f, Rng& rng);

// Classical-message form for fixed (p, r). Prover turns: one per literal
// occurrence in consistency order (message = claimed literal value), then one
// per clause (message = the three claimed values as bits v1 v2 v3). Each is
// followed by the verifier returning the previous triple(s).
ClassicalProtocolSpec build_3sat_protocol(const Cnf3Formula& f, const FingerprintParams& params);

// Prover messages of build_3sat_protocol that realise a transcript.
std::vector<int> transcript_messages(const Cnf3Formula& f, const SatTranscript& t);

}  // namespace qipl
