#include "qipl/sat3.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <sstream>

#include "qipl/errors.hpp"

namespace qipl {

namespace {

__extension__ using u128 = unsigned __int128;

int ceil_log2(std::uint64_t x) { return x <= 1 ? 0 : int(std::bit_width(x - 1)); }

std::uint64_t mulmod(std::uint64_t acc, std::int64_t a, const FingerprintParams& fp) {
  const u128 term = (static_cast<u128>(a) + fp.r) % fp.p;
  return static_cast<std::uint64_t>((acc * term) % fp.p);
}

}  // namespace

bool Cnf3Formula::satisfied_by(const std::vector<bool>& assignment) const {
  if (int(assignment.size()) != num_vars)
    throw ArgumentError(fmt::format("assignment has {} values, formula has {} variables",
                                    assignment.size(), num_vars));
  return std::all_of(clauses.begin(), clauses.end(), [&](const auto& c) {
    return std::any_of(c.begin(), c.end(), [&](int lit) {
      return assignment[std::size_t(std::abs(lit) - 1)] == (lit > 0);
    });
  });
}

void validate_formula(const Cnf3Formula& f) {
  if (f.num_vars < 1) throw ValidationError("formula needs at least one variable");
  if (f.clauses.empty()) throw ValidationError("formula needs at least one clause");
  for (std::size_t i = 0; i < f.clauses.size(); ++i)
    for (int lit : f.clauses[i])
      if (lit == 0 || std::abs(lit) > f.num_vars)
        throw ValidationError(fmt::format("clause {} has literal {} outside [1, {}]", i + 1,
                                          lit, f.num_vars));
}

Cnf3Formula parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Cnf3Formula f;
  int declared = -1;
  std::vector<int> pending;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "c") continue;
    if (tok == "%") break;
    if (tok == "p") {
      std::string fmtname;
      if (!(ls >> fmtname >> f.num_vars >> declared) || fmtname != "cnf")
        throw ParseError(fmt::format("bad problem line: '{}'", line));
      continue;
    }
    if (declared < 0) throw ParseError("clause data before the 'p cnf' line");
    std::istringstream body(line);
    int lit;
    while (body >> lit) {
      if (lit != 0) {
        pending.push_back(lit);
        continue;
      }
      if (pending.size() != 3)
        throw ParseError(fmt::format("clause {} has {} literals, expected 3",
                                     f.clauses.size() + 1, pending.size()));
      f.clauses.push_back({pending[0], pending[1], pending[2]});
      pending.clear();
    }
    if (!body.eof()) throw ParseError(fmt::format("non-integer token in '{}'", line));
  }
  if (declared < 0) throw ParseError("missing 'p cnf' line");
  if (!pending.empty()) throw ParseError("last clause is not terminated by 0");
  if (int(f.clauses.size()) != declared)
    throw ParseError(fmt::format("header declares {} clauses, found {}", declared,
                                 f.clauses.size()));
  try {
    validate_formula(f);
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  return f;
}

std::string to_dimacs(const Cnf3Formula& f) {
  std::string out = fmt::format("p cnf {} {}\n", f.num_vars, f.clauses.size());
  for (const auto& c : f.clauses) out += fmt::format("{} {} {} 0\n", c[0], c[1], c[2]);
  return out;
}

SatEncoding sat_encoding(const Cnf3Formula& f) {
  SatEncoding e;
  const auto n = std::uint64_t(f.num_vars), k = std::uint64_t(f.num_clauses());
  e.clause_bits = ceil_log2(k);
  e.ell = 3 * k;
  const int used = int(std::bit_width(2 * n - 1)) + e.clause_bits + 1;
  e.b = std::max(2 * ceil_log2(n) + e.clause_bits + 1, used);
  return e;
}

std::int64_t encode_triple(const Triple& t, const SatEncoding& enc) {
  const std::int64_t lit = 2 * std::int64_t(t.var - 1) + (t.negated ? 1 : 0);
  return (lit << (enc.clause_bits + 1)) | (std::int64_t(t.clause - 1) << 1) |
         (t.value ? 1 : 0);
}

std::vector<Occurrence> consistency_order(const Cnf3Formula& f) {
  std::vector<Occurrence> occ;
  for (int i = 0; i < f.num_clauses(); ++i)
    for (int p = 0; p < 3; ++p) {
      const int lit = f.clauses[std::size_t(i)][std::size_t(p)];
      occ.push_back({std::abs(lit), lit < 0, i + 1, p});
    }
  std::stable_sort(occ.begin(), occ.end(), [](const Occurrence& a, const Occurrence& b) {
    return std::tie(a.var, a.clause, a.position) < std::tie(b.var, b.clause, b.position);
  });
  return occ;
}

SatTranscript honest_3sat_prover(const Cnf3Formula& f, const std::vector<bool>& assignment) {
  validate_formula(f);
  if (!f.satisfied_by(assignment))
    throw PreconditionError("assignment does not satisfy the formula");
  auto value_of = [&](int var, bool neg) { return assignment[std::size_t(var - 1)] != neg; };
  SatTranscript t;
  for (const auto& o : consistency_order(f))
    t.consistency.push_back({o.var, o.negated, o.clause, value_of(o.var, o.negated)});
  for (int i = 0; i < f.num_clauses(); ++i) {
    std::array<Triple, 3> g;
    for (int p = 0; p < 3; ++p) {
      const int lit = f.clauses[std::size_t(i)][std::size_t(p)];
      g[std::size_t(p)] = {std::abs(lit), lit < 0, i + 1, value_of(std::abs(lit), lit < 0)};
    }
    t.satisfiability.push_back(g);
  }
  return t;
}

SatVerdict run_3sat_verifier(const Cnf3Formula& f, const FingerprintParams& params,
                             const SatTranscript& transcript) {
  validate_formula(f);
  const SatEncoding enc = sat_encoding(f);
  SatVerdict v;
  auto reject = [&](std::string why) {
    v.accepted = false;
    v.reason = std::move(why);
    return v;
  };
  auto in_range = [&](const Triple& t) {
    return t.var >= 1 && t.var <= f.num_vars && t.clause >= 1 && t.clause <= f.num_clauses();
  };

  if (transcript.consistency.size() != enc.ell)
    return reject(fmt::format("consistency phase has {} triples, expected {}",
                              transcript.consistency.size(), enc.ell));
  const Triple* prev = nullptr;
  for (const Triple& t : transcript.consistency) {
    if (!in_range(t)) return reject("consistency triple out of range");
    if (prev && std::tie(prev->var, prev->clause) > std::tie(t.var, t.clause))
      return reject("consistency triples are not ordered by variable");
    if (prev && prev->var == t.var && prev->implied_assignment() != t.implied_assignment())
      return reject(fmt::format("inconsistent value for x{}", t.var));
    v.f_var = mulmod(v.f_var, encode_triple(t, enc), params);
    prev = &t;
  }

  if (transcript.satisfiability.size() != std::size_t(f.num_clauses()))
    return reject("satisfiability phase has the wrong number of clauses");
  for (int i = 0; i < f.num_clauses(); ++i) {
    const auto& g = transcript.satisfiability[std::size_t(i)];
    bool any = false;
    for (int p = 0; p < 3; ++p) {
      const int lit = f.clauses[std::size_t(i)][std::size_t(p)];
      const Triple& t = g[std::size_t(p)];
      if (t.clause != i + 1 || t.var != std::abs(lit) || t.negated != (lit < 0))
        return reject(fmt::format("clause {} triple {} does not name its literal", i + 1, p + 1));
      any = any || t.value;
      v.f_cl = mulmod(v.f_cl, encode_triple(t, enc), params);
    }
    if (!any) return reject(fmt::format("clause {} is not satisfied", i + 1));
  }

  if (v.f_var != v.f_cl) return reject("fingerprints differ");
  v.accepted = true;
  v.reason = "accepted";
  return v;
}

FingerprintParams draw_3sat_params(const Cnf3Formula& f, Rng& rng) {
  const SatEncoding enc = sat_encoding(f);
  return choose_fingerprint_params(enc.b, enc.ell, rng);
}

ClassicalProtocolSpec build_3sat_protocol(const Cnf3Formula& f, const FingerprintParams& params) {
  validate_formula(f);
  const SatEncoding enc = sat_encoding(f);
  const auto occ = consistency_order(f);
  const std::size_t n_occ = occ.size();
  const int k = f.num_clauses();

  // vars: [F_var, F_cl, implied value of the previous occurrence, last echo]
  enum { kFvar, kFcl, kPrevImplied, kEcho };
  ClassicalProtocolSpec p;
  p.name = "3sat";
  for (std::size_t o = 0; o < n_occ; ++o) {
    p.turns.push_back({Party::Prover, 2});
    p.turns.push_back({Party::Verifier, 1 << enc.b});
  }
  for (int i = 0; i < k; ++i) {
    p.turns.push_back({Party::Prover, 8});
    p.turns.push_back({Party::Verifier, 8});
  }
  p.coin_count = 1;
  p.initial = [](std::uint64_t) { return ClassicalState{{1, 1, -1, 0}, false}; };

  auto triple_at = [occ](std::size_t o, int msg) {
    return Triple{occ[o].var, occ[o].negated, occ[o].clause, msg != 0};
  };
  p.receive = [=, clauses = f.clauses](ClassicalState& s, std::size_t turn, int msg) {
    if (s.rejected) return;
    const std::size_t slot = turn / 2;
    if (slot < n_occ) {
      if (msg < 0 || msg > 1) {
        s.rejected = true;
        return;
      }
      const Triple t = triple_at(slot, msg);
      if (slot > 0 && occ[slot - 1].var == t.var &&
          s.vars[kPrevImplied] != std::int64_t(t.implied_assignment())) {
        s.rejected = true;
        return;
      }
      s.vars[kPrevImplied] = t.implied_assignment();
      s.vars[kEcho] = encode_triple(t, enc);
      s.vars[kFvar] = std::int64_t(mulmod(std::uint64_t(s.vars[kFvar]), encode_triple(t, enc), params));
      return;
    }
    const std::size_t i = slot - n_occ;
    if (msg < 0 || msg > 7 || msg == 0) {  // no literal claimed true
      s.rejected = true;
      return;
    }
    auto acc = std::uint64_t(s.vars[kFcl]);
    for (int q = 0; q < 3; ++q) {
      const int lit = clauses[i][std::size_t(q)];
      const Triple t{std::abs(lit), lit < 0, int(i) + 1, ((msg >> (2 - q)) & 1) != 0};
      acc = mulmod(acc, encode_triple(t, enc), params);
    }
    s.vars[kFcl] = std::int64_t(acc);
    s.vars[kEcho] = msg;
  };
  // The verifier echoes what it just received, so its turns never branch.
  p.send = [](ClassicalState& s, std::size_t) { return int(s.vars[kEcho]); };
  p.accepts = [](const ClassicalState& s) { return !s.rejected && s.vars[kFvar] == s.vars[kFcl]; };
  return p;
}

std::vector<int> transcript_messages(const Cnf3Formula& f, const SatTranscript& t) {
  std::vector<int> msgs;
  for (const auto& tr : t.consistency) msgs.push_back(tr.value ? 1 : 0);
  for (const auto& g : t.satisfiability)
    msgs.push_back((g[0].value ? 4 : 0) | (g[1].value ? 2 : 0) | (g[2].value ? 1 : 0));
  if (msgs.size() != 3 * f.clauses.size() + f.clauses.size())
    throw ArgumentError("transcript does not match the formula's size");
  return msgs;
}

}  // namespace qipl
