#include "qipl/sac1.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>

#include "qipl/errors.hpp"

namespace qipl {

namespace {

__extension__ using u128 = unsigned __int128;

void check_input(const Sac1Circuit& c, const std::vector<bool>& input) {
  if (int(input.size()) != c.num_inputs)
    throw ArgumentError(fmt::format("input has {} bits, circuit expects {}", input.size(),
                                    c.num_inputs));
}

bool literal_true(const Sac1Gate& g, const std::vector<bool>& input) {
  return input[std::size_t(g.var - 1)] != g.negated;
}

}  // namespace

int Sac1Circuit::depth() const {
  std::vector<int> memo(gates.size(), -1);
  std::function<int(int)> go = [&](int i) {
    int& d = memo[std::size_t(i)];
    if (d >= 0) return d;
    int best = 0;
    for (int ch : gates[std::size_t(i)].children) best = std::max(best, go(ch) + 1);
    return d = best;
  };
  return gates.empty() ? 0 : go(output);
}

void validate_sac1(const Sac1Circuit& c, int depth_cap) {
  const int n = int(c.gates.size());
  if (n == 0) throw ValidationError("circuit has no gates");
  if (c.output < 0 || c.output >= n) throw ValidationError("output gate index out of range");
  for (int i = 0; i < n; ++i) {
    const Sac1Gate& g = c.gates[std::size_t(i)];
    for (int ch : g.children)
      if (ch < 0 || ch >= n)
        throw ValidationError(fmt::format("gate {} has child {} out of range", i, ch));
    switch (g.kind) {
      case Sac1Kind::And:
        if (g.children.size() != 2)
          throw ValidationError(fmt::format("AND gate {} has fan-in {}", i, g.children.size()));
        break;
      case Sac1Kind::Or:
        if (g.children.empty()) throw ValidationError(fmt::format("OR gate {} has no inputs", i));
        break;
      case Sac1Kind::Input:
        if (!g.children.empty())
          throw ValidationError(fmt::format("input gate {} has children", i));
        if (g.var < 1 || g.var > c.num_inputs)
          throw ValidationError(fmt::format("input gate {} reads x{} of {}", i, g.var,
                                            c.num_inputs));
        break;
    }
  }
  // 0 = unvisited, 1 = on the stack, 2 = done
  std::vector<int> mark(std::size_t(n), 0);
  std::function<void(int)> dfs = [&](int i) {
    mark[std::size_t(i)] = 1;
    for (int ch : c.gates[std::size_t(i)].children) {
      if (mark[std::size_t(ch)] == 1) throw ValidationError("circuit has a cycle");
      if (mark[std::size_t(ch)] == 0) dfs(ch);
    }
    mark[std::size_t(i)] = 2;
  };
  for (int i = 0; i < n; ++i)
    if (mark[std::size_t(i)] == 0) dfs(i);
  if (c.depth() > depth_cap)
    throw ValidationError(fmt::format("depth {} exceeds the cap {}", c.depth(), depth_cap));
}

Rational make_rational(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw ArgumentError("zero denominator");
  const std::uint64_t g = std::gcd(num, den);
  return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

Rational sac1_game_value(const Sac1Circuit& c, const std::vector<bool>& input) {
  validate_sac1(c);
  check_input(c, input);
  std::vector<std::optional<Rational>> memo(c.gates.size());
  std::function<Rational(int)> go = [&](int i) -> Rational {
    auto& slot = memo[std::size_t(i)];
    if (slot) return *slot;
    const Sac1Gate& g = c.gates[std::size_t(i)];
    Rational r;
    if (g.kind == Sac1Kind::Input) {
      r = Rational{literal_true(g, input) ? 1u : 0u, 1};
    } else if (g.kind == Sac1Kind::Or) {
      r = go(g.children[0]);
      for (std::size_t k = 1; k < g.children.size(); ++k) {
        const Rational x = go(g.children[k]);
        // a/b < c/d  <=>  a d < c b
        if (static_cast<u128>(r.num) * x.den <
            static_cast<u128>(x.num) * r.den)
          r = x;
      }
    } else {
      const Rational a = go(g.children[0]), b = go(g.children[1]);
      const std::uint64_t l = std::lcm(a.den, b.den);
      r = make_rational(a.num * (l / a.den) + b.num * (l / b.den), 2 * l);
    }
    slot = r;
    return r;
  };
  return go(c.output);
}

bool sac1_evaluate(const Sac1Circuit& c, const std::vector<bool>& input) {
  validate_sac1(c);
  check_input(c, input);
  std::vector<int> memo(c.gates.size(), -1);
  std::function<bool(int)> go = [&](int i) -> bool {
    int& m = memo[std::size_t(i)];
    if (m >= 0) return m != 0;
    const Sac1Gate& g = c.gates[std::size_t(i)];
    bool v = false;
    switch (g.kind) {
      case Sac1Kind::Input: v = literal_true(g, input); break;
      case Sac1Kind::Or: v = std::any_of(g.children.begin(), g.children.end(), go); break;
      case Sac1Kind::And: v = std::all_of(g.children.begin(), g.children.end(), go); break;
    }
    m = v ? 1 : 0;
    return v;
  };
  return go(c.output);
}

ClassicalProtocolSpec build_sac1_protocol(const Sac1Circuit& c, const std::vector<bool>& input) {
  validate_sac1(c);
  check_input(c, input);
  const int depth = c.depth();
  int fan = 1;
  for (const auto& g : c.gates)
    if (g.kind == Sac1Kind::Or) fan = std::max(fan, int(g.children.size()));

  // vars: [unused coin bits, current gate, moved this level]
  enum { kCoins, kGate, kMoved };
  ClassicalProtocolSpec p;
  p.name = "sac1";
  for (int t = 0; t < depth; ++t) {
    p.turns.push_back({Party::Prover, fan});
    p.turns.push_back({Party::Verifier, 2});
  }
  p.coin_count = std::uint64_t{1} << depth;
  const int out = c.output;
  p.initial = [out](std::uint64_t coin) {
    return ClassicalState{{std::int64_t(coin), out, 0}, false};
  };
  p.receive = [gates = c.gates](ClassicalState& s, std::size_t, int msg) {
    const Sac1Gate& g = gates[std::size_t(s.vars[kGate])];
    if (g.kind != Sac1Kind::Or) return;
    if (msg < 0 || msg >= int(g.children.size())) {
      s.rejected = true;
      return;
    }
    s.vars[kGate] = g.children[std::size_t(msg)];
    s.vars[kMoved] = 1;
  };
  p.send = [gates = c.gates](ClassicalState& s, std::size_t) {
    const Sac1Gate& g = gates[std::size_t(s.vars[kGate])];
    int bit = 0;
    if (g.kind == Sac1Kind::And && s.vars[kMoved] == 0) {
      bit = int(s.vars[kCoins] & 1);
      s.vars[kGate] = g.children[std::size_t(bit)];
    }
    s.vars[kCoins] >>= 1;
    s.vars[kMoved] = 0;
    return bit;
  };
  p.accepts = [gates = c.gates, input](const ClassicalState& s) {
    const Sac1Gate& g = gates[std::size_t(s.vars[kGate])];
    return g.kind == Sac1Kind::Input && literal_true(g, input);
  };
  return p;
}

}  // namespace qipl
