#include "qipl/classical.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "qipl/errors.hpp"

namespace qipl {

namespace {

// Coins that reach the same verifier state behave identically from then on,
// so a search node is the multiset of live states with their coin weights.
using Node = std::vector<std::pair<ClassicalState, std::uint64_t>>;

void normalize(Node& node) {
  node.erase(std::remove_if(node.begin(), node.end(),
                            [](const auto& e) { return e.first.rejected || e.second == 0; }),
             node.end());
  std::sort(node.begin(), node.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  Node merged;
  for (auto& e : node) {
    if (!merged.empty() && merged.back().first == e.first) merged.back().second += e.second;
    else merged.push_back(std::move(e));
  }
  node = std::move(merged);
}

struct Key {
  std::size_t turn;
  Node node;
  friend bool operator<(const Key& a, const Key& b) {
    if (a.turn != b.turn) return a.turn < b.turn;
    return a.node < b.node;
  }
};

struct Memo {
  std::uint64_t value = 0;
  int best = 0;
};

class Search {
 public:
  Search(const ClassicalProtocolSpec& p, std::uint64_t cap) : p_(p), cap_(cap) {}

  std::uint64_t solve(std::size_t t, const Node& node) {
    if (node.empty()) return 0;
    if (++nodes_ > cap_)
      throw SizeError(fmt::format(
          "classical enumeration exceeded {} nodes; use Monte-Carlo coin sampling "
          "or a smaller instance", cap_));
    if (t == p_.turns.size()) {
      std::uint64_t acc = 0;
      for (const auto& [s, w] : node)
        if (p_.accepts(s)) acc += w;
      return acc;
    }
    Key key{t, node};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second.value;

    Memo m;
    const ClassicalTurn& turn = p_.turns[t];
    if (turn.who == Party::Prover) {
      bool first = true;
      for (int msg = 0; msg < turn.alphabet; ++msg) {
        const std::uint64_t v = solve(t + 1, prover_child(t, node, msg));
        if (first || v > m.value) {
          m.value = v;
          m.best = msg;
          first = false;
        }
      }
    } else {
      for (const auto& [msg, child] : verifier_children(t, node)) m.value += solve(t + 1, child);
    }
    memo_.emplace(std::move(key), m);
    return m.value;
  }

  // Records the optimal choices along every history the optimal prover meets.
  void record(std::size_t t, const Node& node, const std::string& history,
              std::map<std::string, int>& out) {
    if (node.empty() || t == p_.turns.size()) return;
    if (out.size() > cap_) return;
    auto append = [&](int msg) {
      return history.empty() ? fmt::format("{}", msg) : fmt::format("{},{}", history, msg);
    };
    if (p_.turns[t].who == Party::Prover) {
      const auto it = memo_.find(Key{t, node});
      const int msg = it == memo_.end() ? 0 : it->second.best;
      out[history] = msg;
      record(t + 1, prover_child(t, node, msg), append(msg), out);
    } else {
      for (const auto& [msg, child] : verifier_children(t, node))
        record(t + 1, child, append(msg), out);
    }
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  Node prover_child(std::size_t t, const Node& node, int msg) const {
    Node child = node;
    for (auto& e : child) p_.receive(e.first, t, msg);
    normalize(child);
    return child;
  }

  std::map<int, Node> verifier_children(std::size_t t, const Node& node) const {
    std::map<int, Node> groups;
    for (const auto& [s, w] : node) {
      ClassicalState next = s;
      const int msg = p_.send(next, t);
      groups[msg].emplace_back(std::move(next), w);
    }
    for (auto& g : groups) normalize(g.second);
    return groups;
  }

  const ClassicalProtocolSpec& p_;
  std::uint64_t cap_;
  std::uint64_t nodes_ = 0;
  std::map<Key, Memo> memo_;
};

void check_protocol(const ClassicalProtocolSpec& p) {
  if (!p.initial || !p.accepts) throw ArgumentError("classical protocol lacks initial/accepts");
  for (const auto& t : p.turns) {
    if (t.alphabet < 1) throw ArgumentError("message alphabet must be non-empty");
    if (t.who == Party::Prover && !p.receive) throw ArgumentError("protocol lacks receive");
    if (t.who == Party::Verifier && !p.send) throw ArgumentError("protocol lacks send");
  }
  if (p.coin_count == 0) throw ArgumentError("coin space is empty");
}

}  // namespace

EnumerationResult enumerate_classical(const ClassicalProtocolSpec& protocol,
                                      const EnumerationOptions& options) {
  check_protocol(protocol);
  EnumerationResult r;
  Node root;
  if (protocol.coin_count <= options.exact_coin_limit) {
    for (std::uint64_t c = 0; c < protocol.coin_count; ++c)
      root.emplace_back(protocol.initial(c), 1);
    r.total_weight = protocol.coin_count;
  } else {
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<std::uint64_t> pick(0, protocol.coin_count - 1);
    const std::uint64_t n = std::max<std::uint64_t>(1, options.monte_carlo_samples);
    for (std::uint64_t i = 0; i < n; ++i) root.emplace_back(protocol.initial(pick(rng)), 1);
    r.total_weight = n;
    r.exact = false;
  }
  normalize(root);

  Search search(protocol, options.node_cap);
  r.accepted_weight = search.solve(0, root);
  r.nodes = search.nodes();
  r.value = double(r.accepted_weight) / double(r.total_weight);
  if (!r.exact)
    r.ci_half_width = 1.96 * std::sqrt(r.value * (1.0 - r.value) / double(r.total_weight));
  search.record(0, root, "", r.strategy);
  return r;
}

std::uint64_t count_accepting(const ClassicalProtocolSpec& protocol,
                              const std::vector<int>& prover_messages) {
  check_protocol(protocol);
  std::uint64_t accepted = 0;
  for (std::uint64_t c = 0; c < protocol.coin_count; ++c) {
    ClassicalState s = protocol.initial(c);
    std::size_t next = 0;
    for (std::size_t t = 0; t < protocol.turns.size(); ++t) {
      if (protocol.turns[t].who == Party::Prover) {
        if (next >= prover_messages.size())
          throw ArgumentError("transcript has fewer prover messages than the protocol");
        protocol.receive(s, t, prover_messages[next++]);
      } else {
        protocol.send(s, t);
      }
    }
    if (!s.rejected && protocol.accepts(s)) ++accepted;
  }
  return accepted;
}

}  // namespace qipl
