#include <benchmark/benchmark.h>

#include "qipl/classical.hpp"
#include "qipl/fingerprint.hpp"
#include "qipl/oracle.hpp"
#include "qipl/random.hpp"
#include "qipl/sac1.hpp"
#include "qipl/sat3.hpp"
#include "qipl/sdp.hpp"

using namespace qipl;

namespace {

VerifierSpec verifier(int actions) {
  Rng rng(42);
  RandomVerifierOptions o;
  o.actions = actions;
  return random_verifier(o, rng);
}

void BM_Omega(benchmark::State& state) {
  const VerifierSpec v = verifier(int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(omega(v));
}
BENCHMARK(BM_Omega)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SeeSaw(benchmark::State& state) {
  const VerifierSpec v = verifier(int(state.range(0)));
  SeeSawConfig cfg;
  cfg.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(see_saw_prover(v, cfg).value);
}
BENCHMARK(BM_SeeSaw)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Fingerprint(benchmark::State& state) {
  Rng rng(7);
  const FingerprintParams p = choose_fingerprint_params(16, std::uint64_t(state.range(0)), rng);
  std::vector<std::int64_t> xs(std::size_t(state.range(0)));
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = std::int64_t((i * 2654435761u) & 0xffff);
  for (auto _ : state) benchmark::DoNotOptimize(fingerprint(xs, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Fingerprint)->Range(64, 1 << 14);

void BM_Sat3Enumeration(benchmark::State& state) {
  Cnf3Formula f;
  f.num_vars = 2;
  f.clauses = {{1, 1, 2}, {1, 1, -2}, {-1, -1, 2}, {-1, -1, -2}};
  Rng rng(3);
  const ClassicalProtocolSpec proto = build_3sat_protocol(f, draw_3sat_params(f, rng));
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_classical(proto).value);
}
BENCHMARK(BM_Sat3Enumeration)->Unit(benchmark::kMillisecond);

// A balanced tree of fan-in-two ANDs over OR pairs.
Sac1Circuit and_tree(int depth) {
  Sac1Circuit c;
  c.num_inputs = 2;
  std::vector<int> layer;
  for (int i = 0; i < (1 << depth); ++i) {
    Sac1Gate g;
    g.var = 1 + i % 2;
    g.negated = i % 3 == 0;
    c.gates.push_back(g);
    layer.push_back(int(c.gates.size()) - 1);
  }
  bool use_and = true;
  while (layer.size() > 1) {
    std::vector<int> next;
    for (std::size_t i = 0; i + 1 < layer.size(); i += 2) {
      Sac1Gate g;
      g.kind = use_and ? Sac1Kind::And : Sac1Kind::Or;
      g.children = {layer[i], layer[i + 1]};
      c.gates.push_back(g);
      next.push_back(int(c.gates.size()) - 1);
    }
    layer = next;
    use_and = !use_and;
  }
  c.output = layer.front();
  return c;
}

void BM_Sac1Enumeration(benchmark::State& state) {
  const Sac1Circuit c = and_tree(int(state.range(0)));
  const std::vector<bool> x{true, false};
  const ClassicalProtocolSpec proto = build_sac1_protocol(c, x);
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_classical(proto).value);
}
BENCHMARK(BM_Sac1Enumeration)->DenseRange(2, 6, 2);

void BM_Sac1GameValue(benchmark::State& state) {
  const Sac1Circuit c = and_tree(int(state.range(0)));
  const std::vector<bool> x{true, false};
  for (auto _ : state) benchmark::DoNotOptimize(sac1_game_value(c, x));
}
BENCHMARK(BM_Sac1GameValue)->DenseRange(2, 6, 2);

}  // namespace

BENCHMARK_MAIN();
