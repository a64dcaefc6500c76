#include "qipl/transforms.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>

#include "qipl/errors.hpp"
#include "qipl/serialize.hpp"

namespace qipl {

namespace {

int bits_for(int values) { return values <= 1 ? 0 : int(std::bit_width(unsigned(values - 1))); }

void require_valid(const VerifierSpec& v, const char* what) {
  const auto bad = validate_verifier(v, SizeCaps{64, 1 << 20, 1 << 20});
  if (!bad.empty()) throw ArgumentError(fmt::format("{}: invalid input verifier: {}", what, bad.front()));
}

void require_size(const VerifierSpec& out, const char* what) {
  const SizeCaps caps;
  if (out.register_qubits() > caps.max_register_qubits)
    throw SizeError(fmt::format("{} needs {} register qubits, cap is {}", what,
                                out.register_qubits(), caps.max_register_qubits));
}

void stamp(VerifierSpec& out, const VerifierSpec& in, std::string name, std::string params) {
  out.provenance = in.provenance;
  out.provenance.push_back({std::move(name), std::move(params), spec_hash(in)});
}

ActionKind merge_kind(ActionKind a, ActionKind b) {
  if (a == ActionKind::Unitary) return b;
  if (b == ActionKind::Unitary || a == b) return a;
  throw ArgumentError("cannot merge almost-unitary and isometric actions");
}

// Gates of `a` placed into `dst`: register wires go through `map`, fresh
// wires continue after the ones dst already has.
void append_remapped(CircuitAction& dst, const CircuitAction& a, const std::vector<int>& map) {
  const int env_base = dst.in_qubits + dst.environment_qubits();
  for (Gate g : a.gates) {
    for (int& w : g.wires) w = w < a.in_qubits ? map[std::size_t(w)] : env_base + (w - a.in_qubits);
    dst.gates.push_back(std::move(g));
  }
  dst.kind = merge_kind(dst.kind, a.kind);
}

void append(CircuitAction& dst, const std::vector<Gate>& gates) {
  dst.gates.insert(dst.gates.end(), gates.begin(), gates.end());
}

Gate toffoli(int c0, int c1, int t) {
  ComplexMatrix m = ComplexMatrix::Identity(8, 8);
  m(6, 6) = m(7, 7) = 0;
  m(6, 7) = m(7, 6) = 1;
  return Gate::raw(std::move(m), {c0, c1, t});
}

// X on every wire of `wires` whose bit in `pattern` (MSB first) is 0.
std::vector<Gate> flip_zeros(const std::vector<int>& wires, std::uint64_t pattern) {
  std::vector<Gate> out;
  const std::size_t n = wires.size();
  for (std::size_t i = 0; i < n; ++i)
    if (!((pattern >> (n - 1 - i)) & 1)) out.push_back(Gate::x(wires[i]));
  return out;
}

// X on target iff the controls read `pattern`.
std::vector<Gate> match_x(const std::vector<int>& controls, std::uint64_t pattern, int target,
                          const std::vector<int>& scratch) {
  std::vector<Gate> out = flip_zeros(controls, pattern);
  const auto core = multi_controlled_x(controls, target, scratch);
  const auto undo = flip_zeros(controls, pattern);
  out.insert(out.end(), core.begin(), core.end());
  out.insert(out.end(), undo.begin(), undo.end());
  return out;
}

// reg += 1 (mod 2^|reg|) when every control is 1. reg is MSB first.
std::vector<Gate> controlled_increment(const std::vector<int>& reg, const std::vector<int>& ctrl,
                                       const std::vector<int>& scratch) {
  std::vector<Gate> out;
  for (std::size_t i = 0; i < reg.size(); ++i) {
    std::vector<int> cs = ctrl;
    cs.insert(cs.end(), reg.begin() + std::ptrdiff_t(i) + 1, reg.end());
    const auto g = multi_controlled_x(cs, reg[i], scratch);
    out.insert(out.end(), g.begin(), g.end());
  }
  return out;
}

std::vector<int> original_map(const VerifierSpec& v, int w_base) {
  std::vector<int> map;
  for (int w = 0; w < v.q_M; ++w) map.push_back(w);
  for (int w = 0; w < v.q_W; ++w) map.push_back(w_base + w);
  return map;
}

}  // namespace

double Dyadic::value() const { return std::ldexp(double(num), -log2_den); }

Dyadic choose_dyadic_alpha(double c, double s) {
  if (!(0.0 <= s && s < c && c <= 1.0))
    throw ParameterError(fmt::format("need 0 <= s < c <= 1, got c={}, s={}", c, s));
  const double lo = (3.0 * c + s) / 4.0, hi = c;
  for (int k = 0; k <= 10; ++k) {
    const double scale = std::ldexp(1.0, k);
    const double first = std::ceil(lo * scale - 1e-12);
    if (first <= hi * scale + 1e-12) return Dyadic{std::uint64_t(first), k};
  }
  throw ParameterError(fmt::format("no dyadic with denominator <= 2^10 in [{}, {}]", lo, hi));
}

ComplexMatrix ry_matrix(double theta) {
  ComplexMatrix m(2, 2);
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  m << c, -s, s, c;
  return m;
}

std::vector<Gate> multi_controlled_x(const std::vector<int>& controls, int target,
                                     const std::vector<int>& scratch) {
  const std::size_t n = controls.size();
  if (n >= 3 && scratch.size() < n - 2)
    throw ArgumentError(fmt::format("{} controls need {} scratch wires, got {}", n, n - 2,
                                    scratch.size()));
  if (n == 0) return {Gate::x(target)};
  if (n == 1) return {Gate::cnot(controls[0], target)};
  if (n == 2) return {toffoli(controls[0], controls[1], target)};
  std::vector<Gate> up;
  up.push_back(toffoli(controls[0], controls[1], scratch[0]));
  for (std::size_t i = 1; i + 2 < n; ++i) up.push_back(toffoli(scratch[i - 1], controls[i + 1], scratch[i]));
  std::vector<Gate> out = up;
  out.push_back(toffoli(scratch[n - 3], controls[n - 1], target));
  out.insert(out.end(), up.rbegin(), up.rend());
  return out;
}

CircuitAction adjoint_action(const CircuitAction& a) {
  if (a.kind != ActionKind::Unitary || a.environment_qubits() > 0)
    throw ArgumentError("only unitary actions have an adjoint action");
  CircuitAction out;
  out.in_qubits = a.in_qubits;
  for (auto it = a.gates.rbegin(); it != a.gates.rend(); ++it) out.gates.push_back(adjoint(*it));
  return out;
}

VerifierSpec perfect_completeness_transform(const VerifierSpec& v, double c, double s) {
  require_valid(v, "perfect completeness");
  const Dyadic alpha = choose_dyadic_alpha(c, s);
  const int qM = v.q_M, qW = v.q_W;
  const int x0 = qM, w0 = qM + qW, zp = qM + 2 * qW, a = zp + 1;

  VerifierSpec out;
  out.q_M = qM + qW;
  out.q_W = qW + 2;
  out.starts_with = v.starts_with;
  out.output_qubit = a;
  const auto map = original_map(v, w0);
  const int o = map[std::size_t(v.output_qubit)];
  for (std::size_t j = 0; j < v.actions.size(); ++j) {
    CircuitAction act;
    act.in_qubits = out.register_qubits();
    append_remapped(act, v.actions[j], map);
    if (j + 1 == v.actions.size()) {
      act.gates.push_back(Gate::cnot(o, zp));
      for (int i = 0; i < qW; ++i) act.gates.push_back(Gate::swap(w0 + i, x0 + i));
    }
    out.actions.push_back(std::move(act));
  }
  // The prover now holds the pseudo-copy z; project (z, Z') onto
  // sqrt(1-a)|00> + sqrt(a)|11> by undoing its preparation.
  const int z = v.output_qubit < qM ? o : x0 + (v.output_qubit - qM);
  const double theta = 2.0 * std::acos(std::sqrt(1.0 - alpha.value()));
  CircuitAction fin;
  fin.in_qubits = out.register_qubits();
  fin.gates = {Gate::cnot(z, zp), Gate::raw(ry_matrix(-theta), {z})};
  append(fin, match_x({z, zp}, 0, a, {}));
  out.actions.push_back(std::move(fin));
  stamp(out, v, "perfect_completeness",
        fmt::format("c={},s={},alpha={}/2^{}", c, s, alpha.num, alpha.log2_den));
  require_size(out, "perfect completeness");
  return out;
}

int repetition_count(int k, double c, double s) {
  if (k < 1) throw ParameterError("k must be positive");
  if (!(0.0 <= s && s < c && c <= 1.0))
    throw ParameterError(fmt::format("need 0 <= s < c <= 1, got c={}, s={}", c, s));
  const double gap = (c - s) * (c - s) / 2.0;
  return int(std::ceil(double(k) / std::log2(1.0 / (1.0 - gap)) - 1e-12));
}

VerifierSpec sequential_repetition(const VerifierSpec& v, int r) {
  require_valid(v, "sequential repetition");
  if (r < 1) throw ArgumentError("repetition count must be positive");
  const int qM = v.q_M, qW = v.q_W;
  const int sb = bits_for(r + 1), tb = bits_for(r);
  const int mhat = qM + qW;
  const int w0 = mhat, s0 = w0 + qW, t0 = s0 + sb, a = t0 + tb, sc0 = a + 1;
  const int n_scr = std::max({1 + std::max({mhat - 2, tb - 2, 0}), sb + tb - 2, sb - 2});

  VerifierSpec out;
  out.q_M = mhat;
  out.q_W = qW + sb + tb + 1 + n_scr;
  out.starts_with = v.starts_with;
  out.output_qubit = a;
  require_size(out, "sequential repetition");
  const int n = out.register_qubits();
  const auto map = original_map(v, w0);
  const int o = map[std::size_t(v.output_qubit)];
  const auto S = wire_range(s0, sb), T = wire_range(t0, tb), scratch = wire_range(sc0, n_scr);
  const int flag = scratch[0];
  const std::vector<int> rest(scratch.begin() + 1, scratch.end());

  // Counts a clean round when the prover returned all of M^ as zeros, then
  // takes the zeros in X as the fresh W.
  std::vector<Gate> clean;
  {
    const auto all = wire_range(0, mhat);
    auto f = match_x(all, 0, flag, rest);
    clean.insert(clean.end(), f.begin(), f.end());
    auto inc = controlled_increment(T, {flag}, rest);
    clean.insert(clean.end(), inc.begin(), inc.end());
    clean.insert(clean.end(), f.begin(), f.end());
    for (int i = 0; i < qW; ++i) clean.push_back(Gate::swap(w0 + i, qM + i));
  }

  for (int run = 0; run < r; ++run) {
    if (run > 0 && v.starts_with == StartsWith::Prover) {
      CircuitAction chk;
      chk.in_qubits = n;
      chk.gates = clean;
      out.actions.push_back(std::move(chk));
    }
    for (std::size_t j = 0; j < v.actions.size(); ++j) {
      CircuitAction act;
      act.in_qubits = n;
      if (run > 0 && j == 0 && v.starts_with == StartsWith::Verifier) act.gates = clean;
      append_remapped(act, v.actions[j], map);
      if (j + 1 == v.actions.size()) {
        append(act, controlled_increment(S, {o}, scratch));
        if (run + 1 < r) {
          for (int i = 0; i < qW; ++i) act.gates.push_back(Gate::swap(w0 + i, qM + i));
        } else {
          std::vector<int> st = S;
          st.insert(st.end(), T.begin(), T.end());
          const std::uint64_t pattern = (std::uint64_t(r) << tb) | std::uint64_t(r - 1);
          append(act, match_x(st, pattern, a, scratch));
        }
      }
      out.actions.push_back(std::move(act));
    }
  }
  stamp(out, v, "sequential_repetition", fmt::format("r={}", r));
  return out;
}

VerifierSpec parallel_repetition(const VerifierSpec& v, int k) {
  require_valid(v, "parallel repetition");
  if (k < 1) throw ArgumentError("repetition count must be positive");
  const int qM = v.q_M, qW = v.q_W;
  VerifierSpec out;
  out.q_M = k * qM;
  out.q_W = k * qW + 1 + std::max(k - 2, 0);
  out.starts_with = v.starts_with;
  out.output_qubit = k * (qM + qW);
  require_size(out, "parallel repetition");
  const int a = out.output_qubit;
  const auto scratch = wire_range(a + 1, std::max(k - 2, 0));

  std::vector<std::vector<int>> maps(static_cast<std::size_t>(k));
  std::vector<int> outs;
  for (int c = 0; c < k; ++c) {
    for (int w = 0; w < qM; ++w) maps[std::size_t(c)].push_back(c * qM + w);
    for (int w = 0; w < qW; ++w) maps[std::size_t(c)].push_back(k * qM + c * qW + w);
    outs.push_back(maps[std::size_t(c)][std::size_t(v.output_qubit)]);
  }
  for (std::size_t j = 0; j < v.actions.size(); ++j) {
    CircuitAction act;
    act.in_qubits = out.register_qubits();
    for (int c = 0; c < k; ++c) append_remapped(act, v.actions[j], maps[std::size_t(c)]);
    if (j + 1 == v.actions.size()) append(act, multi_controlled_x(outs, a, scratch));
    out.actions.push_back(std::move(act));
  }
  stamp(out, v, "parallel_repetition", fmt::format("k={}", k));
  return out;
}

namespace {

// Shared body of the coin-selected forward/backward compilers. `forward[i]`
// and `backward[i]` are the original actions run in output action i on coin
// 0 and coin 1; action 0 also loads the prover's snapshot.
VerifierSpec halving_core(const VerifierSpec& v, const std::vector<std::vector<int>>& forward,
                          const std::vector<std::vector<int>>& backward, const char* name) {
  const int qM = v.q_M, qW = v.q_W;
  for (const auto& act : v.actions) {
    if (act.kind != ActionKind::Unitary || act.environment_qubits() > 0)
      throw ArgumentError(fmt::format("{} needs unitary actions", name));
    for (const auto& g : act.gates)
      if (g.wires.size() > 2)
        throw ArgumentError(fmt::format("{} needs gates on at most two wires", name));
  }
  const int x0 = qM, bw = qM + qW, w0 = bw + 1, coin = w0 + qW, a = coin + 1;
  const int n_scr = std::max(qW - 1, 0);

  VerifierSpec out;
  out.q_M = qM + qW + 1;
  out.q_W = qW + 2 + n_scr;
  out.starts_with = StartsWith::Prover;
  out.output_qubit = a;
  require_size(out, name);
  const int n = out.register_qubits();
  const auto map = original_map(v, w0);
  const auto scratch = wire_range(a + 1, n_scr);

  auto run_controlled = [&](CircuitAction& dst, const CircuitAction& src) {
    for (Gate g : src.gates) {
      for (int& w : g.wires) w = map[std::size_t(w)];
      dst.gates.push_back(controlled(g, coin));
    }
  };
  for (std::size_t i = 0; i < forward.size(); ++i) {
    CircuitAction act;
    act.in_qubits = n;
    if (i == 0) {
      for (int q = 0; q < qW; ++q) act.gates.push_back(Gate::swap(x0 + q, w0 + q));
      act.gates.push_back(Gate::h(coin));
      act.gates.push_back(Gate::cnot(coin, bw));
    }
    act.gates.push_back(Gate::x(coin));
    for (int j : forward[i]) run_controlled(act, v.actions[std::size_t(j)]);
    act.gates.push_back(Gate::x(coin));
    for (int j : backward[i]) run_controlled(act, adjoint_action(v.actions[std::size_t(j)]));
    if (i + 1 == forward.size()) {
      const int o = map[std::size_t(v.output_qubit)];
      act.gates.push_back(Gate::x(coin));
      act.gates.push_back(toffoli(coin, o, a));
      act.gates.push_back(Gate::x(coin));
      std::vector<int> ctrl{coin};
      for (int q = 0; q < qW; ++q) ctrl.push_back(w0 + q);
      append(act, match_x(ctrl, std::uint64_t{1} << qW, a, scratch));
    }
    out.actions.push_back(std::move(act));
  }
  return out;
}

void require_prover_first(const VerifierSpec& v, const char* name) {
  if (v.starts_with != StartsWith::Prover)
    throw ArgumentError(fmt::format("{} needs a protocol that starts with the prover", name));
}

}  // namespace

VerifierSpec turn_halving(const VerifierSpec& v) {
  require_valid(v, "turn halving");
  require_prover_first(v, "turn halving");
  const int l = int(v.actions.size());
  if (l < 3 || l % 2 == 0)
    throw ArgumentError(fmt::format("turn halving needs 4m+1 turns, got {}", v.turns()));
  const auto applied = std::count_if(v.provenance.begin(), v.provenance.end(),
                                     [](const Provenance& e) { return e.transform == "turn_halving"; });
  if (applied >= kMaxHalvingDepth)
    throw ArgumentError(fmt::format("turn halving already applied {} times (limit {})", applied,
                                    kMaxHalvingDepth));
  const int m = (l - 1) / 2;
  // 0-based: forward runs V_{m+1}..V_{2m+1}, backward V_m^dag..V_1^dag.
  std::vector<std::vector<int>> fw, bw;
  for (int i = 0; i <= m; ++i) {
    fw.push_back({m + i});
    bw.push_back(i == 0 ? std::vector<int>{} : std::vector<int>{m - i});
  }
  VerifierSpec out = halving_core(v, fw, bw, "turn halving");
  stamp(out, v, "turn_halving", fmt::format("m={}", m));
  return out;
}

VerifierSpec single_coin_qmaml(const VerifierSpec& v3) {
  require_valid(v3, "single-coin compiler");
  require_prover_first(v3, "single-coin compiler");
  if (v3.actions.size() != 2)
    throw ArgumentError(fmt::format("single-coin compiler needs 3 turns, got {}", v3.turns()));
  VerifierSpec out = halving_core(v3, {{}, {1}}, {{}, {0}}, "single-coin compiler");
  stamp(out, v3, "single_coin_qmaml", "");
  return out;
}

}  // namespace qipl
