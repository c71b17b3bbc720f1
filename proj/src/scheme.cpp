#include "conecraft/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "conecraft/linalg.hpp"
#include "conecraft/rng.hpp"

namespace conecraft {

namespace {

constexpr double kUnitarityTol = 1e-10;
constexpr double kStateTol = 1e-10;
constexpr double kIdentityTol = 1e-12;

std::array<cx, 16> named_matrix(GateKind k) {
  std::array<cx, 16> m{};
  auto set = [&](int r, int c, cx v) { m[r * 4 + c] = v; };
  switch (k) {
    case GateKind::cnot:  // control = first qubit
      set(0, 0, 1), set(1, 1, 1), set(2, 3, 1), set(3, 2, 1);
      break;
    case GateKind::cz:
      set(0, 0, 1), set(1, 1, 1), set(2, 2, 1), set(3, 3, -1);
      break;
    case GateKind::swap_gate:
      set(0, 0, 1), set(1, 2, 1), set(2, 1, 1), set(3, 3, 1);
      break;
    default:
      fail(ErrorKind::usage, "named_matrix: not a named gate kind");
  }
  return m;
}

double unitarity_defect(const std::array<cx, 16>& m) {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      cx s = 0.0;
      for (int k = 0; k < 4; ++k) s += std::conj(m[k * 4 + i]) * m[k * 4 + j];
      if (i == j) s -= 1.0;
      worst = std::max(worst, std::abs(s));
    }
  return worst;
}

bool is_identity_matrix(const std::array<cx, 16>& m) {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) worst = std::max(worst, std::abs(m[i * 4 + j] - (i == j ? cx(1) : cx(0))));
  return worst <= kIdentityTol;
}

void check_state(const std::array<cx, 4>& st, const std::string& where) {
  const double tr_re = st[0].real() + st[3].real();
  const double tr_im = st[0].imag() + st[3].imag();
  bool ok = std::abs(tr_re - 1.0) <= kStateTol && std::abs(tr_im) <= kStateTol;
  ok = ok && std::abs(st[1] - std::conj(st[2])) <= kStateTol;
  ok = ok && std::abs(st[0].imag()) <= kStateTol && std::abs(st[3].imag()) <= kStateTol;
  const double det = st[0].real() * st[3].real() - std::norm(st[1]);
  ok = ok && st[0].real() >= -kStateTol && st[3].real() >= -kStateTol && det >= -kStateTol;
  if (!ok) fail(ErrorKind::validation, where + ": not a single-qubit density matrix");
}

bool states_close(const std::array<cx, 4>& a, const std::array<cx, 4>& b) {
  for (int i = 0; i < 4; ++i)
    if (std::abs(a[i] - b[i]) > kIdentityTol) return false;
  return true;
}

bool matrices_close(const std::array<cx, 16>& a, const std::array<cx, 16>& b) {
  for (int i = 0; i < 16; ++i)
    if (std::abs(a[i] - b[i]) > kIdentityTol) return false;
  return true;
}

std::uint64_t slot_seed(const GateSource& src, int t, int layer, int slot) {
  // Label 0 is reserved for the iteration-independent stream so that
  // translationally invariant draws repeat across iterations.
  std::uint64_t s = src.translationally_invariant
                        ? derive_seed(src.seed, 0)
                        : derive_seed(src.seed, static_cast<std::uint64_t>(t) + 1);
  s = derive_seed(s, static_cast<std::uint64_t>(layer));
  return derive_seed(s, static_cast<std::uint64_t>(slot));
}

Gate source_gate(const GateSource& src, int t, int layer, int slot) {
  switch (src.kind) {
    case GateSource::Kind::haar: return make_haar_gate(slot_seed(src, t, layer, slot));
    case GateSource::Kind::cnot: return make_named_gate("cnot");
    case GateSource::Kind::cz: return make_named_gate("cz");
    case GateSource::Kind::swap_gate: return make_named_gate("swap");
    case GateSource::Kind::identity: break;
  }
  fail(ErrorKind::usage, "identity gate source fills no slots");
}

using EdgeList = std::vector<std::pair<QubitId, QubitId>>;

void fill_brickwork_layers(IterationSpec& it, const EdgeList& path_edges, int D, int t,
                           const GateSource& source) {
  it.layers.assign(D, {});
  if (source.kind == GateSource::Kind::identity) return;
  for (int l = 0; l < D; ++l) {
    int slot = 0;
    for (size_t j = static_cast<size_t>(l % 2); j < path_edges.size(); j += 2)
      it.layers[l].push_back({path_edges[j].first, path_edges[j].second, source_gate(source, t, l, slot++)});
  }
}

}  // namespace

bool Gate::operator==(const Gate& o) const {
  return kind == o.kind && seed == o.seed && matrix == o.matrix;
}

bool IterationSpec::operator==(const IterationSpec& o) const {
  return index == o.index && new_system == o.new_system && new_ancillas == o.new_ancillas &&
         edges == o.edges && layers == o.layers && discards == o.discards;
}

bool InteractionScheme::operator==(const InteractionScheme& o) const {
  return T == o.T && D == o.D && bath_size == o.bath_size && bath_states == o.bath_states &&
         iterations == o.iterations;
}

Gate make_named_gate(const std::string& name) {
  Gate g;
  if (name == "cnot") g.kind = GateKind::cnot;
  else if (name == "cz") g.kind = GateKind::cz;
  else if (name == "swap") g.kind = GateKind::swap_gate;
  else fail(ErrorKind::usage, "unknown gate name: " + name);
  g.matrix = named_matrix(g.kind);
  return g;
}

Gate make_haar_gate(std::uint64_t seed) {
  Gate g;
  g.kind = GateKind::haar;
  g.seed = seed;
  Rng rng(seed);
  Mat u = haar_unitary(4, rng);
  mat_to_flat(u, g.matrix);
  return g;
}

Gate make_custom_gate(const std::array<cx, 16>& m) {
  Gate g;
  g.kind = GateKind::custom;
  g.matrix = m;
  return g;
}

std::string gate_kind_name(GateKind k) {
  switch (k) {
    case GateKind::haar: return "haar";
    case GateKind::cnot: return "cnot";
    case GateKind::cz: return "cz";
    case GateKind::swap_gate: return "swap";
    case GateKind::custom: return "custom";
  }
  return "custom";
}

void InteractionScheme::check_and_finalize() {
  if (T < 0) fail(ErrorKind::validation, "scheme: T must be >= 0");
  if (D < 1) fail(ErrorKind::validation, "scheme: D must be >= 1");
  if (bath_size < 0) fail(ErrorKind::validation, "scheme: bath_size must be >= 0");
  if (bath_states.empty()) bath_states.assign(bath_size, kKetZeroState);
  if (static_cast<int>(bath_states.size()) != bath_size)
    fail(ErrorKind::validation, "scheme: bath_states must have bath_size entries");
  if (static_cast<int>(iterations.size()) != T + 1)
    fail(ErrorKind::validation, "scheme: expected " + std::to_string(T + 1) + " iterations, found " +
                                    std::to_string(iterations.size()));

  qubits.clear();
  vertices.clear();
  live_after.clear();
  layers_are_matchings = true;

  std::set<QubitId> live;
  for (int b = 0; b < bath_size; ++b) {
    check_state(bath_states[b], "bath qubit " + std::to_string(b));
    qubits[b] = QubitInfo{QubitInfo::Kind::bath, 0, -1, bath_states[b]};
    live.insert(b);
  }

  std::int64_t system_added = 0;
  for (int t = 0; t <= T; ++t) {
    IterationSpec& it = iterations[t];
    const std::string ctx = "iteration " + std::to_string(t);
    if (it.index != t) fail(ErrorKind::validation, ctx + ": index field says " + std::to_string(it.index));
    if (static_cast<int>(it.layers.size()) != D)
      fail(ErrorKind::validation, ctx + " declares " + std::to_string(it.layers.size()) +
                                      " layers under D = " + std::to_string(D));

    auto add_new = [&](const NewQubit& nq, QubitInfo::Kind kind) {
      if (qubits.count(nq.id))
        fail(ErrorKind::validation,
             ctx + ": qubit id " + std::to_string(nq.id) + " reused; ids must be fresh across the scheme");
      check_state(nq.state, ctx + ", qubit " + std::to_string(nq.id));
      QubitInfo info;
      info.kind = kind;
      info.born_iteration = t;
      info.discard_iteration = (kind == QubitInfo::Kind::ancilla) ? t : -1;
      info.initial_state = nq.state;
      qubits[nq.id] = info;
      live.insert(nq.id);
    };
    for (const NewQubit& nq : it.new_system) add_new(nq, QubitInfo::Kind::system);
    for (const NewQubit& nq : it.new_ancillas) add_new(nq, QubitInfo::Kind::ancilla);
    system_added += static_cast<std::int64_t>(it.new_system.size());

    vertices.emplace_back(live.begin(), live.end());

    std::set<std::pair<QubitId, QubitId>> edge_set;
    for (size_t e = 0; e < it.edges.size(); ++e) {
      auto [a, b] = it.edges[e];
      if (a == b) fail(ErrorKind::validation, ctx + ", edge " + std::to_string(e) + ": self-loop");
      if (!live.count(a) || !live.count(b))
        fail(ErrorKind::validation, ctx + ", edge " + std::to_string(e) + " (" + std::to_string(a) + "," +
                                        std::to_string(b) + "): unknown qubit");
      edge_set.insert({std::min(a, b), std::max(a, b)});
    }

    for (size_t l = 0; l < it.layers.size(); ++l) {
      std::set<QubitId> touched;
      std::set<std::pair<QubitId, QubitId>> placed;
      for (size_t s = 0; s < it.layers[l].size(); ++s) {
        const LayerGate& lg = it.layers[l][s];
        const std::string gctx =
            ctx + ", layer " + std::to_string(l) + ", gate " + std::to_string(s);
        if (lg.a == lg.b) fail(ErrorKind::validation, gctx + ": self-loop");
        auto key = std::make_pair(std::min(lg.a, lg.b), std::max(lg.a, lg.b));
        if (!edge_set.count(key))
          fail(ErrorKind::validation, gctx + ": edge (" + std::to_string(lg.a) + "," +
                                          std::to_string(lg.b) + ") not in the declared edge set");
        if (unitarity_defect(lg.gate.matrix) > kUnitarityTol)
          fail(ErrorKind::validation, gctx + ": gate matrix is not unitary");
        if (touched.count(lg.a) || touched.count(lg.b) || placed.count(key))
          layers_are_matchings = false;
        touched.insert(lg.a);
        touched.insert(lg.b);
        placed.insert(key);
      }
    }

    std::vector<QubitId> anc_ids;
    for (const NewQubit& nq : it.new_ancillas) anc_ids.push_back(nq.id);
    std::sort(anc_ids.begin(), anc_ids.end());
    std::vector<QubitId> disc = it.discards;
    std::sort(disc.begin(), disc.end());
    if (disc != anc_ids)
      fail(ErrorKind::validation, ctx + ": discards must equal this iteration's ancillas exactly");
    for (QubitId q : disc) live.erase(q);

    live_after.emplace_back(live.begin(), live.end());
    if (static_cast<std::int64_t>(live.size()) != bath_size + system_added)
      fail(ErrorKind::validation, ctx + ": live qubit count does not match bath_size plus additions");
  }
}

InteractionScheme build_dmera(int T, int D, const GateSource& source) {
  if (T < 0) fail(ErrorKind::usage, "dmera: T must be >= 0");
  if (D < 1) fail(ErrorKind::usage, "dmera: D must be >= 1");
  if (T > 16)
    fail(ErrorKind::cap,
         "dmera: explicit construction capped at T = 16 (65536 qubits); use the closed-form counts for larger T");
  InteractionScheme s;
  s.T = T;
  s.D = D;
  s.bath_size = 0;
  s.iterations.resize(T + 1);
  s.iterations[0].index = 0;
  s.iterations[0].new_system.push_back({0, kKetZeroState});
  s.iterations[0].layers.assign(D, {});

  std::vector<QubitId> line = {0};
  QubitId next_id = 1;
  for (int t = 1; t <= T; ++t) {
    IterationSpec& it = s.iterations[t];
    it.index = t;
    std::vector<QubitId> grown(line.size() * 2);
    for (size_t i = 0; i < line.size(); ++i) {
      grown[2 * i] = line[i];
      QubitId q = next_id++;
      grown[2 * i + 1] = q;
      it.new_system.push_back({q, kKetZeroState});
    }
    line = std::move(grown);
    EdgeList path;
    for (size_t j = 0; j + 1 < line.size(); ++j) path.emplace_back(line[j], line[j + 1]);
    it.edges = path;
    fill_brickwork_layers(it, path, D, t, source);
  }
  s.check_and_finalize();
  return s;
}

InteractionScheme build_mps(int T, int bath_qubits, int D, const GateSource& source) {
  if (T < 1) fail(ErrorKind::usage, "mps: T must be >= 1");
  if (bath_qubits < 1) fail(ErrorKind::usage, "mps: bath size must be >= 1");
  if (D < 1) fail(ErrorKind::usage, "mps: D must be >= 1");
  InteractionScheme s;
  s.T = T;
  s.D = D;
  s.bath_size = bath_qubits;
  s.bath_states.assign(bath_qubits, kKetZeroState);
  s.iterations.resize(T + 1);
  s.iterations[0].index = 0;
  s.iterations[0].new_system.push_back({bath_qubits, kKetZeroState});
  s.iterations[0].layers.assign(D, {});

  for (int t = 1; t <= T; ++t) {
    IterationSpec& it = s.iterations[t];
    it.index = t;
    const QubitId fresh = bath_qubits + t;
    it.new_system.push_back({fresh, kKetZeroState});
    EdgeList path;
    path.emplace_back(fresh, 0);
    for (QubitId j = 1; j < bath_qubits; ++j) path.emplace_back(j - 1, j);
    it.edges = path;
    fill_brickwork_layers(it, path, D, t, source);
  }
  s.check_and_finalize();
  return s;
}

InteractionScheme build_ri(int d, int side_length, int T, int D, const GateSource& source) {
  if (d != 1 && d != 2) fail(ErrorKind::usage, "ri: d must be 1 or 2");
  if (side_length < 1) fail(ErrorKind::usage, "ri: side length must be >= 1");
  if (T < 0) fail(ErrorKind::usage, "ri: T must be >= 0");
  if (D < 1) fail(ErrorKind::usage, "ri: D must be >= 1");
  const int B = (d == 1) ? side_length : side_length * side_length;

  // Bath brickwork matchings along each grid direction; empty ones drop out
  // of the layer cycle.
  std::vector<EdgeList> bath_matchings;
  auto push_nonempty = [&](EdgeList m) {
    if (!m.empty()) bath_matchings.push_back(std::move(m));
  };
  if (d == 1) {
    EdgeList even, odd;
    for (int i = 0; i + 1 < side_length; ++i)
      (i % 2 == 0 ? even : odd).emplace_back(i, i + 1);
    push_nonempty(even);
    push_nonempty(odd);
  } else {
    EdgeList he, ho, ve, vo;
    for (int r = 0; r < side_length; ++r)
      for (int c = 0; c + 1 < side_length; ++c)
        (c % 2 == 0 ? he : ho).emplace_back(r * side_length + c, r * side_length + c + 1);
    for (int r = 0; r + 1 < side_length; ++r)
      for (int c = 0; c < side_length; ++c)
        (r % 2 == 0 ? ve : vo).emplace_back(r * side_length + c, (r + 1) * side_length + c);
    push_nonempty(he);
    push_nonempty(ho);
    push_nonempty(ve);
    push_nonempty(vo);
  }

  InteractionScheme s;
  s.T = T;
  s.D = D;
  s.bath_size = B;
  s.bath_states.assign(B, kKetZeroState);
  s.iterations.resize(T + 1);
  s.iterations[0].index = 0;
  s.iterations[0].layers.assign(D, {});

  const int cycle_len = 1 + static_cast<int>(bath_matchings.size());
  for (int t = 1; t <= T; ++t) {
    IterationSpec& it = s.iterations[t];
    it.index = t;
    std::vector<QubitId> sys(B);
    for (int i = 0; i < B; ++i) {
      sys[i] = B + static_cast<QubitId>(t - 1) * B + i;
      it.new_system.push_back({sys[i], kKetZeroState});
    }
    for (int i = 0; i < B; ++i) it.edges.emplace_back(sys[i], i);
    for (const EdgeList& m : bath_matchings)
      for (const auto& e : m) it.edges.push_back(e);

    it.layers.assign(D, {});
    if (source.kind != GateSource::Kind::identity) {
      for (int l = 0; l < D; ++l) {
        const int k = l % cycle_len;
        int slot = 0;
        if (k == 0) {
          for (int i = 0; i < B; ++i)
            it.layers[l].push_back({sys[i], i, source_gate(source, t, l, slot++)});
        } else {
          for (const auto& e : bath_matchings[k - 1])
            it.layers[l].push_back({e.first, e.second, source_gate(source, t, l, slot++)});
        }
      }
    }
  }
  s.check_and_finalize();
  return s;
}

SchemeTotals scheme_totals(const InteractionScheme& scheme) {
  SchemeTotals out;
  out.total_qubits = scheme.bath_size;
  for (const IterationSpec& it : scheme.iterations) {
    IterationTotals pt;
    pt.new_qubits = static_cast<int>(it.new_system.size() + it.new_ancillas.size());
    for (const auto& layer : it.layers)
      for (const LayerGate& lg : layer)
        if (!is_identity_matrix(lg.gate.matrix)) ++pt.gates;
    out.total_gates += pt.gates;
    out.total_qubits += pt.new_qubits;
    out.per_iteration.push_back(pt);
  }
  return out;
}

std::int64_t dmera_gate_count_exact(int T, int D) {
  if (T < 0 || T > 30 || D < 1) fail(ErrorKind::usage, "dmera counts need 0 <= T <= 30 and D >= 1");
  const std::int64_t p = std::int64_t{1} << T;
  return std::int64_t{(D + 1) / 2} * (p - 1) + std::int64_t{D / 2} * (p - 1 - T);
}

std::int64_t dmera_gate_count_alt(int T, int D) {
  if (T < 0 || T > 30 || D < 1) fail(ErrorKind::usage, "dmera counts need 0 <= T <= 30 and D >= 1");
  return std::int64_t{D - 1} * ((std::int64_t{1} << (T + 1)) - 1);
}

std::int64_t dmera_qubit_count(int T) {
  if (T < 0 || T > 30) fail(ErrorKind::usage, "dmera counts need 0 <= T <= 30");
  return std::int64_t{1} << T;
}

bool is_mps_type(const InteractionScheme& scheme) {
  for (int t = 1; t <= scheme.T; ++t) {
    const IterationSpec& it = scheme.iterations[t];
    if (!it.new_ancillas.empty()) return false;
    std::set<QubitId> fresh;
    for (const NewQubit& nq : it.new_system) fresh.insert(nq.id);
    auto is_bath = [&](QubitId q) { return q >= 0 && q < scheme.bath_size; };
    for (const auto& layer : it.layers)
      for (const LayerGate& lg : layer) {
        const bool ok = (fresh.count(lg.a) && is_bath(lg.b)) || (fresh.count(lg.b) && is_bath(lg.a)) ||
                        (is_bath(lg.a) && is_bath(lg.b));
        if (!ok) return false;
      }
  }
  return true;
}

bool is_translationally_invariant(const InteractionScheme& scheme) {
  if (scheme.T < 1 || !is_mps_type(scheme)) return false;
  const IterationSpec& ref = scheme.iterations[1];

  // Tag an endpoint as bath id or fresh-qubit slot so iterations compare
  // position-wise.
  auto tag_of = [&](const IterationSpec& it, QubitId q) -> std::pair<int, int> {
    if (q >= 0 && q < scheme.bath_size) return {0, q};
    for (size_t i = 0; i < it.new_system.size(); ++i)
      if (it.new_system[i].id == q) return {1, static_cast<int>(i)};
    return {-1, -1};
  };

  for (int t = 2; t <= scheme.T; ++t) {
    const IterationSpec& it = scheme.iterations[t];
    if (it.new_system.size() != ref.new_system.size()) return false;
    for (size_t i = 0; i < ref.new_system.size(); ++i)
      if (!states_close(it.new_system[i].state, ref.new_system[i].state)) return false;
    if (it.layers.size() != ref.layers.size()) return false;
    for (size_t l = 0; l < ref.layers.size(); ++l) {
      if (it.layers[l].size() != ref.layers[l].size()) return false;
      for (size_t g = 0; g < ref.layers[l].size(); ++g) {
        const LayerGate& a = it.layers[l][g];
        const LayerGate& b = ref.layers[l][g];
        if (tag_of(it, a.a) != tag_of(ref, b.a) || tag_of(it, a.b) != tag_of(ref, b.b)) return false;
        if (!matrices_close(a.gate.matrix, b.gate.matrix)) return false;
      }
    }
  }
  return true;
}

}  // namespace conecraft
