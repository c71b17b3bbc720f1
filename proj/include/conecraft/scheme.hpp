#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conecraft/common.hpp"

namespace conecraft {

inline constexpr std::array<cx, 4> kKetZeroState = {cx(1, 0), cx(0, 0), cx(0, 0), cx(0, 0)};

enum class GateKind { haar, cnot, cz, swap_gate, custom };

// A two-qubit gate on an ordered (first, second) qubit pair. The matrix is
// always materialized, row-major in the |q_first q_second> basis. Haar gates
// carry the seed they were drawn from so files can reference them without
// embedding the matrix.
struct Gate {
  GateKind kind = GateKind::custom;
  std::optional<std::uint64_t> seed;
  std::array<cx, 16> matrix{};

  bool operator==(const Gate& o) const;
};

Gate make_named_gate(const std::string& name);  // "cnot", "cz", "swap"
Gate make_haar_gate(std::uint64_t seed);
Gate make_custom_gate(const std::array<cx, 16>& m);
std::string gate_kind_name(GateKind k);

struct LayerGate {
  QubitId a = 0;
  QubitId b = 0;
  Gate gate;

  bool operator==(const LayerGate& o) const { return a == o.a && b == o.b && gate == o.gate; }
};

struct NewQubit {
  QubitId id = 0;
  std::array<cx, 4> state = kKetZeroState;  // 2x2 density matrix, row-major

  bool operator==(const NewQubit& o) const { return id == o.id && state == o.state; }
};

// One generation step: add fresh system qubits and ancillas, apply D ordered
// gate layers on the declared edge set, then trace out exactly the ancillas.
struct IterationSpec {
  int index = 0;
  std::vector<NewQubit> new_system;
  std::vector<NewQubit> new_ancillas;
  std::vector<std::pair<QubitId, QubitId>> edges;
  std::vector<std::vector<LayerGate>> layers;  // exactly D entries, possibly empty
  std::vector<QubitId> discards;               // == ancilla ids of this iteration

  bool operator==(const IterationSpec& o) const;
};

struct QubitInfo {
  enum class Kind { bath, system, ancilla };
  Kind kind = Kind::system;
  int born_iteration = 0;  // bath qubits exist before iteration 0 and use 0 here
  int discard_iteration = -1;
  std::array<cx, 4> initial_state = kKetZeroState;
};

// Full description of the sequential generation process. Qubit ids are
// stable across iterations (the per-iteration relabeling maps of input files
// are folded away at parse time), with bath ids fixed to 0..bath_size-1.
struct InteractionScheme {
  int T = 0;
  int D = 1;
  int bath_size = 0;
  std::vector<std::array<cx, 4>> bath_states;  // size bath_size
  std::vector<IterationSpec> iterations;       // size T+1, index 0..T

  // Derived tables, filled by check_and_finalize().
  std::map<QubitId, QubitInfo> qubits;
  std::vector<std::vector<QubitId>> vertices;    // [t] = sorted V_t
  std::vector<std::vector<QubitId>> live_after;  // [t] = sorted live set after discards
  bool layers_are_matchings = true;

  // Validates every structural invariant (layer count == D, gate unitarity,
  // gate edges declared, discards == ancillas, unique ids, valid single-qubit
  // states) and fills the derived tables. Errors name the iteration and the
  // offending element.
  void check_and_finalize();

  bool operator==(const InteractionScheme& o) const;
};

// How builders fill gate slots. Haar gates get per-slot seeds derived from
// the master seed and (iteration, layer, slot); with translationally
// invariant draws the iteration index is left out, so every iteration shares
// the same matrices. The identity source emits empty layers.
struct GateSource {
  enum class Kind { haar, cnot, cz, swap_gate, identity };
  Kind kind = Kind::haar;
  std::uint64_t seed = 0;
  bool translationally_invariant = false;
};

// Binary-tree-style circuit on a line: iteration 0 starts with one qubit and
// iteration t interleaves 2^(t-1) fresh qubits between the existing ones,
// with D alternating-parity nearest-neighbor gate layers. Explicit
// construction is capped at T <= 16; the closed-form counts below cover
// larger T.
InteractionScheme build_dmera(int T, int D, const GateSource& source);

// Chain bath of `bath_qubits`, one fresh system qubit per iteration attached
// to the head of the chain; iteration 0 introduces the initial system qubit
// with no gates. Nothing is ever discarded.
InteractionScheme build_mps(int T, int bath_qubits, int D, const GateSource& source);

// d-dimensional grid bath of side_length^d qubits; every iteration t >= 1
// adds a co-located grid of system qubits, couples each to its bath partner,
// and runs brickwork layers over the bath grid.
InteractionScheme build_ri(int d, int side_length, int T, int D, const GateSource& source);

struct IterationTotals {
  int gates = 0;       // non-identity gate slots
  int new_qubits = 0;  // system + ancilla qubits introduced
};

struct SchemeTotals {
  std::int64_t total_gates = 0;
  std::int64_t total_qubits = 0;  // bath + everything ever introduced
  std::vector<IterationTotals> per_iteration;
};

SchemeTotals scheme_totals(const InteractionScheme& scheme);

// Exact gate-slot count of build_dmera(T, D) with every slot filled,
// evaluated without building the scheme (valid to T = 30).
std::int64_t dmera_gate_count_exact(int T, int D);

// Coarser closed form counting D-1 full sweeps over the final line,
// reported alongside the exact count for comparison; the two differ.
std::int64_t dmera_gate_count_alt(int T, int D);

std::int64_t dmera_qubit_count(int T);

// True when iterations 1..T add no ancillas and couple fresh qubits to bath
// qubits only (bath-bath edges allowed, old system qubits untouched),
// judging by the gates actually placed.
bool is_mps_type(const InteractionScheme& scheme);

// True for MPS-type schemes whose iterations 1..T are structurally identical
// under the slot-wise correspondence of fresh qubits: same fresh-qubit count
// and initial states, same gate placement, same matrices.
bool is_translationally_invariant(const InteractionScheme& scheme);

// JSON serialization. serialize_scheme(parse_scheme(x)) is byte-stable and
// parse_scheme(serialize_scheme(s)) == s bit-exactly for valid schemes.
std::string serialize_scheme(const InteractionScheme& scheme);
InteractionScheme parse_scheme(const std::string& file_contents);

}  // namespace conecraft
