#pragma once

#include <optional>
#include <vector>

#include "conecraft/linalg.hpp"
#include "conecraft/scheme.hpp"

namespace conecraft {

// Smallest graph-ball radius containing `support` in G_t (vertices live
// during iteration t, declared edges of iteration t). Exact min-center
// eccentricity by BFS; nullopt when the support spans disconnected
// components, where no finite ball contains it.
std::optional<int> support_radius(const InteractionScheme& scheme, const std::vector<QubitId>& support,
                                  int t);

struct SupportSet {
  std::vector<QubitId> qubits;  // sorted, deduplicated
  std::optional<int> radius;    // ball radius in G_T
};

SupportSet make_support(const InteractionScheme& scheme, std::vector<QubitId> qubits);

struct ConeGateRef {
  int iteration = 0;
  int layer = 0;
  int slot = 0;  // index within the layer's declared gate list
  QubitId a = 0;
  QubitId b = 0;
};

struct ConeIteration {
  int iteration = 0;
  std::vector<ConeGateRef> gates;        // scheme order: layer ascending, slot ascending
  std::vector<QubitId> qubits_entering;  // fresh cone qubits of this iteration (boundary at k = t)
};

// Combinatorial past causal cone of an observable support, traced backwards
// from iteration T to iteration t: a gate joins the cone iff its edge meets
// the running support, and then both endpoints join. Fresh qubits leave the
// support at their birth iteration; discarded ancillas re-enter as identity
// and so never enlarge it.
struct CausalCone {
  int from_iteration = 0;
  std::int64_t n_unitaries = 0;  // gates in the cone
  std::int64_t n_qubits = 0;     // qubits touched by cone gates or carrying the observable
  std::vector<ConeIteration> per_iteration;         // k = t..T ascending
  std::vector<std::vector<QubitId>> support_trace;  // [k - t] = support entering iteration k, sorted
  std::vector<QubitId> boundary;                    // == support_trace[0]
};

CausalCone trace_cone(const InteractionScheme& scheme, const std::vector<QubitId>& support, int t);

std::string cone_to_json(const CausalCone& cone);

struct CircuitOp {
  QubitId a = 0;
  QubitId b = 0;
  std::array<cx, 16> matrix{};
};

struct CircuitStep {
  int iteration = 0;
  std::vector<NewQubit> fresh;     // cone qubits born here, with initial states
  std::vector<CircuitOp> gates;    // scheme order
  std::vector<QubitId> discards;   // cone ancillas of this iteration
};

// Runnable restriction of iterations t+1..T to the cone: boundary qubits
// start in boundary_state (maximally mixed by default), fresh cone qubits
// take their scheme-declared states, and exactly the cone's gates appear in
// scheme layer order.
struct EffectiveCircuit {
  int from_iteration = 0;
  std::vector<QubitId> boundary;      // sorted
  std::optional<Mat> boundary_state;  // 2^|boundary| square; empty = maximally mixed
  std::vector<CircuitStep> steps;
  std::vector<QubitId> final_qubits;  // cone qubits alive after iteration T, sorted
};

EffectiveCircuit extract_effective_circuit(const InteractionScheme& scheme, const CausalCone& cone,
                                           const std::optional<Mat>& boundary_state = std::nullopt);

}  // namespace conecraft
