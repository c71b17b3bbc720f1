#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conecraft/common.hpp"
#include "conecraft/cone.hpp"
#include "conecraft/linalg.hpp"
#include "conecraft/scheme.hpp"

namespace conecraft {

// Mixed state on an explicit qubit roster (ascending ids). Basis index bit
// n-1-p carries the qubit at roster position p, the same convention the
// kernels use, so roster order reads most-significant-first.
struct DensityState {
  std::vector<QubitId> roster;
  Mat matrix;  // 2^n x 2^n
};

// Full invariant check: unit trace to 1e-10, Hermitian to 1e-12 (max entry),
// smallest eigenvalue >= -1e-9. Eigendecomposition inside; meant for tests
// and small states, not hot loops.
void check_density_state(const DensityState& state);

struct PureState {
  std::vector<QubitId> roster;   // ascending
  std::vector<cx> amplitudes;    // 2^n, same bit convention as DensityState
};

// Hermitian observable pinned to an iteration; support inside V_t.
struct HeisenbergOperator {
  std::vector<QubitId> support;  // ascending; empty means a c-number times 1
  Mat matrix;                    // 2^|support| square
  int iteration = 0;
};

// Two-qubit depolarizing with probability p after every gate (on that gate's
// pair) and single-qubit depolarizing with probability q on every fresh
// qubit at preparation. eps_unitary is a conservative per-gate channel
// distance (any channel difference is bounded by twice the mixing weight);
// eps_prep is the exact trace distance for pure targets.
struct NoiseModel {
  double gate_depolarizing = 0.0;  // p
  double prep_depolarizing = 0.0;  // q

  double eps_unitary() const { return 2.0 * gate_depolarizing; }
  double eps_prep() const { return 0.5 * prep_depolarizing; }
};

enum class SimMode { pure, density };

// Statevector run of the whole scheme: appends fresh qubits in their
// declared states (which must be pure), applies every gate layer in order.
// Noiseless by construction and refuses schemes that discard ancillas.
// Live-qubit cap 20.
PureState run_schrodinger_pure(const InteractionScheme& scheme);

// Density-matrix run with optional noise; discards become partial traces.
// Live-qubit cap 12. trace_out_bath drops bath qubits from the final state.
DensityState run_schrodinger_density(const InteractionScheme& scheme,
                                     const std::optional<NoiseModel>& noise,
                                     bool trace_out_bath = false);

// Unified entry point. Pure mode runs the statevector path and densifies the
// final projector, so its output must also fit the density cap; call
// run_schrodinger_pure directly for statevector-scale registers. Noise
// requires density mode.
DensityState run_schrodinger(const InteractionScheme& scheme,
                             const std::optional<NoiseModel>& noise, SimMode mode,
                             bool trace_out_bath = false);

// tr(rho O) with O embedded by qubit id; requires observable support inside
// the state roster. The imaginary residual must stay below 1e-10.
double expectation(const DensityState& state, const HeisenbergOperator& obs);
double expectation(const PureState& state, const HeisenbergOperator& obs);

// Adjoint (Heisenberg) evolution of an observable at the final iteration
// back to iteration down_to. Per iteration, discarded ancillas re-enter as
// identity (represented lazily), gates conjugate in reverse layer order and
// grow the dense support when they straddle its boundary, and the fresh
// qubits of that iteration are contracted with their declared states.
// Qubits acting as identity (to 1e-12 max entry) are trimmed after each
// iteration. The dense support is capped at 12 qubits.
HeisenbergOperator heisenberg_evolve(const InteractionScheme& scheme,
                                     const HeisenbergOperator& observable, int down_to);

// delta = (lambda_max - lambda_min)/2 and the minimizing shift
// c_opt = (lambda_max + lambda_min)/2 of || O - c 1 ||_inf over real c.
struct SpectralSpread {
  double delta = 0.0;
  double c_opt = 0.0;
};

SpectralSpread spectral_spread(const HeisenbergOperator& op);

// Partial trace onto `keep` (by qubit id, must be a nonempty subset of the
// roster). Trace preserved to 1e-12.
DensityState partial_trace(const DensityState& state, const std::vector<QubitId>& keep);

// Runs an effective (cone-restricted) circuit. The pure runner takes the
// boundary qubits' initial states from the scheme, so the circuit must not
// carry an explicit boundary_state and must not discard; cap 20.
PureState run_effective_pure(const InteractionScheme& scheme, const EffectiveCircuit& circuit);

// Density runner: starts from circuit.boundary_state, or the maximally
// mixed state on the boundary when absent; cap 12.
DensityState run_effective_density(const EffectiveCircuit& circuit,
                                   const std::optional<NoiseModel>& noise = std::nullopt);

// JSON: {"support": [ids], "matrix": [[re, im], ...]} with the matrix
// row-major over the support. parse_observable validates Hermiticity and
// stamps the given iteration.
std::string serialize_observable(const HeisenbergOperator& obs);
HeisenbergOperator parse_observable(const std::string& text, int iteration);

// JSON: {"roster": [ids], "matrix": [[re, im], ...]} row-major.
std::string serialize_state(const DensityState& state);

}  // namespace conecraft
