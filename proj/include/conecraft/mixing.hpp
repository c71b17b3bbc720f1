#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conecraft/rng.hpp"
#include "conecraft/scheme.hpp"
#include "conecraft/sim.hpp"

namespace conecraft {

struct ExponentialFit {
  double amplitude = 0.0;  // c in c * exp(-rate * (T - t))
  double rate = 0.0;
  double residual = 0.0;  // root-mean-square misfit on log delta
};

// Per-observable decay profile delta_O(t) = inf_c ||O_t - c 1||_inf for
// t = t_min..T. Values never increase as t decreases.
struct MixingProfile {
  std::vector<QubitId> support;  // observable support at iteration T
  int t_min = 0;
  int T = 0;
  std::vector<double> delta;  // delta[i] = delta_O(t_min + i)
  std::optional<ExponentialFit> fit;
};

// Sweeps the observable back iteration by iteration and records the spread.
// The tail fit is attempted when every value exceeds 1e-13 and at least four
// points exceed 1e-12 (only those points enter the regression).
MixingProfile mixing_profile(const InteractionScheme& scheme, const HeisenbergOperator& observable,
                             int t_min);

// CSV rows `t, delta, fitted` under a JSON comment header carrying the fit.
std::string profile_to_csv(const MixingProfile& profile);

// Randomized LOWER bound on sup { delta_O(t) : supp O in a radius-<=r ball
// of the final interaction graph, ||O||_inf <= 1 }: the max of delta_O(t)
// over seeded random Pauli strings and sup-normalized GUE observables. The
// true sup is not computable in general; this never overshoots it.
double estimate_delta_sup(const InteractionScheme& scheme, int radius, int t, int num_samples,
                          std::uint64_t seed);

// Bath-to-bath channel of one iteration of a translationally invariant
// MPS-type scheme: rho |-> tr_fresh[U (rho (x) sigma_fresh) U+], as a
// column-stacking superoperator matrix.
struct TransferOperator {
  int bath_qubits = 0;
  Mat superop;                   // 4^b x 4^b
  Mat fixed_point;               // bath state; empty unless mixing
  std::vector<cx> eigenvalues;   // sorted by modulus, descending
  bool mixing = false;           // unique modulus-1 eigenvalue with a valid fixed state
};

TransferOperator build_transfer_operator(const InteractionScheme& scheme);

// norms[n] = ||Lambda^n - Lambda_inf||_{1->1} by exact extreme-point search
// (the supremum over input states is attained at pure states), via
// multi-start polytope minimization; envelope[n] = sqrt(d_B) * sigma_max of
// the superoperator difference, an upper bound that needs no search.
struct MixingTimeBound {
  std::vector<double> norms;     // n = 0..n_max
  std::vector<double> envelope;  // n = 0..n_max
  bool converged = true;         // every search met the 1e-9 tolerance

  // First n with norms[n] <= epsilon; -1 when the horizon never reaches it.
  int t1(double epsilon) const;
};

MixingTimeBound mixing_time_bound(const TransferOperator& op, int n_max);

// cov = tr(rho E F) - tr(rho E) tr(rho F) by exact simulation; t0 is the
// largest t where the traced supports of E and F intersect (-1 when they
// never do, forcing the bound to 0); bound = 6 max(delta_E(t0),
// delta_F(t0)) ||E|| ||F||. The per-observable maximum is a lower bound on
// the radius-based mixing rate, so this check is stricter than the
// covariance statement it verifies.
struct CovarianceResult {
  double covariance = 0.0;
  double bound = 0.0;
  int t0 = -1;
};

CovarianceResult covariance(const InteractionScheme& scheme, const HeisenbergOperator& e,
                            const HeisenbergOperator& f);

enum class CertifyMode { sampled, exact_enumeration };

// Moments of X = tr(sigma O_t) over stabilizer input states form the
// estimator L = sqrt(2^n ((2^n + 1) E(X^2) - 2 E(X)^2)), an upper bound on
// ||O_t - tr(O_t) 1 / 2^n||_inf when the moments are exact.
struct CertificationResult {
  int n_t = 0;              // qubits in the evolved support
  std::int64_t samples = 0;
  double mean_x = 0.0;
  double mean_x2 = 0.0;
  double se_x = 0.0;   // standard errors of the moment estimates
  double se_x2 = 0.0;  // (zero in exact mode)
  double estimator = 0.0;  // L
  double r_exact = 0.0;    // ||O_t - tr(O_t) 1 / 2^n||_inf
  std::vector<std::string> warnings;
};

// Evolves the observable to iteration t, then averages over n_t-qubit
// stabilizer states: the full set in exact mode (n_t <= 2), or num_samples
// uniform draws keyed by (seed, index) in sampled mode (n_t <= 5).
CertificationResult certify_mixing(const InteractionScheme& scheme,
                                   const HeisenbergOperator& observable, int t,
                                   std::int64_t num_samples, std::uint64_t seed, CertifyMode mode);

std::string certification_to_json(const CertificationResult& result);

// All n-qubit stabilizer states as density matrices: every maximal
// commuting independent Pauli family with every sign pattern. 6 states at
// n = 1, 60 at n = 2, 1080 at n = 3 (the enumeration cap).
std::vector<Mat> enumerate_stabilizer_states(int n);

// One uniform draw from the n-qubit stabilizer states, n <= 5.
Mat sample_stabilizer_state(int n, Rng& rng);

}  // namespace conecraft
