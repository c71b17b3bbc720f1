#include "conecraft/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "conecraft/kernels.hpp"

namespace conecraft {

namespace {

std::uint64_t insert_bit(std::uint64_t x, unsigned b, std::uint64_t v) {
  const std::uint64_t low = x & ((std::uint64_t{1} << b) - 1);
  return ((x >> b) << (b + 1)) | (v << b) | low;
}

int find_position(const std::vector<QubitId>& roster, QubitId q) {
  auto it = std::lower_bound(roster.begin(), roster.end(), q);
  if (it == roster.end() || *it != q) return -1;
  return static_cast<int>(it - roster.begin());
}

unsigned position_or_fail(const std::vector<QubitId>& roster, QubitId q) {
  int p = find_position(roster, q);
  if (p < 0) fail(ErrorKind::verify, "internal: qubit " + std::to_string(q) + " missing from the register");
  return static_cast<unsigned>(p);
}

// Scatter the low bits of x into the listed bit positions (ascending).
std::uint64_t deposit(std::uint64_t x, const std::vector<unsigned>& bits) {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) out |= ((x >> i) & 1u) << bits[i];
  return out;
}

// Partial trace of a flat row-major 2^n x 2^n matrix over the given roster
// positions; kept qubits keep their relative order.
std::vector<cx> flat_trace_out(const std::vector<cx>& flat, unsigned n,
                               std::vector<unsigned> drop_positions) {
  std::sort(drop_positions.begin(), drop_positions.end());
  const unsigned nd = static_cast<unsigned>(drop_positions.size());
  const unsigned m = n - nd;
  std::vector<unsigned> drop_bits, keep_bits;
  for (unsigned b = 0; b < n; ++b) {
    const unsigned pos = n - 1 - b;
    if (std::binary_search(drop_positions.begin(), drop_positions.end(), pos))
      drop_bits.push_back(b);
    else
      keep_bits.push_back(b);
  }
  const std::uint64_t dm = std::uint64_t{1} << m;
  const std::uint64_t dd = std::uint64_t{1} << nd;
  const std::uint64_t dn = std::uint64_t{1} << n;
  std::vector<cx> out(dm * dm);
  for (std::uint64_t r = 0; r < dm; ++r) {
    const std::uint64_t base_r = deposit(r, keep_bits);
    for (std::uint64_t c = 0; c < dm; ++c) {
      const std::uint64_t base_c = deposit(c, keep_bits);
      cx s(0.0, 0.0);
      for (std::uint64_t k = 0; k < dd; ++k) {
        const std::uint64_t e = deposit(k, drop_bits);
        s += flat[(base_r | e) * dn + (base_c | e)];
      }
      out[r * dm + c] = s;
    }
  }
  return out;
}

cx flat_trace(const std::vector<cx>& flat, unsigned n) {
  const std::uint64_t d = std::uint64_t{1} << n;
  cx s(0.0, 0.0);
  for (std::uint64_t i = 0; i < d; ++i) s += flat[i * d + i];
  return s;
}

std::array<cx, 2> ket_from_density(const std::array<cx, 4>& sigma, QubitId id) {
  if (sigma == kKetZeroState) return {cx(1.0, 0.0), cx(0.0, 0.0)};
  Mat s(2, 2);
  s << sigma[0], sigma[1], sigma[2], sigma[3];
  Eigen::SelfAdjointEigenSolver<Mat> es((s + s.adjoint()) * 0.5);
  if (es.eigenvalues()(1) < 1.0 - 1e-10)
    fail(ErrorKind::validation,
         "pure mode requires pure initial states; qubit " + std::to_string(id) + " is mixed");
  Vec v = es.eigenvectors().col(1);
  // deterministic global phase: largest-modulus entry made real nonnegative
  const int imax = std::abs(v(0)) >= std::abs(v(1)) ? 0 : 1;
  const cx z = v(imax);
  const double az = std::abs(z);
  if (az > 0.0) v *= std::conj(z) / az;
  return {v(0), v(1)};
}

std::array<cx, 4> depolarize_prep(const std::array<cx, 4>& sigma, double q) {
  if (q <= 0.0) return sigma;
  std::array<cx, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = (1.0 - q) * sigma[i];
  out[0] += 0.5 * q;
  out[3] += 0.5 * q;
  return out;
}

struct PureEngine {
  std::vector<QubitId> roster;
  std::vector<cx> amps{cx(1.0, 0.0)};

  void append(QubitId q, const std::array<cx, 2>& ket, int iteration) {
    if (roster.size() + 1 > static_cast<std::size_t>(kPureQubitCap))
      fail(ErrorKind::cap, "pure-mode register would exceed " + std::to_string(kPureQubitCap) +
                               " qubits at iteration " + std::to_string(iteration));
    const std::size_t n = roster.size();
    const std::size_t pos =
        static_cast<std::size_t>(std::lower_bound(roster.begin(), roster.end(), q) - roster.begin());
    const unsigned b = static_cast<unsigned>(n - pos);
    std::vector<cx> next(amps.size() * 2);
    for (std::uint64_t x = 0; x < amps.size(); ++x) {
      next[insert_bit(x, b, 0)] = amps[x] * ket[0];
      next[insert_bit(x, b, 1)] = amps[x] * ket[1];
    }
    amps = std::move(next);
    roster.insert(roster.begin() + static_cast<std::ptrdiff_t>(pos), q);
  }

  void apply(QubitId a, QubitId b, const std::array<cx, 16>& m) {
    const unsigned n = static_cast<unsigned>(roster.size());
    const unsigned pa = position_or_fail(roster, a);
    const unsigned pb = position_or_fail(roster, b);
    kernels::apply_gate2(amps.data(), n, n - 1 - pa, n - 1 - pb, m.data());
  }
};

struct DensityEngine {
  std::vector<QubitId> roster;
  std::vector<cx> flat{cx(1.0, 0.0)};  // row-major 2^n x 2^n

  void append(QubitId q, const std::array<cx, 4>& sigma, int iteration) {
    if (roster.size() + 1 > static_cast<std::size_t>(kDensityQubitCap))
      fail(ErrorKind::cap, "density-mode register would exceed " + std::to_string(kDensityQubitCap) +
                               " qubits at iteration " + std::to_string(iteration));
    const std::size_t n = roster.size();
    const std::uint64_t d = std::uint64_t{1} << n;
    const std::uint64_t d2 = d << 1;
    const std::size_t pos =
        static_cast<std::size_t>(std::lower_bound(roster.begin(), roster.end(), q) - roster.begin());
    const unsigned b = static_cast<unsigned>(n - pos);
    std::vector<cx> next(d2 * d2);
    for (std::uint64_t r = 0; r < d; ++r) {
      for (std::uint64_t c = 0; c < d; ++c) {
        const cx v = flat[r * d + c];
        for (unsigned j = 0; j < 2; ++j)
          for (unsigned i = 0; i < 2; ++i)
            next[insert_bit(r, b, j) * d2 + insert_bit(c, b, i)] = v * sigma[j * 2 + i];
      }
    }
    flat = std::move(next);
    roster.insert(roster.begin() + static_cast<std::ptrdiff_t>(pos), q);
  }

  void apply(QubitId a, QubitId b, const std::array<cx, 16>& m) {
    const unsigned n = static_cast<unsigned>(roster.size());
    const unsigned pa = position_or_fail(roster, a);
    const unsigned pb = position_or_fail(roster, b);
    std::array<cx, 16> mc;
    for (int i = 0; i < 16; ++i) mc[i] = std::conj(m[i]);
    kernels::apply_gate2(flat.data(), 2 * n, n + (n - 1 - pa), n + (n - 1 - pb), m.data());
    kernels::apply_gate2(flat.data(), 2 * n, n - 1 - pa, n - 1 - pb, mc.data());
  }

  // (1-p) rho + p tr_ab(rho) (x) I/4 on the pair (a, b).
  void depolarize(QubitId a, QubitId b, double p) {
    if (p <= 0.0) return;
    const unsigned n = static_cast<unsigned>(roster.size());
    const unsigned pa = position_or_fail(roster, a);
    const unsigned pb = position_or_fail(roster, b);
    const std::vector<cx> red = flat_trace_out(flat, n, {pa, pb});
    const unsigned ba = n - 1 - pa;
    const unsigned bb = n - 1 - pb;
    const unsigned hi = std::max(ba, bb), lo = std::min(ba, bb);
    const std::uint64_t dn = std::uint64_t{1} << n;
    const std::uint64_t dm = dn >> 2;
    auto strip = [hi, lo](std::uint64_t x) {
      const std::uint64_t no_hi = ((x >> (hi + 1)) << hi) | (x & ((std::uint64_t{1} << hi) - 1));
      return ((no_hi >> (lo + 1)) << lo) | (no_hi & ((std::uint64_t{1} << lo) - 1));
    };
    for (std::uint64_t r = 0; r < dn; ++r) {
      const bool r_a = (r >> ba) & 1, r_b = (r >> bb) & 1;
      const std::uint64_t rs = strip(r);
      for (std::uint64_t c = 0; c < dn; ++c) {
        cx v = (1.0 - p) * flat[r * dn + c];
        if (r_a == (((c >> ba) & 1) != 0) && r_b == (((c >> bb) & 1) != 0))
          v += (0.25 * p) * red[rs * dm + strip(c)];
        flat[r * dn + c] = v;
      }
    }
  }

  void discard(const std::vector<QubitId>& ids) {
    if (ids.empty()) return;
    std::vector<unsigned> drop;
    drop.reserve(ids.size());
    for (QubitId q : ids) drop.push_back(position_or_fail(roster, q));
    flat = flat_trace_out(flat, static_cast<unsigned>(roster.size()), drop);
    std::sort(drop.begin(), drop.end());
    for (auto it = drop.rbegin(); it != drop.rend(); ++it)
      roster.erase(roster.begin() + static_cast<std::ptrdiff_t>(*it));
  }
};

void require_finalized(const InteractionScheme& scheme) {
  if (scheme.live_after.size() != static_cast<std::size_t>(scheme.T) + 1)
    fail(ErrorKind::usage, "scheme must be finalized (call check_and_finalize)");
}

// The register peaks right after the appends of iteration t, i.e. at |V_t|.
// Checking up front keeps cap failures from allocating anything large.
void check_register_cap(const InteractionScheme& scheme, std::size_t cap, const char* mode) {
  for (int t = 0; t <= scheme.T; ++t) {
    const std::size_t peak = scheme.vertices[static_cast<std::size_t>(t)].size();
    if (peak > cap)
      fail(ErrorKind::cap, "iteration " + std::to_string(t) + " holds " + std::to_string(peak) +
                               " live qubits, above the " + mode + " cap of " + std::to_string(cap));
  }
}

void check_circuit_cap(const EffectiveCircuit& circuit, std::size_t cap, const char* mode) {
  std::size_t count = circuit.boundary.size();
  if (count > cap)
    fail(ErrorKind::cap, "boundary of " + std::to_string(count) + " qubits exceeds the " + mode +
                             " cap of " + std::to_string(cap));
  for (const CircuitStep& step : circuit.steps) {
    count += step.fresh.size();
    if (count > cap)
      fail(ErrorKind::cap, "iteration " + std::to_string(step.iteration) + " holds " +
                               std::to_string(count) + " live qubits, above the " + mode +
                               " cap of " + std::to_string(cap));
    count -= step.discards.size();
  }
}

}  // namespace

PureState run_schrodinger_pure(const InteractionScheme& scheme) {
  require_finalized(scheme);
  check_register_cap(scheme, kPureQubitCap, "pure-mode");
  PureEngine eng;
  for (int t = 0; t <= scheme.T; ++t) {
    const IterationSpec& it = scheme.iterations[static_cast<std::size_t>(t)];
    if (t == 0)
      for (int bq = 0; bq < scheme.bath_size; ++bq)
        eng.append(bq, ket_from_density(scheme.bath_states[static_cast<std::size_t>(bq)], bq), t);
    for (const NewQubit& nq : it.new_system) eng.append(nq.id, ket_from_density(nq.state, nq.id), t);
    for (const NewQubit& nq : it.new_ancillas) eng.append(nq.id, ket_from_density(nq.state, nq.id), t);
    for (const auto& layer : it.layers)
      for (const LayerGate& g : layer) eng.apply(g.a, g.b, g.gate.matrix);
    if (!it.discards.empty())
      fail(ErrorKind::validation,
           "pure mode cannot trace out ancillas (iteration " + std::to_string(t) + "); use density mode");
  }
  return PureState{std::move(eng.roster), std::move(eng.amps)};
}

DensityState run_schrodinger_density(const InteractionScheme& scheme,
                                     const std::optional<NoiseModel>& noise, bool trace_out_bath) {
  require_finalized(scheme);
  const double p = noise ? noise->gate_depolarizing : 0.0;
  const double q = noise ? noise->prep_depolarizing : 0.0;
  if (p < 0.0 || p > 1.0 || q < 0.0 || q > 1.0)
    fail(ErrorKind::validation, "noise probabilities must lie in [0, 1]");
  check_register_cap(scheme, kDensityQubitCap, "density-mode");
  DensityEngine eng;
  for (int t = 0; t <= scheme.T; ++t) {
    const IterationSpec& it = scheme.iterations[static_cast<std::size_t>(t)];
    if (t == 0)
      for (int bq = 0; bq < scheme.bath_size; ++bq)
        eng.append(bq, depolarize_prep(scheme.bath_states[static_cast<std::size_t>(bq)], q), t);
    for (const NewQubit& nq : it.new_system) eng.append(nq.id, depolarize_prep(nq.state, q), t);
    for (const NewQubit& nq : it.new_ancillas) eng.append(nq.id, depolarize_prep(nq.state, q), t);
    for (const auto& layer : it.layers) {
      for (const LayerGate& g : layer) {
        eng.apply(g.a, g.b, g.gate.matrix);
        eng.depolarize(g.a, g.b, p);
      }
    }
    eng.discard(it.discards);
  }
  if (trace_out_bath) {
    std::vector<QubitId> drop_ids;
    for (QubitId q2 : eng.roster)
      if (q2 < scheme.bath_size) drop_ids.push_back(q2);
    if (drop_ids.size() == eng.roster.size())
      fail(ErrorKind::validation, "tracing out the bath leaves an empty register");
    eng.discard(drop_ids);
  }
  const cx tr = flat_trace(eng.flat, static_cast<unsigned>(eng.roster.size()));
  if (std::abs(tr - cx(1.0, 0.0)) > 1e-10)
    fail(ErrorKind::verify, "density run lost trace: " + format_g17(std::abs(tr - cx(1.0, 0.0))));
  const int dim = 1 << eng.roster.size();
  return DensityState{std::move(eng.roster), mat_from_flat(eng.flat, dim)};
}

DensityState run_schrodinger(const InteractionScheme& scheme, const std::optional<NoiseModel>& noise,
                             SimMode mode, bool trace_out_bath) {
  if (mode == SimMode::density) return run_schrodinger_density(scheme, noise, trace_out_bath);
  if (noise.has_value()) fail(ErrorKind::validation, "noise requires density mode");
  PureState psi = run_schrodinger_pure(scheme);
  const std::size_t n = psi.roster.size();
  if (n > static_cast<std::size_t>(kDensityQubitCap))
    fail(ErrorKind::cap, "final register of " + std::to_string(n) +
                             " qubits cannot be densified; use run_schrodinger_pure");
  const std::uint64_t d = std::uint64_t{1} << n;
  std::vector<cx> flat(d * d);
  for (std::uint64_t r = 0; r < d; ++r)
    for (std::uint64_t c = 0; c < d; ++c) flat[r * d + c] = psi.amplitudes[r] * std::conj(psi.amplitudes[c]);
  DensityState rho{std::move(psi.roster), mat_from_flat(flat, static_cast<int>(d))};
  if (trace_out_bath) {
    std::vector<QubitId> keep;
    for (QubitId q : rho.roster)
      if (q >= scheme.bath_size) keep.push_back(q);
    if (keep.empty()) fail(ErrorKind::validation, "tracing out the bath leaves an empty register");
    rho = partial_trace(rho, keep);
  }
  return rho;
}

namespace {

// tr(rho O) for a flat row-major Hermitian rho over exactly obs.support.
double traced_expectation(const std::vector<cx>& rho_flat, const HeisenbergOperator& obs) {
  const std::size_t m = obs.support.size();
  const std::uint64_t dm = std::uint64_t{1} << m;
  if (obs.matrix.rows() != static_cast<Eigen::Index>(dm) ||
      obs.matrix.cols() != static_cast<Eigen::Index>(dm))
    fail(ErrorKind::validation, "observable matrix size does not match its support");
  std::vector<cx> o_flat(dm * dm);
  mat_to_flat(obs.matrix, o_flat);
  const cx val = kernels::cdot_conj(rho_flat.data(), o_flat.data(), rho_flat.size());
  if (std::abs(val.imag()) > 1e-10)
    fail(ErrorKind::verify, "expectation has imaginary residual " + format_g17(val.imag()));
  return val.real();
}

}  // namespace

double expectation(const DensityState& state, const HeisenbergOperator& obs) {
  const unsigned n = static_cast<unsigned>(state.roster.size());
  std::vector<bool> keep_pos(n, false);
  for (QubitId q : obs.support) {
    const int p = find_position(state.roster, q);
    if (p < 0)
      fail(ErrorKind::validation,
           "observable support qubit " + std::to_string(q) + " is not in the state roster");
    keep_pos[static_cast<std::size_t>(p)] = true;
  }
  std::vector<unsigned> drop;
  for (unsigned p = 0; p < n; ++p)
    if (!keep_pos[p]) drop.push_back(p);
  const std::uint64_t dn = std::uint64_t{1} << n;
  std::vector<cx> flat(dn * dn);
  mat_to_flat(state.matrix, flat);
  if (!drop.empty()) flat = flat_trace_out(flat, n, drop);
  return traced_expectation(flat, obs);
}

double expectation(const PureState& state, const HeisenbergOperator& obs) {
  const unsigned n = static_cast<unsigned>(state.roster.size());
  const std::size_t m = obs.support.size();
  if (m > static_cast<std::size_t>(kDensityQubitCap))
    fail(ErrorKind::cap, "observable support exceeds " + std::to_string(kDensityQubitCap) + " qubits");
  std::vector<unsigned> bits(m);  // state-index bit of support[j]
  for (std::size_t j = 0; j < m; ++j) {
    const int p = find_position(state.roster, obs.support[j]);
    if (p < 0)
      fail(ErrorKind::validation,
           "observable support qubit " + std::to_string(obs.support[j]) + " is not in the state roster");
    bits[j] = n - 1 - static_cast<unsigned>(p);
  }
  const std::uint64_t dm = std::uint64_t{1} << m;
  const std::uint64_t dn = std::uint64_t{1} << n;
  std::uint64_t mask = 0;
  for (unsigned b : bits) mask |= std::uint64_t{1} << b;
  auto scatter = [&](std::uint64_t i) {
    std::uint64_t out = 0;
    for (std::size_t j = 0; j < m; ++j) out |= ((i >> (m - 1 - j)) & 1u) << bits[j];
    return out;
  };
  std::vector<cx> rho(dm * dm, cx(0.0, 0.0));
  for (std::uint64_t x = 0; x < dn; ++x) {
    std::uint64_t i = 0;
    for (std::size_t j = 0; j < m; ++j) i |= ((x >> bits[j]) & 1u) << (m - 1 - j);
    const std::uint64_t base = x & ~mask;
    for (std::uint64_t i2 = 0; i2 < dm; ++i2)
      rho[i * dm + i2] += state.amplitudes[x] * std::conj(state.amplitudes[base | scatter(i2)]);
  }
  return traced_expectation(rho, obs);
}

namespace {

void heisenberg_grow(std::vector<QubitId>& supp, std::vector<cx>& flat, QubitId q, int iteration) {
  if (supp.size() + 1 > static_cast<std::size_t>(kDensityQubitCap))
    fail(ErrorKind::cap, "Heisenberg support would exceed " + std::to_string(kDensityQubitCap) +
                             " qubits at iteration " + std::to_string(iteration));
  const std::size_t m = supp.size();
  const std::uint64_t dm = std::uint64_t{1} << m;
  const std::uint64_t d2 = dm << 1;
  const std::size_t pos =
      static_cast<std::size_t>(std::lower_bound(supp.begin(), supp.end(), q) - supp.begin());
  const unsigned b = static_cast<unsigned>(m - pos);
  std::vector<cx> next(d2 * d2, cx(0.0, 0.0));
  for (std::uint64_t r = 0; r < dm; ++r)
    for (std::uint64_t c = 0; c < dm; ++c) {
      const cx v = flat[r * dm + c];
      next[insert_bit(r, b, 0) * d2 + insert_bit(c, b, 0)] = v;
      next[insert_bit(r, b, 1) * d2 + insert_bit(c, b, 1)] = v;
    }
  flat = std::move(next);
  supp.insert(supp.begin() + static_cast<std::ptrdiff_t>(pos), q);
}

void heisenberg_gate(std::vector<QubitId>& supp, std::vector<cx>& flat, const LayerGate& g) {
  const unsigned n = static_cast<unsigned>(supp.size());
  const unsigned pa = position_or_fail(supp, g.a);
  const unsigned pb = position_or_fail(supp, g.b);
  std::array<cx, 16> adj, trp;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      adj[static_cast<std::size_t>(i * 4 + j)] = std::conj(g.gate.matrix[static_cast<std::size_t>(j * 4 + i)]);
      trp[static_cast<std::size_t>(i * 4 + j)] = g.gate.matrix[static_cast<std::size_t>(j * 4 + i)];
    }
  kernels::apply_gate2(flat.data(), 2 * n, n + (n - 1 - pa), n + (n - 1 - pb), adj.data());
  kernels::apply_gate2(flat.data(), 2 * n, n - 1 - pa, n - 1 - pb, trp.data());
}

// O <- tr_fresh[(1 (x) sigma_fresh) O]: the partial expectation over a fresh
// qubit in state sigma.
void heisenberg_contract(std::vector<QubitId>& supp, std::vector<cx>& flat, QubitId q,
                         const std::array<cx, 4>& sigma) {
  const std::size_t m = supp.size();
  const unsigned p = position_or_fail(supp, q);
  const unsigned b = static_cast<unsigned>(m - 1 - p);
  const std::uint64_t dm = std::uint64_t{1} << m;
  const std::uint64_t dr = dm >> 1;
  std::vector<cx> next(dr * dr);
  for (std::uint64_t r = 0; r < dr; ++r)
    for (std::uint64_t c = 0; c < dr; ++c) {
      cx s(0.0, 0.0);
      for (unsigned i = 0; i < 2; ++i)
        for (unsigned j = 0; j < 2; ++j)
          s += sigma[i * 2 + j] * flat[insert_bit(r, b, j) * dm + insert_bit(c, b, i)];
      next[r * dr + c] = s;
    }
  flat = std::move(next);
  supp.erase(supp.begin() + p);
}

// Removes every qubit on which the operator acts as identity to kTrimTol.
void heisenberg_trim(std::vector<QubitId>& supp, std::vector<cx>& flat) {
  bool again = true;
  while (again && !supp.empty()) {
    again = false;
    for (std::size_t p = 0; p < supp.size(); ++p) {
      const std::size_t m = supp.size();
      const unsigned b = static_cast<unsigned>(m - 1 - p);
      const std::uint64_t dm = std::uint64_t{1} << m;
      const std::uint64_t dr = dm >> 1;
      std::vector<cx> half(dr * dr);
      double defect = 0.0;
      for (std::uint64_t r = 0; r < dr; ++r)
        for (std::uint64_t c = 0; c < dr; ++c)
          half[r * dr + c] = 0.5 * (flat[insert_bit(r, b, 0) * dm + insert_bit(c, b, 0)] +
                                    flat[insert_bit(r, b, 1) * dm + insert_bit(c, b, 1)]);
      for (std::uint64_t r = 0; r < dr && defect <= kTrimTol; ++r)
        for (std::uint64_t c = 0; c < dr; ++c) {
          const cx h = half[r * dr + c];
          for (unsigned i = 0; i < 2; ++i)
            for (unsigned j = 0; j < 2; ++j) {
              const cx want = (i == j) ? h : cx(0.0, 0.0);
              defect = std::max(defect,
                                std::abs(flat[insert_bit(r, b, j) * dm + insert_bit(c, b, i)] - want));
            }
        }
      if (defect <= kTrimTol) {
        flat = std::move(half);
        supp.erase(supp.begin() + static_cast<std::ptrdiff_t>(p));
        again = true;
        break;
      }
    }
  }
}

}  // namespace

HeisenbergOperator heisenberg_evolve(const InteractionScheme& scheme,
                                     const HeisenbergOperator& observable, int down_to) {
  require_finalized(scheme);
  const int T = scheme.T;
  if (down_to < 0 || down_to > T) fail(ErrorKind::usage, "down_to must lie in [0, T]");
  if (observable.iteration != T)
    fail(ErrorKind::validation, "heisenberg_evolve starts from an observable at the final iteration");
  if (!std::is_sorted(observable.support.begin(), observable.support.end()) ||
      std::adjacent_find(observable.support.begin(), observable.support.end()) !=
          observable.support.end())
    fail(ErrorKind::validation, "observable support must be strictly ascending");
  const auto& finals = scheme.live_after[static_cast<std::size_t>(T)];
  for (QubitId q : observable.support)
    if (!std::binary_search(finals.begin(), finals.end(), q))
      fail(ErrorKind::validation,
           "observable support qubit " + std::to_string(q) + " is not a final-state qubit");
  const std::uint64_t dm = std::uint64_t{1} << observable.support.size();
  if (observable.matrix.rows() != static_cast<Eigen::Index>(dm) ||
      observable.matrix.cols() != static_cast<Eigen::Index>(dm))
    fail(ErrorKind::validation, "observable matrix size does not match its support");
  if ((observable.matrix - observable.matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    fail(ErrorKind::validation, "observable matrix is not Hermitian");

  std::vector<QubitId> supp = observable.support;
  std::vector<cx> flat(dm * dm);
  mat_to_flat(observable.matrix, flat);

  for (int k = T; k > down_to; --k) {
    const IterationSpec& it = scheme.iterations[static_cast<std::size_t>(k)];
    // discard adjoints tensor identity on the ancillas; nothing to do until a
    // gate pulls one of them into the dense support
    for (auto layer = it.layers.rbegin(); layer != it.layers.rend(); ++layer) {
      for (auto g = layer->rbegin(); g != layer->rend(); ++g) {
        const bool ina = find_position(supp, g->a) >= 0;
        const bool inb = find_position(supp, g->b) >= 0;
        if (!ina && !inb) continue;
        if (!ina) heisenberg_grow(supp, flat, g->a, k);
        if (!inb) heisenberg_grow(supp, flat, g->b, k);
        heisenberg_gate(supp, flat, *g);
      }
    }
    for (const NewQubit& nq : it.new_system)
      if (find_position(supp, nq.id) >= 0) heisenberg_contract(supp, flat, nq.id, nq.state);
    for (const NewQubit& nq : it.new_ancillas)
      if (find_position(supp, nq.id) >= 0) heisenberg_contract(supp, flat, nq.id, nq.state);
    heisenberg_trim(supp, flat);
  }

  const int dim = 1 << supp.size();
  Mat matrix = mat_from_flat(flat, dim);
  return HeisenbergOperator{std::move(supp), std::move(matrix), down_to};
}

SpectralSpread spectral_spread(const HeisenbergOperator& op) {
  const Eigen::VectorXd evs = hermitian_eigenvalues(op.matrix);
  const double lo = evs(0), hi = evs(evs.size() - 1);
  return SpectralSpread{(hi - lo) * 0.5, (hi + lo) * 0.5};
}

DensityState partial_trace(const DensityState& state, const std::vector<QubitId>& keep) {
  if (keep.empty()) fail(ErrorKind::validation, "partial trace needs a nonempty keep set");
  std::vector<QubitId> kept = keep;
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  const unsigned n = static_cast<unsigned>(state.roster.size());
  std::vector<bool> keep_pos(n, false);
  for (QubitId q : kept) {
    const int p = find_position(state.roster, q);
    if (p < 0)
      fail(ErrorKind::validation, "keep qubit " + std::to_string(q) + " is not in the state roster");
    keep_pos[static_cast<std::size_t>(p)] = true;
  }
  std::vector<unsigned> drop;
  for (unsigned p = 0; p < n; ++p)
    if (!keep_pos[p]) drop.push_back(p);
  const std::uint64_t dn = std::uint64_t{1} << n;
  std::vector<cx> flat(dn * dn);
  mat_to_flat(state.matrix, flat);
  const cx tr_in = flat_trace(flat, n);
  std::vector<cx> out = drop.empty() ? std::move(flat) : flat_trace_out(flat, n, drop);
  const unsigned m = n - static_cast<unsigned>(drop.size());
  const cx tr_out = flat_trace(out, m);
  if (std::abs(tr_in - tr_out) > 1e-12)
    fail(ErrorKind::verify, "partial trace changed the trace by " + format_g17(std::abs(tr_in - tr_out)));
  return DensityState{std::move(kept), mat_from_flat(out, 1 << m)};
}

PureState run_effective_pure(const InteractionScheme& scheme, const EffectiveCircuit& circuit) {
  require_finalized(scheme);
  if (circuit.boundary_state.has_value())
    fail(ErrorKind::validation,
         "pure effective runs take boundary states from the scheme; explicit boundary states are "
         "density-only");
  check_circuit_cap(circuit, kPureQubitCap, "pure-mode");
  PureEngine eng;
  for (QubitId q : circuit.boundary) {
    auto it = scheme.qubits.find(q);
    if (it == scheme.qubits.end())
      fail(ErrorKind::validation, "boundary qubit " + std::to_string(q) + " is not in the scheme");
    eng.append(q, ket_from_density(it->second.initial_state, q), circuit.from_iteration);
  }
  for (const CircuitStep& step : circuit.steps) {
    for (const NewQubit& nq : step.fresh) eng.append(nq.id, ket_from_density(nq.state, nq.id), step.iteration);
    for (const CircuitOp& op : step.gates) eng.apply(op.a, op.b, op.matrix);
    if (!step.discards.empty())
      fail(ErrorKind::validation, "pure mode cannot trace out ancillas (iteration " +
                                      std::to_string(step.iteration) + "); use density mode");
  }
  return PureState{std::move(eng.roster), std::move(eng.amps)};
}

DensityState run_effective_density(const EffectiveCircuit& circuit,
                                   const std::optional<NoiseModel>& noise) {
  const double p = noise ? noise->gate_depolarizing : 0.0;
  const double q = noise ? noise->prep_depolarizing : 0.0;
  if (p < 0.0 || p > 1.0 || q < 0.0 || q > 1.0)
    fail(ErrorKind::validation, "noise probabilities must lie in [0, 1]");
  check_circuit_cap(circuit, kDensityQubitCap, "density-mode");
  const std::size_t b = circuit.boundary.size();
  DensityEngine eng;
  eng.roster = circuit.boundary;
  const std::uint64_t db = std::uint64_t{1} << b;
  if (circuit.boundary_state.has_value()) {
    const Mat& rho = *circuit.boundary_state;
    if (rho.rows() != static_cast<Eigen::Index>(db) || rho.cols() != static_cast<Eigen::Index>(db))
      fail(ErrorKind::validation, "boundary state dimension does not match the boundary");
    if (std::abs(rho.trace() - cx(1.0, 0.0)) > 1e-10)
      fail(ErrorKind::validation, "boundary state must have unit trace");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
      fail(ErrorKind::validation, "boundary state must be Hermitian");
    eng.flat.assign(db * db, cx(0.0, 0.0));
    mat_to_flat(rho, eng.flat);
  } else {
    eng.flat.assign(db * db, cx(0.0, 0.0));
    const double w = 1.0 / static_cast<double>(db);
    for (std::uint64_t i = 0; i < db; ++i) eng.flat[i * db + i] = cx(w, 0.0);
  }
  for (const CircuitStep& step : circuit.steps) {
    for (const NewQubit& nq : step.fresh) eng.append(nq.id, depolarize_prep(nq.state, q), step.iteration);
    for (const CircuitOp& op : step.gates) {
      eng.apply(op.a, op.b, op.matrix);
      eng.depolarize(op.a, op.b, p);
    }
    eng.discard(step.discards);
  }
  const cx tr = flat_trace(eng.flat, static_cast<unsigned>(eng.roster.size()));
  if (std::abs(tr - cx(1.0, 0.0)) > 1e-10)
    fail(ErrorKind::verify, "density run lost trace: " + format_g17(std::abs(tr - cx(1.0, 0.0))));
  const int dim = 1 << eng.roster.size();
  return DensityState{std::move(eng.roster), mat_from_flat(eng.flat, dim)};
}

void check_density_state(const DensityState& state) {
  if (!std::is_sorted(state.roster.begin(), state.roster.end()) ||
      std::adjacent_find(state.roster.begin(), state.roster.end()) != state.roster.end())
    fail(ErrorKind::verify, "state roster must be strictly ascending");
  const std::uint64_t d = std::uint64_t{1} << state.roster.size();
  if (state.matrix.rows() != static_cast<Eigen::Index>(d) ||
      state.matrix.cols() != static_cast<Eigen::Index>(d))
    fail(ErrorKind::verify, "state matrix size does not match its roster");
  if (std::abs(state.matrix.trace() - cx(1.0, 0.0)) > 1e-10)
    fail(ErrorKind::verify, "state trace deviates from 1 by " +
                                format_g17(std::abs(state.matrix.trace() - cx(1.0, 0.0))));
  if ((state.matrix - state.matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    fail(ErrorKind::verify, "state matrix is not Hermitian");
  const Eigen::VectorXd evs = hermitian_eigenvalues(state.matrix);
  if (evs(0) < -1e-9)
    fail(ErrorKind::verify, "state has negative eigenvalue " + format_g17(evs(0)));
}

}  // namespace conecraft
