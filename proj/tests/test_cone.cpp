#include <doctest.h>

#include <algorithm>
#include <set>

#include "conecraft/cone.hpp"

using namespace conecraft;

namespace {

GateSource haar_source(std::uint64_t seed) {
  GateSource s;
  s.kind = GateSource::Kind::haar;
  s.seed = seed;
  return s;
}

// Independent replay of the tracing rule, written against the raw iteration
// data in forward loops over reversed copies.
std::pair<std::int64_t, std::int64_t> brute_cone_counts(const InteractionScheme& scheme,
                                                        std::vector<QubitId> support, int t) {
  std::set<QubitId> cur(support.begin(), support.end());
  std::set<QubitId> ever(support.begin(), support.end());
  std::int64_t gates = 0;
  for (int k = scheme.T; k >= t + 1; --k) {
    const auto& it = scheme.iterations[k];
    std::vector<LayerGate> rev;
    for (const auto& layer : it.layers)
      for (const auto& lg : layer) rev.push_back(lg);
    std::reverse(rev.begin(), rev.end());
    for (const auto& lg : rev) {
      if (cur.count(lg.a) || cur.count(lg.b)) {
        ++gates;
        cur.insert(lg.a);
        cur.insert(lg.b);
        ever.insert(lg.a);
        ever.insert(lg.b);
      }
    }
    for (const auto& nq : it.new_system) cur.erase(nq.id);
    for (const auto& nq : it.new_ancillas) cur.erase(nq.id);
  }
  return {gates, static_cast<std::int64_t>(ever.size())};
}

InteractionScheme path_graph_scheme(int n) {
  InteractionScheme s;
  s.T = 1;
  s.D = 1;
  s.bath_size = n;
  s.iterations.resize(2);
  s.iterations[0].index = 0;
  s.iterations[0].layers.assign(1, {});
  s.iterations[1].index = 1;
  for (int i = 0; i + 1 < n; ++i) s.iterations[1].edges.emplace_back(i, i + 1);
  s.iterations[1].layers.assign(1, {});
  s.check_and_finalize();
  return s;
}

}  // namespace

TEST_CASE("support radius on paths") {
  InteractionScheme p8 = path_graph_scheme(8);
  CHECK(support_radius(p8, {3}, 1) == 0);
  CHECK(support_radius(p8, {3, 4}, 1) == 1);
  CHECK(support_radius(p8, {0, 4}, 1) == 2);
  CHECK(support_radius(p8, {0, 7}, 1) == 4);  // center 3 or 4
  CHECK(support_radius(p8, {0, 7}, 0) == std::nullopt);  // no edges at iteration 0

  SupportSet ss = make_support(p8, {4, 0, 4});
  CHECK(ss.qubits == std::vector<QubitId>{0, 4});
  CHECK(ss.radius == 2);
}

TEST_CASE("identity layers give a bare cone") {
  InteractionScheme s = build_mps(4, 2, 1, GateSource{GateSource::Kind::identity, 0, false});
  QubitId last = s.iterations[4].new_system[0].id;
  CausalCone cone = trace_cone(s, {last}, 1);
  CHECK(cone.n_unitaries == 0);
  CHECK(cone.n_qubits == 1);
  CHECK(cone.support_trace.back() == std::vector<QubitId>{last});
  CHECK(cone.boundary.empty());  // the carrier is fresh at iteration 4

  // support on a bath qubit instead: nothing removes it
  CausalCone cone2 = trace_cone(s, {0}, 1);
  CHECK(cone2.n_unitaries == 0);
  CHECK(cone2.n_qubits == 1);
  CHECK(cone2.boundary == std::vector<QubitId>{0});
}

TEST_CASE("dmera cone counts match the brute-force replay and closed-form ceilings") {
  for (std::uint64_t seed : {1u, 2u}) {
    for (int T = 1; T <= 4; ++T) {
      for (int D = 1; D <= 2; ++D) {
        InteractionScheme s = build_dmera(T, D, haar_source(seed));
        const auto& finals = s.live_after[T];
        for (QubitId q : {finals.front(), finals[finals.size() / 2], finals.back()}) {
          for (int t = 0; t <= T; ++t) {
            CausalCone cone = trace_cone(s, {q}, t);
            auto [bg, bq] = brute_cone_counts(s, {q}, t);
            CHECK(cone.n_unitaries == bg);
            CHECK(cone.n_qubits == bq);
            // single site: R = 0; the ceilings cover t < T (at t == T the
            // cone is the bare support, which the closed forms do not count)
            if (t < T) {
              CHECK(cone.n_unitaries <= static_cast<std::int64_t>(T - t) * D * (5 * D + 8));
              CHECK(cone.n_qubits <= 2 * D * (T - t));
            }
          }
        }
      }
    }
  }

  InteractionScheme s31 = build_dmera(3, 1, haar_source(9));
  CausalCone cone = trace_cone(s31, {s31.live_after[3][2]}, 0);
  CHECK(cone.n_unitaries <= 39);  // (T-t) * D * (5D+8) at R=0
}

TEST_CASE("dmera tracked radius obeys the halving recursion") {
  const int T = 5, D = 2;
  InteractionScheme s = build_dmera(T, D, haar_source(17));
  std::vector<QubitId> supp = {s.live_after[T][6], s.live_after[T][7]};
  auto r_final = support_radius(s, supp, T);
  REQUIRE(r_final.has_value());
  const double R = *r_final;
  CausalCone cone = trace_cone(s, supp, 0);
  for (int k = 0; k <= T; ++k) {
    const auto& trace = cone.support_trace[k];
    if (trace.empty()) continue;
    auto rk = support_radius(s, trace, k);
    REQUIRE(rk.has_value());
    const double scale = std::pow(2.0, -(T - k));
    if (k == T) {
      CHECK(*rk == R);
    } else {
      CHECK(*rk <= R * scale + (D + 2) * (2.0 - scale) + 1e-12);
    }
  }
}

TEST_CASE("mps cone from the last site") {
  InteractionScheme s = build_mps(6, 2, 1, haar_source(3));
  QubitId last = s.iterations[6].new_system[0].id;
  CausalCone cone = trace_cone(s, {last}, 4);
  REQUIRE(cone.per_iteration.size() == 3);  // k = 4, 5, 6
  // D = 1 keeps only the even-index path edge (fresh qubit to chain head)
  CHECK(cone.per_iteration[0].gates.empty());
  CHECK(cone.per_iteration[1].gates.size() == 1);
  CHECK(cone.per_iteration[2].gates.size() == 1);
  CHECK(cone.n_unitaries == 2);
  CHECK(cone.n_qubits == 3);  // S_5, S_6, chain head
  // path geometry: N_Q <= C_V (R + (T-t) D)^d with C_V = 2, d = 1
  CHECK(cone.n_qubits <= 2 * (0 + (6 - 4) * 1));
  CHECK(cone.boundary == std::vector<QubitId>{0});
}

TEST_CASE("cone monotonicity in t and support size") {
  InteractionScheme s = build_ri(1, 3, 4, 2, haar_source(23));
  QubitId last = s.iterations[4].new_system[1].id;
  std::int64_t prev_u = -1, prev_q = -1;
  for (int t = s.T; t >= 0; --t) {
    CausalCone cone = trace_cone(s, {last}, t);
    if (prev_u >= 0) {
      CHECK(cone.n_unitaries >= prev_u);
      CHECK(cone.n_qubits >= prev_q);
    }
    prev_u = cone.n_unitaries;
    prev_q = cone.n_qubits;
  }

  // growing the support can only grow the cone
  std::vector<QubitId> small = {last};
  std::vector<QubitId> big = {last, s.iterations[4].new_system[0].id, s.iterations[4].new_system[2].id};
  for (int t = 0; t <= s.T; ++t) {
    CausalCone a = trace_cone(s, small, t);
    CausalCone b = trace_cone(s, big, t);
    CHECK(b.n_unitaries >= a.n_unitaries);
    CHECK(b.n_qubits >= a.n_qubits);
  }
}

TEST_CASE("cone is invariant under within-layer permutations") {
  InteractionScheme s = build_ri(1, 4, 3, 2, haar_source(29));
  InteractionScheme r = s;
  for (auto& it : r.iterations)
    for (auto& layer : it.layers) std::reverse(layer.begin(), layer.end());
  r.check_and_finalize();

  QubitId probe = s.iterations[3].new_system[2].id;
  for (int t = 0; t <= 3; ++t) {
    CausalCone a = trace_cone(s, {probe}, t);
    CausalCone b = trace_cone(r, {probe}, t);
    CHECK(a.n_unitaries == b.n_unitaries);
    CHECK(a.n_qubits == b.n_qubits);
    CHECK(a.support_trace == b.support_trace);
  }
}

TEST_CASE("effective circuit structure") {
  InteractionScheme s = build_mps(5, 1, 1, haar_source(31));
  QubitId last = s.iterations[5].new_system[0].id;
  CausalCone cone = trace_cone(s, {last}, 3);
  EffectiveCircuit ec = extract_effective_circuit(s, cone);
  CHECK(ec.from_iteration == 3);
  CHECK(ec.boundary == std::vector<QubitId>{0});
  CHECK(!ec.boundary_state.has_value());  // default maximally mixed
  REQUIRE(ec.steps.size() == 2);
  CHECK(ec.steps[0].iteration == 4);
  CHECK(ec.steps[0].gates.size() == 1);
  CHECK(ec.steps[1].fresh.size() == 1);
  CHECK(ec.steps[1].fresh[0].id == last);
  // gates carried over bit-exactly from the scheme
  CHECK(ec.steps[1].gates[0].matrix == s.iterations[5].layers[0][0].gate.matrix);
  CHECK(ec.final_qubits == std::vector<QubitId>{0, s.iterations[4].new_system[0].id, last});

  Mat rho = Mat::Zero(2, 2);
  rho(0, 0) = 1.0;
  EffectiveCircuit ec2 = extract_effective_circuit(s, cone, rho);
  CHECK(ec2.boundary_state.has_value());

  Mat bad = Mat::Zero(4, 4);
  CHECK_THROWS_AS(extract_effective_circuit(s, cone, bad), Error);
}

TEST_CASE("cone json export shape") {
  InteractionScheme s = build_mps(3, 1, 1, haar_source(37));
  QubitId last = s.iterations[3].new_system[0].id;
  std::string j = cone_to_json(trace_cone(s, {last}, 1));
  CHECK(j.find("\"from_iteration\": 1") != std::string::npos);
  CHECK(j.find("\"N_U\": 2") != std::string::npos);
  CHECK(j.find("\"support_trace\"") != std::string::npos);
}
