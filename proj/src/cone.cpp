#include "conecraft/cone.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace conecraft {

namespace {

std::map<QubitId, std::vector<QubitId>> adjacency(const InteractionScheme& scheme, int t) {
  std::map<QubitId, std::vector<QubitId>> adj;
  for (QubitId v : scheme.vertices[t]) adj[v];
  for (const auto& [a, b] : scheme.iterations[t].edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

std::map<QubitId, int> bfs(const std::map<QubitId, std::vector<QubitId>>& adj, QubitId start) {
  std::map<QubitId, int> dist;
  dist[start] = 0;
  std::deque<QubitId> queue = {start};
  while (!queue.empty()) {
    QubitId v = queue.front();
    queue.pop_front();
    for (QubitId w : adj.at(v))
      if (!dist.count(w)) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
  }
  return dist;
}

}  // namespace

std::optional<int> support_radius(const InteractionScheme& scheme, const std::vector<QubitId>& support,
                                  int t) {
  if (t < 0 || t > scheme.T) fail(ErrorKind::usage, "support_radius: iteration out of range");
  if (support.empty()) fail(ErrorKind::usage, "support_radius: empty support");
  const auto& verts = scheme.vertices[t];
  for (QubitId q : support)
    if (!std::binary_search(verts.begin(), verts.end(), q))
      fail(ErrorKind::validation,
           "support qubit " + std::to_string(q) + " is not a vertex of iteration " + std::to_string(t));

  auto adj = adjacency(scheme, t);
  std::vector<std::map<QubitId, int>> dists;
  for (QubitId s : support) dists.push_back(bfs(adj, s));

  // Pairwise reachability and diameter of the support.
  int diam = 0;
  for (const auto& d : dists)
    for (QubitId s : support) {
      auto found = d.find(s);
      if (found == d.end()) return std::nullopt;  // spans components: no finite ball
      diam = std::max(diam, found->second);
    }

  // The optimal center sits within distance diam of every support vertex.
  int best = INT32_MAX;
  for (const auto& [v, d0] : dists[0]) {
    if (d0 > diam) continue;
    int ecc = 0;
    bool reachable = true;
    for (const auto& d : dists) {
      auto found = d.find(v);
      if (found == d.end()) {
        reachable = false;
        break;
      }
      ecc = std::max(ecc, found->second);
    }
    if (reachable) best = std::min(best, ecc);
  }
  return best;
}

SupportSet make_support(const InteractionScheme& scheme, std::vector<QubitId> qubits) {
  std::sort(qubits.begin(), qubits.end());
  qubits.erase(std::unique(qubits.begin(), qubits.end()), qubits.end());
  SupportSet s;
  s.qubits = std::move(qubits);
  s.radius = support_radius(scheme, s.qubits, scheme.T);
  return s;
}

CausalCone trace_cone(const InteractionScheme& scheme, const std::vector<QubitId>& support, int t) {
  if (t < 0 || t > scheme.T)
    fail(ErrorKind::usage, "trace_cone: iteration " + std::to_string(t) + " out of range");
  if (support.empty()) fail(ErrorKind::usage, "trace_cone: empty support");
  const auto& final_live = scheme.live_after[scheme.T];
  for (QubitId q : support)
    if (!std::binary_search(final_live.begin(), final_live.end(), q))
      fail(ErrorKind::validation,
           "trace_cone: support qubit " + std::to_string(q) + " is not a final-state qubit");

  std::set<QubitId> current(support.begin(), support.end());
  std::set<QubitId> cone_qubits(support.begin(), support.end());

  CausalCone cone;
  cone.from_iteration = t;
  cone.per_iteration.assign(scheme.T - t + 1, {});
  cone.support_trace.assign(scheme.T - t + 1, {});
  for (int k = t; k <= scheme.T; ++k) cone.per_iteration[k - t].iteration = k;

  for (int k = scheme.T; k > t; --k) {
    const IterationSpec& it = scheme.iterations[k];
    cone.support_trace[k - t].assign(current.begin(), current.end());
    auto& entry = cone.per_iteration[k - t];

    // Reverse layer order, reverse declaration order within a layer; layers
    // are partial matchings, so the within-layer order cannot matter.
    for (int l = static_cast<int>(it.layers.size()) - 1; l >= 0; --l) {
      for (int s = static_cast<int>(it.layers[l].size()) - 1; s >= 0; --s) {
        const LayerGate& lg = it.layers[l][s];
        if (current.count(lg.a) || current.count(lg.b)) {
          entry.gates.push_back({k, l, s, lg.a, lg.b});
          current.insert(lg.a);
          current.insert(lg.b);
          cone_qubits.insert(lg.a);
          cone_qubits.insert(lg.b);
        }
      }
    }
    std::sort(entry.gates.begin(), entry.gates.end(), [](const ConeGateRef& x, const ConeGateRef& y) {
      return std::tie(x.layer, x.slot) < std::tie(y.layer, y.slot);
    });
    cone.n_unitaries += static_cast<std::int64_t>(entry.gates.size());

    // Fresh qubits contract against their initial states here (Heisenberg
    // direction); record the ones that belong to the cone.
    auto drop_fresh = [&](const std::vector<NewQubit>& fresh) {
      for (const NewQubit& nq : fresh) {
        if (cone_qubits.count(nq.id)) entry.qubits_entering.push_back(nq.id);
        current.erase(nq.id);
      }
    };
    drop_fresh(it.new_system);
    drop_fresh(it.new_ancillas);
    std::sort(entry.qubits_entering.begin(), entry.qubits_entering.end());
  }

  cone.support_trace[0].assign(current.begin(), current.end());
  cone.boundary = cone.support_trace[0];
  cone.per_iteration[0].qubits_entering = cone.boundary;
  cone.n_qubits = static_cast<std::int64_t>(cone_qubits.size());
  return cone;
}

std::string cone_to_json(const CausalCone& cone) {
  nlohmann::ordered_json j;
  j["from_iteration"] = cone.from_iteration;
  j["N_U"] = cone.n_unitaries;
  j["N_Q"] = cone.n_qubits;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (const ConeIteration& ci : cone.per_iteration) {
    nlohmann::ordered_json e;
    e["iteration"] = ci.iteration;
    nlohmann::ordered_json gates = nlohmann::ordered_json::array();
    for (const ConeGateRef& g : ci.gates) gates.push_back({g.layer, g.slot});
    e["gates"] = std::move(gates);
    e["qubits"] = ci.qubits_entering;
    per.push_back(std::move(e));
  }
  j["per_iteration"] = std::move(per);
  j["support_trace"] = cone.support_trace;
  return j.dump(2) + "\n";
}

EffectiveCircuit extract_effective_circuit(const InteractionScheme& scheme, const CausalCone& cone,
                                           const std::optional<Mat>& boundary_state) {
  EffectiveCircuit ec;
  ec.from_iteration = cone.from_iteration;
  ec.boundary = cone.boundary;
  if (boundary_state) {
    const Eigen::Index dim = Eigen::Index{1} << ec.boundary.size();
    if (boundary_state->rows() != dim || boundary_state->cols() != dim)
      fail(ErrorKind::validation, "effective circuit: boundary state must be " + std::to_string(dim) +
                                      "x" + std::to_string(dim) + " for this cone");
    ec.boundary_state = *boundary_state;
  }

  std::set<QubitId> alive(ec.boundary.begin(), ec.boundary.end());
  for (size_t i = 1; i < cone.per_iteration.size(); ++i) {
    const ConeIteration& ci = cone.per_iteration[i];
    const IterationSpec& it = scheme.iterations[ci.iteration];
    CircuitStep step;
    step.iteration = ci.iteration;
    for (QubitId q : ci.qubits_entering) {
      const QubitInfo& info = scheme.qubits.at(q);
      step.fresh.push_back({q, info.initial_state});
      alive.insert(q);
      if (info.kind == QubitInfo::Kind::ancilla) step.discards.push_back(q);
    }
    for (const ConeGateRef& g : ci.gates)
      step.gates.push_back({g.a, g.b, it.layers[g.layer][g.slot].gate.matrix});
    for (QubitId q : step.discards) alive.erase(q);
    ec.steps.push_back(std::move(step));
  }
  ec.final_qubits.assign(alive.begin(), alive.end());
  return ec;
}

}  // namespace conecraft
