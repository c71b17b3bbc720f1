#include <json.hpp>

#include <algorithm>
#include <map>
#include <set>

#include "conecraft/scheme.hpp"

namespace conecraft {

namespace {

using json = nlohmann::ordered_json;

json complex_to_json(const cx& v) { return json::array({v.real(), v.imag()}); }

json state_to_json(const std::array<cx, 4>& st) {
  json a = json::array();
  for (const cx& v : st) a.push_back(complex_to_json(v));
  return a;
}

bool is_default_state(const std::array<cx, 4>& st) { return st == kKetZeroState; }

json gate_to_json(const Gate& g) {
  json j;
  switch (g.kind) {
    case GateKind::haar:
      j["name"] = "haar";
      j["seed"] = g.seed.value_or(0);
      break;
    case GateKind::cnot:
    case GateKind::cz:
    case GateKind::swap_gate:
      j["name"] = gate_kind_name(g.kind);
      break;
    case GateKind::custom: {
      j["name"] = "custom";
      json m = json::array();
      for (const cx& v : g.matrix) m.push_back(complex_to_json(v));
      j["matrix"] = std::move(m);
      break;
    }
  }
  return j;
}

json qubit_to_json(const NewQubit& nq) {
  json j;
  j["id"] = nq.id;
  if (!is_default_state(nq.state)) j["state"] = state_to_json(nq.state);
  return j;
}

[[noreturn]] void bad(const std::string& msg) { fail(ErrorKind::validation, "scheme file: " + msg); }

cx complex_from_json(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    bad(ctx + ": complex values must be [re, im]");
  return cx(j[0].get<double>(), j[1].get<double>());
}

std::array<cx, 4> state_from_json(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 4) bad(ctx + ": state must be a 2x2 row-major matrix (4 entries)");
  std::array<cx, 4> st;
  for (int i = 0; i < 4; ++i) st[i] = complex_from_json(j[i], ctx);
  return st;
}

QubitId id_from_json(const json& j, const std::string& ctx) {
  if (!j.is_number_integer()) bad(ctx + ": qubit id must be an integer");
  const std::int64_t v = j.get<std::int64_t>();
  if (v < INT32_MIN || v > INT32_MAX) bad(ctx + ": qubit id out of range");
  return static_cast<QubitId>(v);
}

Gate gate_from_json(const json& j, const std::string& ctx) {
  if (!j.is_object()) bad(ctx + ": gate must be an object");
  std::string name = j.contains("name") ? j.at("name").get<std::string>()
                                        : (j.contains("matrix") ? "custom" : "");
  if (name == "haar") {
    if (!j.contains("seed") || !j.at("seed").is_number_unsigned())
      bad(ctx + ": haar gate needs an unsigned seed");
    return make_haar_gate(j.at("seed").get<std::uint64_t>());
  }
  if (name == "cnot" || name == "cz" || name == "swap") return make_named_gate(name);
  if (name == "custom") {
    if (!j.contains("matrix") || !j.at("matrix").is_array() || j.at("matrix").size() != 16)
      bad(ctx + ": custom gate needs a 16-entry row-major matrix");
    std::array<cx, 16> m;
    for (int i = 0; i < 16; ++i) m[i] = complex_from_json(j.at("matrix")[i], ctx);
    return make_custom_gate(m);
  }
  bad(ctx + ": unknown gate name '" + name + "'");
}

}  // namespace

std::string serialize_scheme(const InteractionScheme& scheme) {
  if (static_cast<int>(scheme.live_after.size()) != scheme.T + 1)
    fail(ErrorKind::usage, "serialize_scheme requires a finalized scheme");
  json j;
  j["version"] = 1;
  j["T"] = scheme.T;
  j["D"] = scheme.D;
  j["bath_size"] = scheme.bath_size;
  bool any_bath = false;
  for (const auto& st : scheme.bath_states) any_bath = any_bath || !is_default_state(st);
  if (any_bath) {
    json b = json::array();
    for (const auto& st : scheme.bath_states) b.push_back(state_to_json(st));
    j["bath_states"] = std::move(b);
  }

  json iters = json::array();
  for (int t = 0; t <= scheme.T; ++t) {
    const IterationSpec& it = scheme.iterations[t];
    json ji;
    ji["index"] = t;
    json nq = json::array();
    for (const NewQubit& q : it.new_system) nq.push_back(qubit_to_json(q));
    ji["new_qubits"] = std::move(nq);
    json anc = json::array();
    for (const NewQubit& q : it.new_ancillas) anc.push_back(qubit_to_json(q));
    ji["ancillas"] = std::move(anc);
    json edges = json::array();
    for (const auto& [a, b] : it.edges) edges.push_back(json::array({a, b}));
    ji["edges"] = std::move(edges);

    // Ids are stable internally, so the survivor map is written as identity.
    json emb = json::object();
    if (t == 0) {
      for (QubitId b = 0; b < scheme.bath_size; ++b) emb[std::to_string(b)] = b;
    } else {
      for (QubitId q : scheme.live_after[t - 1]) emb[std::to_string(q)] = q;
    }
    ji["embedding"] = std::move(emb);

    json layers = json::array();
    for (const auto& layer : it.layers) {
      json jl = json::array();
      for (const LayerGate& lg : layer) {
        json jg;
        jg["edge"] = json::array({lg.a, lg.b});
        jg["gate"] = gate_to_json(lg.gate);
        jl.push_back(std::move(jg));
      }
      layers.push_back(std::move(jl));
    }
    ji["layers"] = std::move(layers);
    ji["discards"] = it.discards;
    iters.push_back(std::move(ji));
  }
  j["iterations"] = std::move(iters);
  return j.dump(2) + "\n";
}

InteractionScheme parse_scheme(const std::string& file_contents) {
  json j;
  try {
    j = json::parse(file_contents);
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }

  InteractionScheme s;
  try {
    if (!j.is_object()) bad("top level must be an object");
    if (!j.contains("version") || j.at("version").get<int>() != 1) bad("version must be 1");
    s.T = j.at("T").get<int>();
    s.D = j.at("D").get<int>();
    s.bath_size = j.at("bath_size").get<int>();
    if (s.T < 0 || s.D < 1 || s.bath_size < 0) bad("T, D, bath_size out of range");
    if (j.contains("bath_states")) {
      const json& b = j.at("bath_states");
      if (!b.is_array()) bad("bath_states must be an array");
      for (size_t i = 0; i < b.size(); ++i)
        s.bath_states.push_back(state_from_json(b[i], "bath state " + std::to_string(i)));
    }

    const json& iters = j.at("iterations");
    if (!iters.is_array() || static_cast<int>(iters.size()) != s.T + 1)
      bad("iterations must be an array of T+1 entries");

    // Fold the per-iteration survivor maps away: walk iterations renaming
    // declared labels to stable ids. Identity maps (the common case) keep
    // every declared id.
    std::map<QubitId, QubitId> names;  // declared label in current iteration -> stable id
    std::set<QubitId> used;
    QubitId max_used = -1;
    for (QubitId b = 0; b < s.bath_size; ++b) {
      names[b] = b;
      used.insert(b);
      max_used = std::max(max_used, b);
    }

    for (int t = 0; t <= s.T; ++t) {
      const json& ji = iters[t];
      const std::string ctx = "iteration " + std::to_string(t);
      IterationSpec it;
      it.index = ji.contains("index") ? ji.at("index").get<int>() : t;
      if (it.index != t) bad(ctx + ": index field says " + std::to_string(it.index));

      if (ji.contains("embedding") && !ji.at("embedding").is_null()) {
        const json& emb = ji.at("embedding");
        if (!emb.is_object()) bad(ctx + ": embedding must be an object");
        std::map<QubitId, QubitId> next_names;
        std::set<QubitId> targets;
        for (auto& [key, val] : emb.items()) {
          QubitId old_label;
          try {
            old_label = static_cast<QubitId>(std::stoll(key));
          } catch (...) {
            bad(ctx + ": embedding key '" + key + "' is not an integer");
          }
          const QubitId new_label = id_from_json(val, ctx + ", embedding");
          auto found = names.find(old_label);
          if (found == names.end())
            bad(ctx + ": embedding maps unknown qubit " + std::to_string(old_label));
          if (!targets.insert(new_label).second)
            bad(ctx + ": embedding not injective at " + std::to_string(new_label));
          next_names[new_label] = found->second;
        }
        if (next_names.size() != names.size())
          bad(ctx + ": embedding must cover every surviving qubit (" + std::to_string(names.size()) +
              " expected, " + std::to_string(next_names.size()) + " mapped)");
        names = std::move(next_names);
      }

      auto add_new = [&](const json& entry, std::vector<NewQubit>& dest, const char* what) {
        if (!entry.is_object()) bad(ctx + ": " + what + " entries must be objects");
        NewQubit nq;
        const QubitId declared = id_from_json(entry.at("id"), ctx);
        if (names.count(declared))
          bad(ctx + ": id " + std::to_string(declared) + " already names a live qubit");
        QubitId stable = declared;
        if (used.count(stable)) stable = ++max_used;
        used.insert(stable);
        max_used = std::max(max_used, stable);
        names[declared] = stable;
        nq.id = stable;
        if (entry.contains("state")) nq.state = state_from_json(entry.at("state"), ctx);
        dest.push_back(nq);
      };
      if (ji.contains("new_qubits"))
        for (const json& q : ji.at("new_qubits")) add_new(q, it.new_system, "new_qubits");
      if (ji.contains("ancillas"))
        for (const json& q : ji.at("ancillas")) add_new(q, it.new_ancillas, "ancillas");

      auto rename = [&](QubitId declared, const std::string& where) -> QubitId {
        auto found = names.find(declared);
        if (found == names.end()) bad(ctx + ", " + where + ": unknown qubit " + std::to_string(declared));
        return found->second;
      };

      if (ji.contains("edges")) {
        const json& edges = ji.at("edges");
        if (!edges.is_array()) bad(ctx + ": edges must be an array");
        for (size_t e = 0; e < edges.size(); ++e) {
          const json& je = edges[e];
          if (!je.is_array() || je.size() != 2) bad(ctx + ": edges must be [a, b] pairs");
          const std::string where = "edge " + std::to_string(e);
          it.edges.emplace_back(rename(id_from_json(je[0], ctx), where),
                                rename(id_from_json(je[1], ctx), where));
        }
      }

      if (ji.contains("layers")) {
        const json& layers = ji.at("layers");
        if (!layers.is_array()) bad(ctx + ": layers must be an array");
        for (size_t l = 0; l < layers.size(); ++l) {
          const json& jl = layers[l];
          if (!jl.is_array()) bad(ctx + ": each layer must be an array of gates");
          std::vector<LayerGate> layer;
          for (size_t g = 0; g < jl.size(); ++g) {
            const json& jg = jl[g];
            const std::string where = "layer " + std::to_string(l) + ", gate " + std::to_string(g);
            if (!jg.is_object() || !jg.contains("edge") || !jg.contains("gate"))
              bad(ctx + ", " + where + ": needs edge and gate");
            const json& je = jg.at("edge");
            if (!je.is_array() || je.size() != 2) bad(ctx + ", " + where + ": edge must be [a, b]");
            LayerGate lg;
            lg.a = rename(id_from_json(je[0], ctx), where);
            lg.b = rename(id_from_json(je[1], ctx), where);
            lg.gate = gate_from_json(jg.at("gate"), ctx + ", " + where);
            layer.push_back(std::move(lg));
          }
          it.layers.push_back(std::move(layer));
        }
      }

      if (ji.contains("discards")) {
        const json& disc = ji.at("discards");
        if (!disc.is_array()) bad(ctx + ": discards must be an array");
        for (size_t i = 0; i < disc.size(); ++i) {
          const QubitId stable = rename(id_from_json(disc[i], ctx), "discard " + std::to_string(i));
          it.discards.push_back(stable);
          // Remove from the live namespace so later iterations cannot see it.
          for (auto iter = names.begin(); iter != names.end(); ++iter)
            if (iter->second == stable) {
              names.erase(iter);
              break;
            }
        }
      }

      s.iterations.push_back(std::move(it));
    }
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }

  s.check_and_finalize();
  return s;
}

}  // namespace conecraft
