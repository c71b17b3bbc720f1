#include <doctest.h>
#include <json.hpp>

#include <string>

#include "conecraft/scheme.hpp"

using namespace conecraft;

namespace {

GateSource haar_source(std::uint64_t seed, bool ti = false) {
  GateSource s;
  s.kind = GateSource::Kind::haar;
  s.seed = seed;
  s.translationally_invariant = ti;
  return s;
}

GateSource named_source(GateSource::Kind k) {
  GateSource s;
  s.kind = k;
  return s;
}

template <typename F>
std::string expect_error(F&& f, ErrorKind kind) {
  try {
    f();
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
    return e.what();
  }
  FAIL("expected an error");
  return "";
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("named gate matrices") {
  Gate cnot = make_named_gate("cnot");
  // control = first qubit: |10> -> |11>, |11> -> |10>
  CHECK(cnot.matrix[0 * 4 + 0] == cx(1));
  CHECK(cnot.matrix[1 * 4 + 1] == cx(1));
  CHECK(cnot.matrix[3 * 4 + 2] == cx(1));
  CHECK(cnot.matrix[2 * 4 + 3] == cx(1));
  CHECK(cnot.matrix[2 * 4 + 2] == cx(0));

  Gate cz = make_named_gate("cz");
  for (int i = 0; i < 4; ++i) CHECK(cz.matrix[i * 4 + i] == (i == 3 ? cx(-1) : cx(1)));

  Gate sw = make_named_gate("swap");
  CHECK(sw.matrix[1 * 4 + 2] == cx(1));
  CHECK(sw.matrix[2 * 4 + 1] == cx(1));
  CHECK(sw.matrix[1 * 4 + 1] == cx(0));

  Gate h1 = make_haar_gate(42), h2 = make_haar_gate(42), h3 = make_haar_gate(43);
  CHECK(h1 == h2);
  CHECK(!(h1 == h3));
}

TEST_CASE("dmera structure and counts") {
  InteractionScheme s = build_dmera(2, 1, named_source(GateSource::Kind::cnot));
  CHECK(s.live_after[2].size() == 4);
  CHECK(s.bath_size == 0);

  InteractionScheme s0 = build_dmera(0, 1, haar_source(1));
  CHECK(s0.live_after[0].size() == 1);
  CHECK(scheme_totals(s0).total_gates == 0);

  InteractionScheme s32 = build_dmera(3, 2, haar_source(5));
  SchemeTotals tot = scheme_totals(s32);
  std::vector<int> per_qubits;
  for (const auto& it : tot.per_iteration) per_qubits.push_back(it.new_qubits);
  CHECK(per_qubits == std::vector<int>{1, 1, 2, 4});
  for (int t = 0; t <= 3; ++t) CHECK(static_cast<int>(s32.live_after[t].size()) == (1 << t));

  // independent slot count: a line of 2^t qubits has 2^t - 1 edges; layer
  // parity alternates between ceil and floor of half of them
  std::int64_t oracle = 0;
  for (int t = 1; t <= 3; ++t) {
    const int edges = (1 << t) - 1;
    for (int l = 0; l < 2; ++l) oracle += (l % 2 == 0) ? (edges + 1) / 2 : edges / 2;
  }
  CHECK(oracle == 11);
  CHECK(tot.total_gates == oracle);
  CHECK(dmera_gate_count_exact(3, 2) == oracle);

  for (int T = 0; T <= 6; ++T)
    for (int D = 1; D <= 3; ++D) {
      InteractionScheme sc = build_dmera(T, D, named_source(GateSource::Kind::cz));
      CHECK(scheme_totals(sc).total_gates == dmera_gate_count_exact(T, D));
      CHECK(scheme_totals(sc).total_qubits == dmera_qubit_count(T));
    }

  // the coarser closed form deliberately disagrees with the exact count
  CHECK(dmera_gate_count_alt(3, 2) == 15);
  CHECK(dmera_gate_count_exact(30, 2) == 2 * ((std::int64_t{1} << 30) - 1) - 30);

  std::string msg = expect_error([] { build_dmera(17, 1, GateSource{}); }, ErrorKind::cap);
  CHECK(contains(msg, "closed-form"));
}

TEST_CASE("mps structure") {
  InteractionScheme s = build_mps(5, 1, 1, haar_source(3));
  SchemeTotals tot = scheme_totals(s);
  CHECK(tot.total_qubits == 7);  // 6 system + 1 bath
  std::vector<int> per_gates;
  for (const auto& it : tot.per_iteration) per_gates.push_back(it.gates);
  CHECK(per_gates == std::vector<int>{0, 1, 1, 1, 1, 1});
  for (const auto& it : s.iterations) CHECK(it.discards.empty());

  InteractionScheme s2 = build_mps(1, 2, 1, named_source(GateSource::Kind::cnot));
  const auto& edges = s2.iterations[1].edges;
  REQUIRE(edges.size() == 2);
  CHECK(edges[0] == std::make_pair(QubitId{3}, QubitId{0}));  // fresh qubit to chain head
  CHECK(edges[1] == std::make_pair(QubitId{0}, QubitId{1}));

  InteractionScheme s3 = build_mps(3, 3, 2, haar_source(4));
  CHECK(s3.live_after[3].size() == 7);  // 3 bath + 4 system

  // D=2 brickwork on the path: layer 1 holds the odd-index edges
  CHECK(s3.iterations[1].layers[0].size() == 2);  // edges 0 and 2
  CHECK(s3.iterations[1].layers[1].size() == 1);  // edge 1
}

TEST_CASE("ri structure") {
  InteractionScheme s = build_ri(1, 4, 2, 1, haar_source(6));
  CHECK(scheme_totals(s).total_qubits == 12);  // 8 system + 4 bath
  CHECK(s.bath_size == 4);

  InteractionScheme s2 = build_ri(2, 2, 1, 1, haar_source(7));
  const auto& edges = s2.iterations[1].edges;
  int sys_bath = 0, bath_bath = 0;
  for (const auto& [a, b] : edges) {
    const bool ab = a < 4, bb = b < 4;
    if (ab && bb) ++bath_bath;
    else ++sys_bath;
  }
  CHECK(sys_bath == 4);
  CHECK(bath_bath == 4);

  // side 1 degenerates to the chain scheme: one fresh qubit per iteration,
  // coupled to the single bath qubit
  InteractionScheme ri = build_ri(1, 1, 3, 1, named_source(GateSource::Kind::cnot));
  InteractionScheme mps = build_mps(3, 1, 1, named_source(GateSource::Kind::cnot));
  for (int t = 1; t <= 3; ++t) {
    const auto& ri_it = ri.iterations[t];
    const auto& mps_it = mps.iterations[t];
    REQUIRE(ri_it.layers[0].size() == 1);
    REQUIRE(mps_it.layers[0].size() == 1);
    CHECK(ri_it.layers[0][0].a == ri_it.new_system[0].id);
    CHECK(ri_it.layers[0][0].b == 0);
    CHECK(mps_it.layers[0][0].a == mps_it.new_system[0].id);
    CHECK(mps_it.layers[0][0].b == 0);
    CHECK(ri_it.layers[0][0].gate == mps_it.layers[0][0].gate);
  }

  // d=2 layer cycle: sys-bath, then horizontal, then vertical matchings
  InteractionScheme s3 = build_ri(2, 2, 1, 3, named_source(GateSource::Kind::cz));
  CHECK(s3.iterations[1].layers[0].size() == 4);  // sys-bath matching
  CHECK(s3.iterations[1].layers[1].size() == 2);  // horizontal pairs
  CHECK(s3.iterations[1].layers[2].size() == 2);  // vertical pairs

  expect_error([] { build_ri(3, 2, 1, 1, GateSource{}); }, ErrorKind::usage);
}

TEST_CASE("scheme totals on empty and trivial schemes") {
  InteractionScheme s;
  s.T = 0;
  s.D = 1;
  s.bath_size = 0;
  s.iterations.resize(1);
  s.iterations[0].layers.assign(1, {});
  s.check_and_finalize();
  SchemeTotals tot = scheme_totals(s);
  CHECK(tot.total_gates == 0);
  CHECK(tot.total_qubits == 0);

  // identity source leaves every layer empty, so nothing is counted
  InteractionScheme id_scheme = build_mps(4, 2, 2, named_source(GateSource::Kind::identity));
  CHECK(scheme_totals(id_scheme).total_gates == 0);
  for (const auto& it : id_scheme.iterations)
    for (const auto& layer : it.layers) CHECK(layer.empty());
}

TEST_CASE("serialization round trips bit-exactly") {
  InteractionScheme a = build_dmera(2, 1, haar_source(11));
  CHECK(parse_scheme(serialize_scheme(a)) == a);

  InteractionScheme b = build_mps(3, 2, 2, haar_source(12, true));
  CHECK(parse_scheme(serialize_scheme(b)) == b);
  CHECK(serialize_scheme(parse_scheme(serialize_scheme(b))) == serialize_scheme(b));

  InteractionScheme c = build_ri(2, 2, 2, 2, named_source(GateSource::Kind::swap_gate));
  CHECK(parse_scheme(serialize_scheme(c)) == c);

  // custom gates and non-default states survive byte-for-byte
  InteractionScheme d = build_mps(2, 1, 1, haar_source(13));
  d.bath_states[0] = {cx(0.25, 0), cx(0.1, 0.2), cx(0.1, -0.2), cx(0.75, 0)};
  d.iterations[1].layers[0][0].gate = make_custom_gate(make_haar_gate(99).matrix);
  d.iterations[2].new_system[0].state = {cx(0.5, 0), cx(0, -0.5), cx(0, 0.5), cx(0.5, 0)};
  d.check_and_finalize();
  InteractionScheme d2 = parse_scheme(serialize_scheme(d));
  CHECK(d2 == d);
}

TEST_CASE("parse validation errors name the offending element") {
  using nlohmann::ordered_json;

  InteractionScheme base = build_mps(2, 1, 2, haar_source(21));
  ordered_json j = ordered_json::parse(serialize_scheme(base));

  SUBCASE("layer count") {
    j["iterations"][2]["layers"].push_back(ordered_json::array());
    std::string msg =
        expect_error([&] { parse_scheme(j.dump()); }, ErrorKind::validation);
    CHECK(contains(msg, "iteration 2"));
    CHECK(contains(msg, "3 layers"));
  }

  SUBCASE("non-unitary gate") {
    ordered_json m = ordered_json::array();
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        m.push_back(ordered_json::array({r == c ? (r == 0 ? 1.001 : 1.0) : 0.0, 0.0}));
    j["iterations"][1]["layers"][0][0]["gate"] = {{"name", "custom"}, {"matrix", m}};
    std::string msg =
        expect_error([&] { parse_scheme(j.dump()); }, ErrorKind::validation);
    CHECK(contains(msg, "iteration 1"));
    CHECK(contains(msg, "not unitary"));
  }

  SUBCASE("non-injective embedding") {
    j["iterations"][2]["embedding"] = {{"0", 0}, {"2", 0}};
    std::string msg =
        expect_error([&] { parse_scheme(j.dump()); }, ErrorKind::validation);
    CHECK(contains(msg, "injective"));
  }

  SUBCASE("edge names unknown qubit") {
    j["iterations"][1]["edges"].push_back(ordered_json::array({0, 99}));
    std::string msg =
        expect_error([&] { parse_scheme(j.dump()); }, ErrorKind::validation);
    CHECK(contains(msg, "unknown qubit"));
  }

  SUBCASE("gate off the declared edge set") {
    auto gate = j["iterations"][1]["layers"][0][0];
    j["iterations"][2]["layers"][1].push_back(gate);
    std::string msg =
        expect_error([&] { parse_scheme(j.dump()); }, ErrorKind::validation);
    CHECK(contains(msg, "iteration 2"));
    CHECK(contains(msg, "edge"));
  }

  SUBCASE("version") {
    j["version"] = 2;
    std::string msg =
        expect_error([&] { parse_scheme(j.dump()); }, ErrorKind::validation);
    CHECK(contains(msg, "version"));
  }

  SUBCASE("garbage") {
    expect_error([] { parse_scheme("not json at all {"); }, ErrorKind::validation);
  }
}

TEST_CASE("relabeling embeddings fold to stable ids") {
  const std::string text = R"({
    "version": 1, "T": 1, "D": 1, "bath_size": 1,
    "iterations": [
      {"index": 0, "new_qubits": [{"id": 7}], "ancillas": [], "edges": [],
       "embedding": {"0": 0}, "layers": [[]], "discards": []},
      {"index": 1, "new_qubits": [{"id": 9}], "ancillas": [],
       "edges": [[9, 0], [9, 5]],
       "embedding": {"0": 0, "7": 5},
       "layers": [[{"edge": [9, 5], "gate": {"name": "cnot"}}]],
       "discards": []}
    ]
  })";
  InteractionScheme s = parse_scheme(text);
  CHECK(s.qubits.count(0) == 1);
  CHECK(s.qubits.count(7) == 1);  // kept its birth id even though iteration 1 calls it 5
  CHECK(s.qubits.count(9) == 1);
  CHECK(s.qubits.count(5) == 0);
  REQUIRE(s.iterations[1].layers[0].size() == 1);
  CHECK(s.iterations[1].layers[0][0].a == 9);
  CHECK(s.iterations[1].layers[0][0].b == 7);
  CHECK(parse_scheme(serialize_scheme(s)) == s);
}

TEST_CASE("translational invariance detection") {
  CHECK(is_translationally_invariant(build_mps(4, 2, 2, haar_source(31, true))));
  CHECK(!is_translationally_invariant(build_mps(4, 2, 2, haar_source(31, false))));
  CHECK(is_translationally_invariant(build_mps(4, 2, 2, named_source(GateSource::Kind::cnot))));
  CHECK(is_translationally_invariant(build_ri(1, 3, 3, 2, haar_source(32, true))));
  CHECK(is_mps_type(build_ri(2, 2, 2, 1, haar_source(33))));
  CHECK(!is_mps_type(build_dmera(2, 1, haar_source(34))));

  // TI haar draws really do repeat across iterations
  InteractionScheme ti = build_mps(3, 1, 1, haar_source(35, true));
  CHECK(ti.iterations[1].layers[0][0].gate == ti.iterations[2].layers[0][0].gate);
  InteractionScheme free = build_mps(3, 1, 1, haar_source(35, false));
  CHECK(!(free.iterations[1].layers[0][0].gate == free.iterations[2].layers[0][0].gate));
}

TEST_CASE("matching flag and discard bookkeeping") {
  InteractionScheme s = build_mps(2, 3, 1, haar_source(41));
  CHECK(s.layers_are_matchings);

  // two gates sharing qubit 0 in one layer clears the flag but still parses
  InteractionScheme raw = build_mps(1, 3, 1, named_source(GateSource::Kind::cz));
  raw.iterations[1].layers[0].push_back({0, 1, make_named_gate("cz")});
  raw.check_and_finalize();
  CHECK(!raw.layers_are_matchings);

  // ancillas must be discarded in the same iteration
  InteractionScheme anc = build_mps(1, 1, 1, named_source(GateSource::Kind::cnot));
  anc.iterations[1].new_ancillas.push_back({50, kKetZeroState});
  std::string msg = expect_error([&] { anc.check_and_finalize(); }, ErrorKind::validation);
  CHECK(contains(msg, "discards"));
  anc.iterations[1].discards.push_back(50);
  anc.check_and_finalize();
  CHECK(anc.qubits.at(50).discard_iteration == 1);
  CHECK(anc.live_after[1].size() == 3);  // bath + S_0 + S_1, ancilla gone
}
