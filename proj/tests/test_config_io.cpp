#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "physim/collapse_oracle.hpp"
#include "physim/config_io.hpp"
#include "physim/scenarios.hpp"

using namespace physim;

TEST_CASE("config serialization round-trips every builtin") {
  for (const std::string& name : builtin_scenarios()) {
    const ScenarioConfig original = make_builtin(name);
    const std::string text = config_to_json(original);
    const ScenarioConfig reparsed = config_from_json(text);

    CHECK(reparsed.name == original.name);
    CHECK(reparsed.kind == original.kind);
    CHECK(reparsed.factor_dims == original.factor_dims);
    CHECK(reparsed.trials == original.trials);
    CHECK(reparsed.seed == original.seed);
    CHECK(reparsed.mode == original.mode);
    CHECK(reparsed.schmidt_cut == original.schmidt_cut);
    CHECK((reparsed.initial_state - original.initial_state).norm() == 0.0);
    CHECK(reparsed.events.size() == original.events.size());
    CHECK(reparsed.couplings.size() == original.couplings.size());
    CHECK(reparsed.conserved_observable.has_value() ==
          original.conserved_observable.has_value());
    CHECK(reparsed.chsh_angles.has_value() == original.chsh_angles.has_value());
    if (original.chsh_angles) {
      CHECK(*reparsed.chsh_angles == *original.chsh_angles);
    }

    // The authoritative equality check: emission is deterministic, so the
    // round trip must be byte-stable.
    CHECK(config_to_json(reparsed) == text);

    // And the reparsed config must still run to the same exact chain.
    const ChainDistribution a = chain_distribution(original);
    const ChainDistribution b = chain_distribution(reparsed);
    REQUIRE(a.size() == b.size());
    for (const auto& [key, p] : a) {
      CHECK(b.at(key) == p);
    }
  }
}

TEST_CASE("doubles are emitted with full precision") {
  ScenarioConfig config = make_builtin("fresh_spin");
  config.definite_tol = 0.1;  // not exactly representable
  const std::string text = config_to_json(config);
  CHECK(text.find("0.1000000000000000") != std::string::npos);

  const ScenarioConfig reparsed = config_from_json(text);
  CHECK(reparsed.definite_tol == 0.1);
}

TEST_CASE("negative zero never reaches the byte stream") {
  ScenarioConfig config = make_builtin("fresh_spin");
  Vector v(2);
  v << Complex(-0.0, 0.6), Complex(0.8, -0.0);
  v(0) = Complex(-0.0, 0.6);
  config.initial_state = v;
  const std::string text = config_to_json(config);
  CHECK(text.find("-0,") == std::string::npos);
  CHECK(text.find("[-0]") == std::string::npos);
  CHECK(text.find("-0]") == std::string::npos);
}

TEST_CASE("unknown top-level keys are rejected") {
  CHECK_THROWS_AS(config_from_json(R"({"name":"x","factor_dims":[2],)"
                                   R"("initial_state":[[1,0],[0,0]],)"
                                   R"("events":[],"surprise":1})"),
                  ConfigError);
}

TEST_CASE("malformed json and malformed shapes are config errors") {
  CHECK_THROWS_AS(config_from_json("{"), ConfigError);
  CHECK_THROWS_AS(config_from_json("[]"), ConfigError);
  // Ragged matrix.
  CHECK_THROWS_AS(
      config_from_json(R"({"name":"x","factor_dims":[2],)"
                       R"("initial_state":[[1,0],[0,0]],)"
                       R"("hamiltonian":[[1,0],[0]],"events":[]})"),
      ConfigError);
  // Event with labels not matching projector count.
  CHECK_THROWS_AS(
      config_from_json(R"({"name":"x","factor_dims":[2],)"
                       R"("initial_state":[[1,0],[0,0]],)"
                       R"("events":[{"time":1,"labels":[[1]],)"
                       R"("projectors":[[[1,0],[0,0]],[[0,0],[1,0]]]}]})"),
      ConfigError);
}

TEST_CASE("load_config_file reports unreadable paths") {
  CHECK_THROWS_AS(load_config_file("/nonexistent/path/config.json"), ConfigError);
}

TEST_CASE("plain numbers parse as real amplitudes") {
  const ScenarioConfig config = config_from_json(
      R"({"name":"bare","factor_dims":[2],"initial_state":[0.6,0.8],)"
      R"("events":[{"time":1,"axis_deg":0}]})");
  CHECK(config.initial_state(0) == Complex(0.6, 0.0));
  CHECK(config.initial_state(1) == Complex(0.8, 0.0));
  const ChainDistribution chain = chain_distribution(config);
  CHECK(chain.at("+") == doctest::Approx(0.36).epsilon(1e-12));
}

TEST_CASE("header records carry the version and full config") {
  const ScenarioConfig config = make_builtin("fresh_spin");
  const std::string header = header_record(config);
  CHECK(header.find("\"record\":\"header\"") != std::string::npos);
  CHECK(header.find(std::string("\"version\":\"") + kVersion + "\"") !=
        std::string::npos);
  CHECK(header.find("\"name\":\"fresh_spin\"") != std::string::npos);
  CHECK(header.find("\"seed\":42") != std::string::npos);
  CHECK(header.find('\n') == std::string::npos);
  // Identical inputs, identical bytes.
  CHECK(header_record(config) == header);
}

TEST_CASE("ledger event records replay the outcome of a step") {
  World world = make_world(make_state(std::vector<Complex>{{0.6, 0.0}, {0.8, 0.0}}),
                           HermitianOperator::from_matrix(Matrix::Zero(2, 2)));
  ScheduledEvent event;
  event.time = 1.0;
  event.candidates = CandidateSet::from_decomposition(
      joint_eigenspace_decomposition({HermitianOperator::from_matrix(pauli_z())}),
      {"down", "up"});
  RngStream rng = RngStream::forced({1});
  step(world, event, rng);

  const std::string line = ledger_event_record(7, world.ledger[0]);
  CHECK(line.find("\"record\":\"ledger_event\"") != std::string::npos);
  CHECK(line.find("\"trial\":7") != std::string::npos);
  CHECK(line.find("\"chosen\":\"up\"") != std::string::npos);
  CHECK(line.find("\"trivial\":false") != std::string::npos);
  CHECK(line.find("0.64") != std::string::npos);
  CHECK(line.find('\n') == std::string::npos);
}

TEST_CASE("summary records expose the chain but never the wall time") {
  ScenarioConfig config = make_builtin("fresh_spin");
  config.trials = 100;
  const RunStatistics stats = run(config);
  const std::string line = summary_record(stats);
  CHECK(line.find("\"record\":\"summary\"") != std::string::npos);
  CHECK(line.find("\"exact_chain\"") != std::string::npos);
  CHECK(line.find("\"up\"") != std::string::npos);
  CHECK(line.find("wall_time") == std::string::npos);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(summary_record(stats) == line);
}
