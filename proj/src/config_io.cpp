#include "physim/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace physim {

namespace {

using nlohmann::json;

// -- deterministic writer -------------------------------------------------------

std::string fmt_double(double value) {
  if (!std::isfinite(value)) {
    throw NumericalError("refusing to serialize a non-finite number");
  }
  if (value == 0.0) {
    value = 0.0;  // normalize -0
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string json_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size() + 2);
  for (const char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string quoted(const std::string& text) { return "\"" + json_escape(text) + "\""; }

std::string complex_to_json(const Complex& z) {
  return "[" + fmt_double(z.real()) + "," + fmt_double(z.imag()) + "]";
}

std::string vector_to_json(const Vector& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) {
      out += ",";
    }
    out += complex_to_json(v(i));
  }
  return out + "]";
}

std::string matrix_to_json(const Matrix& m) {
  std::string out = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r > 0) {
      out += ",";
    }
    out += "[";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) {
        out += ",";
      }
      out += complex_to_json(m(r, c));
    }
    out += "]";
  }
  return out + "]";
}

std::string doubles_to_json(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) {
      out += ",";
    }
    out += fmt_double(values[i]);
  }
  return out + "]";
}

std::string names_to_json(const std::vector<std::string>& names) {
  std::string out = "[";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) {
      out += ",";
    }
    out += quoted(names[i]);
  }
  return out + "]";
}

template <typename Map, typename Fmt>
std::string map_to_json(const Map& map, Fmt&& fmt) {
  std::string out = "{";
  bool first = true;
  for (const auto& [key, value] : map) {
    if (!first) {
      out += ",";
    }
    first = false;
    out += quoted(key) + ":" + fmt(value);
  }
  return out + "}";
}

const char* kind_to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kFreshSpin: return "fresh_spin";
    case ScenarioKind::kPrepareMeasure: return "prepare_measure";
    case ScenarioKind::kEpr: return "epr";
    case ScenarioKind::kSequentialChain: return "sequential_chain";
    case ScenarioKind::kConservation: return "conservation";
    case ScenarioKind::kGeneric: break;
  }
  return "generic";
}

std::string event_to_json(const EventSpec& event) {
  std::string out = "{\"time\":" + fmt_double(event.time);
  if (event.candidates) {
    const CandidateSet& c = *event.candidates;
    out += ",\"labels\":[";
    for (std::size_t i = 0; i < c.labels.size(); ++i) {
      if (i > 0) {
        out += ",";
      }
      out += doubles_to_json(c.labels[i]);
    }
    out += "],\"names\":" + names_to_json(c.names) + ",\"projectors\":[";
    for (std::size_t i = 0; i < c.projectors.size(); ++i) {
      if (i > 0) {
        out += ",";
      }
      out += matrix_to_json(c.projectors[i]);
    }
    out += "]";
  } else {
    out += ",\"axis_deg\":" + fmt_double(event.axis_deg);
    out += ",\"target\":" + std::to_string(event.target);
    out += ",\"pointer\":" + std::to_string(event.pointer);
    out += ",\"names\":" + names_to_json(event.names);
  }
  return out + "}";
}

// -- parser ----------------------------------------------------------------

Complex parse_complex(const json& j, const char* where) {
  if (j.is_number()) {
    return Complex(j.get<double>(), 0.0);
  }
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(std::string(where) + ": complex numbers are [re, im] pairs");
  }
  return Complex(j[0].get<double>(), j[1].get<double>());
}

Vector parse_vector(const json& j, const char* where) {
  if (!j.is_array()) {
    throw ConfigError(std::string(where) + ": expected an array of [re, im] pairs");
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = parse_complex(j[i], where);
  }
  return v;
}

Matrix parse_matrix(const json& j, const char* where) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(std::string(where) + ": expected a row-major complex matrix");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) {
    throw ConfigError(std::string(where) + ": matrix rows must be nonempty arrays");
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ConfigError(std::string(where) + ": matrix rows differ in length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_complex(j[r][c], where);
    }
  }
  return m;
}

ScenarioKind parse_kind(const std::string& text) {
  if (text == "generic") return ScenarioKind::kGeneric;
  if (text == "fresh_spin") return ScenarioKind::kFreshSpin;
  if (text == "prepare_measure") return ScenarioKind::kPrepareMeasure;
  if (text == "epr") return ScenarioKind::kEpr;
  if (text == "sequential_chain") return ScenarioKind::kSequentialChain;
  if (text == "conservation") return ScenarioKind::kConservation;
  throw ConfigError("unknown scenario kind '" + text + "'");
}

ScenarioKind infer_kind(const std::string& name) {
  if (name == "fresh_spin") return ScenarioKind::kFreshSpin;
  if (name.rfind("prepare_measure", 0) == 0) return ScenarioKind::kPrepareMeasure;
  if (name.rfind("epr", 0) == 0) return ScenarioKind::kEpr;
  if (name == "sequential_chain") return ScenarioKind::kSequentialChain;
  if (name == "conservation") return ScenarioKind::kConservation;
  return ScenarioKind::kGeneric;
}

EventSpec parse_event(const json& j) {
  if (!j.is_object() || !j.contains("time")) {
    throw ConfigError("events are objects with at least a time field");
  }
  EventSpec event;
  event.time = j.at("time").get<double>();
  if (j.contains("projectors")) {
    CandidateSet candidates;
    const json& projectors = j.at("projectors");
    if (!projectors.is_array() || projectors.empty()) {
      throw ConfigError("explicit events need a nonempty projectors array");
    }
    for (const json& p : projectors) {
      candidates.projectors.push_back(parse_matrix(p, "event projector"));
    }
    if (!j.contains("labels") || !j.at("labels").is_array() ||
        j.at("labels").size() != projectors.size()) {
      throw ConfigError("explicit events need one label tuple per projector");
    }
    for (const json& label : j.at("labels")) {
      if (!label.is_array()) {
        throw ConfigError("labels are arrays of numbers");
      }
      MacroLabel tuple;
      for (const json& x : label) {
        tuple.push_back(x.get<double>());
      }
      candidates.labels.push_back(std::move(tuple));
    }
    if (j.contains("names")) {
      for (const json& name : j.at("names")) {
        candidates.names.push_back(name.get<std::string>());
      }
      if (candidates.names.size() != candidates.projectors.size()) {
        throw ConfigError("explicit events need one name per projector");
      }
    } else {
      for (std::size_t i = 0; i < candidates.projectors.size(); ++i) {
        candidates.names.push_back("m" + std::to_string(i));
      }
    }
    event.candidates = std::move(candidates);
    return event;
  }

  event.axis_deg = j.value("axis_deg", 0.0);
  event.target = j.value("target", static_cast<std::size_t>(0));
  if (j.contains("pointer")) {
    const json& pointer = j.at("pointer");
    if (pointer.is_string()) {
      const std::string text = pointer.get<std::string>();
      if (text == "auto") {
        event.pointer = kAutoPointer;
      } else if (text == "none") {
        event.pointer = kNoPointer;
      } else {
        throw ConfigError("pointer is a factor index, \"auto\", or \"none\"");
      }
    } else {
      event.pointer = pointer.get<int>();
      if (event.pointer < kAutoPointer) {
        throw ConfigError("pointer is a factor index, \"auto\", or \"none\"");
      }
    }
  }
  if (j.contains("names")) {
    for (const json& name : j.at("names")) {
      event.names.push_back(name.get<std::string>());
    }
  }
  return event;
}

}  // namespace

ScenarioConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("config must be a JSON object");
  }

  static const std::set<std::string> known = {
      "name",      "kind",     "factor_dims",          "initial_state",
      "hamiltonian", "couplings", "events",             "mode",
      "trials",    "seed",     "definite_tol",         "schmidt_cut",
      "conserved_observable",  "collapse_foil_observable", "chsh_angles"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (known.find(key) == known.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }

  try {
    ScenarioConfig config;
    config.name = j.value("name", std::string("custom"));
    config.kind =
        j.contains("kind") ? parse_kind(j.at("kind").get<std::string>())
                           : infer_kind(config.name);

    if (!j.contains("factor_dims") || !j.at("factor_dims").is_array()) {
      throw ConfigError("factor_dims is a required array of positive integers");
    }
    for (const json& d : j.at("factor_dims")) {
      config.factor_dims.push_back(d.get<Eigen::Index>());
    }

    if (!j.contains("initial_state")) {
      throw ConfigError("initial_state is required");
    }
    config.initial_state = parse_vector(j.at("initial_state"), "initial_state");

    const Eigen::Index dim = config.dim();
    config.hamiltonian = j.contains("hamiltonian")
                             ? parse_matrix(j.at("hamiltonian"), "hamiltonian")
                             : Matrix(Matrix::Zero(dim, dim));

    if (j.contains("couplings")) {
      for (const json& c : j.at("couplings")) {
        if (!c.is_object() || !c.contains("window") || !c.contains("interaction") ||
            !c.at("window").is_array() || c.at("window").size() != 2) {
          throw ConfigError("couplings are {window: [start, end], interaction: matrix}");
        }
        CouplingSpec coupling;
        coupling.start = c.at("window")[0].get<double>();
        coupling.end = c.at("window")[1].get<double>();
        coupling.interaction = parse_matrix(c.at("interaction"), "coupling interaction");
        config.couplings.push_back(std::move(coupling));
      }
    }

    if (!j.contains("events") || !j.at("events").is_array() || j.at("events").empty()) {
      throw ConfigError("events is a required nonempty array");
    }
    for (const json& e : j.at("events")) {
      config.events.push_back(parse_event(e));
    }

    const std::string mode = j.value("mode", std::string("free"));
    if (mode == "free") {
      config.mode = AssignmentMode::kFree;
    } else if (mode == "strict") {
      config.mode = AssignmentMode::kStrict;
    } else {
      throw ConfigError("mode is \"free\" or \"strict\"");
    }

    config.trials = j.value("trials", static_cast<std::size_t>(10000));
    config.seed = j.value("seed", static_cast<std::uint64_t>(42));
    config.definite_tol = j.value("definite_tol", tol::kDefinite);
    config.schmidt_cut = j.value("schmidt_cut", -1);

    if (j.contains("conserved_observable")) {
      config.conserved_observable =
          parse_matrix(j.at("conserved_observable"), "conserved_observable");
    }
    if (j.contains("collapse_foil_observable")) {
      config.collapse_foil_observable =
          parse_matrix(j.at("collapse_foil_observable"), "collapse_foil_observable");
    }
    if (j.contains("chsh_angles")) {
      const json& angles = j.at("chsh_angles");
      if (!angles.is_array() || angles.size() != 4) {
        throw ConfigError("chsh_angles is an array of four detector angles in degrees");
      }
      std::array<double, 4> parsed{};
      for (std::size_t i = 0; i < 4; ++i) {
        parsed[i] = angles[i].get<double>();
      }
      config.chsh_angles = parsed;
    }
    return config;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot read config file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return config_from_json(buffer.str());
}

std::string config_to_json(const ScenarioConfig& config) {
  std::string out = "{";
  out += "\"name\":" + quoted(config.name);
  out += ",\"kind\":" + quoted(kind_to_string(config.kind));
  out += ",\"factor_dims\":[";
  for (std::size_t i = 0; i < config.factor_dims.size(); ++i) {
    if (i > 0) {
      out += ",";
    }
    out += std::to_string(config.factor_dims[i]);
  }
  out += "]";
  out += ",\"initial_state\":" + vector_to_json(config.initial_state);
  out += ",\"hamiltonian\":" + matrix_to_json(config.hamiltonian);
  out += ",\"couplings\":[";
  for (std::size_t i = 0; i < config.couplings.size(); ++i) {
    if (i > 0) {
      out += ",";
    }
    out += "{\"window\":[" + fmt_double(config.couplings[i].start) + "," +
           fmt_double(config.couplings[i].end) + "]";
    out += ",\"interaction\":" + matrix_to_json(config.couplings[i].interaction) + "}";
  }
  out += "]";
  out += ",\"events\":[";
  for (std::size_t i = 0; i < config.events.size(); ++i) {
    if (i > 0) {
      out += ",";
    }
    out += event_to_json(config.events[i]);
  }
  out += "]";
  out += ",\"mode\":";
  out += config.mode == AssignmentMode::kStrict ? "\"strict\"" : "\"free\"";
  out += ",\"trials\":" + std::to_string(config.trials);
  out += ",\"seed\":" + std::to_string(config.seed);
  out += ",\"definite_tol\":" + fmt_double(config.definite_tol);
  out += ",\"schmidt_cut\":" + std::to_string(config.schmidt_cut);
  if (config.conserved_observable) {
    out += ",\"conserved_observable\":" + matrix_to_json(*config.conserved_observable);
  }
  if (config.collapse_foil_observable) {
    out += ",\"collapse_foil_observable\":" +
           matrix_to_json(*config.collapse_foil_observable);
  }
  if (config.chsh_angles) {
    out += ",\"chsh_angles\":[";
    for (std::size_t i = 0; i < 4; ++i) {
      if (i > 0) {
        out += ",";
      }
      out += fmt_double((*config.chsh_angles)[i]);
    }
    out += "]";
  }
  return out + "}";
}

std::string header_record(const ScenarioConfig& config) {
  std::string out = "{\"record\":\"header\"";
  out += ",\"version\":" + quoted(kVersion);
  out += ",\"name\":" + quoted(config.name);
  out += ",\"seed\":" + std::to_string(config.seed);
  out += ",\"mode\":";
  out += config.mode == AssignmentMode::kStrict ? "\"strict\"" : "\"free\"";
  out += ",\"config\":" + config_to_json(config);
  return out + "}";
}

std::string ledger_event_record(std::size_t trial, const LedgerEvent& event) {
  const Vector mapped = event.assignment_unitary * event.pre_state;
  const double fidelity = std::abs(Complex(event.post_state.dot(mapped)));

  std::string out = "{\"record\":\"ledger_event\"";
  out += ",\"trial\":" + std::to_string(trial);
  out += ",\"time\":" + fmt_double(event.time);
  out += ",\"candidates\":" + names_to_json(event.candidates.names);
  out += ",\"weights\":" + doubles_to_json(event.born_weights);
  out += ",\"chosen\":" + quoted(event.candidates.names[event.chosen_index]);
  out += ",\"chosen_index\":" + std::to_string(event.chosen_index);
  out += ",\"trivial\":";
  out += event.trivial ? "true" : "false";
  out += ",\"fidelity\":" + fmt_double(fidelity);
  return out + "}";
}

std::string summary_record(const RunStatistics& stats) {
  std::string out = "{\"record\":\"summary\"";
  out += ",\"exact_chain\":" +
         map_to_json(stats.exact_chain, [](double v) { return fmt_double(v); });
  out += ",\"empirical_counts\":" +
         map_to_json(stats.empirical_counts,
                     [](long long v) { return std::to_string(v); });
  out += ",\"tvd_vs_oracle\":" + fmt_double(stats.tvd_vs_oracle);
  out += ",\"conserved_drift\":" + fmt_double(stats.conserved_drift);
  out += ",\"correlation_estimates\":" +
         map_to_json(stats.correlation_estimates,
                     [](double v) { return fmt_double(v); });
  out += ",\"diagnostics\":" +
         map_to_json(stats.diagnostics, [](double v) { return fmt_double(v); });
  return out + "}";
}

}  // namespace physim
