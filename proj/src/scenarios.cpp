#include "physim/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <set>
#include <thread>
#include <utility>

#include <Eigen/SVD>

#include "physim/collapse_oracle.hpp"
#include "physim/rng.hpp"

namespace physim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTimeSlack = 1e-12;  // merging/compare slack for event times

double deg_to_rad(double deg) { return deg * kPi / 180.0; }

// Eigenvectors of cos(t) sigma_z + sin(t) sigma_x for eigenvalues +1 / -1.
Vector axis_plus(double theta_rad) {
  Vector v(2);
  v << Complex(std::cos(theta_rad / 2.0), 0.0), Complex(std::sin(theta_rad / 2.0), 0.0);
  return v;
}

Vector axis_minus(double theta_rad) {
  Vector v(2);
  v << Complex(-std::sin(theta_rad / 2.0), 0.0), Complex(std::cos(theta_rad / 2.0), 0.0);
  return v;
}

Matrix zero_matrix(Eigen::Index dim) { return Matrix::Zero(dim, dim); }

Vector singlet_state() {
  Vector v = Vector::Zero(4);
  const double amp = 1.0 / std::sqrt(2.0);
  v(1) = Complex(amp, 0.0);
  v(2) = Complex(-amp, 0.0);
  return v;
}

std::string fmt_angle(double deg) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", deg);
  return buf;
}

std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start <= key.size()) {
    const std::size_t comma = key.find(',', start);
    if (comma == std::string::npos) {
      tokens.push_back(key.substr(start));
      break;
    }
    tokens.push_back(key.substr(start, comma - start));
    start = comma + 1;
  }
  return tokens;
}

std::string join_key(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) {
      out += ",";
    }
    out += tokens[i];
  }
  return out;
}

// Event order must not matter for commuting observations; compare chains
// with each sequence key sorted into a canonical token order.
std::map<std::string, double> canonicalize_keys(const std::map<std::string, double>& in) {
  std::map<std::string, double> out;
  for (const auto& [key, p] : in) {
    std::vector<std::string> tokens = split_key(key);
    std::sort(tokens.begin(), tokens.end());
    out[join_key(tokens)] += p;
  }
  return out;
}

double max_map_delta(const std::map<std::string, double>& a,
                     const std::map<std::string, double>& b) {
  double delta = 0.0;
  for (const auto& [key, pa] : a) {
    const auto it = b.find(key);
    const double pb = (it == b.end()) ? 0.0 : it->second;
    delta = std::max(delta, std::abs(pa - pb));
  }
  for (const auto& [key, pb] : b) {
    if (a.find(key) == a.end()) {
      delta = std::max(delta, pb);
    }
  }
  return delta;
}

double map_total(const std::map<std::string, double>& m) {
  double total = 0.0;
  for (const auto& [key, p] : m) {
    (void)key;
    total += p;
  }
  return total;
}

// Second Schmidt coefficient of the state across the left|right factor cut;
// zero means an exact product state.
double schmidt_residual(const Vector& amplitudes, Eigen::Index left, Eigen::Index right) {
  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> reshaped(amplitudes.data(), left, right);
  Eigen::JacobiSVD<Matrix> svd(reshaped);
  const auto& sv = svd.singularValues();
  return sv.size() > 1 ? sv(1) : 0.0;
}

struct SchmidtSplit {
  Eigen::Index left = 0;
  Eigen::Index right = 0;
};

SchmidtSplit schmidt_split(const ScenarioConfig& config) {
  SchmidtSplit split{1, 1};
  for (std::size_t f = 0; f < config.factor_dims.size(); ++f) {
    if (static_cast<int>(f) < config.schmidt_cut) {
      split.left *= config.factor_dims[f];
    } else {
      split.right *= config.factor_dims[f];
    }
  }
  return split;
}

}  // namespace

Eigen::Index ScenarioConfig::dim() const {
  Eigen::Index product = 1;
  for (Eigen::Index d : factor_dims) {
    product *= d;
  }
  return product;
}

std::size_t worker_count() {
  const char* raw = std::getenv("PHYSIM_THREADS");
  if (raw == nullptr || *raw == '\0') {
    return 1;
  }
  char* end = nullptr;
  const unsigned long value = std::strtoul(raw, &end, 10);
  if (end == raw || *end != '\0' || value == 0 || value > 256) {
    throw ConfigError("PHYSIM_THREADS must be a positive integer up to 256");
  }
  return static_cast<std::size_t>(value);
}

// -- presets ---------------------------------------------------------------------

std::vector<std::string> builtin_scenarios() {
  return {"fresh_spin",        "prepare_measure_0",  "prepare_measure_45",
          "prepare_measure_60", "prepare_measure_90", "epr_same_axis",
          "epr_chsh",           "sequential_chain",   "conservation"};
}

namespace {

ScenarioConfig make_prepare_measure(const std::string& name, double axis_deg) {
  ScenarioConfig config;
  config.name = name;
  config.kind = ScenarioKind::kPrepareMeasure;
  config.factor_dims = {2, 2};
  config.initial_state = Vector::Zero(4);
  config.initial_state(0) = Complex(1.0, 0.0);  // prepared z-up, pointer ready
  config.hamiltonian = zero_matrix(4);
  EventSpec event;
  event.time = 1.0;
  event.axis_deg = axis_deg;
  event.target = 0;
  event.pointer = 1;
  event.names = {"+", "-"};
  config.events = {event};
  config.schmidt_cut = 1;
  config.trials = 100000;
  return config;
}

ScenarioConfig make_epr(const std::string& name, double alice_deg, double bob_deg) {
  ScenarioConfig config;
  config.name = name;
  config.kind = ScenarioKind::kEpr;
  config.factor_dims = {2, 2};
  config.initial_state = singlet_state();
  config.hamiltonian = zero_matrix(4);
  EventSpec alice;
  alice.time = 1.0;
  alice.axis_deg = alice_deg;
  alice.target = 0;
  alice.names = {"A+", "A-"};
  EventSpec bob;
  bob.time = 2.0;
  bob.axis_deg = bob_deg;
  bob.target = 1;
  bob.names = {"B+", "B-"};
  config.events = {alice, bob};
  config.trials = 100000;
  return config;
}

}  // namespace

ScenarioConfig make_builtin(const std::string& name) {
  if (name == "fresh_spin") {
    ScenarioConfig config;
    config.name = name;
    config.kind = ScenarioKind::kFreshSpin;
    config.factor_dims = {2};
    config.initial_state = Vector(2);
    config.initial_state << Complex(0.6, 0.0), Complex(0.8, 0.0);
    config.hamiltonian = zero_matrix(2);
    EventSpec event;
    event.time = 1.0;
    event.axis_deg = 0.0;
    event.target = 0;
    event.names = {"up", "down"};
    config.events = {event};
    config.trials = 100000;
    return config;
  }
  if (name == "prepare_measure_0") {
    return make_prepare_measure(name, 0.0);
  }
  if (name == "prepare_measure_45") {
    return make_prepare_measure(name, 45.0);
  }
  if (name == "prepare_measure_60") {
    return make_prepare_measure(name, 60.0);
  }
  if (name == "prepare_measure_90") {
    return make_prepare_measure(name, 90.0);
  }
  if (name == "epr_same_axis") {
    return make_epr(name, 0.0, 0.0);
  }
  if (name == "epr_chsh") {
    // Detector angles a, a', b, b'; the axis each detector measures along
    // sits at twice its angle on the Bloch sphere.
    ScenarioConfig config = make_epr(name, 0.0, 45.0);
    config.chsh_angles = {{0.0, 45.0, 22.5, 67.5}};
    return config;
  }
  if (name == "sequential_chain") {
    ScenarioConfig config;
    config.name = name;
    config.kind = ScenarioKind::kSequentialChain;
    config.factor_dims = {2, 2, 2};
    config.initial_state = Vector::Zero(8);
    config.initial_state(0) = Complex(0.6, 0.0);
    config.initial_state(4) = Complex(0.8, 0.0);
    config.hamiltonian = zero_matrix(8);
    EventSpec first;
    first.time = 1.0;
    first.axis_deg = 0.0;  // z
    first.target = 0;
    first.pointer = kAutoPointer;
    EventSpec second;
    second.time = 2.0;
    second.axis_deg = 90.0;  // x
    second.target = 0;
    second.pointer = kAutoPointer;
    EventSpec third;
    third.time = 3.0;
    third.axis_deg = 0.0;  // z again, measured directly
    third.target = 0;
    config.events = {first, second, third};
    config.trials = 100000;
    return config;
  }
  if (name == "conservation") {
    ScenarioConfig config;
    config.name = name;
    config.kind = ScenarioKind::kConservation;
    config.factor_dims = {2, 2};
    config.initial_state = Vector::Zero(4);
    config.initial_state(1) = Complex(1.0, 0.0);  // |0>|1>, a Q = 0 eigenstate
    config.hamiltonian =
        kronecker(pauli_z(), identity_matrix(2)) + kronecker(identity_matrix(2), pauli_z());

    // Excitation exchange inside ker Q, rotating |01> toward |10> so the
    // observation at t = 1 sees branch weights 0.36 / 0.64.
    const double g = std::acos(0.6);
    Matrix exchange = zero_matrix(4);
    exchange(1, 2) = Complex(g, 0.0);
    exchange(2, 1) = Complex(g, 0.0);
    config.couplings = {{0.0, 1.0, exchange}};

    CandidateSet candidates;
    candidates.labels = {{1.0, -1.0}, {-1.0, 1.0}};
    candidates.names = {"up", "down"};
    Matrix p01 = zero_matrix(4);
    p01(1, 1) = Complex(1.0, 0.0);
    Matrix p10 = zero_matrix(4);
    p10(2, 2) = Complex(1.0, 0.0);
    candidates.projectors = {p01, p10};
    EventSpec event;
    event.time = 1.0;
    event.candidates = candidates;
    config.events = {event};

    config.conserved_observable = config.hamiltonian;
    config.collapse_foil_observable = embed(pauli_x(), 0, config.factor_dims);
    config.trials = 100000;
    return config;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

// -- lowering ---------------------------------------------------------------------

namespace {

void validate_config(const ScenarioConfig& config) {
  if (config.factor_dims.empty()) {
    throw ConfigError("factor_dims must declare at least one factor");
  }
  for (Eigen::Index d : config.factor_dims) {
    if (d < 1) {
      throw ConfigError("factor dimensions must be positive");
    }
  }
  const Eigen::Index dim = config.dim();
  if (dim < 2 || dim > kMaxDimension) {
    throw ConfigError("total dimension " + std::to_string(dim) + " outside [2, " +
                      std::to_string(kMaxDimension) + "]");
  }
  if (config.initial_state.size() != dim) {
    throw ConfigError("initial state has " + std::to_string(config.initial_state.size()) +
                      " amplitudes for dimension " + std::to_string(dim));
  }
  const double norm = config.initial_state.norm();
  if (std::abs(norm - 1.0) > 1e-6) {
    throw ConfigError("initial state norm " + std::to_string(norm) + " is not 1");
  }
  if (config.hamiltonian.rows() != dim || config.hamiltonian.cols() != dim) {
    throw ConfigError("hamiltonian must be a " + std::to_string(dim) + "x" +
                      std::to_string(dim) + " matrix");
  }
  if (max_abs(config.hamiltonian - config.hamiltonian.adjoint()) > 1e-10) {
    throw ConfigError("hamiltonian is not Hermitian");
  }
  if (config.events.empty()) {
    throw ConfigError("scenario declares no events");
  }
  double previous = 0.0;
  for (std::size_t e = 0; e < config.events.size(); ++e) {
    const double t = config.events[e].time;
    if (t < 0.0) {
      throw ConfigError("event times must be nonnegative");
    }
    if (e > 0 && t <= previous + kTimeSlack) {
      throw ConfigError("event times must be strictly increasing");
    }
    previous = t;
  }
  if (config.trials == 0) {
    throw ConfigError("trials must be positive");
  }
  if (config.schmidt_cut == 0 ||
      config.schmidt_cut >= static_cast<int>(config.factor_dims.size())) {
    throw ConfigError("schmidt_cut must split the factors into two nonempty groups");
  }
  for (const Matrix* extra : {config.conserved_observable ? &*config.conserved_observable
                                                          : nullptr,
                              config.collapse_foil_observable
                                  ? &*config.collapse_foil_observable
                                  : nullptr}) {
    if (extra != nullptr) {
      if (extra->rows() != dim || extra->cols() != dim ||
          max_abs(*extra - extra->adjoint()) > 1e-10) {
        throw ConfigError("declared observables must be Hermitian and full-dimension");
      }
    }
  }
  const double last_time = config.events.back().time;
  for (const CouplingSpec& coupling : config.couplings) {
    if (!(coupling.end > coupling.start) || coupling.start < 0.0) {
      throw ConfigError("coupling windows must satisfy 0 <= start < end");
    }
    if (coupling.end > last_time + kTimeSlack) {
      throw ConfigError("coupling window extends past the last event");
    }
    for (const EventSpec& event : config.events) {
      if (coupling.start < event.time - kTimeSlack &&
          event.time + kTimeSlack < coupling.end) {
        throw ConfigError("coupling window straddles the event at t=" +
                          std::to_string(event.time));
      }
    }
    if (coupling.interaction.rows() != dim || coupling.interaction.cols() != dim ||
        max_abs(coupling.interaction - coupling.interaction.adjoint()) > 1e-10) {
      throw ConfigError("coupling interactions must be Hermitian and full-dimension");
    }
  }
}

struct LoweredAxis {
  CandidateSet candidates;
  std::optional<CouplingSpec> coupling;
};

// Expands one axis event: candidate projectors (on the target directly, or on
// the pointer factor after a controlled flip switched on just before the
// event) plus the generated coupling.
LoweredAxis lower_axis_event(const ScenarioConfig& config, const EventSpec& event,
                             int pointer, double window_start) {
  const double theta = deg_to_rad(event.axis_deg);
  const Vector plus = axis_plus(theta);
  const Vector minus = axis_minus(theta);

  std::vector<std::string> names = event.names;
  if (names.empty()) {
    names = {"+", "-"};
  }
  if (names.size() != 2) {
    throw ConfigError("axis events have exactly two outcomes");
  }

  LoweredAxis lowered;
  lowered.candidates.labels = {{1.0}, {-1.0}};
  lowered.candidates.names = names;

  if (pointer < 0) {
    lowered.candidates.projectors = {
        embed(plus * plus.adjoint(), event.target, config.factor_dims),
        embed(minus * minus.adjoint(), event.target, config.factor_dims)};
    return lowered;
  }

  Matrix ket0 = zero_matrix(2);
  ket0(0, 0) = Complex(1.0, 0.0);
  Matrix ket1 = zero_matrix(2);
  ket1(1, 1) = Complex(1.0, 0.0);
  lowered.candidates.projectors = {
      embed(ket0, static_cast<std::size_t>(pointer), config.factor_dims),
      embed(ket1, static_cast<std::size_t>(pointer), config.factor_dims)};

  // Controlled flip: over the window, the minus eigenspace of the observable
  // drives the pointer qubit through exactly one X rotation (no stray phase).
  const double window = event.time - window_start;
  const Matrix control = embed(minus * minus.adjoint(), event.target, config.factor_dims);
  const Matrix flip = embed(identity_matrix(2) - pauli_x(),
                            static_cast<std::size_t>(pointer), config.factor_dims);
  CouplingSpec coupling;
  coupling.start = window_start;
  coupling.end = event.time;
  coupling.interaction = (kPi / (2.0 * window)) * (control * flip);
  lowered.coupling = coupling;
  return lowered;
}

std::vector<EvolutionSegment> build_segments(const ScenarioConfig& config,
                                             const std::vector<CouplingSpec>& couplings,
                                             const HermitianOperator& hamiltonian,
                                             double from, double to) {
  if (to - from <= kTimeSlack) {
    return {};
  }
  std::vector<double> boundaries = {from, to};
  for (const CouplingSpec& coupling : couplings) {
    for (double edge : {coupling.start, coupling.end}) {
      if (edge > from + kTimeSlack && edge < to - kTimeSlack) {
        boundaries.push_back(edge);
      }
    }
  }
  std::sort(boundaries.begin(), boundaries.end());

  std::vector<EvolutionSegment> segments;
  for (std::size_t b = 0; b + 1 < boundaries.size(); ++b) {
    const double x = boundaries[b];
    const double y = boundaries[b + 1];
    if (y - x <= kTimeSlack) {
      continue;
    }
    Matrix generator = hamiltonian.matrix();
    for (const CouplingSpec& coupling : couplings) {
      if (coupling.start <= x + kTimeSlack && y <= coupling.end + kTimeSlack) {
        generator += coupling.interaction;
      }
    }
    segments.push_back(
        {evolution_operator(HermitianOperator::symmetrized(std::move(generator)), y - x),
         y - x});
  }
  (void)config;
  return segments;
}

}  // namespace

std::vector<ScheduledEvent> lower_schedule(const ScenarioConfig& config) {
  validate_config(config);
  const Eigen::Index dim = config.dim();
  const std::size_t factors = config.factor_dims.size();
  const HermitianOperator hamiltonian = HermitianOperator::from_matrix(config.hamiltonian);

  std::set<std::size_t> targets;
  for (const EventSpec& event : config.events) {
    if (!event.candidates) {
      targets.insert(event.target);
    }
  }

  std::vector<CouplingSpec> couplings = config.couplings;
  std::set<std::size_t> consumed_pointers;
  std::vector<ScheduledEvent> lowered;
  double previous_time = 0.0;

  for (std::size_t e = 0; e < config.events.size(); ++e) {
    const EventSpec& event = config.events[e];
    ScheduledEvent scheduled;
    scheduled.time = event.time;

    if (event.candidates) {
      if (event.candidates->size() == 0) {
        throw ConfigError("explicit event has no candidates");
      }
      for (const Matrix& p : event.candidates->projectors) {
        if (p.rows() != dim || p.cols() != dim) {
          throw ConfigError("explicit candidate projectors must be full-dimension");
        }
      }
      scheduled.candidates = *event.candidates;
    } else {
      if (event.target >= factors) {
        throw ConfigError("event target factor out of range");
      }
      if (config.factor_dims[event.target] != 2) {
        throw ConfigError("axis events require a qubit target factor");
      }

      int pointer = event.pointer;
      if (pointer == kAutoPointer) {
        pointer = -1;
        for (std::size_t f = 0; f < factors; ++f) {
          if (targets.count(f) == 0 && consumed_pointers.count(f) == 0 &&
              config.factor_dims[f] == 2) {
            pointer = static_cast<int>(f);
            break;
          }
        }
        if (pointer < 0) {
          throw UnphysicatedSectorExhausted(
              "no never-observed factor left to record the event at t=" +
              std::to_string(event.time));
        }
      } else if (pointer != kNoPointer) {
        if (pointer < 0 || static_cast<std::size_t>(pointer) >= factors) {
          throw ConfigError("pointer factor out of range");
        }
        if (config.factor_dims[pointer] != 2) {
          throw ConfigError("pointer factors must be qubits");
        }
        if (targets.count(static_cast<std::size_t>(pointer)) > 0) {
          throw ConfigError("pointer factor is also an observed target");
        }
        if (consumed_pointers.count(static_cast<std::size_t>(pointer)) > 0) {
          throw UnphysicatedSectorExhausted("pointer factor " + std::to_string(pointer) +
                                            " already carries a record");
        }
      }

      double window_start = 0.0;
      if (pointer >= 0) {
        consumed_pointers.insert(static_cast<std::size_t>(pointer));
        const double gap = event.time - previous_time;
        if (gap <= kTimeSlack) {
          throw ConfigError("pointer coupling needs a positive window before t=" +
                            std::to_string(event.time));
        }
        window_start = event.time - std::min(0.2, 0.5 * gap);
      }
      LoweredAxis axis = lower_axis_event(config, event, pointer, window_start);
      scheduled.candidates = std::move(axis.candidates);
      if (axis.coupling) {
        couplings.push_back(std::move(*axis.coupling));
      }
    }

    lowered.push_back(std::move(scheduled));
    previous_time = event.time;
  }

  // Split every inter-event gap at coupling boundaries and cache one
  // propagator per piece.
  previous_time = 0.0;
  for (ScheduledEvent& scheduled : lowered) {
    scheduled.segments =
        build_segments(config, couplings, hamiltonian, previous_time, scheduled.time);
    previous_time = scheduled.time;
  }

  // Pointered events must leave the pointer perfectly correlated with the
  // observable eigenbasis on the undisturbed trajectory.
  Vector probe = config.initial_state / config.initial_state.norm();
  for (std::size_t e = 0; e < config.events.size(); ++e) {
    for (const EvolutionSegment& segment : lowered[e].segments) {
      probe = segment.op.matrix() * probe;
    }
    const EventSpec& event = config.events[e];
    if (!event.candidates && event.pointer != kNoPointer) {
      const double theta = deg_to_rad(event.axis_deg);
      const Matrix obs_plus = embed(axis_plus(theta) * axis_plus(theta).adjoint(),
                                    event.target, config.factor_dims);
      const Matrix obs_minus = embed(axis_minus(theta) * axis_minus(theta).adjoint(),
                                     event.target, config.factor_dims);
      const double cross =
          std::max((lowered[e].candidates.projectors[1] * (obs_plus * probe)).norm(),
                   (lowered[e].candidates.projectors[0] * (obs_minus * probe)).norm());
      if (cross > 1e-9) {
        throw ConfigError("coupling does not entangle the pointer with the observable "
                          "eigenbasis (cross weight " +
                          std::to_string(cross * cross) + ")");
      }
    }
  }
  return lowered;
}

// -- exact physication chain ----------------------------------------------------------

namespace {

struct PathNode {
  World world;
  double probability = 1.0;
  std::string key;
};

Vector preview_pre_state(const World& world, const ScheduledEvent& event) {
  Vector amplitudes = world.state.amplitudes();
  if (event.segments.empty()) {
    const double gap = event.time - world.time;
    if (gap > 0.0) {
      amplitudes = evolution_operator(world.hamiltonian, gap).matrix() * amplitudes;
    }
    return amplitudes;
  }
  for (const EvolutionSegment& segment : event.segments) {
    amplitudes = segment.op.matrix() * amplitudes;
  }
  return amplitudes;
}

}  // namespace

ExactChainResult physication_exact_chain(const ScenarioConfig& config,
                                         const std::vector<ScheduledEvent>& lowered,
                                         std::size_t cap) {
  const StateVector initial = make_state(config.initial_state);
  const HermitianOperator hamiltonian =
      HermitianOperator::from_matrix(config.hamiltonian);
  std::optional<HermitianOperator> conserved;
  double q0 = 0.0;
  if (config.conserved_observable) {
    conserved = HermitianOperator::from_matrix(*config.conserved_observable);
    q0 = expectation(initial, *conserved);
  }

  ExactChainResult result;
  std::vector<PathNode> nodes;
  nodes.push_back({make_world(initial, hamiltonian, config.mode, config.definite_tol),
                   1.0,
                   ""});

  for (const ScheduledEvent& event : lowered) {
    if (nodes.size() * event.candidates.size() > cap) {
      throw EnumerationCapError("physication path space exceeds the cap of " +
                                std::to_string(cap));
    }
    std::vector<PathNode> next;
    for (PathNode& node : nodes) {
      const Vector pre = preview_pre_state(node.world, event);
      std::vector<double> weights(event.candidates.size());
      for (std::size_t a = 0; a < event.candidates.size(); ++a) {
        weights[a] = (event.candidates.projectors[a] * pre).squaredNorm();
      }
      const std::size_t top = static_cast<std::size_t>(
          std::max_element(weights.begin(), weights.end()) - weights.begin());

      std::vector<std::size_t> branches;
      if (weights[top] >= 1.0 - config.definite_tol) {
        branches.push_back(top);
      } else {
        for (std::size_t a = 0; a < weights.size(); ++a) {
          if (weights[a] > tol::kZeroWeight) {
            branches.push_back(a);
          }
        }
      }

      for (const std::size_t a : branches) {
        PathNode child{node.world, node.probability, node.key};
        RngStream forced = RngStream::forced({a});
        const PhysicationOutcome outcome = step(child.world, event, forced);
        child.probability *= outcome.weight;
        child.key = child.key.empty() ? outcome.name : child.key + "," + outcome.name;

        if (conserved) {
          result.max_conserved_drift =
              std::max(result.max_conserved_drift,
                       std::abs(expectation(child.world.state, *conserved) - q0));
          const LedgerEvent& logged = child.world.ledger.back();
          if (!logged.trivial) {
            result.max_q_commutator = std::max(
                result.max_q_commutator,
                max_abs(commutator(logged.assignment_unitary, conserved->matrix())));
          }
        }
        next.push_back(std::move(child));
      }
    }
    nodes = std::move(next);
  }

  const SchmidtSplit split = schmidt_split(config);
  for (PathNode& node : nodes) {
    result.chain[node.key] += node.probability;
    result.path_count += 1;
    result.max_norm_deviation =
        std::max(result.max_norm_deviation,
                 std::abs(node.world.state.amplitudes().norm() - 1.0));
    const Matrix& u = node.world.accumulated_unitary;
    result.max_unitarity_defect =
        std::max(result.max_unitarity_defect,
                 max_abs(u * u.adjoint() - identity_matrix(u.rows())));
    if (config.schmidt_cut > 0) {
      result.max_schmidt_residual =
          std::max(result.max_schmidt_residual,
                   schmidt_residual(node.world.state.amplitudes(), split.left,
                                    split.right));
    }
    if (!verify_ledger(node.world)) {
      result.ledger_failures += 1;
    }
  }
  return result;
}

// -- monte carlo core --------------------------------------------------------------------

namespace {

struct TrialAccumulator {
  std::map<std::string, long long> counts;
  double max_norm_deviation = 0.0;
  double max_unitarity_defect = 0.0;
  double max_conserved_drift = 0.0;
  double max_schmidt_residual = 0.0;
  std::size_t ledger_failures = 0;
};

void merge_into(TrialAccumulator& total, const TrialAccumulator& part) {
  for (const auto& [key, count] : part.counts) {
    total.counts[key] += count;
  }
  total.max_norm_deviation = std::max(total.max_norm_deviation, part.max_norm_deviation);
  total.max_unitarity_defect =
      std::max(total.max_unitarity_defect, part.max_unitarity_defect);
  total.max_conserved_drift =
      std::max(total.max_conserved_drift, part.max_conserved_drift);
  total.max_schmidt_residual =
      std::max(total.max_schmidt_residual, part.max_schmidt_residual);
  total.ledger_failures += part.ledger_failures;
}

RunStatistics run_core(const ScenarioConfig& config, std::size_t stream_offset,
                       const TrialCallback& on_trial) {
  const auto started = std::chrono::steady_clock::now();
  const std::vector<ScheduledEvent> lowered = lower_schedule(config);
  const StateVector initial = make_state(config.initial_state);
  const HermitianOperator hamiltonian =
      HermitianOperator::from_matrix(config.hamiltonian);

  const ExactChainResult exact = physication_exact_chain(config, lowered);
  const ChainDistribution oracle =
      enumerate_collapse_chain(initial, hamiltonian, lowered);

  std::optional<HermitianOperator> conserved;
  double q0 = 0.0;
  if (config.conserved_observable) {
    conserved = HermitianOperator::from_matrix(*config.conserved_observable);
    q0 = expectation(initial, *conserved);
  }
  const SchmidtSplit split = schmidt_split(config);

  auto run_trial = [&](std::size_t trial, TrialAccumulator& acc) {
    RngStream stream = RngStream::from_master(config.seed, stream_offset + trial);
    World world = make_world(initial, hamiltonian, config.mode, config.definite_tol);
    std::vector<PhysicationOutcome> outcomes;
    outcomes.reserve(lowered.size());
    std::string key;
    for (const ScheduledEvent& event : lowered) {
      const PhysicationOutcome outcome = step(world, event, stream);
      key = key.empty() ? outcome.name : key + "," + outcome.name;
      if (conserved) {
        acc.max_conserved_drift =
            std::max(acc.max_conserved_drift,
                     std::abs(expectation(world.state, *conserved) - q0));
      }
      outcomes.push_back(outcome);
    }
    acc.counts[key] += 1;
    acc.max_norm_deviation = std::max(
        acc.max_norm_deviation, std::abs(world.state.amplitudes().norm() - 1.0));
    const Matrix& u = world.accumulated_unitary;
    acc.max_unitarity_defect =
        std::max(acc.max_unitarity_defect,
                 max_abs(u * u.adjoint() - identity_matrix(u.rows())));
    if (config.schmidt_cut > 0) {
      acc.max_schmidt_residual =
          std::max(acc.max_schmidt_residual,
                   schmidt_residual(world.state.amplitudes(), split.left, split.right));
    }
    if (!verify_ledger(world)) {
      acc.ledger_failures += 1;
    }
    if (on_trial) {
      on_trial(stream_offset + trial, world, outcomes);
    }
  };

  const std::size_t workers = worker_count();
  TrialAccumulator totals;
  if (workers <= 1) {
    for (std::size_t t = 0; t < config.trials; ++t) {
      run_trial(t, totals);
    }
  } else {
    std::vector<TrialAccumulator> locals(workers);
    std::vector<std::exception_ptr> failures(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t t = w; t < config.trials; t += workers) {
            run_trial(t, locals[w]);
          }
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
    for (std::thread& worker : pool) {
      worker.join();
    }
    for (const std::exception_ptr& failure : failures) {
      if (failure) {
        std::rethrow_exception(failure);
      }
    }
    for (const TrialAccumulator& local : locals) {
      merge_into(totals, local);
    }
  }

  RunStatistics stats;
  stats.exact_chain = exact.chain;
  stats.empirical_counts = std::move(totals.counts);

  double tvd = 0.0;
  for (const auto& [key, p] : oracle) {
    const auto it = stats.empirical_counts.find(key);
    const double freq =
        (it == stats.empirical_counts.end())
            ? 0.0
            : static_cast<double>(it->second) / static_cast<double>(config.trials);
    tvd += std::abs(freq - p);
  }
  for (const auto& [key, count] : stats.empirical_counts) {
    if (oracle.find(key) == oracle.end()) {
      tvd += static_cast<double>(count) / static_cast<double>(config.trials);
    }
  }
  stats.tvd_vs_oracle = 0.5 * tvd;

  stats.conserved_drift = std::max(exact.max_conserved_drift, totals.max_conserved_drift);
  stats.diagnostics["oracle_max_delta"] = max_map_delta(exact.chain, oracle);
  stats.diagnostics["exact_total"] = map_total(exact.chain);
  stats.diagnostics["oracle_total"] = map_total(oracle);
  stats.diagnostics["path_count"] = static_cast<double>(exact.path_count);
  stats.diagnostics["ledger_failures"] =
      static_cast<double>(exact.ledger_failures + totals.ledger_failures);
  stats.diagnostics["max_norm_deviation"] =
      std::max(exact.max_norm_deviation, totals.max_norm_deviation);
  stats.diagnostics["max_unitarity_defect"] =
      std::max(exact.max_unitarity_defect, totals.max_unitarity_defect);
  if (config.schmidt_cut > 0) {
    stats.diagnostics["max_schmidt_residual"] =
        std::max(exact.max_schmidt_residual, totals.max_schmidt_residual);
  }
  if (conserved) {
    stats.diagnostics["assignment_q_commutator"] = exact.max_q_commutator;
    stats.correlation_estimates["physication_drift"] = stats.conserved_drift;
  }

  // Conservation contrast: what the projection postulate would do to <Q> if
  // the final observation collapsed the declared foil observable instead.
  if (conserved && config.collapse_foil_observable) {
    // Fold through every event's segments to the last observation time.
    Vector probe = initial.amplitudes();
    double now = 0.0;
    for (const ScheduledEvent& event : lowered) {
      if (event.segments.empty()) {
        const double gap = event.time - now;
        if (gap > 0.0) {
          probe = evolution_operator(hamiltonian, gap).matrix() * probe;
        }
      } else {
        for (const EvolutionSegment& segment : event.segments) {
          probe = segment.op.matrix() * probe;
        }
      }
      now = event.time;
    }
    const StateVector at_last = StateVector::assume_normalized(probe);
    const SpectralDecomposition foil = spectral_decompose(
        HermitianOperator::from_matrix(*config.collapse_foil_observable));
    double foil_drift = 0.0;
    for (const EigenGroup& group : foil.groups) {
      Vector branch = group.projector * at_last.amplitudes();
      const double weight = branch.squaredNorm();
      if (weight <= tol::kZeroWeight) {
        continue;
      }
      const StateVector collapsed = make_state(std::move(branch));
      foil_drift =
          std::max(foil_drift, std::abs(expectation(collapsed, *conserved) - q0));
    }
    stats.correlation_estimates["collapse_foil_drift"] = foil_drift;
  }

  stats.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return stats;
}

// Same schedule with the event contents exchanged (times stay put), for the
// order-independence check on commuting observations.
ScenarioConfig swap_two_events(const ScenarioConfig& config) {
  ScenarioConfig swapped = config;
  std::swap(swapped.events[0], swapped.events[1]);
  std::swap(swapped.events[0].time, swapped.events[1].time);
  return swapped;
}

double order_swap_delta(const ScenarioConfig& config) {
  const std::map<std::string, double> direct =
      canonicalize_keys(physication_exact_chain(config, lower_schedule(config)).chain);
  const ScenarioConfig swapped = swap_two_events(config);
  const std::map<std::string, double> reversed =
      canonicalize_keys(physication_exact_chain(swapped, lower_schedule(swapped)).chain);
  return max_map_delta(direct, reversed);
}

// Correlation E = <s_a * s_b> of a two-event chain whose outcome names carry
// sign +1 at index 0 and -1 at index 1 for each event.
double correlation_from_chain(const std::map<std::string, double>& chain,
                              const std::vector<std::string>& alice_names,
                              const std::vector<std::string>& bob_names) {
  double e = 0.0;
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      const auto it = chain.find(alice_names[a] + "," + bob_names[b]);
      if (it != chain.end()) {
        e += (a == b ? 1.0 : -1.0) * it->second;
      }
    }
  }
  return e;
}

double correlation_from_counts(const std::map<std::string, long long>& counts,
                               const std::vector<std::string>& alice_names,
                               const std::vector<std::string>& bob_names) {
  double signed_sum = 0.0;
  double total = 0.0;
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      const auto it = counts.find(alice_names[a] + "," + bob_names[b]);
      if (it != counts.end()) {
        const double n = static_cast<double>(it->second);
        signed_sum += (a == b ? 1.0 : -1.0) * n;
        total += n;
      }
    }
  }
  return total > 0.0 ? signed_sum / total : 0.0;
}

struct ChshSetting {
  std::string tag;
  double sign;       // contribution of E to S
  double alice_deg;  // detector angle (halved Bloch angle)
  double bob_deg;
};

std::vector<ChshSetting> chsh_settings(const std::array<double, 4>& angles) {
  return {{"ab", 1.0, angles[0], angles[2]},
          {"ab'", -1.0, angles[0], angles[3]},
          {"a'b", 1.0, angles[1], angles[2]},
          {"a'b'", 1.0, angles[1], angles[3]}};
}

ScenarioConfig setting_config(const ScenarioConfig& base, const ChshSetting& setting) {
  ScenarioConfig config = base;
  config.chsh_angles.reset();
  config.events[0].axis_deg = 2.0 * setting.alice_deg;
  config.events[1].axis_deg = 2.0 * setting.bob_deg;
  return config;
}

void guard_epr_shape(const ScenarioConfig& config) {
  if (config.factor_dims != std::vector<Eigen::Index>{2, 2}) {
    throw ConfigError("EPR scenarios are two-qubit scenarios");
  }
  if (config.events.size() != 2 || config.events[0].candidates ||
      config.events[1].candidates) {
    throw ConfigError("EPR scenarios take exactly two axis events");
  }
  const std::size_t first = config.events[0].target;
  const std::size_t second = config.events[1].target;
  if (first == second || first > 1 || second > 1) {
    throw ConfigError("EPR events must observe the two qubits separately");
  }
  for (const EventSpec& event : config.events) {
    if (event.pointer != kNoPointer) {
      throw ConfigError("EPR events are measured directly, without pointers");
    }
  }
}

void guard_singlet(const ScenarioConfig& config) {
  const Vector normalized = config.initial_state / config.initial_state.norm();
  const Complex overlap = singlet_state().dot(normalized);
  if (std::norm(overlap) < 1.0 - 1e-9) {
    throw ConfigError("the CHSH preset requires a singlet initial state");
  }
}

}  // namespace

RunStatistics run_scenario(const ScenarioConfig& config, const TrialCallback& on_trial) {
  return run_core(config, 0, on_trial);
}

RunStatistics run_fresh_spin(const ScenarioConfig& config, const TrialCallback& on_trial) {
  if (config.dim() != 2) {
    throw ConfigError("fresh-spin scenarios are single-qubit scenarios");
  }
  if (config.events.size() != 1) {
    throw ConfigError("fresh-spin scenarios take exactly one event");
  }
  return run_core(config, 0, on_trial);
}

RunStatistics run_prepare_measure(const ScenarioConfig& config,
                                  const TrialCallback& on_trial) {
  bool pointered = false;
  for (const EventSpec& event : config.events) {
    if (!event.candidates && event.pointer != kNoPointer) {
      pointered = true;
    }
  }
  if (!pointered) {
    throw ConfigError("prepare-measure scenarios need a pointer-copy coupling");
  }
  ScenarioConfig effective = config;
  if (effective.schmidt_cut < 0) {
    effective.schmidt_cut = 1;  // product check across the system | pointer cut
  }
  return run_core(effective, 0, on_trial);
}

RunStatistics run_epr_chsh(const ScenarioConfig& config, const TrialCallback& on_trial) {
  guard_epr_shape(config);
  const std::vector<std::string> alice_names =
      config.events[0].names.empty() ? std::vector<std::string>{"+", "-"}
                                     : config.events[0].names;
  const std::vector<std::string> bob_names =
      config.events[1].names.empty() ? std::vector<std::string>{"+", "-"}
                                     : config.events[1].names;

  if (!config.chsh_angles) {
    RunStatistics stats = run_core(config, 0, on_trial);
    const double e = correlation_from_chain(stats.exact_chain, alice_names, bob_names);
    const std::string key = "E(" + fmt_angle(config.events[0].axis_deg) + "," +
                            fmt_angle(config.events[1].axis_deg) + ")";
    stats.correlation_estimates[key] = e;
    stats.correlation_estimates["E"] = e;
    stats.correlation_estimates["E_empirical"] =
        correlation_from_counts(stats.empirical_counts, alice_names, bob_names);
    stats.correlation_estimates["order_swap_max_delta"] = order_swap_delta(config);
    stats.diagnostics["order_swap_max_delta"] =
        stats.correlation_estimates["order_swap_max_delta"];
    return stats;
  }

  guard_singlet(config);
  const auto started = std::chrono::steady_clock::now();
  const std::vector<ChshSetting> settings = chsh_settings(*config.chsh_angles);
  const std::size_t base_trials = config.trials / settings.size();
  const std::size_t remainder = config.trials % settings.size();

  RunStatistics stats;
  double s_exact = 0.0;
  double s_empirical = 0.0;
  double swap_delta = 0.0;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const ChshSetting& setting = settings[i];
    ScenarioConfig sub = setting_config(config, setting);
    sub.trials = base_trials + (i < remainder ? 1 : 0);
    const RunStatistics part = run_core(sub, offset, on_trial);
    offset += sub.trials;

    const double e = correlation_from_chain(part.exact_chain, alice_names, bob_names);
    const std::string key = "E(" + fmt_angle(setting.alice_deg) + "," +
                            fmt_angle(setting.bob_deg) + ")";
    stats.correlation_estimates[key] = e;
    s_exact += setting.sign * e;
    s_empirical += setting.sign * correlation_from_counts(part.empirical_counts,
                                                          alice_names, bob_names);
    swap_delta = std::max(swap_delta, order_swap_delta(sub));

    for (const auto& [seq, p] : part.exact_chain) {
      stats.exact_chain[setting.tag + ":" + seq] = p / static_cast<double>(settings.size());
    }
    for (const auto& [seq, count] : part.empirical_counts) {
      stats.empirical_counts[setting.tag + ":" + seq] = count;
    }
    stats.conserved_drift = std::max(stats.conserved_drift, part.conserved_drift);
    for (const auto& [key2, value] : part.diagnostics) {
      if (key2 == "ledger_failures" || key2 == "path_count") {
        stats.diagnostics[key2] += value;
      } else {
        stats.diagnostics[key2] = std::max(stats.diagnostics[key2], value);
      }
    }
  }

  // Empirical TVD against the per-setting oracle, settings weighted equally.
  double tvd = 0.0;
  for (const auto& [seq, p] : stats.exact_chain) {
    const auto it = stats.empirical_counts.find(seq);
    const double freq = (it == stats.empirical_counts.end())
                            ? 0.0
                            : static_cast<double>(it->second) /
                                  static_cast<double>(config.trials);
    tvd += std::abs(freq - p);
  }
  stats.tvd_vs_oracle = 0.5 * tvd;

  stats.correlation_estimates["S"] = s_exact;
  stats.correlation_estimates["S_empirical"] = s_empirical;
  stats.correlation_estimates["order_swap_max_delta"] = swap_delta;
  stats.diagnostics["order_swap_max_delta"] = swap_delta;
  stats.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return stats;
}

RunStatistics run_sequential_chain(const ScenarioConfig& config,
                                   const TrialCallback& on_trial) {
  if (config.events.size() < 3) {
    throw ConfigError("sequential chains take at least three events");
  }
  return run_core(config, 0, on_trial);
}

RunStatistics run(const ScenarioConfig& config, const TrialCallback& on_trial) {
  switch (config.kind) {
    case ScenarioKind::kFreshSpin:
      return run_fresh_spin(config, on_trial);
    case ScenarioKind::kPrepareMeasure:
      return run_prepare_measure(config, on_trial);
    case ScenarioKind::kEpr:
      return run_epr_chsh(config, on_trial);
    case ScenarioKind::kSequentialChain:
      return run_sequential_chain(config, on_trial);
    case ScenarioKind::kConservation:
      if (!config.conserved_observable || !config.collapse_foil_observable) {
        throw ConfigError("conservation scenarios declare a conserved observable and a "
                          "collapse foil");
      }
      return run_scenario(config, on_trial);
    case ScenarioKind::kGeneric:
      break;
  }
  return run_scenario(config, on_trial);
}

// -- deterministic invariant suite -----------------------------------------------------

namespace {

void verify_single(const ScenarioConfig& config, const std::string& prefix,
                   std::vector<std::string>& violations) {
  const std::vector<ScheduledEvent> lowered = lower_schedule(config);
  const StateVector initial = make_state(config.initial_state);
  const HermitianOperator hamiltonian =
      HermitianOperator::from_matrix(config.hamiltonian);

  const ExactChainResult exact = physication_exact_chain(config, lowered);
  const ChainDistribution oracle =
      enumerate_collapse_chain(initial, hamiltonian, lowered);

  auto report = [&](const std::string& text) { violations.push_back(prefix + text); };

  if (std::abs(map_total(exact.chain) - 1.0) > 1e-9) {
    report("physication chain probabilities sum to " +
           std::to_string(map_total(exact.chain)));
  }
  if (std::abs(map_total(oracle) - 1.0) > 1e-9) {
    report("oracle chain probabilities sum to " + std::to_string(map_total(oracle)));
  }
  const double delta = max_map_delta(exact.chain, oracle);
  if (delta > 1e-9) {
    report("physication chain deviates from the oracle by " + std::to_string(delta));
  }
  if (exact.ledger_failures > 0) {
    report(std::to_string(exact.ledger_failures) + " enumerated paths fail ledger replay");
  }
  if (exact.max_norm_deviation > 1e-10) {
    report("state norm drifts by " + std::to_string(exact.max_norm_deviation));
  }
  if (exact.max_unitarity_defect > 1e-8) {
    report("accumulated evolution fails unitarity by " +
           std::to_string(exact.max_unitarity_defect));
  }
  if (config.schmidt_cut > 0 && exact.max_schmidt_residual > 1e-8) {
    report("post-measurement state is entangled across the declared cut (residual " +
           std::to_string(exact.max_schmidt_residual) + ")");
  }
  if (config.conserved_observable) {
    if (exact.max_conserved_drift > 1e-9) {
      report("conserved expectation drifts by " +
             std::to_string(exact.max_conserved_drift));
    }
    if (exact.max_q_commutator > 1e-9) {
      report("assignment unitaries fail to commute with the conserved observable by " +
             std::to_string(exact.max_q_commutator));
    }
  }

  // Dropping the last event must reproduce the truncated chain exactly.
  if (lowered.size() >= 2) {
    std::vector<ScheduledEvent> truncated(lowered.begin(), lowered.end() - 1);
    const ChainDistribution shorter =
        enumerate_collapse_chain(initial, hamiltonian, truncated);
    std::map<std::string, double> marginal;
    for (const auto& [key, p] : oracle) {
      const std::size_t comma = key.rfind(',');
      marginal[comma == std::string::npos ? "" : key.substr(0, comma)] += p;
    }
    const double marginal_delta = max_map_delta(marginal, shorter);
    if (marginal_delta > 1e-10) {
      report("marginalizing the last event deviates from the truncated chain by " +
             std::to_string(marginal_delta));
    }
  }
}

}  // namespace

std::vector<std::string> verify_scenario(const ScenarioConfig& config) {
  std::vector<std::string> violations;
  if (config.kind == ScenarioKind::kEpr) {
    guard_epr_shape(config);
  }
  if (config.chsh_angles) {
    guard_singlet(config);
    for (const ChshSetting& setting : chsh_settings(*config.chsh_angles)) {
      const ScenarioConfig sub = setting_config(config, setting);
      verify_single(sub, "[" + setting.tag + "] ", violations);
      const double swap_delta = order_swap_delta(sub);
      if (swap_delta > 1e-9) {
        violations.push_back("[" + setting.tag + "] event order changes the chain by " +
                             std::to_string(swap_delta));
      }
    }
    return violations;
  }
  verify_single(config, "", violations);
  if (config.kind == ScenarioKind::kEpr) {
    const double swap_delta = order_swap_delta(config);
    if (swap_delta > 1e-9) {
      violations.push_back("event order changes the chain by " +
                           std::to_string(swap_delta));
    }
  }
  if (config.kind == ScenarioKind::kConservation) {
    if (!config.conserved_observable || !config.collapse_foil_observable) {
      throw ConfigError("conservation scenarios declare a conserved observable and a "
                        "collapse foil");
    }
    // The textbook foil must actually break the conservation law.
    ScenarioConfig probe = config;
    probe.trials = 1;
    const RunStatistics stats = run_scenario(probe);
    const auto it = stats.correlation_estimates.find("collapse_foil_drift");
    if (it == stats.correlation_estimates.end() || it->second < 1e-3) {
      violations.push_back("collapse foil shifts the conserved expectation by only " +
                           std::to_string(it == stats.correlation_estimates.end()
                                              ? 0.0
                                              : it->second));
    }
  }
  return violations;
}

// -- schedule description ---------------------------------------------------------------

std::string describe_schedule(const ScenarioConfig& config) {
  const std::vector<ScheduledEvent> lowered = lower_schedule(config);
  std::string out;
  char line[256];

  std::snprintf(line, sizeof line, "scenario %s  (mode %s, trials %zu, seed %llu)\n",
                config.name.c_str(),
                config.mode == AssignmentMode::kStrict ? "strict" : "free",
                config.trials, static_cast<unsigned long long>(config.seed));
  out += line;

  out += "factors: [";
  for (std::size_t f = 0; f < config.factor_dims.size(); ++f) {
    std::snprintf(line, sizeof line, "%s%lld", f > 0 ? ", " : "",
                  static_cast<long long>(config.factor_dims[f]));
    out += line;
  }
  std::snprintf(line, sizeof line, "]  (dimension %lld)\n",
                static_cast<long long>(config.dim()));
  out += line;

  if (config.chsh_angles) {
    const auto& a = *config.chsh_angles;
    std::snprintf(line, sizeof line,
                  "detector angles: a=%g a'=%g b=%g b' =%g degrees (axis = twice the "
                  "angle)\n",
                  a[0], a[1], a[2], a[3]);
    out += line;
  }

  for (std::size_t e = 0; e < config.events.size(); ++e) {
    const EventSpec& event = config.events[e];
    if (event.candidates) {
      std::snprintf(line, sizeof line, "t=%-8g explicit candidates [", event.time);
      out += line;
    } else {
      const char* pointer_note = event.pointer == kNoPointer    ? "direct"
                                 : event.pointer == kAutoPointer ? "pointer auto"
                                                                  : "pointer fixed";
      std::snprintf(line, sizeof line, "t=%-8g axis %g deg on factor %zu (%s) [",
                    event.time, event.axis_deg, event.target, pointer_note);
      out += line;
    }
    const CandidateSet& candidates = lowered[e].candidates;
    for (std::size_t a = 0; a < candidates.size(); ++a) {
      out += (a > 0 ? ", " : "") + candidates.names[a];
    }
    std::snprintf(line, sizeof line, "]  %zu evolution segment(s)\n",
                  lowered[e].segments.size());
    out += line;
  }

  if (!config.couplings.empty()) {
    std::snprintf(line, sizeof line, "declared couplings: %zu\n",
                  config.couplings.size());
    out += line;
  }
  return out;
}

}  // namespace physim
