#include "hybrid/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <initializer_list>
#include <limits>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "hybrid/dynamics.hpp"
#include "hybrid/fock.hpp"
#include "hybrid/maps.hpp"
#include "hybrid/oracle.hpp"

namespace hybrid {
namespace {

using Json = nlohmann::ordered_json;

// Above this product-space size the oracle switches from one dense
// eigendecomposition to Lanczos propagation per time point.
constexpr int kDenseOracleLimit = 2048;
// Roundoff allowance when testing lower <= P_oracle <= upper.
constexpr double kVerdictSlack = 1e-12;
constexpr double kDegeneracyTol = 1e-9;
constexpr double kDriftLimit = 1e-6;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ScenarioError(fmt::format("{}: {}", path, what));
}

const Json& field(const Json& j, const std::string& path, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(path, fmt::format("missing field '{}'", key));
  return *it;
}

void check_object(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

const Json& as_array(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

void check_known_keys(const Json& j, const std::string& path,
                      std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool known = std::any_of(
        allowed.begin(), allowed.end(),
        [&](const char* key) { return it.key() == key; });
    if (!known) fail(path, fmt::format("unknown field '{}'", it.key()));
  }
}

double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int as_integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

bool as_boolean(const Json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<int> as_int_vector(const Json& j, const std::string& path) {
  as_array(j, path);
  std::vector<int> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_integer(j[i], fmt::format("{}[{}]", path, i)));
  }
  return out;
}

std::vector<double> as_number_vector(const Json& j, const std::string& path) {
  as_array(j, path);
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_number(j[i], fmt::format("{}[{}]", path, i)));
  }
  return out;
}

StateSpec parse_state_spec(const Json& j, const std::string& path) {
  check_object(j, path);
  const std::string type =
      as_string(field(j, path, "type"), path + ".type");
  StateSpec spec;
  if (type == "ground") {
    check_known_keys(j, path, {"type"});
    spec.kind = StateSpec::Kind::ground;
  } else if (type == "coherent") {
    check_known_keys(j, path, {"type", "center_q", "center_p"});
    spec.kind = StateSpec::Kind::coherent;
    spec.center_q =
        as_number(field(j, path, "center_q"), path + ".center_q");
    spec.center_p =
        as_number(field(j, path, "center_p"), path + ".center_p");
  } else if (type == "amplitudes") {
    check_known_keys(j, path, {"type", "values"});
    spec.kind = StateSpec::Kind::amplitudes;
    const Json& values =
        as_array(field(j, path, "values"), path + ".values");
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::string entry = fmt::format("{}.values[{}]", path, i);
      const Json& pair = as_array(values[i], entry);
      if (pair.size() != 2) fail(entry, "expected [re, im]");
      spec.amplitudes.emplace_back(as_number(pair[0], entry + "[0]"),
                                   as_number(pair[1], entry + "[1]"));
    }
  } else {
    fail(path + ".type", fmt::format("unknown state type '{}'", type));
  }
  return spec;
}

Json state_spec_json(const StateSpec& spec) {
  Json j;
  switch (spec.kind) {
    case StateSpec::Kind::ground:
      j["type"] = "ground";
      break;
    case StateSpec::Kind::coherent:
      j["type"] = "coherent";
      j["center_q"] = spec.center_q;
      j["center_p"] = spec.center_p;
      break;
    case StateSpec::Kind::amplitudes: {
      j["type"] = "amplitudes";
      Json values = Json::array();
      for (const Complex& a : spec.amplitudes) {
        values.push_back(Json::array({a.real(), a.imag()}));
      }
      j["values"] = std::move(values);
      break;
    }
  }
  return j;
}

SectorState build_state(const StateSpec& spec, int dim, double hbar,
                        const char* name) {
  switch (spec.kind) {
    case StateSpec::Kind::ground:
      return coherent_state(0.0, 0.0, dim, hbar);
    case StateSpec::Kind::coherent:
      return coherent_state(spec.center_q, spec.center_p, dim, hbar);
    case StateSpec::Kind::amplitudes: {
      if (static_cast<int>(spec.amplitudes.size()) > dim) {
        fail(name, fmt::format("{} amplitudes exceed dimension {}",
                               spec.amplitudes.size(), dim));
      }
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
      for (std::size_t i = 0; i < spec.amplitudes.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = spec.amplitudes[i];
      }
      try {
        return SectorState(std::move(v), hbar);
      } catch (const std::exception& e) {
        fail(name, e.what());
      }
    }
  }
  throw std::logic_error("unreachable state kind");
}

HybridObservable generator_observable(int generator, double hbar) {
  if (generator <= 2) {
    return HybridObservable::classical_generator(1, generator, hbar);
  }
  return HybridObservable::quantum(
      1, hbar, OperatorPolynomial::generator(GeneratorId(generator), hbar));
}

Sector sector_of(int generator) {
  return generator <= 2 ? Sector::classical : Sector::quantum;
}

Eigen::MatrixXcd sector_matrix(int generator, const FullDims& dims,
                               double hbar) {
  const int dim = generator <= 2 ? dims.dim_c : dims.dim_q;
  return generator % 2 == 1 ? position_matrix(dim, hbar)
                            : momentum_matrix(dim, hbar);
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  const int workers = std::min(threads, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto drain = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<EvolvedTerm> flatten_terms(const HybridObservable& a) {
  std::vector<EvolvedTerm> out;
  for (const auto& [idx, op] : a.terms()) {
    for (const auto& [word, coeff] : op.terms()) {
      EvolvedTerm term;
      term.classical_exponents = idx.exponents();
      for (const GeneratorId& g : word) term.quantum_word.push_back(g.index());
      term.coeff = coeff;
      out.push_back(std::move(term));
    }
  }
  return out;
}

// Oracle interval probabilities indexed [time][observable][interval].
std::vector<std::vector<std::vector<double>>> oracle_layer(
    const Scenario& sc, const OperatorPolynomial& h_op,
    const SectorState& phi_c, const SectorState& phi_q) {
  const FullDims dims{phi_c.dim(), phi_q.dim()};
  const FullState psi0 = FullState::product(phi_c, phi_q);

  std::vector<FullState> states;
  states.reserve(sc.times.size());
  if (dims.total() <= kDenseOracleLimit) {
    const HermitianEigen eig = hermitian_eigen(full_operator(h_op, dims));
    for (const double t : sc.times) states.push_back(propagate(psi0, eig, t));
  } else {
    const FullOperatorAction action(h_op, dims);
    for (const double t : sc.times) {
      states.push_back(krylov_propagate(psi0, action, t));
    }
  }

  std::vector<std::vector<std::vector<double>>> probs(sc.times.size());
  for (std::size_t ti = 0; ti < sc.times.size(); ++ti) {
    probs[ti].resize(sc.observables.size());
    for (std::size_t oi = 0; oi < sc.observables.size(); ++oi) {
      const ObservableSpec& os = sc.observables[oi];
      const Eigen::MatrixXcd op = sector_matrix(os.generator, dims, sc.hbar);
      for (const Interval& interval : os.intervals) {
        probs[ti][oi].push_back(measure_mode_interval(
            states[ti], op, sector_of(os.generator), interval));
      }
    }
  }
  return probs;
}

bool nan_equal(double a, double b) {
  return a == b || (std::isnan(a) && std::isnan(b));
}

Json finite_or_null(double v) {
  if (std::isnan(v)) return Json(nullptr);
  return Json(v);
}

double null_to_nan(const Json& j, const std::string& path) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return as_number(j, path);
}

}  // namespace

void Scenario::validate() const {
  if (!std::isfinite(hbar) || hbar <= 0.0) fail("hbar", "must be positive");
  if (classical_data.centers.size() != 2) {
    fail("classical_data",
         "the runner supports exactly one classical mode (two centers)");
  }
  try {
    classical_data.validate();
  } catch (const std::exception& e) {
    fail("classical_data", e.what());
  }

  if (hamiltonian.empty()) fail("hamiltonian", "must contain at least one term");
  for (std::size_t i = 0; i < hamiltonian.size(); ++i) {
    const HamiltonianTerm& term = hamiltonian[i];
    const std::string path = fmt::format("hamiltonian[{}]", i);
    if (!std::isfinite(term.coeff.real()) ||
        !std::isfinite(term.coeff.imag())) {
      fail(path + ".coeff", "must be finite");
    }
    if (term.classical_exponents.size() != 2) {
      fail(path + ".classical_exponents", "expected 2 entries (q, then p)");
    }
    for (const int e : term.classical_exponents) {
      if (e < 0) fail(path + ".classical_exponents", "must be non-negative");
    }
    for (const int g : term.quantum_word) {
      if (g != 3 && g != 4) {
        fail(path + ".quantum_word",
             fmt::format("generator {} is not in the quantum sector", g));
      }
    }
  }

  if (times.empty()) fail("times", "must contain at least one time");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) {
      fail(fmt::format("times[{}]", i), "must be finite");
    }
  }

  if (observables.empty()) fail("observables", "must not be empty");
  std::set<std::string> names;
  for (std::size_t i = 0; i < observables.size(); ++i) {
    const ObservableSpec& os = observables[i];
    const std::string path = fmt::format("observables[{}]", i);
    if (os.name.empty()) fail(path + ".name", "must not be empty");
    if (!names.insert(os.name).second) {
      fail(path + ".name", fmt::format("duplicate observable '{}'", os.name));
    }
    if (os.generator < 1 || os.generator > 4) {
      fail(path + ".generator", "must lie in 1..4");
    }
    for (std::size_t k = 0; k < os.intervals.size(); ++k) {
      const Interval& iv = os.intervals[k];
      const std::string ipath =
          fmt::format("intervals.{}[{}]", os.name, k);
      if (!std::isfinite(iv.center)) fail(ipath + ".center", "must be finite");
      if (!std::isfinite(iv.half_width) || iv.half_width <= 0.0) {
        fail(ipath + ".half_width", "must be positive");
      }
    }
  }

  if (p_values.empty()) fail("p_values", "must not be empty");
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    if (!(p_values[i] >= 0.0 && p_values[i] < 1.0)) {
      fail(fmt::format("p_values[{}]", i), "must lie in [0, 1)");
    }
  }

  if (order_L.empty()) fail("order_L", "must not be empty");
  for (std::size_t i = 0; i < order_L.size(); ++i) {
    if (order_L[i] != 1 && order_L[i] != 2) {
      fail(fmt::format("order_L[{}]", i), "supported orders are 1 and 2");
    }
  }

  if (dim_c < 2) fail("dims.classical", "must be at least 2");
  if (dim_q < 2) fail("dims.quantum", "must be at least 2");
  if (max_order < 1) fail("evolution.max_order", "must be at least 1");
  if (!std::isfinite(tail_tolerance) || tail_tolerance < 0.0) {
    fail("evolution.tail_tolerance", "must be non-negative");
  }

  for (const auto& [spec, name, dim] :
       {std::tuple<const StateSpec&, const char*, int>{phi_c, "phi_c", dim_c},
        std::tuple<const StateSpec&, const char*, int>{phi_q, "phi_q",
                                                       dim_q}}) {
    if (spec.kind == StateSpec::Kind::coherent &&
        (!std::isfinite(spec.center_q) || !std::isfinite(spec.center_p))) {
      fail(name, "coherent centers must be finite");
    }
    if (spec.kind == StateSpec::Kind::amplitudes) {
      if (spec.amplitudes.empty()) {
        fail(fmt::format("{}.values", name), "must not be empty");
      }
      if (static_cast<int>(spec.amplitudes.size()) > dim) {
        fail(fmt::format("{}.values", name),
             fmt::format("more entries than the sector dimension {}", dim));
      }
    }
  }

  if (!is_hermitian(hamiltonian_observable(), 1e-10)) {
    fail("hamiltonian", "must be Hermitian");
  }
}

HybridObservable Scenario::hamiltonian_observable() const {
  HybridObservable h(1, hbar);
  for (const HamiltonianTerm& term : hamiltonian) {
    std::vector<GeneratorId> gens;
    gens.reserve(term.quantum_word.size());
    for (const int g : term.quantum_word) gens.emplace_back(g);
    h.add_term(ClassicalMultiIndex(term.classical_exponents),
               OperatorPolynomial::monomial(term.coeff,
                                            Word(std::move(gens)), hbar));
  }
  return h;
}

Scenario parse_scenario(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(fmt::format("scenario: invalid JSON ({})", e.what()));
  }
  check_object(j, "scenario");
  check_known_keys(j, "scenario",
                   {"hamiltonian", "hbar", "classical_data", "phi_c", "phi_q",
                    "times", "observables", "intervals", "p_values",
                    "order_L", "dims", "evolution"});

  Scenario sc;

  const Json& ham =
      as_array(field(j, "scenario", "hamiltonian"), "hamiltonian");
  for (std::size_t i = 0; i < ham.size(); ++i) {
    const std::string path = fmt::format("hamiltonian[{}]", i);
    check_object(ham[i], path);
    check_known_keys(ham[i], path,
                     {"coeff_re", "coeff_im", "classical_exponents",
                      "quantum_word"});
    HamiltonianTerm term;
    term.coeff = {as_number(field(ham[i], path, "coeff_re"),
                            path + ".coeff_re"),
                  as_number(field(ham[i], path, "coeff_im"),
                            path + ".coeff_im")};
    term.classical_exponents =
        as_int_vector(field(ham[i], path, "classical_exponents"),
                      path + ".classical_exponents");
    term.quantum_word = as_int_vector(field(ham[i], path, "quantum_word"),
                                      path + ".quantum_word");
    sc.hamiltonian.push_back(std::move(term));
  }

  sc.hbar = as_number(field(j, "scenario", "hbar"), "hbar");

  {
    const Json& cd = field(j, "scenario", "classical_data");
    check_object(cd, "classical_data");
    check_known_keys(cd, "classical_data", {"centers", "margins"});
    sc.classical_data.centers = as_number_vector(
        field(cd, "classical_data", "centers"), "classical_data.centers");
    sc.classical_data.margins = as_number_vector(
        field(cd, "classical_data", "margins"), "classical_data.margins");
  }

  sc.phi_c = parse_state_spec(field(j, "scenario", "phi_c"), "phi_c");
  sc.phi_q = parse_state_spec(field(j, "scenario", "phi_q"), "phi_q");
  sc.times = as_number_vector(field(j, "scenario", "times"), "times");

  const Json& obs =
      as_array(field(j, "scenario", "observables"), "observables");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::string path = fmt::format("observables[{}]", i);
    check_object(obs[i], path);
    check_known_keys(obs[i], path, {"name", "generator"});
    ObservableSpec spec;
    spec.name = as_string(field(obs[i], path, "name"), path + ".name");
    spec.generator =
        as_integer(field(obs[i], path, "generator"), path + ".generator");
    sc.observables.push_back(std::move(spec));
  }

  {
    const Json& ivs = field(j, "scenario", "intervals");
    check_object(ivs, "intervals");
    for (auto it = ivs.begin(); it != ivs.end(); ++it) {
      const bool known = std::any_of(
          sc.observables.begin(), sc.observables.end(),
          [&](const ObservableSpec& o) { return o.name == it.key(); });
      if (!known) {
        fail("intervals",
             fmt::format("no observable named '{}'", it.key()));
      }
    }
    for (ObservableSpec& spec : sc.observables) {
      const std::string path = fmt::format("intervals.{}", spec.name);
      const Json& list =
          as_array(field(ivs, "intervals", spec.name.c_str()), path);
      for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string ipath = fmt::format("{}[{}]", path, k);
        check_object(list[k], ipath);
        check_known_keys(list[k], ipath, {"center", "half_width"});
        spec.intervals.push_back(
            {as_number(field(list[k], ipath, "center"), ipath + ".center"),
             as_number(field(list[k], ipath, "half_width"),
                       ipath + ".half_width")});
      }
    }
  }

  sc.p_values = as_number_vector(field(j, "scenario", "p_values"),
                                 "p_values");

  {
    const Json& orders = field(j, "scenario", "order_L");
    if (orders.is_array()) {
      sc.order_L = as_int_vector(orders, "order_L");
    } else {
      sc.order_L = {as_integer(orders, "order_L")};
    }
  }

  {
    const Json& dims = field(j, "scenario", "dims");
    check_object(dims, "dims");
    check_known_keys(dims, "dims", {"classical", "quantum"});
    sc.dim_c = as_integer(field(dims, "dims", "classical"), "dims.classical");
    sc.dim_q = as_integer(field(dims, "dims", "quantum"), "dims.quantum");
  }

  {
    const Json& evo = field(j, "scenario", "evolution");
    check_object(evo, "evolution");
    check_known_keys(evo, "evolution",
                     {"max_order", "tail_tolerance", "convergence_check"});
    sc.max_order = as_integer(field(evo, "evolution", "max_order"),
                              "evolution.max_order");
    if (evo.contains("tail_tolerance")) {
      sc.tail_tolerance =
          as_number(evo["tail_tolerance"], "evolution.tail_tolerance");
    }
    if (evo.contains("convergence_check")) {
      sc.convergence_check =
          as_boolean(evo["convergence_check"], "evolution.convergence_check");
    }
  }

  sc.validate();
  return sc;
}

std::string scenario_to_json(const Scenario& s) {
  Json j;
  j["hamiltonian"] = Json::array();
  for (const HamiltonianTerm& term : s.hamiltonian) {
    Json t;
    t["coeff_re"] = term.coeff.real();
    t["coeff_im"] = term.coeff.imag();
    t["classical_exponents"] = term.classical_exponents;
    t["quantum_word"] = term.quantum_word;
    j["hamiltonian"].push_back(std::move(t));
  }
  j["hbar"] = s.hbar;
  j["classical_data"]["centers"] = s.classical_data.centers;
  j["classical_data"]["margins"] = s.classical_data.margins;
  j["phi_c"] = state_spec_json(s.phi_c);
  j["phi_q"] = state_spec_json(s.phi_q);
  j["times"] = s.times;
  j["observables"] = Json::array();
  for (const ObservableSpec& os : s.observables) {
    Json o;
    o["name"] = os.name;
    o["generator"] = os.generator;
    j["observables"].push_back(std::move(o));
  }
  j["intervals"] = Json::object();
  for (const ObservableSpec& os : s.observables) {
    Json list = Json::array();
    for (const Interval& iv : os.intervals) {
      Json entry;
      entry["center"] = iv.center;
      entry["half_width"] = iv.half_width;
      list.push_back(std::move(entry));
    }
    j["intervals"][os.name] = std::move(list);
  }
  j["p_values"] = s.p_values;
  j["order_L"] = s.order_L;
  j["dims"]["classical"] = s.dim_c;
  j["dims"]["quantum"] = s.dim_q;
  j["evolution"]["max_order"] = s.max_order;
  j["evolution"]["tail_tolerance"] = s.tail_tolerance;
  j["evolution"]["convergence_check"] = s.convergence_check;
  return j.dump(2) + "\n";
}

Scenario example_scenario(const std::string& name) {
  if (name != "coupled-oscillator") {
    throw ScenarioError(
        fmt::format("example: unknown scenario '{}'", name));
  }
  Scenario sc;
  sc.hamiltonian = {
      {{0.5, 0.0}, {2, 0}, {}},
      {{0.5, 0.0}, {0, 2}, {}},
      {{0.1, 0.0}, {0, 1}, {3}},
  };
  sc.hbar = 1.0;
  sc.classical_data.centers = {1.0, 1.0};
  sc.classical_data.margins = {1.0, 1.0};
  sc.phi_c.kind = StateSpec::Kind::coherent;
  sc.phi_c.center_q = 1.0;
  sc.phi_c.center_p = 1.0;
  sc.phi_q.kind = StateSpec::Kind::ground;
  sc.times = {0.5, 1.0, 2.0};

  auto grid = [](std::initializer_list<double> centers, double half_width) {
    std::vector<Interval> out;
    for (const double c : centers) out.push_back({c, half_width});
    return out;
  };
  // Half-widths keep every interval measurable (half_width > 2 spread) at
  // p = 0.9999, where the classical spreads reach ~138 at first order and
  // the momentum coupling spread ~23. Endpoints sit deep in the spectral
  // tails: an endpoint inside the bulk would make the truncated spectral
  // measure oscillate at the percent level as eigenvalues cross it when
  // the dimension doubles, and the convergence check would rightly flag
  // the run.
  sc.observables = {
      {"q", 1, grid({-6.0, -3.0, 0.0, 3.0, 6.0}, 300.0)},
      {"x", 2, grid({-6.0, -3.0, 0.0, 3.0, 6.0}, 300.0)},
      {"Q", 3, grid({-3.0, -1.5, 0.0, 1.5, 3.0}, 8.0)},
      {"P", 4, grid({-2.0, -1.0, 0.0, 1.0, 2.0}, 50.0)},
  };
  sc.p_values = {0.9999};
  sc.order_L = {1, 2};
  sc.dim_c = 40;
  sc.dim_q = 40;
  sc.max_order = 25;
  sc.tail_tolerance = 1e-8;
  sc.convergence_check = true;
  return sc;
}

ResultBundle run_scenario(const Scenario& sc, unsigned seed, int threads) {
  sc.validate();
  if (threads < 1) throw ScenarioError("threads: must be at least 1");

  const int n_t = static_cast<int>(sc.times.size());
  const int n_o = static_cast<int>(sc.observables.size());
  const int grid = n_t * n_o;
  const HybridObservable h = sc.hamiltonian_observable();
  const OperatorPolynomial h_op = to_operator(h);
  const PhasePoint centers{sc.classical_data.centers};

  ResultBundle r;
  r.seed = seed;
  r.max_probability_drift = 0.0;

  const SectorState phi_c = build_state(sc.phi_c, sc.dim_c, sc.hbar, "phi_c");
  const SectorState phi_q = build_state(sc.phi_q, sc.dim_q, sc.hbar, "phi_q");

  std::vector<HybridObservable> base;
  base.reserve(n_o);
  for (const ObservableSpec& os : sc.observables) {
    base.push_back(generator_observable(os.generator, sc.hbar));
  }

  std::vector<std::optional<EvolutionResult>> evolved(grid);
  parallel_for(grid, threads, [&](int i) {
    const int ti = i / n_o;
    const int oi = i % n_o;
    EvolutionConfig cfg;
    cfg.time = sc.times[ti];
    cfg.max_order = sc.max_order;
    cfg.tail_tolerance = sc.tail_tolerance;
    try {
      evolved[i] = evolve_series(base[oi], h, cfg);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(
          fmt::format("evolving {} to t={:g}: {}", sc.observables[oi].name,
                      sc.times[ti], e.what()),
          e.tail_norm());
    }
  });

  for (int i = 0; i < grid; ++i) {
    EvolvedRecord rec;
    rec.time = sc.times[i / n_o];
    rec.observable = sc.observables[i % n_o].name;
    rec.tail_norm = evolved[i]->tail_norm;
    rec.terms = flatten_terms(evolved[i]->value);
    r.evolved.push_back(std::move(rec));
  }

  {
    std::vector<HybridObservable> all_values;
    all_values.reserve(grid);
    for (int i = 0; i < grid; ++i) all_values.push_back(evolved[i]->value);
    std::set<Sequence> seqs;
    for (const int order : sc.order_L) {
      for (Sequence& s : relevant_sequences(all_values, order)) {
        seqs.insert(std::move(s));
      }
    }
    r.classicality = check_classicality(
        phi_c, sc.classical_data,
        std::vector<Sequence>(seqs.begin(), seqs.end()));
    r.classicality_pass = r.classicality.pass;
    if (!r.classicality_pass) {
      r.warnings.emplace_back(
          "inconsistent initial data: a relevant error-ket norm exceeds its "
          "margin bound");
    }
  }

  std::vector<SpectrumTable> tables(grid);
  std::vector<double> numerators(grid, 0.0);
  parallel_for(grid, threads, [&](int i) {
    const HybridObservable& value = evolved[i]->value;
    const HybridEigensystem eig =
        hybrid_eigensystem(value, centers, phi_q, sc.dim_q);
    tables[i] = cluster_spectrum(eig, kDegeneracyTol);
    double numerator = 0.0;
    for (Eigen::Index k = 0; k < eig.eigenvectors.cols(); ++k) {
      numerator = std::max(
          numerator, spread_bound(value, sc.classical_data,
                                  eig.eigenvectors.col(k), 0.0, 1));
    }
    numerators[i] = numerator;
  });

  for (int i = 0; i < grid; ++i) {
    r.spectra.push_back({sc.times[i / n_o], sc.observables[i % n_o].name,
                         tables[i].entries});
  }

  const auto oracle_probs = oracle_layer(sc, h_op, phi_c, phi_q);

  r.verdicts_pass = true;
  for (int ti = 0; ti < n_t; ++ti) {
    for (int oi = 0; oi < n_o; ++oi) {
      const ObservableSpec& os = sc.observables[oi];
      const int i = ti * n_o + oi;
      for (const double p : sc.p_values) {
        for (const int order : sc.order_L) {
          const double spread =
              numerators[i] / std::pow(1.0 - p, 1.0 / (2.0 * order));
          r.spreads.push_back({sc.times[ti], os.name, p, order,
                               numerators[i], spread});
          for (std::size_t vi = 0; vi < os.intervals.size(); ++vi) {
            const Interval& interval = os.intervals[vi];
            BoundRow row;
            row.time = sc.times[ti];
            row.observable = os.name;
            row.p = p;
            row.order = order;
            row.interval = interval;
            row.oracle = oracle_probs[ti][oi][vi];
            if (interval.half_width > 2.0 * spread) {
              const SandwichBounds sb =
                  sandwich_bounds(tables[i], interval, spread, p, order);
              row.lower = sb.lower;
              row.upper = sb.upper;
              const bool ok = row.oracle >= sb.lower - kVerdictSlack &&
                              row.oracle <= sb.upper + kVerdictSlack;
              row.verdict = ok ? "pass" : "fail";
              r.verdicts_pass = r.verdicts_pass && ok;
            } else {
              row.lower = std::numeric_limits<double>::quiet_NaN();
              row.upper = std::numeric_limits<double>::quiet_NaN();
              row.verdict = "inapplicable";
            }
            r.bounds.push_back(std::move(row));
          }
        }
      }
    }
  }

  r.converged = true;
  if (sc.convergence_check) {
    const SectorState phi_c2 =
        build_state(sc.phi_c, 2 * sc.dim_c, sc.hbar, "phi_c");
    const SectorState phi_q2 =
        build_state(sc.phi_q, 2 * sc.dim_q, sc.hbar, "phi_q");

    std::vector<double> hybrid_drift(grid, 0.0);
    parallel_for(grid, threads, [&](int i) {
      const int oi = i % n_o;
      const HybridEigensystem eig2 = hybrid_eigensystem(
          evolved[i]->value, centers, phi_q2, 2 * sc.dim_q);
      const SpectrumTable table2 = cluster_spectrum(eig2, kDegeneracyTol);
      double local = 0.0;
      for (const Interval& interval : sc.observables[oi].intervals) {
        local = std::max(local,
                         std::abs(interval_probability(table2, interval) -
                                  interval_probability(tables[i], interval)));
      }
      hybrid_drift[i] = local;
    });

    double drift = *std::max_element(hybrid_drift.begin(), hybrid_drift.end());
    const auto oracle2 = oracle_layer(sc, h_op, phi_c2, phi_q2);
    for (int ti = 0; ti < n_t; ++ti) {
      for (int oi = 0; oi < n_o; ++oi) {
        for (std::size_t vi = 0; vi < oracle2[ti][oi].size(); ++vi) {
          drift = std::max(
              drift, std::abs(oracle2[ti][oi][vi] - oracle_probs[ti][oi][vi]));
        }
      }
    }
    r.max_probability_drift = drift;
    r.converged = drift < kDriftLimit;
    if (!r.converged) {
      r.warnings.push_back(fmt::format(
          "truncation convergence: probability drift {:.3e} at doubled "
          "dimensions exceeds {:g}",
          drift, kDriftLimit));
    }
  }

  r.all_pass = r.verdicts_pass && r.classicality_pass && r.converged;
  return r;
}

std::string results_to_json(const ResultBundle& r) {
  Json j;
  j["all_pass"] = r.all_pass;
  j["verdicts_pass"] = r.verdicts_pass;
  j["classicality_pass"] = r.classicality_pass;
  j["converged"] = r.converged;
  j["max_probability_drift"] = r.max_probability_drift;
  j["seed"] = r.seed;
  j["warnings"] = r.warnings;

  Json checks = Json::array();
  for (const SequenceCheck& c : r.classicality.checks) {
    Json entry;
    entry["sequence"] = c.seq.indices;
    entry["norm2"] = c.norm2;
    entry["bound"] = c.bound;
    entry["pass"] = c.pass;
    checks.push_back(std::move(entry));
  }
  j["classicality"]["pass"] = r.classicality.pass;
  j["classicality"]["checks"] = std::move(checks);

  j["evolved"] = Json::array();
  for (const EvolvedRecord& rec : r.evolved) {
    Json e;
    e["time"] = rec.time;
    e["observable"] = rec.observable;
    e["tail_norm"] = rec.tail_norm;
    e["terms"] = Json::array();
    for (const EvolvedTerm& term : rec.terms) {
      Json t;
      t["classical_exponents"] = term.classical_exponents;
      t["quantum_word"] = term.quantum_word;
      t["coeff_re"] = term.coeff.real();
      t["coeff_im"] = term.coeff.imag();
      e["terms"].push_back(std::move(t));
    }
    j["evolved"].push_back(std::move(e));
  }

  j["spectra"] = Json::array();
  for (const SpectrumRecord& rec : r.spectra) {
    Json e;
    e["time"] = rec.time;
    e["observable"] = rec.observable;
    Json entries = Json::array();
    for (const auto& [value, prob] : rec.entries) {
      entries.push_back(Json::array({value, prob}));
    }
    e["entries"] = std::move(entries);
    j["spectra"].push_back(std::move(e));
  }

  j["spreads"] = Json::array();
  for (const SpreadRow& row : r.spreads) {
    Json e;
    e["time"] = row.time;
    e["observable"] = row.observable;
    e["p"] = row.p;
    e["L"] = row.order;
    e["delta_b"] = row.delta_b;
    e["spread"] = row.spread;
    j["spreads"].push_back(std::move(e));
  }

  j["bounds"] = Json::array();
  for (const BoundRow& row : r.bounds) {
    Json e;
    e["time"] = row.time;
    e["observable"] = row.observable;
    e["p"] = row.p;
    e["L"] = row.order;
    e["interval"]["center"] = row.interval.center;
    e["interval"]["half_width"] = row.interval.half_width;
    e["lower"] = finite_or_null(row.lower);
    e["oracle"] = row.oracle;
    e["upper"] = finite_or_null(row.upper);
    e["verdict"] = row.verdict;
    j["bounds"].push_back(std::move(e));
  }

  return j.dump(2) + "\n";
}

ResultBundle results_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(fmt::format("results: invalid JSON ({})", e.what()));
  }
  check_object(j, "results");

  ResultBundle r;
  r.all_pass = as_boolean(field(j, "results", "all_pass"), "all_pass");
  r.verdicts_pass =
      as_boolean(field(j, "results", "verdicts_pass"), "verdicts_pass");
  r.classicality_pass = as_boolean(field(j, "results", "classicality_pass"),
                                   "classicality_pass");
  r.converged = as_boolean(field(j, "results", "converged"), "converged");
  r.max_probability_drift =
      as_number(field(j, "results", "max_probability_drift"),
                "max_probability_drift");
  r.seed = static_cast<unsigned>(
      as_integer(field(j, "results", "seed"), "seed"));
  for (const Json& w :
       as_array(field(j, "results", "warnings"), "warnings")) {
    r.warnings.push_back(as_string(w, "warnings[]"));
  }

  {
    const Json& cl = field(j, "results", "classicality");
    check_object(cl, "classicality");
    r.classicality.pass =
        as_boolean(field(cl, "classicality", "pass"), "classicality.pass");
    for (const Json& c : as_array(field(cl, "classicality", "checks"),
                                  "classicality.checks")) {
      SequenceCheck check;
      check.seq.indices = as_int_vector(field(c, "check", "sequence"),
                                        "classicality.checks[].sequence");
      check.norm2 =
          as_number(field(c, "check", "norm2"), "classicality.checks[].norm2");
      check.bound =
          as_number(field(c, "check", "bound"), "classicality.checks[].bound");
      check.pass =
          as_boolean(field(c, "check", "pass"), "classicality.checks[].pass");
      r.classicality.checks.push_back(std::move(check));
    }
  }

  for (const Json& e : as_array(field(j, "results", "evolved"), "evolved")) {
    EvolvedRecord rec;
    rec.time = as_number(field(e, "evolved[]", "time"), "evolved[].time");
    rec.observable = as_string(field(e, "evolved[]", "observable"),
                               "evolved[].observable");
    rec.tail_norm =
        as_number(field(e, "evolved[]", "tail_norm"), "evolved[].tail_norm");
    for (const Json& t :
         as_array(field(e, "evolved[]", "terms"), "evolved[].terms")) {
      EvolvedTerm term;
      term.classical_exponents =
          as_int_vector(field(t, "term", "classical_exponents"),
                        "evolved[].terms[].classical_exponents");
      term.quantum_word = as_int_vector(field(t, "term", "quantum_word"),
                                        "evolved[].terms[].quantum_word");
      term.coeff = {
          as_number(field(t, "term", "coeff_re"), "evolved[].terms[].coeff_re"),
          as_number(field(t, "term", "coeff_im"),
                    "evolved[].terms[].coeff_im")};
      rec.terms.push_back(std::move(term));
    }
    r.evolved.push_back(std::move(rec));
  }

  for (const Json& e : as_array(field(j, "results", "spectra"), "spectra")) {
    SpectrumRecord rec;
    rec.time = as_number(field(e, "spectra[]", "time"), "spectra[].time");
    rec.observable = as_string(field(e, "spectra[]", "observable"),
                               "spectra[].observable");
    for (const Json& entry :
         as_array(field(e, "spectra[]", "entries"), "spectra[].entries")) {
      const Json& pair = as_array(entry, "spectra[].entries[]");
      if (pair.size() != 2) {
        fail("spectra[].entries[]", "expected [value, probability]");
      }
      rec.entries.emplace_back(as_number(pair[0], "spectra[].entries[][0]"),
                               as_number(pair[1], "spectra[].entries[][1]"));
    }
    r.spectra.push_back(std::move(rec));
  }

  for (const Json& e : as_array(field(j, "results", "spreads"), "spreads")) {
    SpreadRow row;
    row.time = as_number(field(e, "spreads[]", "time"), "spreads[].time");
    row.observable = as_string(field(e, "spreads[]", "observable"),
                               "spreads[].observable");
    row.p = as_number(field(e, "spreads[]", "p"), "spreads[].p");
    row.order = as_integer(field(e, "spreads[]", "L"), "spreads[].L");
    row.delta_b =
        as_number(field(e, "spreads[]", "delta_b"), "spreads[].delta_b");
    row.spread =
        as_number(field(e, "spreads[]", "spread"), "spreads[].spread");
    r.spreads.push_back(std::move(row));
  }

  for (const Json& e : as_array(field(j, "results", "bounds"), "bounds")) {
    BoundRow row;
    row.time = as_number(field(e, "bounds[]", "time"), "bounds[].time");
    row.observable = as_string(field(e, "bounds[]", "observable"),
                               "bounds[].observable");
    row.p = as_number(field(e, "bounds[]", "p"), "bounds[].p");
    row.order = as_integer(field(e, "bounds[]", "L"), "bounds[].L");
    const Json& iv = field(e, "bounds[]", "interval");
    check_object(iv, "bounds[].interval");
    row.interval = {
        as_number(field(iv, "interval", "center"),
                  "bounds[].interval.center"),
        as_number(field(iv, "interval", "half_width"),
                  "bounds[].interval.half_width")};
    row.lower = null_to_nan(field(e, "bounds[]", "lower"), "bounds[].lower");
    row.oracle = as_number(field(e, "bounds[]", "oracle"), "bounds[].oracle");
    row.upper = null_to_nan(field(e, "bounds[]", "upper"), "bounds[].upper");
    row.verdict =
        as_string(field(e, "bounds[]", "verdict"), "bounds[].verdict");
    r.bounds.push_back(std::move(row));
  }

  return r;
}

std::string bounds_csv(const ResultBundle& r) {
  std::string out = "time,observable,p,L,interval,lower,oracle,upper,verdict\n";
  for (const BoundRow& b : r.bounds) {
    out += fmt::format(
        "{:.12g},{},{:.12g},{},[{:.12g};{:.12g}],{:.12g},{:.12g},{:.12g},{}\n",
        b.time, b.observable, b.p, b.order, b.interval.lo(), b.interval.hi(),
        b.lower, b.oracle, b.upper, b.verdict);
  }
  return out;
}

std::string spreads_csv(const ResultBundle& r) {
  std::string out = "time,observable,p,L,delta_b,spread\n";
  for (const SpreadRow& s : r.spreads) {
    out += fmt::format("{:.12g},{},{:.12g},{},{:.12g},{:.12g}\n", s.time,
                       s.observable, s.p, s.order, s.delta_b, s.spread);
  }
  return out;
}

bool same_results(const ResultBundle& a, const ResultBundle& b) {
  if (a.all_pass != b.all_pass || a.verdicts_pass != b.verdicts_pass ||
      a.classicality_pass != b.classicality_pass ||
      a.converged != b.converged || a.seed != b.seed ||
      a.max_probability_drift != b.max_probability_drift ||
      a.warnings != b.warnings) {
    return false;
  }
  if (!(a.classicality == b.classicality)) return false;
  if (a.evolved != b.evolved || a.spectra != b.spectra ||
      a.spreads != b.spreads) {
    return false;
  }
  if (a.bounds.size() != b.bounds.size()) return false;
  for (std::size_t i = 0; i < a.bounds.size(); ++i) {
    const BoundRow& x = a.bounds[i];
    const BoundRow& y = b.bounds[i];
    if (x.time != y.time || x.observable != y.observable || x.p != y.p ||
        x.order != y.order || !(x.interval == y.interval) ||
        !nan_equal(x.lower, y.lower) || x.oracle != y.oracle ||
        !nan_equal(x.upper, y.upper) || x.verdict != y.verdict) {
      return false;
    }
  }
  return true;
}

}  // namespace hybrid
