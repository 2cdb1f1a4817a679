#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hybrid/classicality.hpp"
#include "hybrid/observable.hpp"
#include "hybrid/predictions.hpp"

namespace hybrid {

// Malformed or inconsistent scenario document. The message names the
// offending field.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HamiltonianTerm {
  Complex coeff;
  std::vector<int> classical_exponents;
  std::vector<int> quantum_word;

  friend bool operator==(const HamiltonianTerm&,
                         const HamiltonianTerm&) = default;
};

struct StateSpec {
  enum class Kind { ground, coherent, amplitudes };

  Kind kind = Kind::ground;
  double center_q = 0.0;
  double center_p = 0.0;
  // Fock amplitudes for Kind::amplitudes; shorter vectors are zero-padded
  // to the sector dimension, e.g. when the convergence check doubles it.
  std::vector<Complex> amplitudes;

  friend bool operator==(const StateSpec&, const StateSpec&) = default;
};

struct ObservableSpec {
  std::string name;
  int generator = 1;
  std::vector<Interval> intervals;

  friend bool operator==(const ObservableSpec&,
                         const ObservableSpec&) = default;
};

// One self-contained experiment: system, initial data, measurement grid,
// and every numerical control needed to reproduce the result files.
// The runner supports one classical and one quantum mode.
struct Scenario {
  std::vector<HamiltonianTerm> hamiltonian;
  double hbar = 1.0;
  ClassicalData classical_data;
  StateSpec phi_c;
  StateSpec phi_q;
  std::vector<double> times;
  std::vector<ObservableSpec> observables;
  std::vector<double> p_values;
  std::vector<int> order_L;
  int dim_c = 40;
  int dim_q = 40;
  int max_order = 25;
  double tail_tolerance = 1e-8;
  bool convergence_check = true;

  // Throws ScenarioError naming the first invalid field.
  void validate() const;
  HybridObservable hamiltonian_observable() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

Scenario parse_scenario(const std::string& json_text);
std::string scenario_to_json(const Scenario& s);
// Bundled scenarios by name; currently "coupled-oscillator".
Scenario example_scenario(const std::string& name);

struct EvolvedTerm {
  std::vector<int> classical_exponents;
  std::vector<int> quantum_word;
  Complex coeff;

  friend bool operator==(const EvolvedTerm&, const EvolvedTerm&) = default;
};

struct EvolvedRecord {
  double time;
  std::string observable;
  double tail_norm;
  std::vector<EvolvedTerm> terms;

  friend bool operator==(const EvolvedRecord&,
                         const EvolvedRecord&) = default;
};

struct SpectrumRecord {
  double time;
  std::string observable;
  std::vector<std::pair<double, double>> entries;

  friend bool operator==(const SpectrumRecord&,
                         const SpectrumRecord&) = default;
};

struct SpreadRow {
  double time;
  std::string observable;
  double p;
  int order;
  // Margin-weighted derivative-norm sum, maximized over the eigenbasis;
  // spread divides it by (1-p)^(1/(2 order)).
  double delta_b;
  double spread;

  friend bool operator==(const SpreadRow&, const SpreadRow&) = default;
};

struct BoundRow {
  double time;
  std::string observable;
  double p;
  int order;
  Interval interval;
  // lower/upper are NaN when the interval fails half_width > 2 spread and
  // the verdict is "inapplicable"; otherwise "pass" or "fail".
  double lower;
  double oracle;
  double upper;
  std::string verdict;
};

struct ResultBundle {
  bool all_pass;
  bool verdicts_pass;
  bool classicality_pass;
  bool converged;
  double max_probability_drift;
  unsigned seed;
  std::vector<std::string> warnings;
  ClassicalityReport classicality;
  std::vector<EvolvedRecord> evolved;
  std::vector<SpectrumRecord> spectra;
  std::vector<SpreadRow> spreads;
  std::vector<BoundRow> bounds;
};

// Full pipeline: evolve the observables, test classicality of the initial
// data, build hybrid spectra and spreads, sandwich every interval, compare
// with the full-quantum oracle, and re-run the probability layers at
// doubled dimensions when convergence_check is set. The seed only labels
// the output; nothing in the pipeline is randomized.
ResultBundle run_scenario(const Scenario& s, unsigned seed = 0,
                          int threads = 1);

std::string results_to_json(const ResultBundle& r);
ResultBundle results_from_json(const std::string& text);

std::string bounds_csv(const ResultBundle& r);
std::string spreads_csv(const ResultBundle& r);

// Field-exact equality, treating a NaN pair as equal. Backs the round-trip
// guarantee on emitted result files.
bool same_results(const ResultBundle& a, const ResultBundle& b);

}  // namespace hybrid
