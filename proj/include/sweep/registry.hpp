#pragma once

// Built-in scenario catalog: the worked examples of the reference problems
// (one-dimensional ramp, tracking variants, exclusion candidate, shrinking
// box), a play-and-stop hysteresis model, a finite-dimensional
// elastoplasticity toy, the degenerate moving set, and two convergence-study
// scenarios with curved or rotating data.

#include "sweep/discrete_ocp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sweep {

struct RegistryEntry {
  std::string id;
  std::string summary;
  std::string default_subcommand;  // simulate | optimize | certify
  std::function<Scenario(Scalar /*param*/)> builder;
  Scalar default_param = 0.0;      // meaning depends on the entry (e.g. alpha)
  std::optional<Scalar> reference_cost;
  std::string reference_note;
};

const std::vector<RegistryEntry>& registry();
std::optional<RegistryEntry> registry_lookup(const std::string& id);

// Candidate triples used by the certification examples.
DiscreteTriple ex7_3_candidate(int k);  // (x, b) = (t/2, -t/2) sampled
DiscreteTriple ex7_5_candidate(int k);  // (v0(t), -t + s0(t)) sampled

// s0 and v0 profiles of the exclusion example.
Scalar ex7_5_s0(Scalar t);
Scalar ex7_5_v0(Scalar t);

}  // namespace sweep
