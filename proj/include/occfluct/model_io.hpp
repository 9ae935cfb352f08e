#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "occfluct/markov.hpp"
#include "occfluct/thermo.hpp"

namespace occfluct::io {

// Model file:
//   {"states": ["a", "b", ...],
//    "rates": [["a", "b", 2.0], ...],          absent pairs are zero
//    "energies": {"a": 0.0, ...},               optional
//    "edge_betas": [["a", "b", 1.0], ...],      optional, default beta_ref
//    "beta_ref": 1.0}                           optional, default 1
struct Model {
  RateMatrix rates;
  std::optional<Vector> energies;
  Matrix edge_betas;
  double beta_ref = 1.0;

  /// Throws InvalidInput when no energies were given.
  ThermoModel thermo() const;
};

// Family file: a model plus
//   {"k1": [["a", "b", 0.3], ...], "f1": {"a": 0.1, ...}, "eps_grid": [0.1, 0.01, ...]}
struct Family {
  Model model;
  Matrix k1;
  Vector f1;
  std::vector<double> eps_grid;  // default_eps_grid() when absent
};

nlohmann::json read_json(const std::filesystem::path& path);

Model parse_model(const nlohmann::json& doc);
Family parse_family(const nlohmann::json& doc);

/// {"state": value, ...}; unlisted states are zero.
Vector parse_state_map(const nlohmann::json& doc, const StateSpace& space);

/// A state map that must sum to one; sums within 1e-9 of one are renormalized.
ProbDist parse_distribution(const nlohmann::json& doc, const StateSpace& space);

Model load_model(const std::filesystem::path& path);
Family load_family(const std::filesystem::path& path);

}  // namespace occfluct::io
