#include "occfluct/model_io.hpp"

#include <cmath>
#include <fstream>

#include "occfluct/errors.hpp"
#include "occfluct/perturbation.hpp"

namespace occfluct::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::InvalidInput, what); }

double number(const json& v, const std::string& context) {
  if (!v.is_number()) fail(context + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(context + ": expected a finite number");
  return x;
}

const json& require(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) fail(std::string("missing field '") + key + "'");
  return doc.at(key);
}

// [["a", "b", value], ...] into a dense matrix; duplicates and self-loops rejected.
Matrix parse_edge_list(const json& list, const StateSpace& space, const char* field) {
  if (!list.is_array()) fail(std::string(field) + ": expected an array");
  const auto n = static_cast<Eigen::Index>(space.size());
  Matrix out = Matrix::Zero(n, n);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
  for (const auto& entry : list) {
    if (!entry.is_array() || entry.size() != 3 || !entry[0].is_string() || !entry[1].is_string())
      fail(std::string(field) + ": entries must be [from, to, value]");
    const auto x = static_cast<Eigen::Index>(space.index_of(entry[0].get<std::string>()));
    const auto y = static_cast<Eigen::Index>(space.index_of(entry[1].get<std::string>()));
    if (x == y) fail(std::string(field) + ": self-loop on '" + entry[0].get<std::string>() + "'");
    if (seen(x, y)) fail(std::string(field) + ": duplicate entry for a pair");
    seen(x, y) = true;
    out(x, y) = number(entry[2], field);
  }
  return out;
}

}  // namespace

ThermoModel Model::thermo() const {
  if (!energies) fail("model has no energies");
  return ThermoModel(rates, *energies, edge_betas, beta_ref);
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

Vector parse_state_map(const json& doc, const StateSpace& space) {
  if (!doc.is_object()) fail("expected an object mapping states to numbers");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(space.size()));
  for (const auto& [label, value] : doc.items()) {
    out(static_cast<Eigen::Index>(space.index_of(label))) = number(value, "value for '" + label + "'");
  }
  return out;
}

ProbDist parse_distribution(const json& doc, const StateSpace& space) {
  Vector p = parse_state_map(doc, space);
  if ((p.array() < 0.0).any()) fail("distribution has negative entries");
  if (std::abs(p.sum() - 1.0) > 1e-9) fail("distribution does not sum to one");
  return ProbDist::normalized(space, std::move(p));
}

Model parse_model(const json& doc) {
  const json& states = require(doc, "states");
  if (!states.is_array()) fail("states: expected an array of names");
  std::vector<std::string> labels;
  for (const auto& s : states) {
    if (!s.is_string()) fail("states: expected strings");
    labels.push_back(s.get<std::string>());
  }
  StateSpace space(std::move(labels));
  Matrix rates = parse_edge_list(require(doc, "rates"), space, "rates");
  const auto n = static_cast<Eigen::Index>(space.size());

  double beta_ref = 1.0;
  if (doc.contains("beta_ref")) beta_ref = number(doc.at("beta_ref"), "beta_ref");
  std::optional<Vector> energies;
  if (doc.contains("energies")) energies = parse_state_map(doc.at("energies"), space);

  Matrix edge_betas = Matrix::Constant(n, n, beta_ref);
  if (doc.contains("edge_betas")) {
    const Matrix given = parse_edge_list(doc.at("edge_betas"), space, "edge_betas");
    for (const auto& entry : doc.at("edge_betas")) {
      const auto x = static_cast<Eigen::Index>(space.index_of(entry[0].get<std::string>()));
      const auto y = static_cast<Eigen::Index>(space.index_of(entry[1].get<std::string>()));
      if (given(y, x) != 0.0 && given(y, x) != given(x, y)) fail("edge_betas: asymmetric values for a pair");
      // One entry covers both orientations.
      edge_betas(x, y) = given(x, y);
      edge_betas(y, x) = given(x, y);
    }
  }
  return Model{RateMatrix(std::move(space), std::move(rates)), std::move(energies), std::move(edge_betas), beta_ref};
}

Family parse_family(const json& doc) {
  Model model = parse_model(doc);
  const auto& space = model.rates.space();
  Matrix k1 = parse_edge_list(require(doc, "k1"), space, "k1");
  Vector f1 = parse_state_map(require(doc, "f1"), space);
  std::vector<double> grid;
  if (doc.contains("eps_grid")) {
    const json& g = doc.at("eps_grid");
    if (!g.is_array() || g.empty()) fail("eps_grid: expected a nonempty array");
    for (const auto& v : g) grid.push_back(number(v, "eps_grid"));
  } else {
    grid = default_eps_grid();
  }
  return Family{std::move(model), std::move(k1), std::move(f1), std::move(grid)};
}

Model load_model(const std::filesystem::path& path) { return parse_model(read_json(path)); }

Family load_family(const std::filesystem::path& path) { return parse_family(read_json(path)); }

}  // namespace occfluct::io
