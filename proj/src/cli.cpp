#include "occfluct/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "occfluct/diffusion_ou.hpp"
#include "occfluct/dv_solver.hpp"
#include "occfluct/errors.hpp"
#include "occfluct/model_io.hpp"
#include "occfluct/perturbation.hpp"
#include "occfluct/sim.hpp"
#include "occfluct/thermo.hpp"

namespace occfluct::cli {

using nlohmann::json;

std::string format_number(double value) {
  if (value == kInfinity) return "inf";
  if (value == -kInfinity) return "-inf";
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

// +inf has no JSON literal; it travels as the string "inf".
json number_or_inf(double value) {
  if (std::isinf(value)) return format_number(value);
  return value;
}

// Serializer that prints every float with 17 significant digits.
void write_json(std::ostream& os, const json& v) {
  switch (v.type()) {
    case json::value_t::object: {
      os << '{';
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) os << ", ";
        first = false;
        os << json(key).dump() << ": ";
        write_json(os, item);
      }
      os << '}';
      break;
    }
    case json::value_t::array: {
      os << '[';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) os << ", ";
        write_json(os, v[i]);
      }
      os << ']';
      break;
    }
    case json::value_t::number_float:
      os << format_number(v.get<double>());
      break;
    default:
      os << v.dump();
  }
}

void emit(std::ostream& out, const json& doc) {
  write_json(out, doc);
  out << '\n';
}

json state_map(const StateSpace& space, const Vector& values) {
  json obj = json::object();
  for (std::size_t i = 0; i < space.size(); ++i) obj[space.label(i)] = values(static_cast<Eigen::Index>(i));
  return obj;
}

struct Options {
  std::string model;
  std::string mu;
  std::string family;
  std::string format = "csv";
  std::string gauge;
  std::string potential;
  std::string x0;
  std::string parity = "even";
  std::string sweep_out;
  double gamma = 1.0, beta = 1.0, drive = 0.0, mean = 0.0, variance = 1.0;
  double resistance = 1.0, inductance = 1.0, emf = 0.0, jbar = 0.0;
  double jmin = -3.0, jmax = 3.0;
  int points = 61;
  double horizon = 100.0;
  std::size_t samples = 1;
  std::uint64_t seed = 1;
};

void cmd_stationary(const Options& o, std::ostream& out) {
  const auto model = io::load_model(o.model);
  const ProbDist rho = stationary_distribution(model.rates);
  emit(out, json{{"rho", state_map(rho.space(), rho.vector())},
                 {"detailed_balance", is_detailed_balance(model.rates, rho, default_balance_tolerance(model.rates, rho))}});
}

void cmd_ep(const Options& o, std::ostream& out) {
  const auto model = io::load_model(o.model);
  const ProbDist mu = o.mu.empty() ? stationary_distribution(model.rates)
                                   : io::parse_distribution(io::read_json(o.mu), model.rates.space());
  json doc;
  doc["sigma"] = number_or_inf(entropy_production_rate(model.rates, mu).value);
  if (model.energies) {
    const auto split = entropy_decomposition(model.thermo(), mu);
    doc["sigma_S"] = number_or_inf(split.system);
    doc["sigma_R"] = number_or_inf(split.reservoir);
  } else {
    doc["sigma_S"] = nullptr;
    doc["sigma_R"] = nullptr;
  }
  emit(out, doc);
}

void cmd_dv(const Options& o, std::ostream& out) {
  const auto model = io::load_model(o.model);
  const auto& space = model.rates.space();
  const ProbDist mu = io::parse_distribution(io::read_json(o.mu), space);
  DVOptions options;
  if (!o.gauge.empty()) options.gauge_state = space.index_of(o.gauge);
  const DVResult r = dv_rate(model.rates, mu, options);
  json doc;
  doc["I"] = r.value;
  doc["interior"] = r.interior;
  doc["g_star"] = r.maximizer ? state_map(space, *r.maximizer) : json(nullptr);
  doc["certificate_residual"] = r.certificate ? json(r.certificate->max_residual()) : json(nullptr);
  emit(out, doc);
}

void cmd_scan(const Options& o, std::ostream& out, std::ostream& err) {
  const auto fam = io::load_family(o.family);
  double eps_max = 0.0;
  for (const double e : fam.eps_grid) eps_max = std::max(eps_max, std::abs(e));
  const PerturbationFamily family(fam.model.rates, fam.k1, eps_max);
  const double offset = family.reference().vector().dot(fam.f1);
  if (std::abs(offset) > 1e-12) err << "note: f1 recentered by " << format_number(offset) << " to have zero mean\n";
  const DistFamily dist = DistFamily::centered(family, fam.f1);
  const auto rows = theorem_main_scan(family, dist, fam.eps_grid);

  if (o.format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"eps", r.eps}, {"I", r.I}, {"Q", r.Q}, {"diff", r.diff}, {"diff_over_eps2", r.diff_over_eps2},
                     {"I_over_eps2", r.I_over_eps2}, {"Q_over_eps2", r.Q_over_eps2}});
    }
    emit(out, arr);
    return;
  }
  out << "eps,I,Q,diff,diff_over_eps2,I_over_eps2,Q_over_eps2\n";
  for (const auto& r : rows) {
    out << format_number(r.eps) << ',' << format_number(r.I) << ',' << format_number(r.Q) << ','
        << format_number(r.diff) << ',' << format_number(r.diff_over_eps2) << ',' << format_number(r.I_over_eps2)
        << ',' << format_number(r.Q_over_eps2) << '\n';
  }
}

void cmd_ou(const Options& o, std::ostream& out) {
  const auto parity = o.parity == "odd" ? ou::Parity::Odd : ou::Parity::Even;
  const ou::OUModel model(o.drive, o.gamma, o.beta, parity);
  const ou::GaussianDist mu(o.mean, o.variance);
  const double I = ou::ou_dv_rate(model, mu);
  const double sigma = ou::ou_entropy_production(model, mu);
  // Even parity: I = sigma / 4. Odd parity: the drive-corrected identity.
  const double residual = parity == ou::Parity::Odd ? ou::ou_modified_identity_residual(model, mu) : I - sigma / 4.0;
  emit(out, json{{"I", I}, {"sigma", sigma}, {"identity_residual", residual}});
}

void cmd_circuit(const Options& o, std::ostream& out) {
  const ou::CircuitModel circuit(o.resistance, o.inductance, o.emf, o.beta);
  const auto rate = ou::circuit_contracted_rate(circuit, o.jbar);
  emit(out, json{{"Ibar", rate.closed_form}, {"Ibar_numerical", rate.numerical}});
  if (o.sweep_out.empty()) return;
  if (o.points < 2 || !(o.jmax > o.jmin)) throw Error(ErrorKind::InvalidInput, "sweep needs points >= 2 and jmax > jmin");
  std::FILE* file = std::fopen(o.sweep_out.c_str(), "w");
  if (file == nullptr) throw Error(ErrorKind::InvalidInput, "cannot write '" + o.sweep_out + "'");
  std::fputs("jbar,Ibar,Ibar_numerical\n", file);
  for (int i = 0; i < o.points; ++i) {
    const double j = o.jmin + (o.jmax - o.jmin) * i / (o.points - 1);
    const auto r = ou::circuit_contracted_rate(circuit, j);
    std::fprintf(file, "%s,%s,%s\n", format_number(j).c_str(), format_number(r.closed_form).c_str(),
                 format_number(r.numerical).c_str());
  }
  std::fclose(file);
}

void cmd_simulate(const Options& o, std::ostream& out) {
  const auto model = io::load_model(o.model);
  const auto& space = model.rates.space();
  if (!is_irreducible(model.rates)) throw Error(ErrorKind::NotIrreducible, "rate graph is not strongly connected");
  if (!(o.horizon > 0.0)) throw Error(ErrorKind::InvalidInput, "--T must be positive");
  if (o.samples < 1) throw Error(ErrorKind::InvalidInput, "--samples must be positive");

  if (!o.potential.empty()) {
    const Vector V = io::parse_state_map(io::read_json(o.potential), space);
    const auto est = feynman_kac_estimate(model.rates, V, o.horizon, o.samples, o.seed);
    emit(out, json{{"lambda_hat", est.lambda},
                   {"stderr", est.standard_error},
                   {"perron_eigenvalue", principal_eigenvalue_dense(model.rates, V)},
                   {"T", o.horizon},
                   {"samples", o.samples},
                   {"seed", o.seed}});
    return;
  }

  const std::size_t x0 = o.x0.empty() ? 0 : space.index_of(o.x0);
  const auto records = occupation_samples(model.rates, x0, o.horizon, o.samples, o.seed);
  const auto n = static_cast<Eigen::Index>(space.size());
  Vector mean = Vector::Zero(n);
  for (const auto& r : records) mean += r.fractions.vector();
  mean /= static_cast<double>(records.size());
  json runs = json::array();
  for (const auto& r : records) runs.push_back(state_map(space, r.fractions.vector()));
  emit(out, json{{"occupation_mean", state_map(space, mean)},
                 {"occupation", runs},
                 {"stationary", state_map(space, stationary_distribution(model.rates).vector())},
                 {"x0", space.label(x0)},
                 {"T", o.horizon},
                 {"samples", o.samples},
                 {"seed", o.seed}});
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Occupation-time fluctuations and entropy production for Markov jump processes", "occfluct"};
  app.require_subcommand(1);
  Options o;

  auto* stationary = app.add_subcommand("stationary", "Stationary distribution of a model");
  stationary->add_option("--model", o.model, "Model JSON file")->required();

  auto* ep = app.add_subcommand("ep", "Entropy production and its system/reservoir split");
  ep->add_option("--model", o.model, "Model JSON file")->required();
  ep->add_option("--mu", o.mu, "Distribution JSON file (default: stationary)");

  auto* dv = app.add_subcommand("dv", "Donsker-Varadhan rate I(mu)");
  dv->add_option("--model", o.model, "Model JSON file")->required();
  dv->add_option("--mu", o.mu, "Distribution JSON file")->required();
  dv->add_option("--gauge", o.gauge, "State whose log-weight is pinned during optimization");

  auto* scan = app.add_subcommand("scan", "Compare I with a quarter of the excess entropy production over eps");
  scan->add_option("--family", o.family, "Family JSON file")->required();
  scan->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* ou_cmd = app.add_subcommand("ou", "Ornstein-Uhlenbeck functionals on a Gaussian");
  ou_cmd->add_option("--gamma", o.gamma, "Friction")->required();
  ou_cmd->add_option("--beta", o.beta, "Inverse temperature")->required();
  ou_cmd->add_option("--drive", o.drive, "Constant force")->required();
  ou_cmd->add_option("--parity", o.parity, "even or odd")->check(CLI::IsMember({"even", "odd"}));
  ou_cmd->add_option("--mean", o.mean, "Gaussian mean")->required();
  ou_cmd->add_option("--var", o.variance, "Gaussian variance")->required();

  auto* circuit = app.add_subcommand("circuit", "Contracted rate function of the mean current in an RL circuit");
  circuit->add_option("--R", o.resistance, "Resistance")->required();
  circuit->add_option("--L", o.inductance, "Inductance")->required();
  circuit->add_option("--emf", o.emf, "Voltage source")->required();
  circuit->add_option("--beta", o.beta, "Inverse temperature")->required();
  circuit->add_option("--jbar", o.jbar, "Mean current")->required();
  circuit->add_option("--sweep-out", o.sweep_out, "Write a CSV sweep over jbar to this path");
  circuit->add_option("--jmin", o.jmin, "Sweep lower end");
  circuit->add_option("--jmax", o.jmax, "Sweep upper end");
  circuit->add_option("--points", o.points, "Sweep size");

  auto* simulate = app.add_subcommand("simulate", "Gillespie occupation statistics or a Feynman-Kac estimate");
  simulate->add_option("--model", o.model, "Model JSON file")->required();
  simulate->add_option("--T", o.horizon, "Horizon")->required();
  simulate->add_option("--samples", o.samples, "Number of trajectories")->required();
  simulate->add_option("--seed", o.seed, "RNG seed")->required();
  simulate->add_option("--V", o.potential, "Potential JSON file; switches to the Feynman-Kac estimate");
  simulate->add_option("--x0", o.x0, "Initial state for occupation runs (default: first state)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.get_formatter()->make_help(&app, app.get_name(), CLI::AppFormatMode::All);
    return kExitInputError;
  }

  try {
    if (*stationary) cmd_stationary(o, out);
    else if (*ep) cmd_ep(o, out);
    else if (*dv) cmd_dv(o, out);
    else if (*scan) cmd_scan(o, out, err);
    else if (*ou_cmd) cmd_ou(o, out);
    else if (*circuit) cmd_circuit(o, out);
    else if (*simulate) cmd_simulate(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_input_error(e.kind()) ? kExitInputError : kExitNumericalError;
  } catch (const json::exception& e) {
    err << "error: malformed input: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumericalError;
  }
  return kExitOk;
}

}  // namespace occfluct::cli
