// pss: surrogate builders and rate experiments for the affine-parametric
// diffusion benchmark.  Subcommands mirror the method drivers; every run is
// reproducible from its config and seed.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "pss/experiment.hpp"

using namespace pss;

namespace {

int run_with_exit_codes(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const configuration_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const malformed_input& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const invalid_cap& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
}

void report_outcome(const RunArtifacts& art) {
  std::cout << "wrote " << art.csv_path;
  if (!art.plot_path.empty()) std::cout << " and " << art.plot_path;
  std::cout << "\n";
  if (art.rate.ok) {
    std::printf("fitted rate: n^(-%.3f) +/- %.3f, R^2 = %.4f%s\n", art.rate.slope,
                art.rate.half_width, art.rate.r_squared,
                art.rate.algebraic ? "" : "  [algebraic fit poor]");
  } else {
    std::cout << "fitted rate: no fit (fewer than 5 usable points)\n";
  }
}

nlohmann::json config_or_default(const std::string& config_path, const std::string& model_path,
                                 const std::string& method_name) {
  nlohmann::json j;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw configuration_error("cannot open config " + config_path);
    in >> j;
  } else if (!model_path.empty()) {
    std::ifstream in(model_path);
    if (!in) throw configuration_error("cannot open model config " + model_path);
    nlohmann::json model;
    in >> model;
    j["model"] = model.contains("model") ? model.at("model") : model;
    j["method"] = {{"name", method_name}};
    j["test"] = {{"kind", "halton"}, {"size", 2000}, {"seed", 1}};
  } else {
    throw configuration_error("either --config or --model is required");
  }
  j["method"]["name"] = method_name;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parametric surrogate solvers: Taylor, Leja interpolation, reduced bases"};
  app.require_subcommand(1);

  std::string config_path, model_path, out_dir, mode, seq, weight_p, train_spec, set_kind;
  std::string bundle, online_y;
  int n_value = 0;
  double theta = 0.5, eps = 0.0, gamma = 1.0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "full experiment config (JSON)");
    cmd->add_option("--model", model_path, "model-only config (JSON)");
    cmd->add_option("--out", out_dir, "output directory");
  };

  auto* taylor = app.add_subcommand("taylor", "truncated Taylor expansions");
  add_common(taylor);
  taylor->add_option("--mode", mode, "apriori|bulk");
  taylor->add_option("--n", n_value, "a priori set size");
  taylor->add_option("--theta", theta, "bulk fraction");
  taylor->add_option("--eps", eps, "bulk accuracy");

  auto* interp = app.add_subcommand("interp", "sparse Leja interpolation");
  add_common(interp);
  interp->add_option("--mode", mode, "apriori|adaptive");
  interp->add_option("--seq", seq, "leja|rleja");
  interp->add_option("--p", weight_p, "inf|2");
  interp->add_option("--n", n_value, "set size / steps");

  auto* legendre = app.add_subcommand("legendre", "quadrature Legendre coefficients");
  add_common(legendre);
  legendre->add_option("--dims", n_value, "active dimensions (<= 4)");
  int degree = 0, nodes = 0;
  legendre->add_option("--degree", degree, "box degree");
  legendre->add_option("--nodes", nodes, "quadrature nodes per dimension");

  auto* rb = app.add_subcommand("rb", "reduced basis greedy");
  add_common(rb);
  rb->add_option("--eps", eps, "target accuracy");
  rb->add_option("--train", train_spec, "lattice:k | lds:m");
  rb->add_option("--bundle", bundle, "persist offline state to <stem>.json/.bin");
  rb->add_option("--online", online_y, "comma-separated y: evaluate a saved bundle");

  auto* greedy = app.add_subcommand("greedy-synthetic", "weak greedy on explicit sets");
  add_common(greedy);
  greedy->add_option("--set", set_kind, "diagonal|blocks|file");
  greedy->add_option("--gamma", gamma, "weakness parameter");
  greedy->add_option("--n", n_value, "steps");

  CLI11_PARSE(app, argc, argv);
  auto* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();

  return run_with_exit_codes([&] {
    if (name == "rb" && !online_y.empty()) {
      if (bundle.empty()) throw configuration_error("rb --online requires --bundle <stem>");
      ReducedBasis basis = load_reduced_basis(bundle + ".json");
      std::vector<double> y;
      std::stringstream ss(online_y);
      std::string tok;
      while (std::getline(ss, tok, ',')) y.push_back(std::stod(tok));
      Vector a = basis.online_coefficients(y);
      std::cout << "coefficients:";
      for (int i = 0; i < a.size(); ++i) std::printf(" %.12e", a[i]);
      std::cout << "\n";
      return;
    }

    nlohmann::json j = config_or_default(config_path, model_path, name);
    // flag overrides
    if (!mode.empty()) j["method"]["mode"] = mode;
    if (!seq.empty()) j["method"]["seq"] = seq;
    if (!weight_p.empty()) j["method"]["p"] = weight_p;
    if (!train_spec.empty()) j["method"]["train"] = train_spec;
    if (!set_kind.empty()) j["method"]["set"] = set_kind;
    if (!bundle.empty()) j["method"]["bundle"] = bundle;
    if (n_value > 0) j["method"][name == "legendre" ? "dims" : "n"] = n_value;
    if (degree > 0) j["method"]["degree"] = degree;
    if (nodes > 0) j["method"]["nodes"] = nodes;
    if (eps > 0.0) j["method"]["eps"] = eps;
    if (theta != 0.5) j["method"]["theta"] = theta;
    if (gamma != 1.0) j["method"]["gamma"] = gamma;
    if (!out_dir.empty()) j["output"]["dir"] = out_dir;
    if (name == "greedy-synthetic" && !j.contains("test"))
      j["test"] = {{"seed", 1}};
    if (name == "greedy-synthetic" && !j.contains("model"))
      j["model"] = {{"N_h", 15}, {"family", {{"kind", "disjoint"}, {"d", 2}, {"theta", 0.5}}}};

    ExperimentConfig cfg = parse_config(j);
    RunArtifacts art = run_experiment(cfg);
    report_outcome(art);
  });
}
