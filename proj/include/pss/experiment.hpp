#pragma once

// Experiment harness: JSON config -> model -> method driver -> CSV + plot
// script + fitted rate.  This is the engine behind the `pss` subcommands.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <string>
#include <vector>

#include "pss/errors.hpp"
#include "pss/interp.hpp"
#include "pss/legendre.hpp"
#include "pss/model.hpp"
#include "pss/parallel.hpp"
#include "pss/reduced_basis.hpp"
#include "pss/report.hpp"
#include "pss/sampling.hpp"
#include "pss/serialize.hpp"
#include "pss/taylor.hpp"
#include "pss/weights.hpp"

#ifndef PSS_GIT_REV
#define PSS_GIT_REV "unknown"
#endif

namespace pss {

using nlohmann::json;

struct ExperimentConfig {
  json raw;
  // model block
  int n_h = 255;
  json family;
  json load = 1.0;
  // method block
  std::string method;
  json params;
  // test block
  std::string sample_kind = "halton";
  int sample_size = 2000;
  unsigned seed = 0;
  // output block
  std::string out_dir = ".";
  std::string prefix = "run";
  bool timing = true;
};

inline ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  cfg.raw = j;
  try {
    const json& model = j.at("model");
    cfg.n_h = model.at("N_h").get<int>();
    if (model.contains("domain")) {
      auto d = model.at("domain").get<std::vector<double>>();
      if (d.size() != 2 || d[0] != 0.0 || d[1] != 1.0)
        throw configuration_error("config: only the domain (0,1) is supported");
    }
    cfg.family = model.at("family");
    if (model.contains("f")) cfg.load = model.at("f");

    const json& method = j.at("method");
    cfg.method = method.at("name").get<std::string>();
    cfg.params = method;

    const json& test = j.at("test");
    if (!test.contains("seed")) throw configuration_error("config: test.seed is mandatory");
    cfg.seed = test.at("seed").get<unsigned>();
    if (test.contains("kind")) cfg.sample_kind = test.at("kind").get<std::string>();
    if (test.contains("size")) cfg.sample_size = test.at("size").get<int>();

    if (j.contains("output")) {
      const json& out = j.at("output");
      if (out.contains("dir")) cfg.out_dir = out.at("dir").get<std::string>();
      if (out.contains("prefix")) cfg.prefix = out.at("prefix").get<std::string>();
      if (out.contains("timing")) cfg.timing = out.at("timing").get<bool>();
    }
  } catch (const json::exception& e) {
    throw configuration_error(std::string("config: ") + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw configuration_error("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw configuration_error(std::string("config: parse error in ") + path + ": " + e.what());
  }
  return parse_config(j);
}

inline AffineCoefficientFamily build_family(const FemSpace& space, const json& family) {
  try {
    const std::string kind = family.at("kind").get<std::string>();
    if (kind == "disjoint") {
      int d = family.at("d").get<int>();
      if (family.at("theta").is_array())
        return disjoint_inclusions(space, d, family.at("theta").get<std::vector<double>>());
      return disjoint_inclusions(space, d, family.at("theta").get<double>());
    }
    if (kind == "smooth") {
      if (family.contains("c"))
        return smooth_family_with_amplitude(space, family.at("J").get<int>(),
                                            family.at("beta").get<double>(),
                                            family.at("c").get<double>());
      return smooth_family(space, family.at("J").get<int>(), family.at("beta").get<double>(),
                           family.value("r_target", 0.5));
    }
    if (kind == "complementary") {
      return complementary_pair(space, family.at("theta").get<double>(),
                                family.value("plateau", 0.0));
    }
    throw configuration_error("config: unknown family kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw configuration_error(std::string("config: family: ") + e.what());
  }
}

inline StiffnessSet build_model(const ExperimentConfig& cfg) {
  FemSpace space(cfg.n_h);
  auto family = build_family(space, cfg.family);
  Vector load;
  if (cfg.load.is_number()) {
    load = StiffnessSet::constant_load(space, cfg.load.get<double>());
  } else {
    auto vals = cfg.load.get<std::vector<double>>();
    if (static_cast<int>(vals.size()) != space.n_interior)
      throw configuration_error("config: nodal load must have N_h entries");
    load = Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  }
  return StiffnessSet(space, std::move(family), load);
}

struct TestSample {
  std::vector<std::vector<double>> points;
  Matrix truth;  // one solved column per point
};

inline TestSample make_test_sample(const StiffnessSet& stiff, const ExperimentConfig& cfg) {
  TestSample sample;
  if (cfg.sample_kind == "halton") {
    sample.points = halton_points(stiff.dims(), cfg.sample_size, cfg.seed);
  } else if (cfg.sample_kind == "uniform") {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int i = 0; i < cfg.sample_size; ++i) {
      std::vector<double> y(static_cast<std::size_t>(stiff.dims()));
      for (auto& v : y) v = dist(rng);
      sample.points.push_back(std::move(y));
    }
  } else {
    throw configuration_error("config: unknown test sample kind '" + cfg.sample_kind + "'");
  }
  sample.truth = Matrix(stiff.space().n_interior, static_cast<Eigen::Index>(sample.points.size()));
  parallel_for(sample.points.size(), [&](std::size_t i) {
    sample.truth.col(static_cast<Eigen::Index>(i)) = stiff.solve(sample.points[i]);
  });
  return sample;
}

/// max and mean-square V-norm error of an evaluator over the test sample.
template <class Evaluate>
std::pair<double, double> sample_errors(const StiffnessSet& stiff, const TestSample& sample,
                                        const Evaluate& evaluate) {
  std::vector<double> errs(sample.points.size());
  parallel_for(sample.points.size(), [&](std::size_t i) {
    Vector diff = evaluate(sample.points[i]) - sample.truth.col(static_cast<Eigen::Index>(i));
    errs[i] = stiff.v_norm(diff);
  });
  double sup = 0.0, sq = 0.0;
  for (double e : errs) {
    sup = std::max(sup, e);
    sq += e * e;
  }
  return {sup, std::sqrt(sq / static_cast<double>(errs.size()))};
}

inline SurrogateWeights surrogate_from_config(const StiffnessSet& stiff, const json& method) {
  json s = method.value("surrogate", json{{"kind", "radii"}});
  const std::string kind = s.value("kind", std::string("radii"));
  const double eps = s.value("eps", stiff.family().uea_constant() / 2.0);
  if (kind == "radii") {
    if (s.contains("rho")) return SurrogateWeights::product_of_radii(s.at("rho").get<std::vector<double>>());
    return SurrogateWeights::radii_from_norms(stiff.family().psi_sups(), eps,
                                              s.value("budget", std::string("per_dim")) == "joint");
  }
  if (kind == "legendre")
    return SurrogateWeights::legendre_product(stiff.family().psi_sups(), eps,
                                              stiff.family().truncated_tail());
  if (kind == "simplex") return SurrogateWeights::simplex(s.at("lambda").get<std::vector<double>>());
  throw configuration_error("config: unknown surrogate kind '" + kind + "'");
}

struct RunArtifacts {
  CsvTable table{std::vector<std::string>{}};
  RateFit rate;
  std::string csv_path;
  std::string plot_path;
};

namespace detail {

inline double wall_ms_since(std::chrono::steady_clock::time_point t0, bool timing) {
  if (!timing) return 0.0;
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline void stamp(CsvTable& table, const ExperimentConfig& cfg) {
  table.set_meta("config", content_hash(cfg.raw.dump()));
  table.set_meta("seed", std::to_string(cfg.seed));
  table.set_meta("revision", PSS_GIT_REV);
  table.set_meta("sample", cfg.sample_kind + ":" + std::to_string(cfg.sample_size));
}

inline RateFit windowed_fit(const std::vector<double>& ns, const std::vector<double>& errs,
                            const json& method) {
  if (!method.contains("fit_window")) return fit_rate(ns, errs);
  auto w = method.at("fit_window").get<std::vector<double>>();
  if (w.size() != 2) throw configuration_error("config: fit_window must be [lo, hi]");
  std::vector<double> fn, fe;
  for (std::size_t i = 0; i < ns.size(); ++i)
    if (ns[i] >= w[0] && ns[i] <= w[1]) {
      fn.push_back(ns[i]);
      fe.push_back(errs[i]);
    }
  return fit_rate(fn, fe);
}

inline std::vector<int> n_grid(int n_max, const json& method) {
  if (method.contains("n_grid")) return method.at("n_grid").get<std::vector<int>>();
  std::vector<int> grid;
  int n = 1;
  while (n < n_max) {
    grid.push_back(n);
    n = std::max(n + 1, static_cast<int>(n * 1.3));
  }
  grid.push_back(n_max);
  return grid;
}

}  // namespace detail

// --- taylor ---------------------------------------------------------------

inline RunArtifacts run_taylor(const ExperimentConfig& cfg, const StiffnessSet& stiff,
                               const TestSample& sample) {
  auto t0 = std::chrono::steady_clock::now();
  const std::string mode = cfg.params.value("mode", std::string("apriori"));
  RunArtifacts art;
  art.table = CsvTable({"step", "card_Lambda", "sigma_hat", "sup_error_MC", "l2_error_MC",
                        "solves", "wall_ms"});
  detail::stamp(art.table, cfg);

  std::unique_ptr<TaylorTailOracle> oracle;
  json sigma_ref = cfg.params.value("sigma_ref", json{{"kind", "none"}});
  if (sigma_ref.value("kind", std::string("none")) == "simplex")
    oracle = std::make_unique<TaylorTailOracle>(stiff, sigma_ref.value("degree", 10));

  std::vector<double> ns, sups;
  if (mode == "apriori") {
    const int n_max = cfg.params.value("n", 50);
    auto weights = surrogate_from_config(stiff, cfg.params);
    IndexSet lambda = build_apriori_set(weights, n_max);
    TaylorSurrogate surr = compute_taylor(stiff, lambda);
    for (int n : detail::n_grid(n_max, cfg.params)) {
      auto [sup, l2] = sample_errors(stiff, sample, [&](const std::vector<double>& y) {
        return surr.evaluate_prefix(n, y);
      });
      double sigma_hat = std::numeric_limits<double>::quiet_NaN();
      if (oracle) {
        IndexSet prefix;
        for (int i = 0; i < n; ++i) prefix.insert(lambda.at(i));
        oracle->ensure_contains(prefix);
        sigma_hat = oracle->tail_energy(prefix);
      }
      art.table.add_row({static_cast<double>(n), static_cast<double>(n), sigma_hat, sup, l2,
                         static_cast<double>(n), detail::wall_ms_since(t0, cfg.timing)});
      ns.push_back(n);
      sups.push_back(sup);
    }
  } else if (mode == "bulk") {
    const double theta = cfg.params.value("theta", 0.5);
    const double eps = cfg.params.value("eps", 1e-8);
    BulkTrace trace = bulk_chase_run(stiff, theta, eps, oracle.get());
    TaylorSurrogate surr(stiff, trace.final_lambda, trace.coefficients);
    for (const auto& step : trace.steps) {
      auto [sup, l2] = sample_errors(stiff, sample, [&](const std::vector<double>& y) {
        return surr.evaluate_prefix(step.card_lambda, y);
      });
      art.table.add_row({static_cast<double>(step.step), static_cast<double>(step.card_lambda),
                         step.sigma_hat, sup, l2, static_cast<double>(step.solves),
                         detail::wall_ms_since(t0, cfg.timing)});
      ns.push_back(step.card_lambda);
      sups.push_back(sup);
    }
  } else {
    throw configuration_error("config: taylor mode must be apriori or bulk");
  }
  art.rate = detail::windowed_fit(ns, sups, cfg.params);
  return art;
}

// --- interp ---------------------------------------------------------------

inline RunArtifacts run_interp(const ExperimentConfig& cfg, const StiffnessSet& stiff,
                               const TestSample& sample) {
  auto t0 = std::chrono::steady_clock::now();
  const std::string mode = cfg.params.value("mode", std::string("apriori"));
  const std::string seq_kind = cfg.params.value("seq", std::string("leja"));
  const int n_max = cfg.params.value("n", 40);
  const int probe = cfg.params.value("lebesgue_probe", 0);

  int seq_len = cfg.params.value("seq_degree", std::max(32, n_max));
  UnivariateSequence seq = seq_kind == "rleja" ? rleja_sequence(seq_len) : leja_sequence(seq_len);

  auto solver = [&](const std::vector<double>& y) { return stiff.solve(y); };

  RunArtifacts art;
  art.table =
      CsvTable({"n", "card", "sup_error", "l2_error", "lebesgue_probe", "solves", "wall_ms"});
  detail::stamp(art.table, cfg);
  std::vector<double> ns, sups;

  auto emit = [&](int n, const SparseInterpolant& interp, long solves) {
    auto [sup, l2] = sample_errors(stiff, sample, [&](const std::vector<double>& y) {
      return interp.evaluate_prefix(n, y);
    });
    double leb = std::numeric_limits<double>::quiet_NaN();
    if (probe > 0) {
      IndexSet prefix;
      for (int i = 0; i < n; ++i) prefix.insert(interp.index_set().at(i));
      leb = lebesgue_probe(prefix, seq, stiff.dims(), probe, cfg.seed);
    }
    art.table.add_row({static_cast<double>(n), static_cast<double>(n), sup, l2, leb,
                       static_cast<double>(solves), detail::wall_ms_since(t0, cfg.timing)});
    ns.push_back(n);
    sups.push_back(sup);
  };

  if (mode == "apriori") {
    auto weights = surrogate_from_config(stiff, cfg.params);
    IndexSet lambda = build_apriori_set(weights, n_max);
    SparseInterpolant interp = interpolate(solver, stiff.dims(), lambda, seq);
    for (int n : detail::n_grid(n_max, cfg.params)) emit(n, interp, n);
  } else if (mode == "adaptive") {
    const std::string p = cfg.params.value("p", std::string("inf"));
    auto norm = [&](const Vector& v) { return stiff.v_norm(v); };
    auto result = adaptive_interpolate(solver, stiff.dims(), norm, n_max, seq,
                                       p == "2" ? InterpWeight::MeanSquare : InterpWeight::SupNorm);
    emit(1, result.interpolant, 1);
    for (const auto& step : result.steps) emit(step.n, result.interpolant, step.solves);
  } else {
    throw configuration_error("config: interp mode must be apriori or adaptive");
  }
  art.rate = detail::windowed_fit(ns, sups, cfg.params);
  return art;
}

// --- legendre ---------------------------------------------------------------

inline RunArtifacts run_legendre(const ExperimentConfig& cfg, const StiffnessSet& stiff) {
  const int dims = cfg.params.value("dims", 2);
  const int degree = cfg.params.value("degree", 6);
  const int nodes = cfg.params.value("nodes", degree + 2);
  const double eps = cfg.params.value("eps", stiff.family().uea_constant() / 2.0);

  std::vector<MultiIndex> members;
  std::vector<int> dense(static_cast<std::size_t>(dims), 0);
  std::function<void(int)> rec = [&](int j) {
    if (j == dims) {
      members.push_back(MultiIndex::from_dense(dense));
      return;
    }
    for (int e = 0; e <= degree; ++e) {
      dense[static_cast<std::size_t>(j)] = e;
      rec(j + 1);
    }
    dense[static_cast<std::size_t>(j)] = 0;
  };
  rec(0);
  IndexSet lambda = IndexSet::from_indices(std::move(members));

  auto solver = [&](const std::vector<double>& y) { return stiff.solve(y); };
  auto coeffs = legendre_coeffs_quadrature(solver, lambda, dims, nodes);

  std::vector<double> rho(static_cast<std::size_t>(dims));
  for (int j = 0; j < dims; ++j)
    rho[static_cast<std::size_t>(j)] = 1.0 + eps / (dims * stiff.family().psi_sup(j));
  const double c_fit = 1.1 * stiff.v_norm(coeffs.w.at(MultiIndex()));

  RunArtifacts art;
  art.table = CsvTable({"v_norm", "w_norm", "bound"}, "nu");
  detail::stamp(art.table, cfg);
  for (const auto& nu : lambda.members()) {
    double bound = c_fit;
    for (const auto& [p, e] : nu.entries())
      bound *= ellipse_factor(rho[static_cast<std::size_t>(p) - 1]) * (1.0 + 2.0 * e) *
               std::pow(rho[static_cast<std::size_t>(p) - 1], -static_cast<double>(e));
    art.table.add_row(multi_index_to_json(nu).dump(),
                      {stiff.v_norm(coeffs.v.at(nu)), stiff.v_norm(coeffs.w.at(nu)), bound});
  }
  return art;
}

// --- reduced basis ----------------------------------------------------------

inline RunArtifacts run_rb(const ExperimentConfig& cfg, const StiffnessSet& stiff,
                           const TestSample& sample) {
  auto t0 = std::chrono::steady_clock::now();
  const double eps = cfg.params.value("eps", 1e-6);
  const std::string train_spec = cfg.params.value("train", std::string("lds:128"));

  TrainingSet train;
  auto colon = train_spec.find(':');
  if (colon == std::string::npos) throw configuration_error("config: train must be kind:size");
  const std::string kind = train_spec.substr(0, colon);
  const int size = std::stoi(train_spec.substr(colon + 1));
  if (kind == "lattice") {
    if (stiff.dims() > 3)
      throw configuration_error("config: tensor lattices limited to <= 3 dims; use lds:size");
    train = make_tensor_training(stiff.dims(), size);
  } else if (kind == "lds") {
    train = make_halton_training(stiff.dims(), size, cfg.seed);
  } else {
    throw configuration_error("config: train kind must be lattice or lds");
  }

  RbOfflineOptions opts;
  opts.n_max = cfg.params.value("n_max", 40);
  opts.record_exact_sigma = cfg.params.value("record_exact_sigma", true);
  opts.enforce_net = cfg.params.value("enforce_net", false);
  auto result = rb_offline(stiff, train, eps, opts);

  RunArtifacts art;
  art.table = CsvTable({"step", "card", "sigma_hat", "sup_error_MC", "l2_error_MC", "solves",
                        "wall_ms"});
  detail::stamp(art.table, cfg);
  art.table.set_meta("train", train.description);
  art.table.set_meta("covering_radius", std::to_string(result.covering_radius));
  art.table.set_meta("gamma", std::to_string(result.gamma_realized));

  std::vector<double> ns, sups;
  for (int k = 1; k <= result.basis.size(); ++k) {
    auto [sup, l2] = sample_errors(stiff, sample, [&](const std::vector<double>& y) {
      return result.basis.online_field(y, k);
    });
    double sigma = k < static_cast<int>(result.sigma_exact.size())
                       ? result.sigma_exact[static_cast<std::size_t>(k)]
                       : std::numeric_limits<double>::quiet_NaN();
    art.table.add_row({static_cast<double>(k), static_cast<double>(k), sigma, sup, l2,
                       static_cast<double>(k), detail::wall_ms_since(t0, cfg.timing)});
    ns.push_back(k);
    sups.push_back(sup);
  }
  art.rate = detail::windowed_fit(ns, sups, cfg.params);

  if (cfg.params.contains("bundle")) {
    const std::string stem = cfg.params.at("bundle").get<std::string>();
    save_reduced_basis(result.basis, stem + ".json", stem + ".bin");
  }
  return art;
}

// --- synthetic greedy -------------------------------------------------------

inline RunArtifacts run_greedy_synthetic(const ExperimentConfig& cfg) {
  const std::string set_kind = cfg.params.value("set", std::string("diagonal"));
  const double gamma = cfg.params.value("gamma", 1.0);
  const int n = cfg.params.value("n", 32);

  CompactSet set = [&] {
    if (set_kind == "diagonal") {
      std::vector<double> x;
      if (cfg.params.contains("x")) {
        x = cfg.params.at("x").get<std::vector<double>>();
      } else {
        double ratio = cfg.params.value("ratio", 0.5);
        int count = cfg.params.value("count", 2 * n);
        for (int j = 0; j < count; ++j) x.push_back(std::pow(ratio, j));
      }
      return diagonal_set(x);
    }
    if (set_kind == "blocks")
      return block_set(cfg.params.value("s", 1.0), cfg.params.value("levels", 9));
    if (set_kind == "file") {
      std::ifstream in(cfg.params.at("file").get<std::string>());
      if (!in) throw configuration_error("config: cannot open greedy set file");
      json j;
      in >> j;
      auto vecs = j.get<std::vector<std::vector<double>>>();
      Eigen::MatrixXd m(static_cast<Eigen::Index>(vecs.front().size()),
                        static_cast<Eigen::Index>(vecs.size()));
      for (std::size_t c = 0; c < vecs.size(); ++c)
        for (std::size_t r = 0; r < vecs[c].size(); ++r)
          m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = vecs[c][r];
      return CompactSet::euclidean(std::move(m));
    }
    throw configuration_error("config: greedy set must be diagonal, blocks, or file");
  }();

  auto trace = weak_greedy(set, gamma, n);
  auto report = matrix_trace(trace);

  RunArtifacts art;
  art.table = CsvTable({"n", "sigma", "abs_diag", "p1_slack", "p2_slack"});
  detail::stamp(art.table, cfg);
  for (std::size_t k = 0; k < trace.labels.size(); ++k) {
    art.table.add_row({static_cast<double>(k), trace.sigmas[k],
                       std::abs(trace.coefficients(static_cast<Eigen::Index>(k),
                                                   static_cast<Eigen::Index>(k))),
                       report.worst_p1_slack, report.worst_p2_slack});
  }
  std::vector<double> ns, sigmas;
  for (std::size_t k = 1; k < trace.sigmas.size(); ++k) {
    ns.push_back(static_cast<double>(k));
    sigmas.push_back(trace.sigmas[k]);
  }
  art.rate = fit_rate(ns, sigmas);
  return art;
}

// --- dispatch ---------------------------------------------------------------

inline RunArtifacts run_experiment(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  RunArtifacts art;
  if (cfg.method == "greedy-synthetic") {
    art = run_greedy_synthetic(cfg);
  } else {
    StiffnessSet stiff = build_model(cfg);
    if (cfg.method == "legendre") {
      art = run_legendre(cfg, stiff);
    } else {
      TestSample sample = make_test_sample(stiff, cfg);
      if (cfg.method == "taylor")
        art = run_taylor(cfg, stiff, sample);
      else if (cfg.method == "interp")
        art = run_interp(cfg, stiff, sample);
      else if (cfg.method == "rb")
        art = run_rb(cfg, stiff, sample);
      else
        throw configuration_error("config: unknown method '" + cfg.method + "'");
    }
  }

  art.csv_path = cfg.out_dir + "/" + cfg.prefix + "_" + cfg.method + ".csv";
  art.table.write(art.csv_path);
  if (cfg.method == "taylor" || cfg.method == "interp" || cfg.method == "rb") {
    art.plot_path = cfg.out_dir + "/" + cfg.prefix + "_" + cfg.method + ".gp";
    const std::string x = cfg.method == "interp" ? "n" : "card" + std::string(
        cfg.method == "taylor" ? "_Lambda" : "");
    std::vector<std::string> ys = cfg.method == "interp"
                                      ? std::vector<std::string>{"sup_error", "l2_error"}
                                      : std::vector<std::string>{"sup_error_MC", "l2_error_MC"};
    write_plot_script(art.plot_path, art.csv_path, x, ys, art.table.columns());
  }
  return art;
}

}  // namespace pss
