// Runs the three surrogate families on the same four-inclusion model and
// prints their error curves side by side.

#include <cstdio>

#include "pss/experiment.hpp"

using namespace pss;

int main() {
  nlohmann::json base = {
      {"model", {{"N_h", 127}, {"family", {{"kind", "disjoint"}, {"d", 4}, {"theta", 0.5}}}}},
      {"test", {{"kind", "halton"}, {"size", 400}, {"seed", 3}}},
      {"output", {{"dir", "race_out"}, {"prefix", "race"}}}};

  auto run = [&](nlohmann::json method) {
    nlohmann::json j = base;
    j["method"] = std::move(method);
    auto art = run_experiment(parse_config(j));
    std::printf("%-18s rows=%2zu  final sup error = %.3e  (%s)\n",
                j["method"]["name"].get<std::string>().c_str(), art.table.rows().size(),
                art.table.rows().back()[3], art.csv_path.c_str());
    return art;
  };

  run({{"name", "taylor"}, {"mode", "apriori"}, {"n", 60}});
  run({{"name", "interp"}, {"mode", "adaptive"}, {"n", 40}});
  run({{"name", "rb"}, {"eps", 1e-4}, {"train", "lds:100"}, {"n_max", 8}});
  std::printf("gnuplot scripts written next to each CSV in race_out/\n");
  return 0;
}
