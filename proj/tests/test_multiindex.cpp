#include <catch2/catch.hpp>
#include <random>
#include <set>

#include "oracles.hpp"
#include "pss/multiindex.hpp"
#include "pss/serialize.hpp"
#include "pss/weights.hpp"

using namespace pss;

namespace {
MultiIndex mi(std::vector<int> dense) { return MultiIndex::from_dense(dense); }

std::set<MultiIndex> as_set(const std::vector<MultiIndex>& v) { return {v.begin(), v.end()}; }
}  // namespace

TEST_CASE("is_downward_closed on canonical small sets") {
  CHECK(is_downward_closed({}));
  CHECK(is_downward_closed({mi({}), mi({1}), mi({2}), mi({0, 1})}));
  CHECK_FALSE(is_downward_closed({mi({1})}));
  CHECK_THROWS_AS(is_downward_closed({mi({1}), mi({1})}), malformed_input);
}

TEST_CASE("neighbors of small sets") {
  auto lam0 = IndexSet::singleton_zero();
  CHECK(as_set(neighbors(lam0, 3)) == std::set<MultiIndex>{mi({1}), mi({0, 1}), mi({0, 0, 1})});

  auto lam1 = IndexSet::from_indices({mi({}), mi({1})});
  CHECK(as_set(neighbors(lam1, 2)) == oracle::neighbors_by_enumeration(lam1.members(), 2, 2));
  CHECK(as_set(neighbors(lam1, 2)) == std::set<MultiIndex>{mi({2}), mi({0, 1})});

  auto lam2 = IndexSet::from_indices({mi({}), mi({1}), mi({0, 1})});
  CHECK(as_set(neighbors(lam2, 2)) ==
        std::set<MultiIndex>{mi({2}), mi({0, 2}), mi({1, 1})});

  CHECK_THROWS_AS(neighbors(lam2, 1), invalid_cap);
}

TEST_CASE("anchored neighbors need no cap") {
  CHECK(as_set(anchored_neighbors(IndexSet::singleton_zero())) == std::set<MultiIndex>{mi({1})});
  CHECK(as_set(anchored_neighbors(IndexSet::from_indices({mi({}), mi({1})}))) ==
        std::set<MultiIndex>{mi({2}), mi({0, 1})});
  CHECK(as_set(anchored_neighbors(IndexSet::from_indices({mi({}), mi({1}), mi({2})}))) ==
        std::set<MultiIndex>{mi({3}), mi({0, 1})});
}

TEST_CASE("margin of small sets") {
  CHECK(as_set(margin(IndexSet::singleton_zero(), 2)) ==
        std::set<MultiIndex>{mi({1}), mi({0, 1})});
  auto lam = IndexSet::from_indices({mi({}), mi({1})});
  CHECK(as_set(margin(lam, 2)) == std::set<MultiIndex>{mi({2}), mi({0, 1}), mi({1, 1})});
  CHECK(as_set(margin(lam, 2)) == oracle::margin_by_enumeration(lam.members(), 2, 2));
}

TEST_CASE("margin contains neighbors, anchored neighbors contained in both") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    auto members = oracle::random_lower_set(rng, 12, 3);
    auto lam = IndexSet::from_indices(members);
    int cap = lam.max_active_dim() + 1;
    auto nb = as_set(neighbors(lam, cap));
    auto mg = as_set(margin(lam, cap));
    auto an = as_set(anchored_neighbors(lam));
    for (const auto& nu : an) CHECK(nb.count(nu) == 1);
    for (const auto& nu : nb) CHECK(mg.count(nu) == 1);
  }
}

TEST_CASE("every IndexSet insertion prefix is downward closed") {
  std::mt19937_64 rng(7);
  auto members = oracle::random_lower_set(rng, 25, 4);
  auto lam = IndexSet::from_indices(members);
  std::vector<MultiIndex> prefix;
  for (const auto& nu : lam.members()) {
    prefix.push_back(nu);
    CHECK(is_downward_closed(prefix));
  }
  CHECK_THROWS_AS(lam.insert(lam.at(0)), malformed_input);
  IndexSet bad;
  bad.insert(MultiIndex());
  CHECK_THROWS_AS(bad.insert(mi({2})), malformed_input);
}

TEST_CASE("simplex sets") {
  auto s1 = simplex_set({1.0, 1.0}, 1.0);
  CHECK(as_set(s1.members()) == std::set<MultiIndex>{mi({}), mi({1}), mi({0, 1})});

  auto s2 = simplex_set({1.0, 2.0}, 2.0);
  CHECK(as_set(s2.members()) == std::set<MultiIndex>{mi({}), mi({1}), mi({2}), mi({0, 1})});

  auto s3 = simplex_set({1.0}, 3.0);
  CHECK(s3.size() == 4);
  CHECK(s3.contains(mi({3})));

  SECTION("cardinality bound and downward closure on random weights") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> wdist(0.4, 2.5);
    std::uniform_real_distribution<double> kdist(1.0, 6.0);
    for (int trial = 0; trial < 20; ++trial) {
      int d = 1 + static_cast<int>(rng() % 3);
      std::vector<double> w;
      double wsum = 0.0;
      for (int j = 0; j < d; ++j) {
        w.push_back(wdist(rng));
        wsum += w.back();
      }
      double k = kdist(rng);
      auto s = simplex_set(w, k);
      CHECK(is_downward_closed(s.members()));
      double bound = 1.0;
      for (int j = 0; j < d; ++j) bound *= (k + wsum) / w[static_cast<std::size_t>(j)];
      for (int j = 2; j <= d; ++j) bound /= j;
      CHECK(static_cast<double>(s.size()) <= bound + 1e-9);
    }
  }
}

TEST_CASE("monotone majorant ordering") {
  SECTION("monotone input is fixed by the majorant") {
    MultiIndexMap<double> values;
    for (const auto& nu : oracle::box(2, 3))
      values[nu] = std::pow(2.0, -nu.exponent(1)) * std::pow(3.0, -nu.exponent(2));
    auto [order, maj] = monotone_majorant_order(values, 2, 3);
    for (std::size_t i = 0; i < order.size(); ++i)
      CHECK(maj[i] == Approx(values.at(order[i])).epsilon(1e-14));
  }

  SECTION("sup over the upward cone") {
    MultiIndexMap<double> values;
    for (const auto& nu : oracle::box(1, 3)) values[nu] = 1e-6;
    values[mi({1})] = 0.1;
    values[mi({2})] = 0.5;
    auto [order, maj] = monotone_majorant_order(values, 1, 3);
    for (std::size_t i = 0; i < order.size(); ++i)
      if (order[i] == mi({1})) CHECK(maj[i] == Approx(0.5));
  }

  SECTION("random values: dominates pointwise, monotone, prefixes closed") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    MultiIndexMap<double> values;
    for (const auto& nu : oracle::box(2, 2)) values[nu] = dist(rng);
    auto [order, maj] = monotone_majorant_order(values, 2, 2);
    std::vector<MultiIndex> prefix;
    for (std::size_t i = 0; i < order.size(); ++i) {
      CHECK(maj[i] >= values.at(order[i]) - 1e-15);
      CHECK(maj[i] == Approx(oracle::majorant_by_enumeration(order[i], values, 2, 2)));
      prefix.push_back(order[i]);
      CHECK(is_downward_closed(prefix));
    }
    for (std::size_t i = 1; i < maj.size(); ++i) CHECK(maj[i] <= maj[i - 1] + 1e-15);
  }
}

TEST_CASE("a priori set construction") {
  SECTION("n = 1 is always the null index") {
    auto s = SurrogateWeights::product_of_radii({3.0, 5.0});
    auto lam = build_apriori_set(s, 1);
    REQUIRE(lam.size() == 1);
    CHECK(lam.at(0).is_zero());
  }

  SECTION("geometric radii 2,4,8") {
    auto s = SurrogateWeights::product_of_radii({2.0, 4.0, 8.0});
    auto lam = build_apriori_set(s, 4);
    CHECK(as_set(lam.members()) ==
          std::set<MultiIndex>{mi({}), mi({1}), mi({2}), mi({0, 1})});
  }

  SECTION("tied radii 2,2") {
    auto s = SurrogateWeights::product_of_radii({2.0, 2.0});
    auto lam = build_apriori_set(s, 3);
    CHECK(as_set(lam.members()) == std::set<MultiIndex>{mi({}), mi({1}), mi({0, 1})});
  }

  SECTION("scaling invariance and evaluation budget") {
    auto s = SurrogateWeights::product_of_radii({1.5, 2.5, 4.0, 4.0});
    AprioriStats stats;
    auto lam = build_apriori_set(s, 30, &stats);
    CHECK(stats.surrogate_evaluations <= 30L * 30 / 2 + 30);

    auto scaled = [&](const MultiIndex& nu) { return 17.5 * s(nu); };
    auto lam2 = build_apriori_set(scaled, 30);
    REQUIRE(lam2.size() == lam.size());
    for (int i = 0; i < lam.size(); ++i) CHECK(lam2.at(i) == lam.at(i));
  }

  SECTION("anchored and downward closed output") {
    auto s = SurrogateWeights::product_of_radii({1.2, 1.9, 3.7, 8.8, 20.0});
    auto lam = build_apriori_set(s, 60);
    CHECK(is_downward_closed(lam.members()));
    CHECK(lam.is_anchored());
  }

  SECTION("non-monotone surrogate detected") {
    auto bad = [](const MultiIndex& nu) { return nu.total_degree() == 1 ? 2.0 : 1.0; };
    CHECK_THROWS_AS(build_apriori_set(bad, 5), surrogate_violation);
  }
}

TEST_CASE("total order sorts graded and prefix-stable") {
  CHECK(mi({1}) < mi({0, 1}));          // same degree, smaller max dim first
  CHECK(mi({0, 1}) < mi({2}));          // degree 1 before degree 2
  CHECK_FALSE(mi({2}) < mi({0, 1}));
  CHECK(mi({2, 1}) < mi({1, 2}));       // same degree, same max dim, mass-early first
}

TEST_CASE("IndexSet JSON round-trip preserves insertion order") {
  std::mt19937_64 rng(11);
  auto lam = IndexSet::from_indices(oracle::random_lower_set(rng, 15, 3));
  auto j = index_set_to_json(lam);
  auto back = index_set_from_json(j);
  REQUIRE(back.size() == lam.size());
  for (int i = 0; i < lam.size(); ++i) CHECK(back.at(i) == lam.at(i));
}
