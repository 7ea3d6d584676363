#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "pss/errors.hpp"

namespace pss {

/// Radical-inverse (Halton) low-discrepancy points in [-1,1]^dims.
/// The seed acts as a leap offset, so runs are reproducible by construction.
inline std::vector<std::vector<double>> halton_points(int dims, int count, unsigned seed) {
  static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                               59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};
  if (dims < 1 || dims > 32) throw malformed_input("halton_points: 1..32 dimensions");
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    std::vector<double> y(static_cast<std::size_t>(dims));
    for (int d = 0; d < dims; ++d) {
      const int base = primes[d];
      long index = static_cast<long>(k) + 1 + static_cast<long>(seed);
      double f = 1.0, v = 0.0;
      while (index > 0) {
        f /= base;
        v += f * (index % base);
        index /= base;
      }
      y[static_cast<std::size_t>(d)] = 2.0 * v - 1.0;
    }
    out.push_back(std::move(y));
  }
  return out;
}

/// Full tensor lattice with k equispaced points per dimension in [-1,1].
inline std::vector<std::vector<double>> tensor_lattice(int dims, int per_dim) {
  if (per_dim < 2) throw malformed_input("tensor_lattice: need at least 2 points per dimension");
  long total = 1;
  for (int d = 0; d < dims; ++d) {
    total *= per_dim;
    if (total > 2'000'000) throw configuration_error("tensor_lattice: more than 2e6 points");
  }
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(total));
  for (long i = 0; i < total; ++i) {
    std::vector<double> y(static_cast<std::size_t>(dims));
    long rem = i;
    for (int d = 0; d < dims; ++d) {
      int idx = static_cast<int>(rem % per_dim);
      rem /= per_dim;
      y[static_cast<std::size_t>(d)] = -1.0 + 2.0 * idx / (per_dim - 1);
    }
    out.push_back(std::move(y));
  }
  return out;
}

struct TrainingSet {
  std::vector<std::vector<double>> points;
  std::string description;
  double covering_radius_linf = 0.0;  // exact for lattices, probed otherwise
};

inline TrainingSet make_tensor_training(int dims, int per_dim) {
  TrainingSet t;
  t.points = tensor_lattice(dims, per_dim);
  t.description = "lattice:" + std::to_string(per_dim);
  t.covering_radius_linf = 1.0 / (per_dim - 1);
  return t;
}

inline TrainingSet make_halton_training(int dims, int count, unsigned seed = 0) {
  TrainingSet t;
  t.points = halton_points(dims, count, seed);
  t.description = "lds:" + std::to_string(count);
  // probe the covering radius; reported, not proven
  std::mt19937_64 rng(seed + 1234567u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double worst = 0.0;
  for (int probe = 0; probe < 2000; ++probe) {
    std::vector<double> y(static_cast<std::size_t>(dims));
    for (auto& v : y) v = dist(rng);
    double best = 1e300;
    for (const auto& p : t.points) {
      double d = 0.0;
      for (int j = 0; j < dims; ++j)
        d = std::max(d, std::abs(p[static_cast<std::size_t>(j)] - y[static_cast<std::size_t>(j)]));
      best = std::min(best, d);
    }
    worst = std::max(worst, best);
  }
  t.covering_radius_linf = worst;
  return t;
}

}  // namespace pss
