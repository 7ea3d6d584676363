#pragma once

#include <json.hpp>

#include "pss/multiindex.hpp"

namespace pss {

/// One index is an array of sparse [position, exponent] pairs; a set is the
/// array of its members in insertion order.
inline nlohmann::json multi_index_to_json(const MultiIndex& nu) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [p, e] : nu.entries()) j.push_back({p, e});
  return j;
}

inline MultiIndex multi_index_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw malformed_input("multi_index_from_json: expected array");
  MultiIndex nu;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2)
      throw malformed_input("multi_index_from_json: expected [position, exponent] pairs");
    int p = pair[0].get<int>(), e = pair[1].get<int>();
    if (p < 1 || e < 1) throw malformed_input("multi_index_from_json: invalid pair");
    for (int k = 0; k < e; ++k) nu = nu.with_increment(p);
  }
  return nu;
}

inline nlohmann::json index_set_to_json(const IndexSet& lambda) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& nu : lambda.members()) j.push_back(multi_index_to_json(nu));
  return j;
}

inline IndexSet index_set_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw malformed_input("index_set_from_json: expected array");
  IndexSet lambda;
  for (const auto& item : j) lambda.insert(multi_index_from_json(item));
  return lambda;
}

}  // namespace pss
