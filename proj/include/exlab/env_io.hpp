#pragma once

/// \file env_io.hpp
/// JSON environment documents. Observation indices follow the order of the
/// "emission" list; "initial" refers to observations by label.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "exlab/core.hpp"

namespace exlab {

namespace detail {

using json = nlohmann::json;

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw Error(ErrorKind::SchemaError, path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorKind::SchemaError, path + "." + key + ": missing");
  return *it;
}

inline std::size_t as_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw Error(ErrorKind::SchemaError, path + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

inline double as_prob(const json& v, const std::string& path) {
  if (!v.is_number()) throw Error(ErrorKind::SchemaError, path + ": expected a number");
  return v.get<double>();
}

inline const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw Error(ErrorKind::SchemaError, path + ": expected an array");
  return v;
}

inline std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw Error(ErrorKind::SchemaError, path + ": expected a string");
  return v.get<std::string>();
}

} // namespace detail

/// Parses an environment document and composes it.
inline ExBmdp parse_env(const std::string& document) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, std::string("$: not valid JSON (") + e.what() + ")");
  }
  if (!doc.is_object()) throw Error(ErrorKind::SchemaError, "$: expected an object");

  const std::string name = detail::as_string(detail::require(doc, "name", "$"), "$.name");

  const json& endo_j = detail::require(doc, "endo", "$");
  const std::size_t n_endo = detail::as_count(detail::require(endo_j, "n_states", "$.endo"), "$.endo.n_states");
  std::vector<std::string> actions;
  const json& acts = detail::as_array(detail::require(endo_j, "actions", "$.endo"), "$.endo.actions");
  for (std::size_t i = 0; i < acts.size(); ++i)
    actions.push_back(detail::as_string(acts[i], "$.endo.actions[" + std::to_string(i) + "]"));
  const json& table_j = detail::as_array(detail::require(endo_j, "table", "$.endo"), "$.endo.table");
  if (table_j.size() != n_endo)
    throw Error(ErrorKind::SchemaError, "$.endo.table: expected " + std::to_string(n_endo) + " rows");
  std::vector<std::vector<std::size_t>> table(n_endo);
  for (std::size_t s = 0; s < n_endo; ++s) {
    const std::string row_path = "$.endo.table[" + std::to_string(s) + "]";
    const json& row = detail::as_array(table_j[s], row_path);
    if (row.size() != actions.size())
      throw Error(ErrorKind::SchemaError, row_path + ": expected " + std::to_string(actions.size()) + " entries");
    for (std::size_t a = 0; a < row.size(); ++a)
      table[s].push_back(detail::as_count(row[a], row_path + "[" + std::to_string(a) + "]"));
  }

  const json& exo_j = detail::require(doc, "exo", "$");
  const std::size_t n_exo = detail::as_count(detail::require(exo_j, "n_states", "$.exo"), "$.exo.n_states");
  const json& mat_j = detail::as_array(detail::require(exo_j, "matrix", "$.exo"), "$.exo.matrix");
  if (mat_j.size() != n_exo)
    throw Error(ErrorKind::SchemaError, "$.exo.matrix: expected " + std::to_string(n_exo) + " rows");
  std::vector<std::vector<double>> matrix(n_exo);
  for (std::size_t e = 0; e < n_exo; ++e) {
    const std::string row_path = "$.exo.matrix[" + std::to_string(e) + "]";
    const json& row = detail::as_array(mat_j[e], row_path);
    if (row.size() != n_exo)
      throw Error(ErrorKind::SchemaError, row_path + ": expected " + std::to_string(n_exo) + " entries");
    for (std::size_t j = 0; j < row.size(); ++j)
      matrix[e].push_back(detail::as_prob(row[j], row_path + "[" + std::to_string(j) + "]"));
  }

  Emission emission;
  const json& em_j = detail::as_array(detail::require(doc, "emission", "$"), "$.emission");
  for (std::size_t i = 0; i < em_j.size(); ++i) {
    const std::string path = "$.emission[" + std::to_string(i) + "]";
    LatentPair p;
    p.s = detail::as_count(detail::require(em_j[i], "s", path), path + ".s");
    p.e = detail::as_count(detail::require(em_j[i], "e", path), path + ".e");
    emission.domain.push_back(p);
    emission.labels.push_back(detail::as_string(detail::require(em_j[i], "obs", path), path + ".obs"));
  }
  for (std::size_t i = 0; i < emission.labels.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (emission.labels[i] == emission.labels[j])
        throw Error(ErrorKind::SchemaError,
                    "$.emission[" + std::to_string(i) + "].obs: duplicate label '" + emission.labels[i] + "'");

  std::vector<double> initial(emission.size(), 0.0);
  const json& init_j = detail::as_array(detail::require(doc, "initial", "$"), "$.initial");
  for (std::size_t i = 0; i < init_j.size(); ++i) {
    const std::string path = "$.initial[" + std::to_string(i) + "]";
    const std::string lbl = detail::as_string(detail::require(init_j[i], "obs", path), path + ".obs");
    const double p = detail::as_prob(detail::require(init_j[i], "p", path), path + ".p");
    std::size_t x = emission.labels.size();
    for (std::size_t j = 0; j < emission.labels.size(); ++j)
      if (emission.labels[j] == lbl) x = j;
    if (x == emission.labels.size())
      throw Error(ErrorKind::InitialOffSupport, path + ": unknown observation '" + lbl + "'");
    initial[x] += p;
  }

  return ExBmdp(name, EndogenousDynamics(std::move(table), std::move(actions)),
                ExogenousChain(std::move(matrix)), std::move(emission), std::move(initial));
}

/// Canonical document: keys in schema order, initial entries listed in
/// observation order and only where positive.
inline nlohmann::ordered_json env_to_json(const ExBmdp& env) {
  nlohmann::ordered_json doc;
  doc["name"] = env.name();
  doc["endo"]["n_states"] = env.endo().n_states;
  doc["endo"]["actions"] = env.endo().action_names;
  doc["endo"]["table"] = env.endo().table;
  doc["exo"]["n_states"] = env.exo().n_states;
  doc["exo"]["matrix"] = env.exo().matrix;
  doc["emission"] = nlohmann::ordered_json::array();
  for (std::size_t x = 0; x < env.n_obs(); ++x) {
    nlohmann::ordered_json item;
    item["s"] = env.endo_state(x);
    item["e"] = env.exo_state(x);
    item["obs"] = env.label(x);
    doc["emission"].push_back(item);
  }
  doc["initial"] = nlohmann::ordered_json::array();
  for (std::size_t x = 0; x < env.n_obs(); ++x) {
    if (env.initial()[x] <= 0.0) continue;
    nlohmann::ordered_json item;
    item["obs"] = env.label(x);
    item["p"] = env.initial()[x];
    doc["initial"].push_back(item);
  }
  return doc;
}

inline std::string serialize_env(const ExBmdp& env) { return env_to_json(env).dump(2) + "\n"; }

inline ExBmdp load_env(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_env(buf.str());
}

inline void save_env(const ExBmdp& env, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  out << serialize_env(env);
}

} // namespace exlab
