#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoconv/certify.hpp"
#include "autoconv/errors.hpp"
#include "autoconv/profile.hpp"
#include "autoconv/search.hpp"
#include "autoconv/version.hpp"

namespace autoconv {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline ordered_json rat_to_json(const Rat& r) {
  return ordered_json{{"num", r.num}, {"den", r.den}};
}

inline Rat rat_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_object() || !j.contains("num") || !j.contains("den") ||
      !j["num"].is_number_integer() || !j["den"].is_number_integer())
    throw CheckpointError(std::string(what) + " must be {num, den} with integer fields");
  try {
    return Rat(j["num"].get<std::int64_t>(), j["den"].get<std::int64_t>());
  } catch (const Error& e) {
    throw CheckpointError(std::string(what) + ": " + e.what());
  }
}

template <typename T>
T get_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw CheckpointError(std::string("missing field: ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw CheckpointError(std::string("field has wrong type: ") + key);
  }
}

}  // namespace detail

// Export schema. Field order is fixed; elapsed_s is last so byte-level
// comparisons can strip it by dropping the final member.
inline ordered_json certificate_to_json(const Certificate& c) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = c.n;
  j["m"] = c.m;
  j["range_mode"] = to_string(c.mode);
  j["method"] = to_string(c.method);
  j["lattice_min"] = detail::rat_to_json(c.lattice_min);
  j["error_term"] = c.error_term().to_double_ceil();
  j["certified_bound"] = c.certified.to_double_floor();
  j["argmin_counts"] = c.argmin_counts;
  j["points_evaluated"] = c.points_evaluated;
  j["elapsed_s"] = c.elapsed_s;
  return j;
}

namespace detail {

// Checkpoint-internal certificate form: keeps the exact rationals so a
// resumed terminal checkpoint reproduces the certificate bit for bit.
inline ordered_json cert_state_to_json(const Certificate& c) {
  ordered_json j;
  j["n"] = c.n;
  j["m"] = c.m;
  j["range_mode"] = to_string(c.mode);
  j["method"] = to_string(c.method);
  j["lattice_min"] = rat_to_json(c.lattice_min);
  j["certified"] = rat_to_json(c.certified);
  j["argmin_counts"] = c.argmin_counts;
  j["points_evaluated"] = c.points_evaluated;
  j["elapsed_s"] = c.elapsed_s;
  return j;
}

inline Certificate cert_state_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw CheckpointError("embedded certificate must be an object");
  Certificate c;
  c.n = get_field<int>(j, "n");
  c.m = get_field<long long>(j, "m");
  c.mode = range_mode_from_string(get_field<std::string>(j, "range_mode"));
  c.method = method_from_string(get_field<std::string>(j, "method"));
  c.lattice_min = rat_from_json(j.contains("lattice_min") ? j["lattice_min"] : nlohmann::json(),
                                "lattice_min");
  c.certified = rat_from_json(j.contains("certified") ? j["certified"] : nlohmann::json(),
                              "certified");
  c.argmin_counts = get_field<std::vector<long long>>(j, "argmin_counts");
  c.points_evaluated = get_field<unsigned long long>(j, "points_evaluated");
  c.elapsed_s = get_field<double>(j, "elapsed_s");
  return c;
}

}  // namespace detail

inline ordered_json checkpoint_to_json(const Checkpoint& cp) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["version"] = cp.version;
  j["n"] = cp.n;
  j["m"] = cp.m;
  j["range_mode"] = to_string(cp.mode);
  j["method"] = to_string(cp.method);
  j["margin"] = detail::rat_to_json(cp.margin);
  j["phase"] = cp.phase;
  j["next_first"] = cp.next_first;
  j["lat_best_numer"] = cp.lat_best_numer;
  j["lat_best_ell"] = cp.lat_best_ell;
  j["lat_argmin"] = cp.lat_argmin;
  j["points_evaluated"] = cp.points_evaluated;
  j["has_cell_best"] = cp.has_cell_best;
  j["cell_best_num"] = cp.cell_best_num;
  j["cell_best_den"] = cp.cell_best_den;
  if (cp.final_cert)
    j["final_certificate"] = detail::cert_state_to_json(*cp.final_cert);
  else
    j["final_certificate"] = nullptr;
  return j;
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw CheckpointError("checkpoint must be a JSON object");
  if (detail::get_field<int>(j, "schema_version") != kSchemaVersion)
    throw CheckpointError("unsupported checkpoint schema_version");
  Checkpoint cp;
  cp.version = detail::get_field<std::string>(j, "version");
  cp.n = detail::get_field<int>(j, "n");
  cp.m = detail::get_field<long long>(j, "m");
  cp.mode = range_mode_from_string(detail::get_field<std::string>(j, "range_mode"));
  cp.method = method_from_string(detail::get_field<std::string>(j, "method"));
  cp.margin = detail::rat_from_json(j.contains("margin") ? j["margin"] : nlohmann::json(),
                                    "margin");
  cp.phase = detail::get_field<int>(j, "phase");
  cp.next_first = detail::get_field<long long>(j, "next_first");
  cp.lat_best_numer = detail::get_field<long long>(j, "lat_best_numer");
  cp.lat_best_ell = detail::get_field<long long>(j, "lat_best_ell");
  cp.lat_argmin = detail::get_field<std::vector<long long>>(j, "lat_argmin");
  cp.points_evaluated = detail::get_field<unsigned long long>(j, "points_evaluated");
  cp.has_cell_best = detail::get_field<bool>(j, "has_cell_best");
  cp.cell_best_num = detail::get_field<long long>(j, "cell_best_num");
  cp.cell_best_den = detail::get_field<long long>(j, "cell_best_den");
  if (!j.contains("final_certificate")) throw CheckpointError("missing field: final_certificate");
  if (!j["final_certificate"].is_null())
    cp.final_cert = detail::cert_state_from_json(j["final_certificate"]);
  return cp;
}

// No timing field anywhere in this schema: rerunning with the same seed
// must produce a byte-identical file.
inline ordered_json search_result_to_json(const SearchResult& r) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = r.n;
  j["range_mode"] = to_string(r.mode);
  j["seed"] = r.seed;
  j["restarts"] = r.restarts;
  j["best_value"] = r.best_value;
  j["best_profile"] = r.best_profile.coeffs;
  j["step_sup"] = r.best_step_sup;
  ordered_json per = ordered_json::array();
  for (const RestartSummary& s : r.per_restart) {
    ordered_json e;
    e["restart"] = s.restart;
    e["start_value"] = s.start_value;
    e["final_value"] = s.final_value;
    e["iterations"] = s.iterations;
    per.push_back(std::move(e));
  }
  j["per_restart_best"] = std::move(per);
  return j;
}

// Write-then-rename so readers never observe a torn file.
inline void write_json_atomic(const std::string& path, const ordered_json& j) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + tmp);
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) throw Error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error("rename failed: " + tmp + " -> " + path);
}

inline Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  return checkpoint_from_json(j);
}

// Plain text profile: 2n whitespace-separated coefficients.
inline Profile read_profile_text(const std::string& path, int n, bool normalize = false) {
  check_n(n);
  std::ifstream in(path);
  if (!in) throw Error("cannot open profile file: " + path);
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  if (!in.eof()) throw DomainError("profile file has non-numeric content: " + path);
  return make_profile(n, std::span<const double>(v.data(), v.size()), normalize);
}

}  // namespace autoconv
