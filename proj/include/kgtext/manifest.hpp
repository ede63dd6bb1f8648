#pragma once

// Deterministic run manifests: every command that writes artifacts also
// writes a manifest recording its inputs (with content checksums), its
// effective parameters, and its outputs, so a run can be audited and
// reproduced byte-for-byte.  Manifests carry no timestamps on purpose.

#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "kgtext/common.hpp"

namespace kgtext {

inline std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file for checksum: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return hex64(fnv1a64(bytes));
}

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> inputs;     // label -> path
  std::map<std::string, std::string> checksums;  // label -> content checksum
  std::map<std::string, std::string> params;     // flat stringified parameters
  std::map<std::string, std::string> outputs;    // label -> path

  void add_input(const std::string& label, const std::string& path) {
    inputs[label] = path;
    checksums[label] = file_checksum(path);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["inputs"] = inputs;
    j["checksums"] = checksums;
    j["params"] = params;
    j["outputs"] = outputs;
    return j;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest: " + path);
    out << to_json().dump(2) << "\n";
  }

  static RunManifest load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read manifest: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed manifest " + path + ": " + e.what());
    }
    RunManifest m;
    m.command = j.value("command", "");
    for (auto& [k, v] : j.value("inputs", nlohmann::json::object()).items())
      m.inputs[k] = v.get<std::string>();
    for (auto& [k, v] : j.value("checksums", nlohmann::json::object()).items())
      m.checksums[k] = v.get<std::string>();
    for (auto& [k, v] : j.value("params", nlohmann::json::object()).items())
      m.params[k] = v.get<std::string>();
    for (auto& [k, v] : j.value("outputs", nlohmann::json::object()).items())
      m.outputs[k] = v.get<std::string>();
    return m;
  }
};

// Base directory for run artifacts; relative output paths resolve under it.
inline std::string run_root() {
  const char* env = std::getenv("KGTEXT_RUN_ROOT");
  return env ? std::string(env) : std::string(".");
}

}  // namespace kgtext
