#pragma once

// Internal helpers shared by the JSON file readers.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hmpt/error.hpp"
#include "hmpt/trace.hpp"

namespace hmpt::detail {

using nlohmann::json;

inline std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(std::string("cannot open ") + what + " '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << content;
  if (!out) throw DataError("write failed for '" + path + "'");
}

inline json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string(what) + ": " + e.what());
  }
}

// Runs `fn`, turning nlohmann type/lookup errors into DataError.
template <typename Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw DataError(std::string(what) + ": " + e.what());
  }
}

inline json pool_to_json(const MemoryPoolDescriptor& p) {
  json j{{"id", p.id}, {"label", p.label}, {"capacity_bytes", p.capacity}, {"latency_ns", p.load_latency}};
  if (p.read_bandwidth == p.write_bandwidth) {
    j["bw_bytes_per_s"] = p.read_bandwidth;
  } else {
    j["read_bw_bytes_per_s"] = p.read_bandwidth;
    j["write_bw_bytes_per_s"] = p.write_bandwidth;
  }
  return j;
}

inline MemoryPoolDescriptor pool_from_json(const json& j) {
  MemoryPoolDescriptor p;
  p.id = j.at("id").get<PoolId>();
  p.label = j.value("label", std::string{});
  p.capacity = j.at("capacity_bytes").get<std::uint64_t>();
  if (j.contains("bw_bytes_per_s")) p.read_bandwidth = p.write_bandwidth = j.at("bw_bytes_per_s").get<double>();
  if (j.contains("read_bw_bytes_per_s")) p.read_bandwidth = j.at("read_bw_bytes_per_s").get<double>();
  if (j.contains("write_bw_bytes_per_s")) p.write_bandwidth = j.at("write_bw_bytes_per_s").get<double>();
  p.load_latency = j.at("latency_ns").get<double>();
  p.validate();
  return p;
}

}  // namespace hmpt::detail
