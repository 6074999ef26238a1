/// @file serialization.hpp
/// @brief JSON encoding of domain types and JSONL stream helpers.
///
/// Field names are the snake_case struct member names. Records are written one
/// JSON object per line.

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sage/domain.hpp"
#include "sage/error.hpp"

namespace sage {

void to_json(nlohmann::json& j, const Persona& v);
void from_json(const nlohmann::json& j, Persona& v);
void to_json(nlohmann::json& j, const Background& v);
void from_json(const nlohmann::json& j, Background& v);
void to_json(nlohmann::json& j, const Scene& v);
void from_json(const nlohmann::json& j, Scene& v);
void to_json(nlohmann::json& j, const Scenario& v);
void from_json(const nlohmann::json& j, Scenario& v);
void to_json(nlohmann::json& j, const TokenUsage& v);
void from_json(const nlohmann::json& j, TokenUsage& v);
void to_json(nlohmann::json& j, const EmotionEstimate& v);
void from_json(const nlohmann::json& j, EmotionEstimate& v);
void to_json(nlohmann::json& j, const Turn& v);
void from_json(const nlohmann::json& j, Turn& v);
void to_json(nlohmann::json& j, const DialogueRecord& v);
void from_json(const nlohmann::json& j, DialogueRecord& v);
void to_json(nlohmann::json& j, const AbortedDialogue& v);
void from_json(const nlohmann::json& j, AbortedDialogue& v);

/// Single-line JSON encoding used for JSONL streams.
template <class T>
std::string to_json_line(const T& value) {
  return nlohmann::json(value).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

template <class T>
T from_json_line(const std::string& line) {
  return nlohmann::json::parse(line).get<T>();
}

/// Reads every valid line of a JSONL file. Lines that fail to parse (for
/// example a record truncated by a crash) are skipped and counted.
template <class T>
std::vector<T> read_jsonl(const std::filesystem::path& path, std::size_t* skipped = nullptr) {
  std::vector<T> out;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  std::size_t bad = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(from_json_line<T>(line));
    } catch (const nlohmann::json::exception&) {
      ++bad;
    }
  }
  if (skipped) *skipped = bad;
  return out;
}

/// Writes JSON to `path` atomically (temp file + rename).
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& value);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace sage
