// Small file helpers shared by dataset, checkpoint and report writers.
// All artifacts are plain text: JSON via nlohmann::json, tables as CSV with
// doubles printed at full round-trip precision. Nothing here embeds
// timestamps, so rewriting the same content is byte-identical.
#ifndef GDP_ARTIFACT_IO_HPP
#define GDP_ARTIFACT_IO_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "gdp/types.hpp"

namespace gdp::io {

using Json = nlohmann::json;

std::string format_double(double v);  // shortest round-trip decimal

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::string& path, const Table& table);
Table read_csv(const std::string& path);

void ensure_dir(const std::string& path);

}  // namespace gdp::io

#endif  // GDP_ARTIFACT_IO_HPP
