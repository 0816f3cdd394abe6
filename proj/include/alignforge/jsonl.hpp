#pragma once

#include <fstream>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

namespace alignforge {

using json = nlohmann::json;

// Reads one JSON document per line. Blank lines are skipped without counting.
class JsonlReader {
  public:
    explicit JsonlReader(const std::string& path);

    // Next non-blank line, raw. nullopt at EOF.
    std::optional<std::string> next_line();

    // Next line parsed as JSON. Throws nlohmann::json::parse_error on bad lines.
    std::optional<json> next();

    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::ifstream in_;
};

// Writes compact JSON, one document per line.
class JsonlWriter {
  public:
    explicit JsonlWriter(const std::string& path);
    void write(const json& doc);
    void write_line(const std::string& line);
    void close();

  private:
    std::string path_;
    std::ofstream out_;
};

// Whole-file helpers.
std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);
json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& doc, int indent = 2);

// 128-bit content hash of a file, hex encoded.
std::string file_hash_hex(const std::string& path);

} // namespace alignforge
