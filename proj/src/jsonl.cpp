#include "alignforge/jsonl.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <unistd.h>

#include "alignforge/errors.hpp"
#include "alignforge/hash.hpp"
#include "alignforge/text.hpp"

namespace fs = std::filesystem;

namespace alignforge {

JsonlReader::JsonlReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw Error("cannot open file for reading: " + path);
}

std::optional<std::string> JsonlReader::next_line() {
    std::string line;
    while (std::getline(in_, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        return line;
    }
    return std::nullopt;
}

std::optional<json> JsonlReader::next() {
    auto line = next_line();
    if (!line) return std::nullopt;
    return json::parse(*line);
}

JsonlWriter::JsonlWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open file for writing: " + path);
}

void JsonlWriter::write(const json& doc) {
    out_ << doc.dump() << '\n';
}

void JsonlWriter::write_line(const std::string& line) {
    out_ << line << '\n';
}

void JsonlWriter::close() {
    out_.close();
    if (out_.fail()) throw Error("write failed: " + path_);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    static std::atomic<uint64_t> counter{0};
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot open file for writing: " + tmp.string());
        out.write(content.data(), std::streamsize(content.size()));
        out.flush();
        if (!out) throw Error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

json read_json_file(const std::string& path) {
    return json::parse(read_file(path));
}

void write_json_file(const std::string& path, const json& doc, int indent) {
    write_file_atomic(path, doc.dump(indent) + "\n");
}

std::string file_hash_hex(const std::string& path) {
    return hash128_hex(read_file(path));
}

} // namespace alignforge
