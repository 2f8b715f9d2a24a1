#include "atox/jsonl.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "atox/error.hpp"

namespace atox::io {

void for_each_jsonl(const std::string& path, const std::function<void(json&&, size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": invalid JSON");
    }
    fn(std::move(rec), line_no);
  }
}

std::vector<json> read_jsonl(const std::string& path) {
  std::vector<json> out;
  for_each_jsonl(path, [&](json&& rec, size_t) { out.push_back(std::move(rec)); });
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeError("cannot open file for writing: " + path);
  out << content;
  if (!out) throw RuntimeError("write failed: " + path);
}

StagedFile::StagedFile(std::string path) : path_(std::move(path)) {}

StagedFile::~StagedFile() {
  if (!committed_) {
    // Leave the evidence behind for debugging failed runs.
    try {
      write_file(path_ + ".partial", buffer_);
    } catch (...) {
    }
  }
}

void StagedFile::commit() {
  write_file(path_ + ".partial", buffer_);
  std::error_code ec;
  std::filesystem::rename(path_ + ".partial", path_, ec);
  if (ec) throw RuntimeError("cannot finalize " + path_ + ": " + ec.message());
  committed_ = true;
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  // Avoid the platform-dependent "-0.0000".
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

}  // namespace atox::io
