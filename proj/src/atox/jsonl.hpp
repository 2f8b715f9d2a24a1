#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace atox::io {

// Ordered so that emitted documents keep a stable key order.
using json = nlohmann::ordered_json;

// Parses a JSON Lines file, invoking fn(record, line_number) per non-empty
// line. Throws ValidationError naming the line on parse errors.
void for_each_jsonl(const std::string& path, const std::function<void(json&&, size_t)>& fn);

std::vector<json> read_jsonl(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Stage outputs land in <path>.partial first and are renamed on commit, so
// an aborted run leaves only .partial artifacts behind.
class StagedFile {
 public:
  explicit StagedFile(std::string path);
  ~StagedFile();
  void write(const std::string& content) { buffer_ += content; }
  void write_line(const std::string& line) {
    buffer_ += line;
    buffer_ += '\n';
  }
  void commit();

 private:
  std::string path_;
  std::string buffer_;
  bool committed_ = false;
};

// Fixed-decimal formatting for deterministic CSV/JSON reports.
std::string format_fixed(double v, int decimals);

}  // namespace atox::io
