#pragma once

#include <string>
#include <utility>
#include <vector>

namespace mfn {

// Plain delimited text with '#'-prefixed metadata header lines; written
// atomically (temp file + rename).
class TableWriter {
 public:
  void meta(const std::string& key, const std::string& value) { meta_.push_back({key, value}); }
  void columns(std::vector<std::string> names) { columns_ = std::move(names); }
  void row(const std::vector<double>& values);
  void save(const std::string& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

// Shortest round-trip decimal representation.
std::string format_double(double v);

void write_text_atomic(const std::string& path, const std::string& content);

uint64_t fnv1a_hash(const std::string& bytes);

inline constexpr const char* kSoftwareVersion = "0.1.0";

}  // namespace mfn
