#include "mfn/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mfn {

std::string format_double(double v) {
  char buf[40];
  // %.17g always round-trips; shorten when a smaller precision is exact.
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) return buf;
  }
  return buf;
}

void TableWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_.size())
    throw std::invalid_argument("table row width does not match the columns");
  rows_.push_back(values);
}

void TableWriter::save(const std::string& path) const {
  std::ostringstream os;
  for (const auto& [k, v] : meta_) os << "# " << k << " = " << v << "\n";
  os << "#";
  for (const auto& c : columns_) os << " " << c;
  os << "\n";
  for (const auto& r : rows_) {
    for (size_t i = 0; i < r.size(); ++i) {
      if (i) os << " ";
      os << format_double(r[i]);
    }
    os << "\n";
  }
  write_text_atomic(path, os.str());
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(tmp + ": cannot open for writing");
    out << content;
    if (!out) throw std::runtime_error(tmp + ": write failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error(path + ": atomic rename failed");
}

uint64_t fnv1a_hash(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace mfn
