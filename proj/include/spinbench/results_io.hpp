#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spinbench/model.hpp"
#include "spinbench/version.hpp"

namespace spinbench {

using json = nlohmann::json;

// Results files are line-delimited JSON records under a single '#' header
// that names the record kind and embeds the producing config (including
// the toolkit version).  Keys serialize in sorted order and numbers use
// shortest round-trip form, so equal runs compare byte-identical.

struct ResultsHeader {
  std::string kind;
  json config;
};

inline std::string format_header(const ResultsHeader& h) {
  json cfg = h.config;
  cfg["version"] = version;
  return std::string("# ") + format_version + " kind=" + h.kind +
         " config=" + cfg.dump();
}

inline ResultsHeader parse_header(const std::string& line) {
  const std::string prefix = std::string("# ") + format_version + " kind=";
  if (line.rfind(prefix, 0) != 0)
    throw std::runtime_error("bad results header");
  const auto cfg_pos = line.find(" config=", prefix.size());
  if (cfg_pos == std::string::npos)
    throw std::runtime_error("results header lacks config");
  ResultsHeader h;
  h.kind = line.substr(prefix.size(), cfg_pos - prefix.size());
  h.config = json::parse(line.substr(cfg_pos + 8));
  return h;
}

class ResultsWriter {
 public:
  ResultsWriter(std::ostream& os, const ResultsHeader& header) : os_(os) {
    os_ << format_header(header) << '\n';
  }

  void write(const json& record) { os_ << record.dump() << '\n'; }

 private:
  std::ostream& os_;
};

struct ResultsFile {
  ResultsHeader header;
  std::vector<json> records;
};

inline ResultsFile read_results(std::istream& is) {
  ResultsFile f;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty results file");
  f.header = parse_header(line);
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      f.records.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw std::runtime_error("bad record at line " + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  return f;
}

inline ResultsFile read_results_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_results(is);
}

// hex encoding of packed configs, one fixed-width word at a time
inline std::string to_hex(const PackedConfig& p) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(p.words.size() * 16);
  for (const std::uint64_t w : p.words)
    for (int shift = 60; shift >= 0; shift -= 4)
      s.push_back(digits[(w >> shift) & 0xf]);
  return s;
}

inline PackedConfig from_hex(const std::string& s) {
  if (s.empty() || s.size() % 16 != 0)
    throw std::invalid_argument("bad packed config hex");
  PackedConfig p;
  for (std::size_t w = 0; w < s.size() / 16; ++w) {
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < 16; ++i) {
      const char c = s[w * 16 + i];
      word <<= 4;
      if (c >= '0' && c <= '9') word |= std::uint64_t(c - '0');
      else if (c >= 'a' && c <= 'f') word |= std::uint64_t(c - 'a' + 10);
      else throw std::invalid_argument("bad packed config hex");
    }
    p.words.push_back(word);
  }
  return p;
}

} // namespace spinbench
