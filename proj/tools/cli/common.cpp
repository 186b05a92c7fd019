#include "common.hpp"

#include <fstream>
#include <iostream>

#include "gazekit/error.hpp"

namespace gazekit::cli {

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
}

std::string render_json(const OrderedJson& j) { return dump_json(j, 2) + "\n"; }

OrderedJson optional_number(const std::optional<double>& v) {
  return v ? OrderedJson(*v) : OrderedJson(nullptr);
}

void for_each_json_line(const std::filesystem::path& path,
                        const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path.string(), ParseError::Location::kLine, n,
                       "malformed JSON at column " + std::to_string(e.byte));
    }
    if (!j.is_object()) throw ParseError(path.string(), ParseError::Location::kLine, n, "expected a JSON object");
    fn(j, n);
  }
}

}  // namespace gazekit::cli
