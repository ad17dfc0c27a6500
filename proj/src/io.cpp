#include "sig/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "sig/error.hpp"

namespace sig::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) ensure_directory(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_points_csv(const fs::path& path, const Points& points) {
  std::string text;
  for (std::size_t k = 0; k < points.dim; ++k) {
    if (k) text += ',';
    text += "x" + std::to_string(k);
  }
  text += '\n';
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t k = 0; k < points.dim; ++k) {
      if (k) text += ',';
      text += format_double(points(i, k));
    }
    text += '\n';
  }
  write_text(path, text);
}

Points read_points_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw IoError("'" + path.string() + "' has no CSV header");
  std::size_t dim = 1;
  for (char c : line) dim += c == ',' ? 1 : 0;
  Points pts(dim, {});
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::size_t fields = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      double v = 0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        throw IoError("'" + path.string() + "' line " + std::to_string(line_no) + ": not a number");
      }
      pts.coords.push_back(v);
      ++fields;
      p = res.ptr;
      if (p < end && (*p == ',' || *p == '\r')) ++p;
    }
    if (fields != dim) {
      throw IoError("'" + path.string() + "' line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                    " fields, got " + std::to_string(fields));
    }
  }
  return pts;
}

}  // namespace sig::io
