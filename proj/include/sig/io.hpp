#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "sig/points.hpp"

namespace sig::io {

namespace fs = std::filesystem;

// CSV with a header row "x0,x1,...", one sample per line, values in the
// shortest form that round-trips exactly.
void write_points_csv(const fs::path& path, const Points& points);
Points read_points_csv(const fs::path& path);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

void ensure_directory(const fs::path& dir);

std::string format_double(double v);

}  // namespace sig::io
