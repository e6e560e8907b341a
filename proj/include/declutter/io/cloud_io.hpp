#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "declutter/point_cloud.hpp"

namespace declutter::io {

// One "x,y,z" row per point; an optional "x,y,z" header line, blank lines and
// lines starting with '#' are skipped. Throws FormatError naming the line.
PointCloud read_csv(std::istream& in, const std::string& source = "<csv>");

// ASCII PLY with a vertex element whose first three properties are x, y, z
// (float or double). Extra vertex properties and later elements are ignored.
PointCloud read_ply(std::istream& in, const std::string& source = "<ply>");

// Dispatches on the extension (.csv or .ply, case-insensitive).
PointCloud read_cloud(const std::filesystem::path& path);

// Round-trip exact (17 significant digits).
void write_csv(std::ostream& out, const PointCloud& cloud);
void write_ply(std::ostream& out, const PointCloud& cloud);

}  // namespace declutter::io
