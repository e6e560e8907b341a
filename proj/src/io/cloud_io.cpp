#include "declutter/io/cloud_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "declutter/error.hpp"

namespace declutter::io {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw FormatError(source + ":" + std::to_string(line) + ": " + what);
}

bool parse_double(std::string_view s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* end = t.data() + t.size();
  const auto r = std::from_chars(t.data(), end, out);
  return r.ec == std::errc() && r.ptr == end;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

PointCloud read_csv(std::istream& in, const std::string& source) {
  PointCloud cloud;
  std::string raw;
  std::size_t line = 0;
  bool seen_data = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    const auto cols = split(s, ',');
    if (!seen_data && cols.size() == 3 && lower(trim(cols[0])) == "x" && lower(trim(cols[1])) == "y" &&
        lower(trim(cols[2])) == "z") {
      seen_data = true;
      continue;
    }
    seen_data = true;
    if (cols.size() != 3) fail(source, line, "expected 3 comma-separated values, got " + std::to_string(cols.size()));
    Vec3 p;
    for (int i = 0; i < 3; ++i)
      if (!parse_double(cols[static_cast<std::size_t>(i)], p[i]))
        fail(source, line, "not a number: '" + trim(cols[static_cast<std::size_t>(i)]) + "'");
    if (!is_finite(p)) fail(source, line, "non-finite coordinate");
    cloud.points.push_back(p);
  }
  return cloud;
}

PointCloud read_ply(std::istream& in, const std::string& source) {
  std::string raw;
  std::size_t line = 0;
  auto next = [&](std::string& s) {
    if (!std::getline(in, raw)) return false;
    ++line;
    s = trim(raw);
    return true;
  };
  std::string s;
  if (!next(s) || s != "ply") fail(source, 1, "missing 'ply' magic");
  bool ascii = false;
  long long vertex_count = -1;
  long long elements_before = 0;  // lines of elements declared before vertex
  bool in_vertex = false, vertex_seen = false;
  std::vector<std::string> props;
  for (;;) {
    if (!next(s)) fail(source, line, "unexpected end of header");
    if (s.empty()) continue;
    const auto w = words(s);
    if (w[0] == "end_header") break;
    if (w[0] == "comment" || w[0] == "obj_info") continue;
    if (w[0] == "format") {
      if (w.size() < 2) fail(source, line, "malformed format line");
      if (w[1] != "ascii") fail(source, line, "only ASCII PLY is supported (got '" + w[1] + "')");
      ascii = true;
    } else if (w[0] == "element") {
      if (w.size() != 3) fail(source, line, "malformed element line");
      long long n = 0;
      const auto r = std::from_chars(w[2].data(), w[2].data() + w[2].size(), n);
      if (r.ec != std::errc() || r.ptr != w[2].data() + w[2].size() || n < 0)
        fail(source, line, "bad element count '" + w[2] + "'");
      in_vertex = w[1] == "vertex";
      if (in_vertex) {
        if (vertex_seen) fail(source, line, "duplicate vertex element");
        vertex_seen = true;
        vertex_count = n;
      } else if (!vertex_seen) {
        elements_before += n;
      }
    } else if (w[0] == "property") {
      if (in_vertex) {
        if (w.size() != 3) fail(source, line, "vertex list properties are not supported");
        props.push_back(w[2]);
      }
    } else {
      fail(source, line, "unknown header keyword '" + w[0] + "'");
    }
  }
  if (!ascii) fail(source, line, "missing format line");
  if (!vertex_seen) fail(source, line, "no vertex element");
  if (props.size() < 3 || props[0] != "x" || props[1] != "y" || props[2] != "z")
    fail(source, line, "vertex properties must start with x y z");

  for (long long i = 0; i < elements_before; ++i)
    if (!next(s)) fail(source, line, "unexpected end of file");

  PointCloud cloud;
  cloud.points.reserve(static_cast<std::size_t>(vertex_count));
  for (long long i = 0; i < vertex_count; ++i) {
    if (!next(s)) fail(source, line + 1, "expected " + std::to_string(vertex_count) + " vertices, got " + std::to_string(i));
    const auto w = words(s);
    if (w.size() != props.size())
      fail(source, line, "expected " + std::to_string(props.size()) + " values, got " + std::to_string(w.size()));
    Vec3 p;
    for (int k = 0; k < 3; ++k)
      if (!parse_double(w[static_cast<std::size_t>(k)], p[k]))
        fail(source, line, "not a number: '" + w[static_cast<std::size_t>(k)] + "'");
    if (!is_finite(p)) fail(source, line, "non-finite coordinate");
    cloud.points.push_back(p);
  }
  return cloud;
}

PointCloud read_cloud(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  const std::string ext = lower(path.extension().string());
  if (ext == ".csv") return read_csv(in, path.string());
  if (ext == ".ply") return read_ply(in, path.string());
  throw FormatError(path.string() + ": unknown cloud format '" + ext + "' (expected .csv or .ply)");
}

namespace {

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

void write_csv(std::ostream& out, const PointCloud& cloud) {
  out << "x,y,z\n";
  for (const auto& p : cloud.points) out << num(p.x()) << ',' << num(p.y()) << ',' << num(p.z()) << '\n';
}

void write_ply(std::ostream& out, const PointCloud& cloud) {
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  for (const auto& p : cloud.points) out << num(p.x()) << ' ' << num(p.y()) << ' ' << num(p.z()) << '\n';
}

}  // namespace declutter::io
