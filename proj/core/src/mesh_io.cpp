// SPDX-License-Identifier: Apache-2.0
#include "semsurf/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "semsurf/error.hpp"

namespace semsurf {
namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

void append_number(std::string& out, std::uint64_t v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::uint8_t quantize(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

double parse_double(std::string_view token, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
    throw InvalidInput("OBJ line " + std::to_string(line) + ": bad number '" + std::string(token) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::string to_obj(const Mesh& mesh) {
  mesh.validate();
  std::string out = "# semsurf mesh\n# vertices ";
  append_number(out, static_cast<std::uint64_t>(mesh.positions.size()));
  out += " triangles ";
  append_number(out, static_cast<std::uint64_t>(mesh.triangles.size()));
  out += '\n';
  for (std::size_t v = 0; v < mesh.positions.size(); ++v) {
    const Vec3& p = mesh.positions[v];
    out += "v ";
    append_number(out, p.x);
    out += ' ';
    append_number(out, p.y);
    out += ' ';
    append_number(out, p.z);
    out += '\n';
    if (mesh.has_colors()) {
      const Rgb& c = mesh.colors[v];
      out += "#vc ";
      append_number(out, c.r);
      out += ' ';
      append_number(out, c.g);
      out += ' ';
      append_number(out, c.b);
      out += '\n';
    }
  }
  if (mesh.has_normals()) {
    for (const auto& n : mesh.normals) {
      out += "vn ";
      append_number(out, n.x);
      out += ' ';
      append_number(out, n.y);
      out += ' ';
      append_number(out, n.z);
      out += '\n';
    }
  }
  for (const auto& t : mesh.triangles) {
    out += 'f';
    for (auto i : t) {
      out += ' ';
      append_number(out, static_cast<std::uint64_t>(i) + 1);
      if (mesh.has_normals()) {
        out += "//";
        append_number(out, static_cast<std::uint64_t>(i) + 1);
      }
    }
    out += '\n';
  }
  return out;
}

Mesh parse_obj(const std::string& text) {
  Mesh mesh;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string_view line(text.data() + start, end - start);
    start = end + 1;
    ++line_no;
    const auto tok = split(line);
    if (tok.empty()) continue;
    if (tok[0] == "v" && tok.size() >= 4) {
      mesh.positions.push_back(
          {parse_double(tok[1], line_no), parse_double(tok[2], line_no), parse_double(tok[3], line_no)});
    } else if (tok[0] == "#vc" && tok.size() >= 4) {
      mesh.colors.push_back(
          {parse_double(tok[1], line_no), parse_double(tok[2], line_no), parse_double(tok[3], line_no)});
    } else if (tok[0] == "vn" && tok.size() >= 4) {
      mesh.normals.push_back(
          {parse_double(tok[1], line_no), parse_double(tok[2], line_no), parse_double(tok[3], line_no)});
    } else if (tok[0] == "f" && tok.size() >= 4) {
      std::vector<std::uint32_t> idx;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const auto slash = tok[i].find('/');
        const std::string_view head = tok[i].substr(0, slash);
        long long v = 0;
        const auto res = std::from_chars(head.data(), head.data() + head.size(), v);
        if (res.ec != std::errc{} || v == 0)
          throw InvalidInput("OBJ line " + std::to_string(line_no) + ": bad face index");
        if (v < 0) v += static_cast<long long>(mesh.positions.size()) + 1;
        idx.push_back(static_cast<std::uint32_t>(v - 1));
      }
      for (std::size_t i = 1; i + 1 < idx.size(); ++i) mesh.triangles.push_back({idx[0], idx[i], idx[i + 1]});
    }
  }
  mesh.validate();
  return mesh;
}

namespace {

template <class T>
void put_le(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(bytes, sizeof(T));
}

template <class T>
T get_le(const std::string& in, std::size_t& offset) {
  if (offset + sizeof(T) > in.size()) throw InvalidInput("PLY body is truncated");
  char bytes[sizeof(T)];
  std::memcpy(bytes, in.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  offset += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

enum class PlyType { kI8, kU8, kI16, kU16, kI32, kU32, kF32, kF64 };

PlyType ply_type(const std::string& name) {
  if (name == "char" || name == "int8") return PlyType::kI8;
  if (name == "uchar" || name == "uint8") return PlyType::kU8;
  if (name == "short" || name == "int16") return PlyType::kI16;
  if (name == "ushort" || name == "uint16") return PlyType::kU16;
  if (name == "int" || name == "int32") return PlyType::kI32;
  if (name == "uint" || name == "uint32") return PlyType::kU32;
  if (name == "float" || name == "float32") return PlyType::kF32;
  if (name == "double" || name == "float64") return PlyType::kF64;
  throw InvalidInput("unsupported PLY property type '" + name + "'");
}

double read_value(const std::string& in, std::size_t& offset, PlyType type) {
  switch (type) {
    case PlyType::kI8: return get_le<std::int8_t>(in, offset);
    case PlyType::kU8: return get_le<std::uint8_t>(in, offset);
    case PlyType::kI16: return get_le<std::int16_t>(in, offset);
    case PlyType::kU16: return get_le<std::uint16_t>(in, offset);
    case PlyType::kI32: return get_le<std::int32_t>(in, offset);
    case PlyType::kU32: return get_le<std::uint32_t>(in, offset);
    case PlyType::kF32: return get_le<float>(in, offset);
    case PlyType::kF64: return get_le<double>(in, offset);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::kF32;
  bool is_list = false;
  PlyType count_type = PlyType::kU8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

}  // namespace

std::string to_ply(const Mesh& mesh) {
  mesh.validate();
  std::string out = "ply\nformat binary_little_endian 1.0\ncomment semsurf mesh\nelement vertex ";
  append_number(out, static_cast<std::uint64_t>(mesh.positions.size()));
  out += "\nproperty float x\nproperty float y\nproperty float z\n";
  if (mesh.has_normals()) out += "property float nx\nproperty float ny\nproperty float nz\n";
  if (mesh.has_colors()) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out += "element face ";
  append_number(out, static_cast<std::uint64_t>(mesh.triangles.size()));
  out += "\nproperty list uchar int vertex_indices\nend_header\n";
  for (std::size_t v = 0; v < mesh.positions.size(); ++v) {
    const Vec3& p = mesh.positions[v];
    put_le(out, static_cast<float>(p.x));
    put_le(out, static_cast<float>(p.y));
    put_le(out, static_cast<float>(p.z));
    if (mesh.has_normals()) {
      const Vec3& n = mesh.normals[v];
      put_le(out, static_cast<float>(n.x));
      put_le(out, static_cast<float>(n.y));
      put_le(out, static_cast<float>(n.z));
    }
    if (mesh.has_colors()) {
      const Rgb& c = mesh.colors[v];
      put_le(out, quantize(c.r));
      put_le(out, quantize(c.g));
      put_le(out, quantize(c.b));
    }
  }
  for (const auto& t : mesh.triangles) {
    put_le(out, std::uint8_t{3});
    for (auto i : t) put_le(out, static_cast<std::int32_t>(i));
  }
  return out;
}

Mesh parse_ply(const std::string& bytes) {
  const std::size_t header_end = bytes.find("end_header\n");
  if (bytes.rfind("ply", 0) != 0 || header_end == std::string::npos) throw InvalidInput("not a PLY file");
  std::istringstream header(bytes.substr(0, header_end));
  std::vector<PlyElement> elements;
  std::string line;
  bool binary_le = false;
  while (std::getline(header, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (word == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (word == "property") {
      if (elements.empty()) throw InvalidInput("PLY property before any element");
      PlyProperty p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type >> p.name;
        p.is_list = true;
        p.count_type = ply_type(count_type);
        p.type = ply_type(item_type);
      } else {
        p.type = ply_type(type);
        ls >> p.name;
      }
      elements.back().properties.push_back(p);
    }
  }
  if (!binary_le) throw InvalidInput("only binary_little_endian PLY files are supported");

  Mesh mesh;
  std::size_t offset = header_end + std::strlen("end_header\n");
  for (const auto& e : elements) {
    for (std::size_t r = 0; r < e.count; ++r) {
      Vec3 p, n;
      Rgb c;
      bool has_n = false, has_c = false;
      std::vector<std::uint32_t> face;
      for (const auto& prop : e.properties) {
        if (prop.is_list) {
          const auto count = static_cast<std::size_t>(read_value(bytes, offset, prop.count_type));
          for (std::size_t i = 0; i < count; ++i)
            face.push_back(static_cast<std::uint32_t>(read_value(bytes, offset, prop.type)));
          continue;
        }
        const double v = read_value(bytes, offset, prop.type);
        const double color_scale = prop.type == PlyType::kU8 ? 1.0 / 255.0 : 1.0;
        if (prop.name == "x") p.x = v;
        else if (prop.name == "y") p.y = v;
        else if (prop.name == "z") p.z = v;
        else if (prop.name == "nx") n.x = v, has_n = true;
        else if (prop.name == "ny") n.y = v, has_n = true;
        else if (prop.name == "nz") n.z = v, has_n = true;
        else if (prop.name == "red") c.r = v * color_scale, has_c = true;
        else if (prop.name == "green") c.g = v * color_scale, has_c = true;
        else if (prop.name == "blue") c.b = v * color_scale, has_c = true;
      }
      if (e.name == "vertex") {
        mesh.positions.push_back(p);
        if (has_n) mesh.normals.push_back(n);
        if (has_c) mesh.colors.push_back(c);
      } else if (e.name == "face") {
        for (std::size_t i = 1; i + 1 < face.size(); ++i) mesh.triangles.push_back({face[0], face[i], face[i + 1]});
      }
    }
  }
  mesh.validate();
  return mesh;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Mesh load_mesh(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  try {
    if (ext == ".ply") return parse_ply(read_file(path));
    if (ext == ".obj") return parse_obj(read_file(path));
  } catch (const InvalidInput& e) {
    throw InvalidInput("'" + path.string() + "': " + e.what());
  }
  throw InvalidInput("unsupported mesh format '" + path.string() + "' (expected .obj or .ply)");
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".ply") return write_file(path, to_ply(mesh));
  if (ext == ".obj") return write_file(path, to_obj(mesh));
  throw InvalidInput("unsupported mesh format '" + path.string() + "' (expected .obj or .ply)");
}

std::vector<std::filesystem::path> export_character(const LayeredCharacter& character,
                                                    const std::filesystem::path& dir, const std::string& stem) {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> order = character.order;
  if (order.empty()) {
    for (const auto& [name, mesh] : character.layers) order.push_back(name);
  }
  for (const auto& name : order) {
    const Mesh& mesh = character.layers.at(name);
    for (const char* ext : {".obj", ".ply"}) {
      const auto path = dir / (stem + "_" + name + ext);
      save_mesh(mesh, path);
      written.push_back(path);
    }
  }
  return written;
}

LayeredCharacter load_character(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".ply" || ext == ".obj")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  LayeredCharacter character;
  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    const auto underscore = stem.rfind('_');
    if (underscore == std::string::npos || underscore + 1 == stem.size()) continue;
    const std::string layer = stem.substr(underscore + 1);
    const bool is_ply = f.extension() == ".ply";
    auto it = character.layers.find(layer);
    if (it != character.layers.end() && !is_ply) continue;  // PLY wins over OBJ
    if (it == character.layers.end()) {
      character.order.push_back(layer);
      if (character.scene_id.empty()) character.scene_id = stem.substr(0, underscore);
    }
    character.layers[layer] = load_mesh(f);
  }
  if (character.layers.empty()) throw IoError("no <stem>_<layer>.ply/.obj meshes found in '" + dir.string() + "'");
  return character;
}

}  // namespace semsurf
