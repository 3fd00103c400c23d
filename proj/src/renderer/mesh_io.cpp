#include "assist/renderer/mesh_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "assist/core/errors.h"
#include "assist/core/io.h"

namespace assist::renderer {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int resolve_index(long raw, std::size_t count, const std::string& where) {
  long idx = raw > 0 ? raw - 1 : static_cast<long>(count) + raw;
  if (raw == 0 || idx < 0 || idx >= static_cast<long>(count)) {
    throw FormatError(fmt::format("{}: index {} out of range", where, raw));
  }
  return static_cast<int>(idx);
}

std::optional<std::filesystem::path> read_mtl_diffuse(const std::filesystem::path& mtl) {
  std::ifstream in(mtl);
  if (!in) return std::nullopt;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(trim(line));
    std::string key;
    ls >> key;
    if (key == "map_Kd") {
      std::string rest;
      std::getline(ls, rest);
      rest = trim(rest);
      // Options such as "-s 1 1 1" precede the file name; the name is last.
      const auto space = rest.find_last_of(" \t");
      if (space != std::string::npos) rest = rest.substr(space + 1);
      if (!rest.empty()) return mtl.parent_path() / rest;
    }
  }
  return std::nullopt;
}

}  // namespace

LoadedObj load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::vector<Vec3> positions;
  std::vector<Vec2> texcoords;
  std::vector<Face> faces;
  std::vector<FaceUV> face_uv;
  std::vector<int> groups;
  std::vector<std::string> group_names{"default"};
  std::map<std::string, int> group_lookup{{"default", 0}};
  int current_group = 0;
  int faces_with_uv = 0;
  std::optional<std::filesystem::path> diffuse;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = fmt::format("{}:{}", path.filename().string(), line_no);
    std::istringstream ls(trim(line));
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    if (key == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw FormatError(where + ": malformed 'v' record");
      positions.emplace_back(x, y, z);
    } else if (key == "vt") {
      double u, v;
      if (!(ls >> u >> v)) throw FormatError(where + ": malformed 'vt' record");
      texcoords.emplace_back(std::clamp(u, 0.0, 1.0), std::clamp(v, 0.0, 1.0));
    } else if (key == "g" || key == "o" || key == "usemtl") {
      std::string name;
      ls >> name;
      if (name.empty()) name = "default";
      auto [it, inserted] = group_lookup.emplace(name, static_cast<int>(group_names.size()));
      if (inserted) group_names.push_back(name);
      current_group = it->second;
    } else if (key == "mtllib") {
      std::string name;
      ls >> name;
      if (!diffuse) diffuse = read_mtl_diffuse(path.parent_path() / name);
    } else if (key == "f") {
      std::vector<int> vi;
      std::vector<int> ti;
      std::string tok;
      while (ls >> tok) {
        const auto s1 = tok.find('/');
        vi.push_back(resolve_index(std::stol(tok.substr(0, s1)), positions.size(), where));
        if (s1 != std::string::npos) {
          const auto s2 = tok.find('/', s1 + 1);
          const std::string t = tok.substr(s1 + 1, s2 == std::string::npos ? std::string::npos : s2 - s1 - 1);
          if (!t.empty()) ti.push_back(resolve_index(std::stol(t), texcoords.size(), where));
        }
      }
      if (vi.size() < 3) throw FormatError(where + ": face needs at least three vertices");
      if (!ti.empty() && ti.size() != vi.size()) throw FormatError(where + ": face mixes corners with and without vt");
      for (std::size_t k = 1; k + 1 < vi.size(); ++k) {
        faces.push_back({vi[0], vi[k], vi[k + 1]});
        groups.push_back(current_group);
        if (!ti.empty()) {
          face_uv.push_back({texcoords[static_cast<std::size_t>(ti[0])], texcoords[static_cast<std::size_t>(ti[k])],
                             texcoords[static_cast<std::size_t>(ti[k + 1])]});
          ++faces_with_uv;
        }
      }
    }
  }
  if (faces_with_uv != 0 && faces_with_uv != static_cast<int>(faces.size())) {
    throw FormatError(fmt::format("{}: some faces have vt indices and some do not", path.string()));
  }
  std::optional<std::vector<FaceUV>> uv;
  if (faces_with_uv) uv = std::move(face_uv);
  // Keep only groups that own faces, in first-use order.
  std::vector<int> remap(group_names.size(), -1);
  std::vector<std::string> used;
  for (int& g : groups) {
    if (remap[static_cast<std::size_t>(g)] < 0) {
      remap[static_cast<std::size_t>(g)] = static_cast<int>(used.size());
      used.push_back(group_names[static_cast<std::size_t>(g)]);
    }
    g = remap[static_cast<std::size_t>(g)];
  }
  return {Mesh(std::move(positions), std::move(faces), std::move(uv), std::move(groups), std::move(used)), diffuse};
}

void save_obj(const Mesh& mesh, const std::filesystem::path& path) {
  std::string out = "# assist mesh\n";
  for (const Vec3& v : mesh.vertices()) out += fmt::format("v {:.9g} {:.9g} {:.9g}\n", v.x(), v.y(), v.z());
  if (mesh.has_uv()) {
    for (const FaceUV& f : mesh.uv()) {
      for (const Vec2& t : f) out += fmt::format("vt {:.9g} {:.9g}\n", t.x(), t.y());
    }
  }
  int group = -1;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    if (mesh.face_groups()[f] != group) {
      group = mesh.face_groups()[f];
      out += fmt::format("g {}\n", mesh.group_names()[static_cast<std::size_t>(group)]);
    }
    const Face& face = mesh.faces()[f];
    if (mesh.has_uv()) {
      out += fmt::format("f {}/{} {}/{} {}/{}\n", face[0] + 1, 3 * f + 1, face[1] + 1, 3 * f + 2, face[2] + 1,
                         3 * f + 3);
    } else {
      out += fmt::format("f {} {} {}\n", face[0] + 1, face[1] + 1, face[2] + 1);
    }
  }
  core::write_text_file(path, out);
}

namespace {

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

PlyType parse_ply_type(const std::string& name) {
  static const std::map<std::string, PlyType> table = {
      {"char", PlyType::i8},    {"int8", PlyType::i8},     {"uchar", PlyType::u8},    {"uint8", PlyType::u8},
      {"short", PlyType::i16},  {"int16", PlyType::i16},   {"ushort", PlyType::u16},  {"uint16", PlyType::u16},
      {"int", PlyType::i32},    {"int32", PlyType::i32},   {"uint", PlyType::u32},    {"uint32", PlyType::u32},
      {"float", PlyType::f32},  {"float32", PlyType::f32}, {"double", PlyType::f64},  {"float64", PlyType::f64}};
  const auto it = table.find(name);
  if (it == table.end()) throw FormatError(fmt::format("ply: unknown property type '{}'", name));
  return it->second;
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::i8:
    case PlyType::u8: return 1;
    case PlyType::i16:
    case PlyType::u16: return 2;
    case PlyType::i32:
    case PlyType::u32:
    case PlyType::f32: return 4;
    case PlyType::f64: return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::f32;
  bool is_list = false;
  PlyType count_type = PlyType::u8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

class PlyReader {
 public:
  PlyReader(const std::vector<std::uint8_t>& bytes, std::size_t pos, bool binary)
      : bytes_(bytes), pos_(pos), binary_(binary) {}

  double read(PlyType t) {
    if (!binary_) return read_ascii();
    const std::size_t n = ply_size(t);
    if (pos_ + n > bytes_.size()) throw FormatError("ply: unexpected end of binary data");
    std::uint64_t raw = 0;
    for (std::size_t b = 0; b < n; ++b) raw |= static_cast<std::uint64_t>(bytes_[pos_ + b]) << (8 * b);
    pos_ += n;
    switch (t) {
      case PlyType::i8: return static_cast<std::int8_t>(raw);
      case PlyType::u8: return static_cast<std::uint8_t>(raw);
      case PlyType::i16: return static_cast<std::int16_t>(raw);
      case PlyType::u16: return static_cast<std::uint16_t>(raw);
      case PlyType::i32: return static_cast<std::int32_t>(raw);
      case PlyType::u32: return static_cast<std::uint32_t>(raw);
      case PlyType::f32: return std::bit_cast<float>(static_cast<std::uint32_t>(raw));
      case PlyType::f64: return std::bit_cast<double>(raw);
    }
    return 0.0;
  }

 private:
  double read_ascii() {
    while (pos_ < bytes_.size() && std::isspace(bytes_[pos_])) ++pos_;
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) ++pos_;
    if (start == pos_) throw FormatError("ply: unexpected end of ascii data");
    const std::string tok(reinterpret_cast<const char*>(bytes_.data() + start), pos_ - start);
    try {
      return std::stod(tok);
    } catch (const std::exception&) {
      throw FormatError(fmt::format("ply: bad number '{}'", tok));
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_;
  bool binary_;
};

}  // namespace

LoadedPly load_ply(const std::filesystem::path& path) {
  const auto bytes = core::read_file_bytes(path);
  std::size_t pos = 0;
  auto next_line = [&]() {
    const std::size_t start = pos;
    while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    if (pos >= bytes.size()) throw FormatError("ply: header is not terminated");
    std::string line(reinterpret_cast<const char*>(bytes.data() + start), pos - start);
    ++pos;
    return trim(line);
  };
  if (next_line() != "ply") throw FormatError("ply: missing magic");
  bool binary = false;
  std::vector<PlyElement> elements;
  for (;;) {
    const std::string line = next_line();
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "end_header") break;
    if (key == "format") {
      std::string fmt_name;
      ls >> fmt_name;
      if (fmt_name == "binary_little_endian") {
        binary = true;
      } else if (fmt_name != "ascii") {
        throw FormatError(fmt::format("ply: unsupported format '{}'", fmt_name));
      }
    } else if (key == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (key == "property") {
      if (elements.empty()) throw FormatError("ply: property before element");
      PlyProperty p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string ct, it;
        ls >> ct >> it >> p.name;
        p.is_list = true;
        p.count_type = parse_ply_type(ct);
        p.type = parse_ply_type(it);
      } else {
        p.type = parse_ply_type(type);
        ls >> p.name;
      }
      elements.back().props.push_back(p);
    }
  }

  PlyReader reader(bytes, pos, binary);
  std::vector<Vec3> vertices;
  std::vector<std::array<double, 3>> colors;
  bool has_color = false, color_is_float = false;
  std::vector<Face> faces;
  for (const auto& e : elements) {
    for (std::size_t i = 0; i < e.count; ++i) {
      if (e.name == "vertex") {
        Vec3 v = Vec3::Zero();
        std::array<double, 3> rgb{0.5, 0.5, 0.5};
        for (const auto& p : e.props) {
          if (p.is_list) {
            const auto n = static_cast<std::size_t>(reader.read(p.count_type));
            for (std::size_t k = 0; k < n; ++k) reader.read(p.type);
            continue;
          }
          const double value = reader.read(p.type);
          if (p.name == "x") v.x() = value;
          else if (p.name == "y") v.y() = value;
          else if (p.name == "z") v.z() = value;
          else if (p.name == "red" || p.name == "green" || p.name == "blue") {
            has_color = true;
            color_is_float = p.type == PlyType::f32 || p.type == PlyType::f64;
            const std::size_t ch = p.name == "red" ? 0 : (p.name == "green" ? 1 : 2);
            rgb[ch] = color_is_float ? value : value / 255.0;
          }
        }
        vertices.push_back(v);
        colors.push_back(rgb);
      } else {
        for (const auto& p : e.props) {
          if (!p.is_list) {
            reader.read(p.type);
            continue;
          }
          const auto n = static_cast<std::size_t>(reader.read(p.count_type));
          std::vector<int> idx(n);
          for (auto& k : idx) k = static_cast<int>(reader.read(p.type));
          if (e.name == "face" && (p.name == "vertex_indices" || p.name == "vertex_index")) {
            if (n < 3) throw FormatError(fmt::format("ply: face {} has fewer than three vertices", i));
            for (std::size_t k = 1; k + 1 < n; ++k) faces.push_back({idx[0], idx[k], idx[k + 1]});
          }
        }
      }
    }
  }
  Mesh mesh(std::move(vertices), std::move(faces));
  std::optional<Texture> texture;
  if (has_color) {
    texture = Texture::vertex(mesh.vertex_count());
    for (std::size_t v = 0; v < colors.size(); ++v) {
      for (int ch = 0; ch < 3; ++ch) texture->at(v, ch) = std::clamp(colors[v][static_cast<std::size_t>(ch)], 0.0, 1.0);
    }
  }
  return {std::move(mesh), std::move(texture)};
}

void save_ply(const Mesh& mesh, const Texture& colors, const std::filesystem::path& path) {
  if (colors.kind() != TextureKind::vertex) throw FormatError("save_ply needs a vertex texture");
  colors.check_binding(mesh);
  std::string out = fmt::format(
      "ply\nformat ascii 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\n"
      "property uchar red\nproperty uchar green\nproperty uchar blue\nelement face {}\n"
      "property list uchar int vertex_indices\nend_header\n",
      mesh.vertex_count(), mesh.face_count());
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const Vec3& p = mesh.vertices()[v];
    out += fmt::format("{:.9g} {:.9g} {:.9g} {} {} {}\n", p.x(), p.y(), p.z(), core::quantize_unit(colors.at(v, 0)),
                       core::quantize_unit(colors.at(v, 1)), core::quantize_unit(colors.at(v, 2)));
  }
  for (const Face& f : mesh.faces()) out += fmt::format("3 {} {} {}\n", f[0], f[1], f[2]);
  core::write_text_file(path, out);
}

}  // namespace assist::renderer
