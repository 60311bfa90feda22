#include "fringefree/ply_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "fringefree/errors.hpp"

namespace fringefree {

namespace fs = std::filesystem;

namespace {

void append_float(std::ofstream& f, float v) { f.write(reinterpret_cast<const char*>(&v), 4); }

}  // namespace

void write_ply(const fs::path& path, const PointCloud& cloud, bool binary) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << "ply\n"
    << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n")
    << "element vertex " << cloud.size() << "\n";
  f << "property float x\nproperty float y\nproperty float z\n"
    << "property float dst\nproperty float phase_residual\n"
    << "property uchar status\n"
    << "property float pixel_u\nproperty float pixel_v\n"
    << "end_header\n";
  for (const CloudPoint& p : cloud) {
    if (binary) {
      append_float(f, static_cast<float>(p.position.x()));
      append_float(f, static_cast<float>(p.position.y()));
      append_float(f, static_cast<float>(p.position.z()));
      append_float(f, static_cast<float>(p.dst));
      append_float(f, static_cast<float>(p.phase_residual));
      f.put(static_cast<char>(p.status));
      append_float(f, static_cast<float>(p.pixel.x()));
      append_float(f, static_cast<float>(p.pixel.y()));
    } else {
      f << static_cast<float>(p.position.x()) << " " << static_cast<float>(p.position.y()) << " "
        << static_cast<float>(p.position.z()) << " " << static_cast<float>(p.dst) << " "
        << static_cast<float>(p.phase_residual) << " " << static_cast<int>(p.status) << " "
        << static_cast<float>(p.pixel.x()) << " " << static_cast<float>(p.pixel.y()) << "\n";
    }
  }
  if (!f) throw IoError("write failed for " + path.string());
}

PointCloud read_ply(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(f, line);
  if (line != "ply" && line != "ply\r") throw IoError(path.string() + " is not a PLY file");

  bool binary = false;
  size_t count = 0;
  std::vector<std::string> props;
  std::vector<std::string> types;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    if (token == "format") {
      std::string fmt;
      ss >> fmt;
      binary = fmt == "binary_little_endian";
      if (!binary && fmt != "ascii") throw IoError("unsupported PLY format " + fmt);
    } else if (token == "element") {
      std::string name;
      ss >> name >> count;
      if (name != "vertex") throw IoError("unsupported PLY element " + name);
    } else if (token == "property") {
      std::string type, name;
      ss >> type >> name;
      types.push_back(type);
      props.push_back(name);
    } else if (token == "end_header") {
      break;
    }
  }

  auto index_of = [&](const char* name) {
    for (size_t i = 0; i < props.size(); ++i)
      if (props[i] == name) return static_cast<int>(i);
    return -1;
  };
  const int ix = index_of("x"), iy = index_of("y"), iz = index_of("z");
  if (ix < 0 || iy < 0 || iz < 0) throw IoError("PLY lacks x/y/z properties");
  const int idst = index_of("dst"), ires = index_of("phase_residual"),
            istat = index_of("status"), ipu = index_of("pixel_u"), ipv = index_of("pixel_v");

  PointCloud cloud;
  cloud.reserve(count);
  std::vector<double> row(props.size(), 0.0);
  for (size_t v = 0; v < count; ++v) {
    if (binary) {
      for (size_t p = 0; p < props.size(); ++p) {
        if (types[p] == "uchar" || types[p] == "uint8") {
          unsigned char b;
          f.read(reinterpret_cast<char*>(&b), 1);
          row[p] = b;
        } else if (types[p] == "float" || types[p] == "float32") {
          float x;
          f.read(reinterpret_cast<char*>(&x), 4);
          row[p] = x;
        } else if (types[p] == "double" || types[p] == "float64") {
          double x;
          f.read(reinterpret_cast<char*>(&x), 8);
          row[p] = x;
        } else {
          throw IoError("unsupported PLY property type " + types[p]);
        }
      }
    } else {
      for (size_t p = 0; p < props.size(); ++p)
        if (!(f >> row[p])) throw IoError("truncated ASCII PLY");
    }
    CloudPoint pt;
    pt.position = Vec3(row[ix], row[iy], row[iz]);
    if (idst >= 0) pt.dst = row[idst];
    if (ires >= 0) pt.phase_residual = row[ires];
    if (istat >= 0) pt.status = static_cast<uint8_t>(row[istat]);
    if (ipu >= 0 && ipv >= 0) pt.pixel = Vec2(row[ipu], row[ipv]);
    cloud.push_back(pt);
  }
  if (!f) throw IoError("truncated PLY " + path.string());
  return cloud;
}

}  // namespace fringefree
