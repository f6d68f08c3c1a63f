#include "phaseless/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "phaseless/error.hpp"

namespace phaseless {

namespace {

static_assert(std::endian::native == std::endian::little,
              "field files are written in host order, which must be little-endian");

using nlohmann::json;

std::filesystem::path sidecar(const std::filesystem::path& p) {
  return std::filesystem::path(p.string() + ".json");
}

json box_json(const GridSpec& g, const Vec& v) {
  json a = json::array();
  for (int i = 0; i < g.dim; ++i) a.push_back(v[i]);
  return a;
}

json grid_json(const GridSpec& g, const char* kind) {
  json j;
  j["dim"] = g.dim;
  j["n"] = json::array();
  for (int i = 0; i < g.dim; ++i) j["n"].push_back(g.n);
  j["box_min"] = box_json(g, g.box_min);
  j["box_max"] = box_json(g, g.box_max);
  j["kind"] = kind;
  return j;
}

GridSpec grid_from(const json& j, const char* prefix) {
  GridSpec g;
  g.dim = j.at("dim").get<int>();
  const auto ns = j.at("n").get<std::vector<int>>();
  if (static_cast<int>(ns.size()) != g.dim) throw Error(ErrorCode::kIo, "field sidecar: bad n");
  for (int n : ns) {
    if (n != ns[0]) throw Error(ErrorCode::kIo, "field sidecar: anisotropic sample counts are unsupported");
  }
  g.n = ns[0];
  const auto lo = j.at(std::string(prefix) + "box_min").get<std::vector<double>>();
  const auto hi = j.at(std::string(prefix) + "box_max").get<std::vector<double>>();
  for (int a = 0; a < g.dim; ++a) {
    g.box_min[a] = lo.at(a);
    g.box_max[a] = hi.at(a);
  }
  return g;
}

void write_raw(const std::filesystem::path& path, const std::vector<cplx>& values) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  os.write(reinterpret_cast<const char*>(values.data()),
           static_cast<std::streamsize>(values.size() * sizeof(cplx)));
}

std::vector<cplx> read_raw(const std::filesystem::path& path, std::size_t count) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<cplx> v(count);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(cplx)));
  if (is.gcount() != static_cast<std::streamsize>(count * sizeof(cplx))) {
    throw Error(ErrorCode::kIo, "truncated field file " + path.string());
  }
  return v;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  os << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return json::parse(is);
}

}  // namespace

void write_field(const std::filesystem::path& path, const ScalarField& f) {
  write_raw(path, f.values);
  write_json(sidecar(path), grid_json(f.grid, "spatial"));
}

void write_field(const std::filesystem::path& path, const SpectralField& s) {
  write_raw(path, s.values);
  json j = grid_json(s.grid, "spectral");
  j["dual_box_min"] = box_json(s.spatial, s.spatial.box_min);
  j["dual_box_max"] = box_json(s.spatial, s.spatial.box_max);
  write_json(sidecar(path), j);
}

ScalarField read_scalar_field(const std::filesystem::path& path) {
  const json j = read_json(sidecar(path));
  if (j.at("kind") != "spatial") throw Error(ErrorCode::kIo, "expected a spatial field");
  ScalarField f(grid_from(j, ""));
  f.values = read_raw(path, f.grid.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) f.support_mask[i] = f.values[i] != cplx{};
  return f;
}

SpectralField read_spectral_field(const std::filesystem::path& path) {
  const json j = read_json(sidecar(path));
  if (j.at("kind") != "spectral") throw Error(ErrorCode::kIo, "expected a spectral field");
  SpectralField s(grid_from(j, "dual_"));
  if (!(s.grid == grid_from(j, ""))) throw Error(ErrorCode::kGridMismatch, "spectral sidecar is inconsistent");
  s.values = read_raw(path, s.grid.size());
  return s;
}

}  // namespace phaseless
