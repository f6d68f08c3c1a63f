#include "phaseless/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "phaseless/error.hpp"

namespace phaseless {

namespace {

using nlohmann::json;

constexpr const char* kAxis = "xyz";

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* ext) {
  return std::filesystem::path(stem.string() + ext);
}

json vec_json(const Vec& v, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from(const json& a, int dim) {
  if (!a.is_array() || static_cast<int>(a.size()) != dim) {
    throw Error(ErrorCode::kIo, "dataset header: vector of the wrong length");
  }
  Vec v{};
  for (int i = 0; i < dim; ++i) v[i] = a.at(i).get<double>();
  return v;
}

}  // namespace

void write_dataset(const std::filesystem::path& stem, const PhaselessDataset& ds, const json& extra) {
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  const int d = ds.dim;
  std::ofstream csv(with_suffix(stem, ".csv"), std::ios::binary);
  if (!csv) throw Error(ErrorCode::kIo, "cannot write " + with_suffix(stem, ".csv").string());
  csv << "E";
  for (int a = 0; a < d; ++a) csv << ",p_" << kAxis[a];
  csv << ",abs_f_sq";
  for (std::size_t j = 1; j <= ds.references; ++j) csv << ",abs_f" << j << "_sq";
  csv << ",flags\n";
  for (const auto& r : ds.records) {
    csv << fmt::format("{:.17g}", r.channel.energy);
    for (int a = 0; a < d; ++a) csv << fmt::format(",{:.17g}", r.channel.p[a]);
    for (double v : r.values) csv << fmt::format(",{:.17g}", v);
    csv << ',' << r.flags << '\n';
  }
  if (!csv) throw Error(ErrorCode::kIo, "write failed for " + with_suffix(stem, ".csv").string());

  json h = extra.is_object() ? extra : json::object();
  h["dim"] = d;
  h["grid"] = {{"n", ds.grid.n}, {"box_min", vec_json(ds.grid.box_min, d)}, {"box_max", vec_json(ds.grid.box_max, d)}};
  h["mode"] = to_string(ds.mode);
  h["references"] = ds.references;
  h["energies"] = ds.energies;
  h["channels"] = ds.records.size();
  if (!h.contains("gamma")) h["gamma"] = {{"flip", false}, {"twist", 0.0}};
  std::ofstream js(with_suffix(stem, ".json"), std::ios::binary);
  js << h.dump(2) << '\n';
  if (!js) throw Error(ErrorCode::kIo, "write failed for " + with_suffix(stem, ".json").string());
}

LoadedDataset read_dataset(const std::filesystem::path& stem) {
  LoadedDataset out;
  std::ifstream js(with_suffix(stem, ".json"));
  if (!js) throw Error(ErrorCode::kIo, "cannot read " + with_suffix(stem, ".json").string());
  try {
    out.header = json::parse(js);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("dataset header: ") + e.what());
  }
  const json& h = out.header;
  PhaselessDataset& ds = out.dataset;
  GammaConvention conv;
  try {
    ds.dim = h.at("dim").get<int>();
    ds.grid.dim = ds.dim;
    ds.grid.n = h.at("grid").at("n").get<int>();
    ds.grid.box_min = vec_from(h.at("grid").at("box_min"), ds.dim);
    ds.grid.box_max = vec_from(h.at("grid").at("box_max"), ds.dim);
    const auto mode = h.at("mode").get<std::string>();
    if (mode == "born-oracle") {
      ds.mode = DataMode::kBornOracle;
    } else if (mode == "full-solver") {
      ds.mode = DataMode::kFullSolver;
    } else {
      throw Error(ErrorCode::kIo, "dataset header: unknown mode " + mode);
    }
    ds.references = h.at("references").get<std::size_t>();
    ds.energies = h.at("energies").get<std::vector<double>>();
    if (h.contains("gamma")) {
      conv.flip = h["gamma"].value("flip", false);
      conv.twist = h["gamma"].value("twist", 0.0);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("dataset header: ") + e.what());
  }
  ds.grid.validate();

  std::ifstream csv(with_suffix(stem, ".csv"));
  if (!csv) throw Error(ErrorCode::kIo, "cannot read " + with_suffix(stem, ".csv").string());
  std::string line;
  std::getline(csv, line);
  const std::size_t width = 1 + static_cast<std::size_t>(ds.dim) + ds.references + 2;
  const GridSpec pgrid = ds.grid.dual();
  std::size_t lineno = 1;
  while (std::getline(csv, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != width) {
      throw Error(ErrorCode::kIo, fmt::format("dataset line {}: expected {} columns", lineno, width));
    }
    try {
      std::size_t c = 0;
      const double e = std::stod(cells[c++]);
      Vec p{};
      for (int a = 0; a < ds.dim; ++a) p[a] = std::stod(cells[c++]);
      ChannelRecord rec;
      rec.channel = channel(e, p, ds.dim, conv);
      for (int a = 0; a < ds.dim; ++a) {
        rec.channel.node[a] = static_cast<int>(std::lround((p[a] - pgrid.box_min[a]) / pgrid.spacing(a)));
      }
      for (std::size_t j = 0; j <= ds.references; ++j) rec.values.push_back(std::stod(cells[c++]));
      rec.flags = static_cast<unsigned>(std::stoul(cells[c++]));
      ds.records.push_back(std::move(rec));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kIo, fmt::format("dataset line {}: malformed number", lineno));
    }
  }
  ds.validate();
  return out;
}

}  // namespace phaseless
