#include "anisoac/io.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

static_assert(std::endian::native == std::endian::little,
              "snapshot format assumes a little-endian host");

namespace anisoac {

using json = nlohmann::ordered_json;

void atomic_write_text(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(bool(out), "atomic_write_text: cannot open " + tmp);
    out.write(content.data(), std::streamsize(content.size()));
    require(bool(out), "atomic_write_text: short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), "read_text: cannot open " + path);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return s;
}

void write_snapshot(const std::string& stem, const ScalarField& u,
                    const SnapshotMeta& meta) {
  json hdr;
  hdr["dims"] = std::vector<int>(meta.dims.begin(), meta.dims.begin() + meta.dim);
  hdr["lengths"] =
      std::vector<double>(meta.lengths.begin(), meta.lengths.begin() + meta.dim);
  hdr["epsilon"] = meta.epsilon;
  hdr["delta"] = meta.delta;
  hdr["tags"] = meta.tags;
  atomic_write_text(stem + ".json", hdr.dump(2) + "\n");

  const std::string tmp = stem + ".f64.tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(bool(out), "write_snapshot: cannot open " + tmp);
    out.write(reinterpret_cast<const char*>(u.v.data()),
              std::streamsize(u.v.size() * sizeof(double)));
    require(bool(out), "write_snapshot: short write");
  }
  std::filesystem::rename(tmp, stem + ".f64");
}

Snapshot read_snapshot(const std::string& stem) {
  const json hdr = json::parse(read_text(stem + ".json"));
  Snapshot snap;
  snap.meta.dim = int(hdr.at("dims").size());
  require(snap.meta.dim >= 1 && snap.meta.dim <= 3, "read_snapshot: bad dims");
  for (int a = 0; a < snap.meta.dim; ++a) {
    snap.meta.dims[std::size_t(a)] = hdr.at("dims")[std::size_t(a)].get<int>();
    snap.meta.lengths[std::size_t(a)] = hdr.at("lengths")[std::size_t(a)].get<double>();
  }
  snap.meta.epsilon = hdr.value("epsilon", 0.0);
  snap.meta.delta = hdr.value("delta", 0.0);
  if (hdr.contains("tags"))
    snap.meta.tags = hdr.at("tags").get<std::map<std::string, std::string>>();

  snap.grid = std::make_shared<Grid>(snap.meta.dim, snap.meta.dims, snap.meta.lengths);

  std::ifstream in(stem + ".f64", std::ios::binary | std::ios::ate);
  require(bool(in), "read_snapshot: cannot open " + stem + ".f64");
  const std::int64_t bytes = in.tellg();
  const std::int64_t want = snap.grid->size() * std::int64_t(sizeof(double));
  require(bytes == want, "read_snapshot: header/content length mismatch for " + stem);
  in.seekg(0);
  std::vector<double> data(std::size_t(snap.grid->size()));
  in.read(reinterpret_cast<char*>(data.data()), want);
  require(bool(in), "read_snapshot: short read");
  snap.field = ScalarField(*snap.grid, std::move(data));
  return snap;
}

}  // namespace anisoac
