#pragma once

#include <map>
#include <memory>
#include <string>

#include "anisoac/grid.hpp"

namespace anisoac {

// Field snapshots: <stem>.f64 holds raw little-endian 64-bit floats in
// row-major cell order; <stem>.json is the sidecar header
// {dims, lengths, epsilon, delta, tags}.
struct SnapshotMeta {
  int dim = 2;
  std::array<int, 3> dims{1, 1, 1};
  std::array<double, 3> lengths{1, 1, 1};
  double epsilon = 0;
  double delta = 0;
  std::map<std::string, std::string> tags;
};

void write_snapshot(const std::string& stem, const ScalarField& u,
                    const SnapshotMeta& meta);

struct Snapshot {
  std::shared_ptr<Grid> grid;
  ScalarField field;
  SnapshotMeta meta;
};

// Rejects header/content length mismatches.
Snapshot read_snapshot(const std::string& stem);

// Write-then-rename so partially written files are never observed.
void atomic_write_text(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

}  // namespace anisoac
