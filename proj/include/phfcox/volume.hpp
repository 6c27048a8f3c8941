#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace phfcox {

/// 3D grid with x-fastest (row-major over x, then y, then z) storage.
/// 2D data is represented with nz == 1.
template <typename T>
struct Grid3 {
  int nx = 0, ny = 0, nz = 0;
  std::vector<T> data;

  Grid3() = default;
  Grid3(int nx_, int ny_, int nz_, T fill = T{})
      : nx(nx_), ny(ny_), nz(nz_), data(static_cast<size_t>(nx_) * ny_ * nz_, fill) {
    if (nx_ <= 0 || ny_ <= 0 || nz_ <= 0)
      throw std::invalid_argument("Grid3: dims must be positive");
  }

  size_t size() const { return data.size(); }
  size_t index(int x, int y, int z) const {
    return static_cast<size_t>(z) * ny * nx + static_cast<size_t>(y) * nx + x;
  }
  T& at(int x, int y, int z) { return data[index(x, y, z)]; }
  const T& at(int x, int y, int z) const { return data[index(x, y, z)]; }
};

enum class Label : uint8_t { NonTumor = 0, NonAT = 1, AT = 2 };

/// Segmented three-class volume plus the per-subject metadata the model needs.
struct LabelVolume {
  Grid3<Label> labels;
  double spacing = 1.0;  // isotropic voxel edge length (mm)
  std::string subject_id;
  bool frontal = false;

  bool has_tumor() const {
    for (Label l : labels.data)
      if (l != Label::NonTumor) return true;
    return false;
  }
};

enum class SedtProvenance { SEDT3, SEDT2 };

/// Signed distance values on the voxel grid. Non-tumor voxels carry +inf and
/// never enter the filtration downstream.
struct SignedDistanceVolume {
  Grid3<double> values;
  double spacing = 1.0;
  SedtProvenance provenance = SedtProvenance::SEDT3;
  std::string subject_id;
  bool frontal = false;

  static constexpr double kInf = std::numeric_limits<double>::infinity();
};

/// Binary 2D image (tumor = 1, non-tumor = 0).
struct BinaryImage {
  int nx = 0, ny = 0;
  std::vector<uint8_t> pixels;  // x-fastest

  BinaryImage() = default;
  BinaryImage(int nx_, int ny_) : nx(nx_), ny(ny_), pixels(static_cast<size_t>(nx_) * ny_, 0) {}

  uint8_t& at(int x, int y) { return pixels[static_cast<size_t>(y) * nx + x]; }
  uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * nx + x]; }
  size_t count_tumor() const {
    size_t c = 0;
    for (uint8_t p : pixels) c += (p != 0);
    return c;
  }
};

}  // namespace phfcox
