#pragma once

#include <filesystem>
#include <string>

#include "phfcox/volume.hpp"

namespace phfcox {

/// Load a volume in the LV1 format: a JSON header
///   {magic:"LV1", dims:[nx,ny,nz], spacing, label_map:{code->class},
///    subject_id, frontal, payload}
/// next to a raw binary payload of nx*ny*nz unsigned 8-bit codes, x-fastest.
/// `path` names the header; the payload path is resolved relative to it
/// (default: header path with extension replaced by ".raw").
/// Throws std::runtime_error on malformed headers, payload size mismatch,
/// unknown label codes, or an empty (all non-tumor) volume.
LabelVolume load_label_volume(const std::filesystem::path& path);

/// Write header + payload. The payload lands next to the header with a ".raw"
/// extension. Label codes: NonTumor->0, NonAT->1, AT->4 (BraTS-style).
void save_label_volume(const LabelVolume& vol, const std::filesystem::path& header_path);

/// Signed Euclidean distance transform for three-class volumes.
/// Each AT/non-AT voxel gets the exact Euclidean distance (voxel units times
/// spacing) to the nearest voxel of any different label, negated for AT.
/// Non-tumor voxels get +inf. Throws if the volume has no tumor voxel or only
/// a single distinct label (no different-label target exists).
SignedDistanceVolume sedt3(const LabelVolume& vol);

/// Two-class 2D specialization: tumor pixels get the negated distance to the
/// nearest non-tumor pixel and vice versa. Throws on all-tumor or
/// all-non-tumor images.
SignedDistanceVolume sedt2(const BinaryImage& img, double spacing = 1.0);

/// Exact squared Euclidean distance to the nearest seed voxel, computed with
/// the axis-separable lower-envelope-of-parabolas transform. Distances are in
/// voxel units; squared values are integer-exact. Voxels with no seed
/// anywhere get +inf.
Grid3<double> squared_edt_to_seeds(const Grid3<uint8_t>& seeds);

}  // namespace phfcox
