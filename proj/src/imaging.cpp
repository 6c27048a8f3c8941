#include "phfcox/imaging.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace phfcox {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Large-but-finite stand-in for +inf inside the envelope passes; restored to
// +inf afterwards. Any true squared distance is <= 3*(n-1)^2, far below half
// of this.
constexpr double kBig = 1e18;

// 1D squared-distance transform of a sampled function f (Felzenszwalb &
// Huttenlocher lower envelope of parabolas). Reads n samples at the given
// stride and writes the transform back in place.
void edt_1d(double* f, int n, size_t stride, int* v, double* z, double* d) {
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double fq = f[q * stride];
    double s;
    while (true) {
      double fv = f[v[k] * stride];
      s = ((fq + static_cast<double>(q) * q) - (fv + static_cast<double>(v[k]) * v[k])) /
          (2.0 * q - 2.0 * v[k]);
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = static_cast<double>(q) - v[k];
    d[q] = dq * dq + f[v[k] * stride];
  }
  for (int q = 0; q < n; ++q) f[q * stride] = d[q];
}

}  // namespace

Grid3<double> squared_edt_to_seeds(const Grid3<uint8_t>& seeds) {
  Grid3<double> d(seeds.nx, seeds.ny, seeds.nz);
  for (size_t i = 0; i < seeds.size(); ++i)
    d.data[i] = seeds.data[i] ? 0.0 : kBig;

  int nmax = std::max({seeds.nx, seeds.ny, seeds.nz});
  std::vector<int> v(nmax);
  std::vector<double> z(nmax + 1), buf(nmax);

  // Pass per axis; after each pass d holds the squared distance minimized
  // over the axes processed so far.
  for (int zi = 0; zi < seeds.nz; ++zi)
    for (int y = 0; y < seeds.ny; ++y)
      edt_1d(&d.data[d.index(0, y, zi)], seeds.nx, 1, v.data(), z.data(), buf.data());
  for (int zi = 0; zi < seeds.nz; ++zi)
    for (int x = 0; x < seeds.nx; ++x)
      edt_1d(&d.data[d.index(x, 0, zi)], seeds.ny, seeds.nx, v.data(), z.data(), buf.data());
  if (seeds.nz > 1) {
    size_t plane = static_cast<size_t>(seeds.nx) * seeds.ny;
    for (int y = 0; y < seeds.ny; ++y)
      for (int x = 0; x < seeds.nx; ++x)
        edt_1d(&d.data[d.index(x, y, 0)], seeds.nz, plane, v.data(), z.data(), buf.data());
  }
  for (double& val : d.data)
    if (val >= kBig * 0.5) val = kInf;
  return d;
}

SignedDistanceVolume sedt3(const LabelVolume& vol) {
  if (!vol.has_tumor()) throw std::runtime_error("sedt3: empty tumor");

  bool has[3] = {false, false, false};
  for (Label l : vol.labels.data) has[static_cast<int>(l)] = true;
  int distinct = has[0] + has[1] + has[2];
  if (distinct < 2)
    throw std::runtime_error("sedt3: volume has a single label, no different-label target");

  SignedDistanceVolume out;
  out.values = Grid3<double>(vol.labels.nx, vol.labels.ny, vol.labels.nz, kInf);
  out.spacing = vol.spacing;
  out.provenance = SedtProvenance::SEDT3;
  out.subject_id = vol.subject_id;
  out.frontal = vol.frontal;

  // One transform per tumor label present: seeds are all voxels with any
  // different label (non-tumor voxels included as targets).
  for (Label lab : {Label::AT, Label::NonAT}) {
    if (!has[static_cast<int>(lab)]) continue;
    Grid3<uint8_t> seeds(vol.labels.nx, vol.labels.ny, vol.labels.nz);
    for (size_t i = 0; i < seeds.size(); ++i)
      seeds.data[i] = vol.labels.data[i] != lab;
    Grid3<double> d2 = squared_edt_to_seeds(seeds);
    double sign = (lab == Label::AT) ? -1.0 : 1.0;
    for (size_t i = 0; i < d2.size(); ++i)
      if (vol.labels.data[i] == lab)
        out.values.data[i] = sign * std::sqrt(d2.data[i]) * vol.spacing;
  }
  return out;
}

SignedDistanceVolume sedt2(const BinaryImage& img, double spacing) {
  size_t tumor = img.count_tumor();
  if (tumor == 0) throw std::runtime_error("sedt2: image has no tumor pixel");
  if (tumor == img.pixels.size()) throw std::runtime_error("sedt2: image is all tumor");

  SignedDistanceVolume out;
  out.values = Grid3<double>(img.nx, img.ny, 1);
  out.spacing = spacing;
  out.provenance = SedtProvenance::SEDT2;

  for (int pass = 0; pass < 2; ++pass) {
    bool target_tumor = (pass == 0);  // pass 0: distances for non-tumor pixels
    Grid3<uint8_t> seeds(img.nx, img.ny, 1);
    for (size_t i = 0; i < seeds.size(); ++i)
      seeds.data[i] = (img.pixels[i] != 0) == target_tumor;
    Grid3<double> d2 = squared_edt_to_seeds(seeds);
    double sign = target_tumor ? 1.0 : -1.0;
    for (size_t i = 0; i < d2.size(); ++i)
      if ((img.pixels[i] != 0) != target_tumor)
        out.values.data[i] = sign * std::sqrt(d2.data[i]) * spacing;
  }
  return out;
}

namespace {

Label parse_label_class(const std::string& s) {
  if (s == "NonTumor") return Label::NonTumor;
  if (s == "NonAT") return Label::NonAT;
  if (s == "AT") return Label::AT;
  throw std::runtime_error("LV1: unknown label class '" + s + "'");
}

}  // namespace

LabelVolume load_label_volume(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("LV1: cannot open header " + path.string());
  nlohmann::json hdr;
  try {
    in >> hdr;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("LV1: malformed header: " + std::string(e.what()));
  }
  if (!hdr.contains("magic") || hdr["magic"] != "LV1")
    throw std::runtime_error("LV1: bad magic in " + path.string());
  if (!hdr.contains("dims") || !hdr["dims"].is_array() || hdr["dims"].size() != 3)
    throw std::runtime_error("LV1: dims must be [nx,ny,nz]");

  int nx = hdr["dims"][0], ny = hdr["dims"][1], nz = hdr["dims"][2];
  if (nx <= 0 || ny <= 0 || nz <= 0) throw std::runtime_error("LV1: dims must be positive");

  // Decode label map: payload code -> class.
  Label code_map[256];
  bool code_known[256] = {false};
  if (hdr.contains("label_map")) {
    for (auto& [key, val] : hdr["label_map"].items()) {
      int code = std::stoi(key);
      if (code < 0 || code > 255) throw std::runtime_error("LV1: label code out of range");
      code_map[code] = parse_label_class(val.get<std::string>());
      code_known[code] = true;
    }
  } else {
    // BraTS default: 0 background, 1 NCR/NET, 2 ED, 4 enhancing tumor.
    code_map[0] = Label::NonTumor;
    code_map[1] = Label::NonAT;
    code_map[2] = Label::NonAT;
    code_map[4] = Label::AT;
    code_known[0] = code_known[1] = code_known[2] = code_known[4] = true;
  }

  std::filesystem::path payload;
  if (hdr.contains("payload"))
    payload = path.parent_path() / hdr["payload"].get<std::string>();
  else
    payload = std::filesystem::path(path).replace_extension(".raw");

  std::ifstream raw(payload, std::ios::binary);
  if (!raw) throw std::runtime_error("LV1: cannot open payload " + payload.string());
  std::vector<uint8_t> codes((std::istreambuf_iterator<char>(raw)), std::istreambuf_iterator<char>());
  size_t expect = static_cast<size_t>(nx) * ny * nz;
  if (codes.size() != expect)
    throw std::runtime_error("LV1: payload has " + std::to_string(codes.size()) +
                             " voxels, header declares " + std::to_string(expect));

  LabelVolume vol;
  vol.labels = Grid3<Label>(nx, ny, nz);
  for (size_t i = 0; i < codes.size(); ++i) {
    if (!code_known[codes[i]])
      throw std::runtime_error("LV1: unknown label code " + std::to_string(codes[i]));
    vol.labels.data[i] = code_map[codes[i]];
  }
  vol.spacing = hdr.value("spacing", 1.0);
  vol.subject_id = hdr.value("subject_id", path.stem().string());
  vol.frontal = hdr.value("frontal", 0) != 0;
  if (!vol.has_tumor()) throw std::runtime_error("LV1: empty tumor in " + path.string());
  return vol;
}

void save_label_volume(const LabelVolume& vol, const std::filesystem::path& header_path) {
  std::filesystem::path payload = std::filesystem::path(header_path).replace_extension(".raw");
  nlohmann::json hdr;
  hdr["magic"] = "LV1";
  hdr["dims"] = {vol.labels.nx, vol.labels.ny, vol.labels.nz};
  hdr["spacing"] = vol.spacing;
  hdr["label_map"] = {{"0", "NonTumor"}, {"1", "NonAT"}, {"4", "AT"}};
  hdr["subject_id"] = vol.subject_id;
  hdr["frontal"] = vol.frontal ? 1 : 0;
  hdr["payload"] = payload.filename().string();

  std::ofstream out(header_path);
  if (!out) throw std::runtime_error("LV1: cannot write header " + header_path.string());
  out << hdr.dump(2) << "\n";

  std::ofstream raw(payload, std::ios::binary);
  if (!raw) throw std::runtime_error("LV1: cannot write payload " + payload.string());
  for (Label l : vol.labels.data) {
    uint8_t code = l == Label::NonTumor ? 0 : (l == Label::NonAT ? 1 : 4);
    raw.put(static_cast<char>(code));
  }
}

}  // namespace phfcox
