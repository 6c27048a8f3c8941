#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "phfcox/imaging.hpp"
#include "phfcox/rng.hpp"

using namespace phfcox;

namespace {

LabelVolume make_volume(int nx, int ny, int nz, Label fill = Label::NonAT) {
  LabelVolume v;
  v.labels = Grid3<Label>(nx, ny, nz, fill);
  v.subject_id = "t";
  return v;
}

Grid3<Label> random_labels(int n, Rng& rng) {
  Grid3<Label> g(n, n, n);
  for (Label& l : g.data) {
    double u = rng.uniform();
    l = u < 0.25 ? Label::NonTumor : (u < 0.6 ? Label::NonAT : Label::AT);
  }
  return g;
}

}  // namespace

TEST_CASE("sedt3 center AT in non-AT cube") {
  LabelVolume v = make_volume(3, 3, 3, Label::NonAT);
  v.labels.at(1, 1, 1) = Label::AT;
  SignedDistanceVolume s = sedt3(v);
  CHECK(s.values.at(1, 1, 1) == doctest::Approx(-1.0));
  CHECK(s.values.at(0, 1, 1) == doctest::Approx(1.0));
  CHECK(s.values.at(1, 0, 1) == doctest::Approx(1.0));
  CHECK(s.values.at(1, 1, 2) == doctest::Approx(1.0));
  // Diagonal-in-plane non-AT voxel: nearest different label is the center AT.
  CHECK(s.values.at(0, 0, 1) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("sedt3 1x1x5 row") {
  LabelVolume v = make_volume(1, 1, 5, Label::NonAT);
  v.labels.at(0, 0, 2) = Label::AT;
  SignedDistanceVolume s = sedt3(v);
  double expect[5] = {2.0, 1.0, -1.0, 1.0, 2.0};
  for (int z = 0; z < 5; ++z) CHECK(s.values.at(0, 0, z) == doctest::Approx(expect[z]));
}

TEST_CASE("sedt3 non-tumor maps to +inf") {
  LabelVolume v = make_volume(3, 1, 1, Label::AT);
  v.labels.at(0, 0, 0) = Label::NonTumor;
  v.labels.at(1, 0, 0) = Label::NonAT;
  SignedDistanceVolume s = sedt3(v);
  CHECK(std::isinf(s.values.at(0, 0, 0)));
  CHECK(s.values.at(1, 0, 0) == doctest::Approx(1.0));
  CHECK(s.values.at(2, 0, 0) == doctest::Approx(-1.0));
}

TEST_CASE("sedt3 rejects empty or single-label volumes") {
  LabelVolume empty = make_volume(2, 2, 2, Label::NonTumor);
  CHECK_THROWS(sedt3(empty));
  LabelVolume uniform = make_volume(2, 2, 2, Label::AT);
  CHECK_THROWS(sedt3(uniform));
}

TEST_CASE("sedt3 matches brute force on random volumes") {
  for (int rep = 0; rep < 20; ++rep) {
    Rng rng = Rng::substream(8811, "sedt-oracle", rep);
    LabelVolume v;
    v.labels = random_labels(16, rng);
    if (!v.has_tumor()) continue;
    SignedDistanceVolume s = sedt3(v);
    std::vector<int64_t> brute = oracle::brute_force_sq_dist_to_other_label(v.labels);
    for (size_t i = 0; i < s.values.size(); ++i) {
      if (v.labels.data[i] == Label::NonTumor) {
        CHECK(std::isinf(s.values.data[i]));
        continue;
      }
      double d = s.values.data[i];
      int64_t sq = std::llround(d * d);
      CHECK(sq == brute[i]);
      CHECK((v.labels.data[i] == Label::AT ? d < 0 : d > 0));
    }
  }
}

TEST_CASE("sedt3 swap symmetry negates values") {
  Rng rng = Rng::substream(8812, "sedt-sym", 0);
  LabelVolume v;
  v.labels = random_labels(8, rng);
  LabelVolume w = v;
  for (Label& l : w.labels.data) {
    if (l == Label::AT)
      l = Label::NonAT;
    else if (l == Label::NonAT)
      l = Label::AT;
  }
  SignedDistanceVolume sv = sedt3(v), sw = sedt3(w);
  for (size_t i = 0; i < sv.values.size(); ++i) {
    if (std::isinf(sv.values.data[i])) {
      CHECK(std::isinf(sw.values.data[i]));
    } else {
      CHECK(sw.values.data[i] == doctest::Approx(-sv.values.data[i]));
    }
  }
}

TEST_CASE("sedt3 padding with non-tumor leaves values unchanged") {
  Rng rng = Rng::substream(8813, "sedt-pad", 0);
  LabelVolume v;
  v.labels = random_labels(6, rng);
  if (!v.has_tumor()) return;
  SignedDistanceVolume sv = sedt3(v);

  LabelVolume padded = make_volume(10, 10, 10, Label::NonTumor);
  for (int z = 0; z < 6; ++z)
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x) padded.labels.at(x + 2, y + 2, z + 2) = v.labels.at(x, y, z);
  SignedDistanceVolume sp = sedt3(padded);
  for (int z = 0; z < 6; ++z)
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x) {
        double a = sv.values.at(x, y, z), b = sp.values.at(x + 2, y + 2, z + 2);
        if (std::isinf(a))
          CHECK(std::isinf(b));
        else
          CHECK(a == doctest::Approx(b));
      }
}

TEST_CASE("sedt2 single tumor pixel") {
  BinaryImage img(5, 5);
  img.at(2, 2) = 1;
  SignedDistanceVolume s = sedt2(img);
  CHECK(s.values.at(2, 2, 0) == doctest::Approx(-1.0));
  CHECK(s.values.at(1, 2, 0) == doctest::Approx(1.0));
  CHECK(s.values.at(2, 1, 0) == doctest::Approx(1.0));
  CHECK(s.values.at(3, 2, 0) == doctest::Approx(1.0));
  CHECK(s.values.at(2, 3, 0) == doctest::Approx(1.0));
  CHECK(s.values.at(1, 1, 0) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("sedt2 rejects degenerate images") {
  BinaryImage all_tumor(3, 3);
  for (auto& p : all_tumor.pixels) p = 1;
  CHECK_THROWS(sedt2(all_tumor));
  BinaryImage none(3, 3);
  CHECK_THROWS(sedt2(none));
}

TEST_CASE("LV1 round trip") {
  LabelVolume v = make_volume(3, 4, 2, Label::NonAT);
  v.labels.at(1, 1, 0) = Label::AT;
  v.labels.at(0, 0, 1) = Label::NonTumor;
  v.subject_id = "case-7";
  v.frontal = true;
  v.spacing = 1.0;

  auto dir = std::filesystem::temp_directory_path() / "phfcox_test_lv1";
  std::filesystem::create_directories(dir);
  auto header = dir / "case7.json";
  save_label_volume(v, header);
  LabelVolume r = load_label_volume(header);
  CHECK(r.labels.nx == 3);
  CHECK(r.labels.ny == 4);
  CHECK(r.labels.nz == 2);
  CHECK(r.subject_id == "case-7");
  CHECK(r.frontal);
  CHECK(r.labels.data == v.labels.data);
}

TEST_CASE("LV1 validation errors") {
  auto dir = std::filesystem::temp_directory_path() / "phfcox_test_lv1_err";
  std::filesystem::create_directories(dir);

  // All non-tumor: empty tumor error.
  LabelVolume empty = make_volume(2, 2, 2, Label::NonTumor);
  auto h1 = dir / "empty.json";
  save_label_volume(empty, h1);
  CHECK_THROWS_WITH_AS(load_label_volume(h1), doctest::Contains("empty tumor"),
                       std::runtime_error);

  // Payload shorter than dims promise.
  LabelVolume v = make_volume(3, 3, 3, Label::NonAT);
  v.labels.at(1, 1, 1) = Label::AT;
  auto h2 = dir / "short.json";
  save_label_volume(v, h2);
  {
    std::ofstream raw(dir / "short.raw", std::ios::binary | std::ios::trunc);
    for (int i = 0; i < 26; ++i) raw.put(1);
  }
  CHECK_THROWS_AS(load_label_volume(h2), std::runtime_error);

  // Unknown label code.
  auto h3 = dir / "badcode.json";
  save_label_volume(v, h3);
  {
    std::ofstream raw(dir / "badcode.raw", std::ios::binary | std::ios::trunc);
    for (int i = 0; i < 27; ++i) raw.put(i == 5 ? 9 : 1);
  }
  CHECK_THROWS_AS(load_label_volume(h3), std::runtime_error);

  CHECK_THROWS_AS(load_label_volume(dir / "missing.json"), std::runtime_error);
}
