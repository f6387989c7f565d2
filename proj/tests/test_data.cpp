#include "oracles.hpp"

#include "pupo/data.hpp"
#include "pupo/fourier.hpp"
#include "pupo/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace pupo;
namespace fs = std::filesystem;

namespace {

struct TempDir
{
  fs::path path;
  explicit TempDir(std::string const &name)
    : path{fs::temp_directory_path() / name}
  {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("split names")
{
  for (auto s : {Split::train, Split::val, Split::test}) CHECK(parse_split(split_name(s)) == s);
  CHECK_THROWS_AS(parse_split("holdout"), DataError);
}

TEST_CASE("normalize maps to [0,1] and rejects non-finite input")
{
  Matrix m(2, 2);
  m(0, 0) = -2.0;
  m(0, 1) = 0.0;
  m(1, 0) = 2.0;
  m(1, 1) = 1.0;
  auto const img = normalize(m);
  CHECK(img(0, 0) == 0.0);
  CHECK(img(1, 0) == 1.0);
  CHECK(img(0, 1) == doctest::Approx(0.5));
  CHECK(img(1, 1) == doctest::Approx(0.75));
  CHECK(normalize(Matrix(3, 3, 4.0)) == RealImage(Matrix(3, 3, 0.0)));
  m(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(normalize(m), DataError);
}

TEST_CASE("centroid translation moves a blob to the grid center")
{
  Matrix m(16, 16);
  for (std::size_t r = 2; r < 5; ++r) {
    for (std::size_t c = 10; c < 13; ++c) m(r, c) = 1.0;
  }
  RealImage const img(m);
  auto const shift = centroid_shift(img);
  REQUIRE(shift);
  CHECK(shift->first == 8 - 3);
  CHECK(shift->second == 8 - 11);
  auto const moved = center_translate(img);
  CHECK(moved(8, 8) == 1.0);
  CHECK(moved.pixels().sum() == doctest::Approx(9.0));
  CHECK_FALSE(centroid_shift(RealImage(Matrix(4, 4))));
  CHECK(center_translate(RealImage(Matrix(4, 4))) == RealImage(Matrix(4, 4)));
}

TEST_CASE("rotation")
{
  auto const img = RealImage(oracle::random_matrix(9, 9, 4));
  CHECK(rotate(img, 0.0) == img);
  CHECK(rotate(img, 360.0) == img);
  // a quarter turn about the center of an odd grid is an exact index permutation
  auto const q = rotate(img, 90.0);
  for (std::size_t r = 0; r < 9; ++r) {
    for (std::size_t c = 0; c < 9; ++c) {
      double const a = q(r, c);
      bool const matches = std::abs(a - img(c, 8 - r)) < 1e-9 || std::abs(a - img(8 - c, r)) < 1e-9;
      CHECK(matches);
    }
  }
  auto const back = rotate(rotate(img, 90.0), -90.0);
  for (std::size_t i = 0; i < 81; ++i) CHECK(back.pixels().values()[i] == doctest::Approx(img.pixels().values()[i]));
  auto const odd = rotate(img, 33.0);
  CHECK(odd.in_unit_range());
  CHECK(odd.rows() == 9);
}

TEST_CASE("random rotations are seeded")
{
  auto const img = RealImage(oracle::random_matrix(8, 8, 1));
  AugmentSpec const spec{.rotations_per_image = 3, .rotation_seed = 7};
  auto const a = rotate_random(img, spec);
  CHECK(a.size() == 3);
  CHECK(rotate_random(img, spec) == a);
}

TEST_CASE("augment keeps dimensions and multiplies the item count")
{
  auto const base = make_phantom_set(3, 16, 2);
  auto const aug = augment(base, AugmentSpec{.rotations_per_image = 2});
  CHECK(aug.size() == 9);
  CHECK(aug.dims() == std::pair<std::size_t, std::size_t>{16, 16});
  for (auto const &item : aug.items) {
    CHECK(item.image.in_unit_range());
    CHECK(item.kspace == to_kspace(item.image));
  }
}

TEST_CASE("k-space of an image inverts back to it")
{
  auto const img = make_phantom(24, 3);
  auto const back = inverse_2d(to_kspace(img));
  for (std::size_t i = 0; i < img.pixels().size(); ++i) {
    CHECK(back.real().values()[i] == doctest::Approx(img.pixels().values()[i]).epsilon(1e-12));
    CHECK(std::abs(back.imag().values()[i]) < 1e-12);
  }
}

TEST_CASE("resize")
{
  Matrix m(2, 2);
  m(0, 0) = 0.0;
  m(0, 1) = 1.0;
  m(1, 0) = 0.0;
  m(1, 1) = 1.0;
  auto const up = resize(RealImage(m), 4, 4);
  CHECK(up.rows() == 4);
  CHECK(up(0, 0) == doctest::Approx(0.0));
  CHECK(up(0, 3) == doctest::Approx(1.0));
  CHECK(up(2, 1) == doctest::Approx(0.25));
  auto const img = RealImage(oracle::random_matrix(5, 7, 3));
  CHECK(resize(img, 5, 7) == img);
}

TEST_CASE("phantoms: range, determinism, variety")
{
  auto const a = make_phantom(32, 1);
  CHECK(a.in_unit_range());
  CHECK(a.pixels().max() == doctest::Approx(1.0));
  CHECK(a.pixels().min() == doctest::Approx(0.0));
  CHECK(make_phantom(32, 1) == a);
  CHECK_FALSE(make_phantom(32, 2) == a);
  // the head occupies a sizeable part of the field of view
  std::size_t on = 0;
  for (double v : a.pixels().values()) on += v > 0.05 ? 1 : 0;
  CHECK(on > 32 * 32 / 5);

  auto const set = make_phantom_set(4, 16, 9, Split::val);
  CHECK(set.size() == 4);
  CHECK(set.split == Split::val);
  std::set<std::vector<double>> distinct;
  for (auto const &item : set.items) {
    distinct.insert(std::vector<double>(item.image.pixels().values().begin(), item.image.pixels().values().end()));
  }
  CHECK(distinct.size() == 4);
}

TEST_CASE("dataset dims")
{
  Dataset empty;
  CHECK_THROWS_AS(empty.dims(), ShapeError);
  auto set = make_phantom_set(2, 8, 1);
  set.items.push_back(make_phantom_set(1, 10, 1).items.front());
  CHECK_THROWS_AS(set.dims(), ShapeError);
}

TEST_CASE("manifest round trip and error handling")
{
  TempDir tmp("pupo_test_manifest");
  auto const train = make_phantom_set(3, 16, 1, Split::train);
  auto const test = make_phantom_set(2, 16, 2, Split::test);
  write_dataset(tmp.path / "images", tmp.path / "manifest.txt", train);
  write_dataset(tmp.path / "images", tmp.path / "manifest.txt", test);
  auto const sets = load_manifest(tmp.path / "manifest.txt");
  REQUIRE(sets.contains(Split::train));
  REQUIRE(sets.contains(Split::test));
  CHECK_FALSE(sets.contains(Split::val));
  CHECK(sets.at(Split::train).size() == 3);
  CHECK(sets.at(Split::test).size() == 2);
  auto const resized = load_manifest(tmp.path / "manifest.txt", 8);
  CHECK(resized.at(Split::train).dims() == std::pair<std::size_t, std::size_t>{8, 8});

  {
    std::ofstream bad(tmp.path / "bad.txt");
    bad << "# comment\ntrain images/missing.pgm\n";
  }
  CHECK_THROWS_AS(load_manifest(tmp.path / "bad.txt"), DataError);
  {
    std::ofstream bad(tmp.path / "bad2.txt");
    bad << "nosuchsplit images/a.pgm\n";
  }
  CHECK_THROWS_AS(load_manifest(tmp.path / "bad2.txt"), std::exception);
  CHECK_THROWS_AS(load_manifest(tmp.path / "absent.txt"), DataError);
}

TEST_CASE("load_image accepts PGM and grid files")
{
  TempDir tmp("pupo_test_load");
  auto const img = make_phantom(12, 4);
  io::write_image(tmp.path / "a.img", img);
  auto const a = load_image(tmp.path / "a.img");
  for (std::size_t i = 0; i < img.pixels().size(); ++i) {
    CHECK(a.pixels().values()[i] == doctest::Approx(img.pixels().values()[i]).epsilon(1e-12));
  }
  io::write_complex(tmp.path / "k.cpx", to_kspace(img));
  auto const b = load_image(tmp.path / "k.cpx");
  for (std::size_t i = 0; i < img.pixels().size(); ++i) {
    CHECK(b.pixels().values()[i] == doctest::Approx(img.pixels().values()[i]).epsilon(1e-9));
  }
  io::write_pgm(tmp.path / "c.pgm", img.pixels());
  auto const c = load_image(tmp.path / "c.pgm");
  for (std::size_t i = 0; i < img.pixels().size(); ++i) {
    CHECK(std::abs(c.pixels().values()[i] - img.pixels().values()[i]) <= 1.0 / 255.0 + 1e-12);
  }
}

TEST_CASE("batch order is a seeded partition")
{
  auto const b = batch_order(10, 4, 3);
  REQUIRE(b.size() == 3);
  CHECK(b[0].size() == 4);
  CHECK(b[2].size() == 2);
  std::set<std::size_t> seen;
  for (auto const &batch : b) seen.insert(batch.begin(), batch.end());
  CHECK(seen.size() == 10);
  CHECK(batch_order(10, 4, 3) == b);
  CHECK_FALSE(batch_order(10, 4, 4) == b);
}
