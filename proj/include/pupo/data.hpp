#pragma once

#include "pupo/core.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pupo {

enum class Split
{
  train,
  val,
  test,
};

std::string_view split_name(Split split) noexcept;
Split parse_split(std::string_view name);

struct DataItem
{
  RealImage image;     ///< ground truth in [0,1]
  ComplexGrid kspace;  ///< fully sampled, DC at (0,0)
  std::string source;  ///< file path or generator description
};

struct Dataset
{
  std::string name;
  Split split = Split::train;
  std::vector<DataItem> items;

  std::size_t size() const noexcept { return items.size(); }
  bool empty() const noexcept { return items.empty(); }
  /// Spatial size shared by all items; throws ShapeError when items differ or the set is empty.
  std::pair<std::size_t, std::size_t> dims() const;
};

struct AugmentSpec
{
  bool center_translation = true;
  std::size_t rotations_per_image = 8;
  std::uint64_t rotation_seed = 0;
};

/// (x - min) / (max - min); a constant image maps to zeros. Throws DataError on
/// non-finite pixels.
RealImage normalize(Matrix const &raw);

/// Integer shift that moves the intensity centroid of the foreground
/// (pixels > 0.05) to (rows/2, cols/2). Empty when there is no foreground.
std::optional<std::pair<std::ptrdiff_t, std::ptrdiff_t>> centroid_shift(RealImage const &image);

/// Translate by centroid_shift with zero fill; identity without foreground.
RealImage center_translate(RealImage const &image);

/// Bilinear rotation about the grid center by `degrees` (counterclockwise),
/// zero fill outside, output clamped to [0,1].
RealImage rotate(RealImage const &image, double degrees);

/// spec.rotations_per_image rotations by seeded uniform angles in [0, 360).
std::vector<RealImage> rotate_random(RealImage const &image, AugmentSpec const &spec);

/// forward_2d of the image as a real-valued complex grid.
ComplexGrid to_kspace(RealImage const &image);

/// Bilinear resampling with pixel-center alignment.
RealImage resize(RealImage const &image, std::size_t rows, std::size_t cols);

/// One seeded Shepp-Logan-style phantom in [0,1].
RealImage make_phantom(std::size_t size, std::uint64_t seed);

/// `count` phantoms with paired k-space; item i uses a sub-seed of (seed, i).
Dataset make_phantom_set(std::size_t count, std::size_t size, std::uint64_t seed, Split split = Split::train);

/// Optional translation followed by the rotations. Each source item yields
/// itself plus rotations_per_image rotated copies; dimensions never change.
Dataset augment(Dataset const &data, AugmentSpec const &spec);

/// Image file to normalized RealImage: PGM, or the binary real/complex grid
/// formats (a complex grid is taken as k-space and inverted to its magnitude).
RealImage load_image(std::filesystem::path const &path);

/// Manifest lines are "<split> <path>", '#' starts a comment, relative paths
/// resolve against the manifest directory. Images are resized to `size` x
/// `size` when given. Returns one dataset per split that appears.
std::map<Split, Dataset> load_manifest(std::filesystem::path const &manifest,
                                       std::optional<std::size_t> size = std::nullopt);

/// Writes every item as a binary image grid under `dir` and appends one manifest line per item.
void write_dataset(std::filesystem::path const &dir, std::filesystem::path const &manifest, Dataset const &data);

/// Seeded permutation of [0, n) cut into consecutive batches of batch_size
/// (the last may be shorter).
std::vector<std::vector<std::size_t>> batch_order(std::size_t n, std::size_t batch_size, std::uint64_t seed);

} // namespace pupo
