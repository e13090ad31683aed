#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "arfdx/rng.hpp"

namespace arfdx {

// 8-bit grayscale, row-major.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  static GrayImage filled(std::size_t width, std::size_t height, std::uint8_t value);

  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

enum class CropMode { kRandomTrain, kCenterEval };

struct ImageConfig {
  std::size_t target_side = 512;
  double max_rotation_deg = 15.0;
  CropMode crop_mode = CropMode::kCenterEval;
};

// Global equalization over the 256-bin histogram. A constant image maps to 0.
GrayImage histogram_equalize(const GrayImage& img);

// Bilinear resampling (pixel-center aligned, edge clamped).
GrayImage resize_bilinear(const GrayImage& img, std::size_t width, std::size_t height);

// Short side becomes `target`; long side round(target * long / short).
GrayImage resize_short_side(const GrayImage& img, std::size_t target);

GrayImage crop(const GrayImage& img, std::size_t x0, std::size_t y0, std::size_t side);

// Counter-clockwise rotation about the image center, bilinear, zero fill.
GrayImage rotate(const GrayImage& img, double degrees);

// RandomTrain: uniform crop offset, then rotation ~ U(-max, +max).
// CenterEval: centered crop only. Throws TooSmall if a side < target.
GrayImage crop_and_rotate(const GrayImage& img, const ImageConfig& cfg, Rng& rng);

// equalize -> resize_short_side -> crop_and_rotate
GrayImage preprocess(const GrayImage& img, const ImageConfig& cfg, Rng& rng);

// Binary PGM (P5), maxval 255.
GrayImage parse_pgm(std::istream& in);
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(std::ostream& out, const GrayImage& img);

struct ImageEmbedding {
  std::string study_image_id;
  std::vector<float> vector;
};

using EmbeddingMap = std::map<std::string, ImageEmbedding>;

// "ARFEMB1\0", u32 count, u32 width, then per record u16 id length, UTF-8 id,
// width x f32; all little-endian.
EmbeddingMap parse_embeddings(std::istream& in);
EmbeddingMap load_embeddings(const std::filesystem::path& path);
std::string serialize_embeddings(std::span<const ImageEmbedding> records);
void save_embeddings(const std::filesystem::path& path, std::span<const ImageEmbedding> records);

// Deterministic stand-in for the frozen backbone: mean intensity of each cell
// of a ceil(sqrt(width)) square grid, row-major, first `width` cells, /255.
ImageEmbedding stub_extract(const GrayImage& img, std::size_t width, std::string id = {});

}  // namespace arfdx
