#include "arfdx/imaging.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "arfdx/error.hpp"
#include "arfdx/io.hpp"

namespace arfdx {

namespace {

std::uint8_t to_pixel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Bilinear sample with edge clamping.
double sample_clamped(const GrayImage& img, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
  const auto x0 = static_cast<std::size_t>(std::floor(x));
  const auto y0 = static_cast<std::size_t>(std::floor(y));
  const std::size_t x1 = std::min(x0 + 1, img.width - 1);
  const std::size_t y1 = std::min(y0 + 1, img.height - 1);
  const double fx = x - static_cast<double>(x0);
  const double fy = y - static_cast<double>(y0);
  const double top = img.at(x0, y0) * (1 - fx) + img.at(x1, y0) * fx;
  const double bottom = img.at(x0, y1) * (1 - fx) + img.at(x1, y1) * fx;
  return top * (1 - fy) + bottom * fy;
}

// Bilinear sample where out-of-image neighbours contribute 0.
double sample_zero(const GrayImage& img, double x, double y) {
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const double fx = x - fx0;
  const double fy = y - fy0;
  auto px = [&](double xi, double yi) -> double {
    if (xi < 0 || yi < 0 || xi >= static_cast<double>(img.width) || yi >= static_cast<double>(img.height)) return 0.0;
    return img.at(static_cast<std::size_t>(xi), static_cast<std::size_t>(yi));
  };
  double v = 0.0;
  if ((1 - fx) * (1 - fy) != 0) v += px(fx0, fy0) * (1 - fx) * (1 - fy);
  if (fx * (1 - fy) != 0) v += px(fx0 + 1, fy0) * fx * (1 - fy);
  if ((1 - fx) * fy != 0) v += px(fx0, fy0 + 1) * (1 - fx) * fy;
  if (fx * fy != 0) v += px(fx0 + 1, fy0 + 1) * fx * fy;
  return v;
}

void check_image(const GrayImage& img) {
  if (img.width == 0 || img.height == 0 || img.pixels.size() != img.width * img.height) {
    throw Error(ErrorCode::kInvalidArgument, "malformed image");
  }
}

}  // namespace

GrayImage GrayImage::filled(std::size_t width, std::size_t height, std::uint8_t value) {
  return {width, height, std::vector<std::uint8_t>(width * height, value)};
}

GrayImage histogram_equalize(const GrayImage& img) {
  check_image(img);
  std::array<std::size_t, 256> cdf{};
  for (auto p : img.pixels) ++cdf[p];
  for (std::size_t v = 1; v < 256; ++v) cdf[v] += cdf[v - 1];
  std::size_t cdf_min = 0;
  for (auto c : cdf) {
    if (c) {
      cdf_min = c;
      break;
    }
  }
  const std::size_t n = img.pixels.size();
  std::array<std::uint8_t, 256> lut{};
  if (n != cdf_min) {
    for (std::size_t v = 0; v < 256; ++v) {
      const double num = cdf[v] >= cdf_min ? static_cast<double>(cdf[v] - cdf_min) : 0.0;
      lut[v] = to_pixel(num / static_cast<double>(n - cdf_min) * 255.0);
    }
  }
  GrayImage out = img;
  for (auto& p : out.pixels) p = lut[p];
  return out;
}

GrayImage resize_bilinear(const GrayImage& img, std::size_t width, std::size_t height) {
  check_image(img);
  if (width == img.width && height == img.height) return img;
  GrayImage out = GrayImage::filled(width, height, 0);
  const double sx = static_cast<double>(img.width) / static_cast<double>(width);
  const double sy = static_cast<double>(img.height) / static_cast<double>(height);
  for (std::size_t y = 0; y < height; ++y) {
    const double src_y = (static_cast<double>(y) + 0.5) * sy - 0.5;
    for (std::size_t x = 0; x < width; ++x) {
      const double src_x = (static_cast<double>(x) + 0.5) * sx - 0.5;
      out.at(x, y) = to_pixel(sample_clamped(img, src_x, src_y));
    }
  }
  return out;
}

GrayImage resize_short_side(const GrayImage& img, std::size_t target) {
  check_image(img);
  if (target == 0) throw Error(ErrorCode::kInvalidArgument, "resize target must be >= 1");
  const std::size_t short_side = std::min(img.width, img.height);
  const std::size_t long_side = std::max(img.width, img.height);
  const auto scaled_long = static_cast<std::size_t>(
      std::llround(static_cast<double>(target) * static_cast<double>(long_side) / static_cast<double>(short_side)));
  if (img.width <= img.height) return resize_bilinear(img, target, scaled_long);
  return resize_bilinear(img, scaled_long, target);
}

GrayImage crop(const GrayImage& img, std::size_t x0, std::size_t y0, std::size_t side) {
  check_image(img);
  if (x0 + side > img.width || y0 + side > img.height) {
    throw Error(ErrorCode::kTooSmall, "crop window exceeds image bounds");
  }
  GrayImage out = GrayImage::filled(side, side, 0);
  for (std::size_t y = 0; y < side; ++y) {
    std::copy_n(img.pixels.begin() + static_cast<std::ptrdiff_t>((y0 + y) * img.width + x0), side,
                out.pixels.begin() + static_cast<std::ptrdiff_t>(y * side));
  }
  return out;
}

GrayImage rotate(const GrayImage& img, double degrees) {
  check_image(img);
  if (degrees == 0.0) return img;
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const double cx = (static_cast<double>(img.width) - 1) / 2.0;
  const double cy = (static_cast<double>(img.height) - 1) / 2.0;
  GrayImage out = GrayImage::filled(img.width, img.height, 0);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      // inverse map: destination -> source
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const double src_x = c * dx - s * dy + cx;
      const double src_y = s * dx + c * dy + cy;
      out.at(x, y) = to_pixel(sample_zero(img, src_x, src_y));
    }
  }
  return out;
}

GrayImage crop_and_rotate(const GrayImage& img, const ImageConfig& cfg, Rng& rng) {
  check_image(img);
  const std::size_t side = cfg.target_side;
  if (img.width < side || img.height < side) {
    throw Error(ErrorCode::kTooSmall, "image smaller than crop target " + std::to_string(side));
  }
  if (cfg.crop_mode == CropMode::kCenterEval) {
    return crop(img, (img.width - side) / 2, (img.height - side) / 2, side);
  }
  std::uniform_int_distribution<std::size_t> ox(0, img.width - side);
  std::uniform_int_distribution<std::size_t> oy(0, img.height - side);
  const std::size_t x0 = ox(rng);
  const std::size_t y0 = oy(rng);
  std::uniform_real_distribution<double> angle(-cfg.max_rotation_deg, cfg.max_rotation_deg);
  const double deg = cfg.max_rotation_deg > 0 ? angle(rng) : 0.0;
  return rotate(crop(img, x0, y0, side), deg);
}

GrayImage preprocess(const GrayImage& img, const ImageConfig& cfg, Rng& rng) {
  return crop_and_rotate(resize_short_side(histogram_equalize(img), cfg.target_side), cfg, rng);
}

GrayImage parse_pgm(std::istream& in) {
  auto next_token = [&]() {
    std::string tok;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!tok.empty()) break;
        continue;
      }
      tok += c;
    }
    return tok;
  };
  if (next_token() != "P5") throw Error(ErrorCode::kFormatError, "not a binary PGM (P5)");
  GrayImage img;
  try {
    img.width = std::stoul(next_token());
    img.height = std::stoul(next_token());
    if (std::stoul(next_token()) != 255) throw Error(ErrorCode::kFormatError, "PGM maxval must be 255");
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kFormatError, "malformed PGM header");
  }
  img.pixels.resize(img.width * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (static_cast<std::size_t>(in.gcount()) != img.pixels.size()) {
    throw Error(ErrorCode::kFormatError, "truncated PGM pixel data");
  }
  check_image(img);
  return img;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  return parse_pgm(in);
}

void write_pgm(std::ostream& out, const GrayImage& img) {
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

namespace {

constexpr std::array<char, 8> kEmbeddingMagic{'A', 'R', 'F', 'E', 'M', 'B', '1', '\0'};

template <typename T>
void put_le(std::string& out, T v) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> buf{};
  in.read(reinterpret_cast<char*>(buf.data()), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    throw Error(ErrorCode::kFormatError, "truncated embedding file");
  }
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(buf[i]) << (8 * i));
  return v;
}

}  // namespace

EmbeddingMap parse_embeddings(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 8 || magic != kEmbeddingMagic) throw Error(ErrorCode::kFormatError, "bad embedding magic");
  const auto count = get_le<std::uint32_t>(in);
  const auto width = get_le<std::uint32_t>(in);
  EmbeddingMap out;
  for (std::uint32_t r = 0; r < count; ++r) {
    const auto id_len = get_le<std::uint16_t>(in);
    std::string id(id_len, '\0');
    in.read(id.data(), id_len);
    if (in.gcount() != id_len) throw Error(ErrorCode::kFormatError, "truncated embedding id");
    ImageEmbedding emb{id, std::vector<float>(width)};
    for (auto& f : emb.vector) {
      f = std::bit_cast<float>(get_le<std::uint32_t>(in));
      if (!std::isfinite(f)) throw Error(ErrorCode::kFormatError, "non-finite embedding entry for " + id);
    }
    if (!out.emplace(id, std::move(emb)).second) {
      throw Error(ErrorCode::kFormatError, "duplicate embedding id " + id);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::kFormatError, "trailing bytes after embedding records (width mismatch?)");
  }
  return out;
}

EmbeddingMap load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file " + path.string());
  return parse_embeddings(in);
}

std::string serialize_embeddings(std::span<const ImageEmbedding> records) {
  const std::size_t width = records.empty() ? 0 : records.front().vector.size();
  std::set<std::string_view> ids;
  for (const auto& r : records) {
    if (r.vector.size() != width) throw Error(ErrorCode::kFormatError, "embedding widths differ");
    if (r.study_image_id.size() > 0xFFFF) throw Error(ErrorCode::kFormatError, "embedding id too long");
    if (!ids.insert(r.study_image_id).second) {
      throw Error(ErrorCode::kFormatError, "duplicate embedding id " + r.study_image_id);
    }
  }
  std::string out(kEmbeddingMagic.begin(), kEmbeddingMagic.end());
  put_le(out, static_cast<std::uint32_t>(records.size()));
  put_le(out, static_cast<std::uint32_t>(width));
  for (const auto& r : records) {
    put_le(out, static_cast<std::uint16_t>(r.study_image_id.size()));
    out += r.study_image_id;
    for (float f : r.vector) put_le(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

void save_embeddings(const std::filesystem::path& path, std::span<const ImageEmbedding> records) {
  write_file_atomic(path, serialize_embeddings(records));
}

ImageEmbedding stub_extract(const GrayImage& img, std::size_t width, std::string id) {
  check_image(img);
  const auto grid = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(width))));
  ImageEmbedding emb{std::move(id), {}};
  emb.vector.reserve(width);
  for (std::size_t cell = 0; cell < width; ++cell) {
    const std::size_t row = cell / grid;
    const std::size_t col = cell % grid;
    const std::size_t y0 = row * img.height / grid, y1 = (row + 1) * img.height / grid;
    const std::size_t x0 = col * img.width / grid, x1 = (col + 1) * img.width / grid;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t y = y0; y < y1; ++y) {
      for (std::size_t x = x0; x < x1; ++x) {
        sum += img.at(x, y);
        ++n;
      }
    }
    emb.vector.push_back(n ? static_cast<float>(sum / static_cast<double>(n) / 255.0) : 0.0f);
  }
  return emb;
}

}  // namespace arfdx
