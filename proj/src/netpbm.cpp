#include "edn/netpbm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "edn/layers.hpp"

namespace edn {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (value > (1u << 30)) throw FormatError(std::string("netpbm: ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw FormatError(std::string("netpbm: expected ") + what, start);
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw FormatError("netpbm: expected whitespace before raster", pos_);
    }
    ++pos_;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

Image8 decode_netpbm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError("netpbm: bad magic, expected P5 or P6", 0);
  }
  Image8 img;
  img.channels = bytes[1] == '6' ? 3 : 1;
  HeaderReader r(bytes.substr(2));
  img.w = r.number("width");
  img.h = r.number("height");
  r.skip_space_and_comments();
  const std::size_t maxval_at = r.pos() + 2;
  const std::size_t maxval = r.number("maxval");
  if (maxval != 255) throw FormatError("netpbm: maxval " + std::to_string(maxval) + " is not 255", maxval_at);
  r.single_space();
  if (img.w == 0 || img.h == 0) throw FormatError("netpbm: zero image dimension", 2);
  const std::size_t offset = r.pos() + 2;
  const std::size_t need = img.w * img.h * img.channels;
  if (bytes.size() - offset < need) {
    throw FormatError("netpbm: truncated raster, need " + std::to_string(need) + " bytes, have " +
                          std::to_string(bytes.size() - offset),
                      bytes.size());
  }
  const auto* raster = reinterpret_cast<const std::uint8_t*>(bytes.data() + offset);
  img.pixels.assign(raster, raster + need);
  return img;
}

Image8 read_netpbm(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_netpbm(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.detail(), e.offset());
  }
}

std::string encode_netpbm(const Image8& image) {
  if (image.channels != 1 && image.channels != 3) throw DimensionError("netpbm: channels must be 1 or 3");
  if (image.pixels.size() != image.h * image.w * image.channels) {
    throw DimensionError("netpbm: pixel buffer does not match dims");
  }
  std::string out = (image.channels == 3 ? "P6\n" : "P5\n") + std::to_string(image.w) + " " +
                    std::to_string(image.h) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  return out;
}

void write_netpbm(const std::filesystem::path& path, const Image8& image) { write_file(path, encode_netpbm(image)); }

Tensor4 to_input_tensor(const Image8& rgb, std::size_t side) {
  if (rgb.channels != 3) throw FormatError("expected an RGB (P6) image", 0);
  Tensor4 t({1, 3, rgb.h, rgb.w});
  for (std::size_t y = 0; y < rgb.h; ++y) {
    for (std::size_t x = 0; x < rgb.w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        t.at(0, c, y, x) = static_cast<float>(rgb.pixels[(y * rgb.w + x) * 3 + c]) / 255.0f;
      }
    }
  }
  if (side == 0 || (rgb.h == side && rgb.w == side)) return t;
  return upsample_bilinear(t, side, side);
}

Tensor4 load_image_ppm(const std::filesystem::path& path, std::size_t side) {
  return to_input_tensor(read_netpbm(path), side);
}

namespace {

void require_gray(const Image8& img) {
  if (img.channels != 1) throw FormatError("expected a grayscale (P5) image", 0);
}

}  // namespace

SaliencyMap to_saliency_map(const Image8& gray) {
  require_gray(gray);
  std::vector<double> v(gray.pixels.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(gray.pixels[i]) / 255.0;
  return SaliencyMap(gray.h, gray.w, std::move(v));
}

GtMask to_gt_mask(const Image8& gray) {
  require_gray(gray);
  std::vector<std::uint8_t> v(gray.pixels.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = gray.pixels[i] >= 128 ? 1 : 0;
  return GtMask(gray.h, gray.w, std::move(v));
}

SaliencyMap load_map_pgm(const std::filesystem::path& path) { return to_saliency_map(read_netpbm(path)); }

GtMask load_mask_pgm(const std::filesystem::path& path) { return to_gt_mask(read_netpbm(path)); }

std::uint8_t quantize(double v) noexcept {
  const double q = std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
  return static_cast<std::uint8_t>(q);
}

Image8 to_gray_image(const SaliencyMap& map) {
  Image8 img{map.h(), map.w(), 1, std::vector<std::uint8_t>(map.size())};
  for (std::size_t i = 0; i < map.size(); ++i) img.pixels[i] = quantize(map[i]);
  return img;
}

void save_map_pgm(const SaliencyMap& map, const std::filesystem::path& path) {
  write_netpbm(path, to_gray_image(map));
}

}  // namespace edn
