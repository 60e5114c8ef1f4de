#pragma once

// Binary 8-bit netpbm: P6 (RGB) for images, P5 (gray) for masks and maps.

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "edn/maps.hpp"
#include "edn/tensor.hpp"

namespace edn {

struct Image8 {
  std::size_t h = 0, w = 0;
  std::size_t channels = 1;  // 1 for P5, 3 for P6
  std::vector<std::uint8_t> pixels;  // interleaved, row-major
};

// Throws FormatError (with byte offset) on bad magic, maxval != 255 or a
// truncated payload; IoError when the file cannot be read.
Image8 decode_netpbm(std::string_view bytes);
Image8 read_netpbm(const std::filesystem::path& path);

std::string encode_netpbm(const Image8& image);
void write_netpbm(const std::filesystem::path& path, const Image8& image);

// RGB scaled to [0,1] as a (1,3,h,w) tensor, bilinearly resized to side x side
// when side != 0.
Tensor4 to_input_tensor(const Image8& rgb, std::size_t side);
Tensor4 load_image_ppm(const std::filesystem::path& path, std::size_t side);

// Gray pixels / 255.
SaliencyMap to_saliency_map(const Image8& gray);
// Gray pixels >= 128 become foreground.
GtMask to_gt_mask(const Image8& gray);
SaliencyMap load_map_pgm(const std::filesystem::path& path);
GtMask load_mask_pgm(const std::filesystem::path& path);

// round(v * 255), halves rounded up.
std::uint8_t quantize(double v) noexcept;
Image8 to_gray_image(const SaliencyMap& map);
void save_map_pgm(const SaliencyMap& map, const std::filesystem::path& path);

}  // namespace edn
