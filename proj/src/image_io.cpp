#include "image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "error.hpp"

namespace shark::img {

namespace {

struct FileCloser {
  std::FILE* fp = nullptr;
  ~FileCloser() {
    if (fp) std::fclose(fp);
  }
};

void check_image_shape(const Tensor& image, const char* what) {
  const Shape s = image.shape();
  require(s.n == 1 && (s.c == 1 || s.c == 3), ErrorCode::Shape,
          std::string(what) + " expects a (1,1,h,w) or (1,3,h,w) tensor");
}

}  // namespace

Tensor from_bytes(const uint8_t* data, int64_t channels, int64_t height, int64_t width) {
  require(channels == 1 || channels == 3, ErrorCode::InvalidArgument,
          "from_bytes supports 1 or 3 channels");
  require(height >= 1 && width >= 1, ErrorCode::InvalidArgument, "image dims must be positive");
  Tensor out(Shape{1, channels, height, width});
  for (int64_t y = 0; y < height; ++y) {
    for (int64_t x = 0; x < width; ++x) {
      for (int64_t c = 0; c < channels; ++c) {
        out.at(0, c, y, x) = (float)data[(y * width + x) * channels + c] / 255.0f;
      }
    }
  }
  return out;
}

std::vector<uint8_t> to_bytes(const Tensor& image) {
  check_image_shape(image, "to_bytes");
  const int64_t c = image.c(), h = image.h(), w = image.w();
  std::vector<uint8_t> bytes(c * h * w);
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      for (int64_t ch = 0; ch < c; ++ch) {
        const long v = std::lroundf(image.at(0, ch, y, x) * 255.0f);
        bytes[(y * w + x) * c + ch] = (uint8_t)std::clamp<long>(v, 0, 255);
      }
    }
  }
  return bytes;
}

Tensor load_png(const std::string& path) {
  FileCloser file{std::fopen(path.c_str(), "rb")};
  require(file.fp != nullptr, ErrorCode::Io, "cannot open image: " + path);

  uint8_t sig[8];
  if (std::fread(sig, 1, 8, file.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    raise(ErrorCode::Decode, "not a PNG file: " + path);
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, ErrorCode::Internal, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    raise(ErrorCode::Internal, "png_create_info_struct failed");
  }

  std::vector<uint8_t> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(ErrorCode::Decode, "corrupt PNG: " + path);
  }

  png_init_io(png, file.fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (depth != 8 || color != PNG_COLOR_TYPE_RGB) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(ErrorCode::UnsupportedImage, "only 8-bit RGB PNG is supported: " + path);
  }

  pixels.resize((size_t)h * w * 3);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = pixels.data() + (size_t)y * w * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  return from_bytes(pixels.data(), 3, h, w);
}

void save_png(const Tensor& image, const std::string& path) {
  check_image_shape(image, "save_png");
  const std::vector<uint8_t> bytes = to_bytes(image);
  const int64_t c = image.c(), h = image.h(), w = image.w();

  FileCloser file{std::fopen(path.c_str(), "wb")};
  require(file.fp != nullptr, ErrorCode::Io, "cannot open for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, ErrorCode::Internal, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    raise(ErrorCode::Internal, "png_create_info_struct failed");
  }

  std::vector<png_bytep> rows(h);
  for (int64_t y = 0; y < h; ++y) rows[y] = const_cast<uint8_t*>(bytes.data()) + y * w * c;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    raise(ErrorCode::Io, "PNG write failed: " + path);
  }

  png_init_io(png, file.fp);
  png_set_IHDR(png, info, (png_uint_32)w, (png_uint_32)h, 8,
               c == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  require(std::fflush(file.fp) == 0, ErrorCode::Io, "PNG flush failed: " + path);
}

}  // namespace shark::img
