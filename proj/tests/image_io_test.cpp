#include <doctest.h>

#include <png.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <vector>

#include "error.hpp"
#include "helpers.hpp"
#include "image_io.hpp"

using namespace shark;
using namespace shark::testutil;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Internal;
}

// Minimal libpng writer for formats save_png never produces.
void write_png_raw(const std::string& path, int width, int height, int depth, int color_type) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  REQUIRE(fp != nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  REQUIRE(setjmp(png_jmpbuf(png)) == 0);
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  std::vector<uint8_t> row((size_t)width * channels * (depth / 8), 0x42);
  for (int y = 0; y < height; ++y) png_write_row(png, row.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace

TEST_CASE("byte conversion round trip and quantization") {
  // Interleaved bytes -> planar floats -> identical bytes.
  const std::vector<uint8_t> src = {0, 255, 128, 7, 19, 201, 64, 65, 66, 250, 1, 90};
  const Tensor t = img::from_bytes(src.data(), 3, 2, 2);
  CHECK(t.shape() == Shape{1, 3, 2, 2});
  CHECK(t.at(0, 0, 0, 0) == 0.0f);
  CHECK(t.at(0, 1, 0, 0) == 1.0f);
  CHECK(t.at(0, 2, 0, 0) == 128.0f / 255.0f);
  CHECK(t.at(0, 0, 1, 1) == 250.0f / 255.0f);
  CHECK(img::to_bytes(t) == src);

  // Quantization: round half away from zero, clamp to [0,255].
  Tensor q(Shape{1, 1, 1, 5});
  q[0] = -0.5f;
  q[1] = 2.0f;
  q[2] = 0.5f;  // 127.5 -> 128
  q[3] = 1.0f;
  q[4] = 0.2f;  // 51
  const std::vector<uint8_t> bytes = img::to_bytes(q);
  CHECK(bytes == std::vector<uint8_t>{0, 255, 128, 255, 51});

  CHECK_THROWS_AS(img::from_bytes(src.data(), 2, 2, 2), Error);
  CHECK_THROWS_AS(img::from_bytes(src.data(), 3, 0, 2), Error);
}

TEST_CASE("png save/load round trip is exact after quantization") {
  TempDir dir("img-roundtrip");
  Pcg32 rng(81);
  const Tensor image = rand_tensor(rng, Shape{1, 3, 13, 9});
  const std::string path = dir.file("img.png");
  img::save_png(image, path);
  const Tensor loaded = img::load_png(path);
  REQUIRE(loaded.shape() == image.shape());
  for (int64_t i = 0; i < image.numel(); ++i) {
    const float expect = (float)std::lroundf(image[i] * 255.0f) / 255.0f;
    CHECK(loaded[i] == expect);
  }
  // A second save/load of the quantized image is bit-identical.
  const std::string path2 = dir.file("img2.png");
  img::save_png(loaded, path2);
  CHECK(loaded.same_values(img::load_png(path2)));

  // 1x1 edge case.
  Tensor tiny(Shape{1, 3, 1, 1});
  tiny.fill(0.4f);
  img::save_png(tiny, dir.file("tiny.png"));
  CHECK(img::load_png(dir.file("tiny.png")).shape() == Shape{1, 3, 1, 1});
}

TEST_CASE("save_png rejects shapes that are not single images") {
  TempDir dir("img-shape");
  Pcg32 rng(82);
  CHECK_THROWS_AS(img::save_png(rand_tensor(rng, Shape{2, 3, 4, 4}), dir.file("x.png")), Error);
  CHECK_THROWS_AS(img::save_png(rand_tensor(rng, Shape{1, 2, 4, 4}), dir.file("x.png")), Error);
  CHECK(code_of([&] { img::save_png(rand_tensor(rng, Shape{1, 4, 4, 4}), dir.file("x.png")); }) ==
        ErrorCode::Shape);
}

TEST_CASE("load_png error classification") {
  TempDir dir("img-errors");
  Pcg32 rng(83);

  CHECK(code_of([&] { img::load_png(dir.file("absent.png")); }) == ErrorCode::Io);

  std::ofstream(dir.file("text.png")) << "this is not a png at all, definitely";
  CHECK(code_of([&] { img::load_png(dir.file("text.png")); }) == ErrorCode::Decode);

  // Valid header, truncated body.
  const std::string full = dir.file("full.png");
  img::save_png(rand_tensor(rng, Shape{1, 3, 32, 32}), full);
  const auto size = std::filesystem::file_size(full);
  std::ifstream in(full, std::ios::binary);
  std::vector<char> head(size / 2);
  in.read(head.data(), (std::streamsize)head.size());
  std::ofstream(dir.file("trunc.png"), std::ios::binary).write(head.data(), (std::streamsize)head.size());
  CHECK(code_of([&] { img::load_png(dir.file("trunc.png")); }) == ErrorCode::Decode);

  // Wrong color type / bit depth.
  write_png_raw(dir.file("gray.png"), 4, 4, 8, PNG_COLOR_TYPE_GRAY);
  CHECK(code_of([&] { img::load_png(dir.file("gray.png")); }) == ErrorCode::UnsupportedImage);
  write_png_raw(dir.file("deep.png"), 4, 4, 16, PNG_COLOR_TYPE_RGB);
  CHECK(code_of([&] { img::load_png(dir.file("deep.png")); }) == ErrorCode::UnsupportedImage);

  // Grayscale tensors save fine but only RGB loads back.
  Tensor gray(Shape{1, 1, 4, 4});
  gray.fill(0.5f);
  img::save_png(gray, dir.file("gray-out.png"));
  CHECK(code_of([&] { img::load_png(dir.file("gray-out.png")); }) == ErrorCode::UnsupportedImage);

  CHECK(code_of([&] {
          img::save_png(gray, dir.file("no-dir") + "/x.png");
        }) == ErrorCode::Io);
}
