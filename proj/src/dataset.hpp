#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rng.hpp"
#include "tensor.hpp"

namespace shark::data {

struct Entry {
  std::string id;
  std::string rainy;  // resolved path
  std::string clean;
};

struct Dataset {
  std::string root;
  std::vector<Entry> entries;
};

/// Tab-separated lines `id<TAB>rainy<TAB>clean`; relative paths resolve
/// against the manifest's directory. Ids must be unique and files must exist.
Dataset load_manifest(const std::string& manifest_path);
/// Pairs `rain-<id>.png` with `norain-<id>.png` in one directory, sorted by id.
Dataset discover(const std::string& dir);
/// Directory: uses `manifest.tsv` inside when present, else filename pairing.
/// A file path is treated as a manifest.
Dataset open_dataset(const std::string& path);

struct ImagePair {
  Tensor rainy;  // (1,3,h,w)
  Tensor clean;
};
/// Loads both images and checks they share a shape.
ImagePair load_pair(const Entry& entry);

/// Stacks (1,c,h,w) tensors of identical shape along the batch dimension.
Tensor stack(const std::vector<Tensor>& items);

/// Bilinear resample to an exact target size (same convention as the
/// decoder's upsampling).
Tensor resize_to(const Tensor& t, int64_t h, int64_t w);

/// Index batches for one epoch: a seeded shuffle of 0..count-1 chopped into
/// batch_size groups, final partial batch kept. Pure function of
/// (count, batch_size, seed, epoch).
std::vector<std::vector<int64_t>> epoch_batches(int64_t count, int64_t batch_size, uint64_t seed,
                                                int64_t epoch);

struct RainParams {
  int64_t streak_count = 60;
  float length = 16.0f;     // mean streak length, pixels
  float angle_deg = 20.0f;  // mean tilt from vertical
  float intensity = 0.35f;  // mean added brightness, (0,1]
  uint64_t seed = 1;
};
void validate(const RainParams& p);

/// Adds anti-aliased bright line segments with per-streak jittered angle,
/// length, and intensity; clamps to [0,1]. The result is >= clean everywhere.
Tensor synthesize_rain(const Tensor& clean, const RainParams& p);

/// Procedural clean test image: smooth two-color gradient plus a few soft
/// ellipses and solid rectangles.
Tensor synthesize_clean(Pcg32& rng, int64_t h, int64_t w);

/// Rains every PNG of clean_dir into out_dir as rain-<id>.png/norain-<id>.png
/// plus manifest.tsv; per-image streak seeds derive from p.seed. With
/// generate > 0, procedural clean images are created instead of reading
/// clean_dir. Returns the number of pairs written.
int64_t synthesize_dataset(const std::string& clean_dir, const std::string& out_dir,
                           const RainParams& p, int64_t generate = 0, int64_t gen_h = 64,
                           int64_t gen_w = 64);

}  // namespace shark::data
