#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "error.hpp"
#include "image_io.hpp"
#include "kernels.hpp"

namespace fs = std::filesystem;

namespace shark::data {

namespace {

std::string resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute()) return path.string();
  return (base / path).string();
}

void check_entries(const Dataset& ds, const std::string& what) {
  require(!ds.entries.empty(), ErrorCode::EmptyDataset, "no image pairs found in " + what);
  std::set<std::string> ids;
  for (const auto& e : ds.entries) {
    require(ids.insert(e.id).second, ErrorCode::Validation, "duplicate dataset id: " + e.id);
    require(fs::exists(e.rainy), ErrorCode::Validation, "missing file: " + e.rainy);
    require(fs::exists(e.clean), ErrorCode::Validation, "missing file: " + e.clean);
  }
}

}  // namespace

Dataset load_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  require(in.good(), ErrorCode::Io, "cannot open manifest: " + manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();
  Dataset ds;
  ds.root = base.string();
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id, rainy, clean, extra;
    const bool ok = std::getline(row, id, '\t') && std::getline(row, rainy, '\t') &&
                    std::getline(row, clean, '\t');
    require(ok && !std::getline(row, extra, '\t'), ErrorCode::Validation,
            "manifest line " + std::to_string(lineno) + " is not id<TAB>rainy<TAB>clean");
    ds.entries.push_back({id, resolve(base, rainy), resolve(base, clean)});
  }
  check_entries(ds, manifest_path);
  return ds;
}

Dataset discover(const std::string& dir) {
  require(fs::is_directory(dir), ErrorCode::Io, "not a directory: " + dir);
  Dataset ds;
  ds.root = dir;
  std::vector<std::string> ids;
  for (const auto& it : fs::directory_iterator(dir)) {
    if (!it.is_regular_file()) continue;
    const std::string name = it.path().filename().string();
    if (name.rfind("rain-", 0) == 0 && name.size() > 9 &&
        name.compare(name.size() - 4, 4, ".png") == 0) {
      ids.push_back(name.substr(5, name.size() - 9));
    }
  }
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids) {
    const fs::path rainy = fs::path(dir) / ("rain-" + id + ".png");
    const fs::path clean = fs::path(dir) / ("norain-" + id + ".png");
    if (fs::exists(clean)) ds.entries.push_back({id, rainy.string(), clean.string()});
  }
  check_entries(ds, dir);
  return ds;
}

Dataset open_dataset(const std::string& path) {
  if (fs::is_directory(path)) {
    const fs::path manifest = fs::path(path) / "manifest.tsv";
    if (fs::exists(manifest)) return load_manifest(manifest.string());
    return discover(path);
  }
  require(fs::exists(path), ErrorCode::Io, "dataset path does not exist: " + path);
  return load_manifest(path);
}

ImagePair load_pair(const Entry& entry) {
  ImagePair pair{img::load_png(entry.rainy), img::load_png(entry.clean)};
  require_same_shape(pair.rainy, pair.clean, ("image pair '" + entry.id + "'").c_str());
  return pair;
}

Tensor stack(const std::vector<Tensor>& items) {
  require(!items.empty(), ErrorCode::InvalidArgument, "stack of zero tensors");
  const Shape s = items[0].shape();
  require(s.n == 1, ErrorCode::Shape, "stack expects single-image tensors");
  Tensor out(Shape{(int64_t)items.size(), s.c, s.h, s.w});
  const int64_t per = s.c * s.h * s.w;
  for (size_t i = 0; i < items.size(); ++i) {
    require(items[i].shape() == s, ErrorCode::Shape, "stack needs identical shapes");
    std::copy(items[i].data(), items[i].data() + per, out.data() + (int64_t)i * per);
  }
  return out;
}

Tensor resize_to(const Tensor& t, int64_t h, int64_t w) {
  return kernels::resize_bilinear(t, h, w);
}

std::vector<std::vector<int64_t>> epoch_batches(int64_t count, int64_t batch_size, uint64_t seed,
                                                int64_t epoch) {
  require(count >= 1, ErrorCode::EmptyDataset, "cannot batch an empty dataset");
  require(batch_size >= 1, ErrorCode::Config, "batch_size must be >= 1");
  std::vector<int64_t> order(count);
  for (int64_t i = 0; i < count; ++i) order[i] = i;
  Pcg32 rng(seed, (uint64_t)epoch);
  for (int64_t i = count - 1; i > 0; --i) {
    const int64_t j = (int64_t)rng.next_below((uint64_t)i + 1);
    std::swap(order[i], order[j]);
  }
  std::vector<std::vector<int64_t>> batches;
  for (int64_t at = 0; at < count; at += batch_size) {
    const int64_t end = std::min(count, at + batch_size);
    batches.emplace_back(order.begin() + at, order.begin() + end);
  }
  return batches;
}

void validate(const RainParams& p) {
  require(p.streak_count >= 0, ErrorCode::Config, "streak_count must be >= 0");
  require(p.length > 0.0f, ErrorCode::Config, "streak length must be positive");
  require(p.intensity > 0.0f && p.intensity <= 1.0f, ErrorCode::Config,
          "streak intensity must be in (0,1]");
}

Tensor synthesize_rain(const Tensor& clean, const RainParams& p) {
  validate(p);
  const Shape s = clean.shape();
  require(s.n == 1 && s.c == 3, ErrorCode::Shape, "synthesize_rain expects a (1,3,h,w) image");
  const int64_t h = s.h, w = s.w;
  std::vector<float> layer(h * w, 0.0f);
  Pcg32 rng(p.seed, 0);
  constexpr float kRadius = 0.7f;  // streak half-thickness, pixels
  for (int64_t i = 0; i < p.streak_count; ++i) {
    const float cx = rng.uniform(0.0f, (float)w);
    const float cy = rng.uniform(0.0f, (float)h);
    const float ang = (p.angle_deg + rng.uniform(-8.0f, 8.0f)) * (float)(M_PI / 180.0);
    const float len = p.length * rng.uniform(0.6f, 1.4f);
    const float val = p.intensity * rng.uniform(0.5f, 1.0f);
    const float dx = std::sin(ang), dy = std::cos(ang);
    const float hx = dx * len * 0.5f, hy = dy * len * 0.5f;
    const float x0 = cx - hx, y0 = cy - hy, x1 = cx + hx, y1 = cy + hy;
    const int64_t ylo = std::max<int64_t>(0, (int64_t)std::floor(std::min(y0, y1) - kRadius - 1));
    const int64_t yhi = std::min(h - 1, (int64_t)std::ceil(std::max(y0, y1) + kRadius + 1));
    const int64_t xlo = std::max<int64_t>(0, (int64_t)std::floor(std::min(x0, x1) - kRadius - 1));
    const int64_t xhi = std::min(w - 1, (int64_t)std::ceil(std::max(x0, x1) + kRadius + 1));
    const float segx = x1 - x0, segy = y1 - y0;
    const float seglen2 = segx * segx + segy * segy;
    for (int64_t y = ylo; y <= yhi; ++y) {
      for (int64_t x = xlo; x <= xhi; ++x) {
        // Distance from the pixel center to the segment (capsule profile).
        const float px = (float)x - x0, py = (float)y - y0;
        float t = seglen2 > 0.0f ? (px * segx + py * segy) / seglen2 : 0.0f;
        t = std::clamp(t, 0.0f, 1.0f);
        const float ex = px - t * segx, ey = py - t * segy;
        const float dist = std::sqrt(ex * ex + ey * ey);
        const float cover = std::clamp(kRadius + 0.5f - dist, 0.0f, 1.0f);
        if (cover > 0.0f) layer[y * w + x] += val * cover;
      }
    }
  }
  Tensor out(s);
  for (int64_t c = 0; c < 3; ++c) {
    const float* src = clean.plane(0, c);
    float* dst = out.plane(0, c);
    for (int64_t j = 0; j < h * w; ++j) dst[j] = std::min(1.0f, src[j] + layer[j]);
  }
  return out;
}

Tensor synthesize_clean(Pcg32& rng, int64_t h, int64_t w) {
  require(h >= 1 && w >= 1, ErrorCode::InvalidArgument, "image dims must be positive");
  Tensor out(Shape{1, 3, h, w});
  // Two-color linear gradient background along a random direction.
  float ca[3], cb[3];
  for (int j = 0; j < 3; ++j) {
    ca[j] = rng.uniform(0.1f, 0.9f);
    cb[j] = rng.uniform(0.1f, 0.9f);
  }
  const float gang = rng.uniform(0.0f, (float)(2.0 * M_PI));
  const float gx = std::cos(gang), gy = std::sin(gang);
  const float span = std::fabs(gx) * (float)w + std::fabs(gy) * (float)h + 1.0f;
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      float t = (gx * (float)x + gy * (float)y) / span + 0.5f;
      t = std::clamp(t, 0.0f, 1.0f);
      for (int64_t c = 0; c < 3; ++c) {
        out.at(0, c, y, x) = ca[c] + t * (cb[c] - ca[c]);
      }
    }
  }
  // A few soft ellipses and solid rectangles on top.
  const int64_t shapes = 2 + (int64_t)rng.next_below(3);
  for (int64_t i = 0; i < shapes; ++i) {
    float col[3];
    for (int j = 0; j < 3; ++j) col[j] = rng.uniform(0.05f, 0.95f);
    const bool ellipse = rng.next_below(2) == 0;
    const float cx = rng.uniform(0.15f, 0.85f) * (float)w;
    const float cy = rng.uniform(0.15f, 0.85f) * (float)h;
    const float rx = rng.uniform(0.08f, 0.25f) * (float)w;
    const float ry = rng.uniform(0.08f, 0.25f) * (float)h;
    for (int64_t y = 0; y < h; ++y) {
      for (int64_t x = 0; x < w; ++x) {
        float alpha;
        if (ellipse) {
          const float u = ((float)x - cx) / rx, v = ((float)y - cy) / ry;
          alpha = std::clamp(1.5f * (1.0f - (u * u + v * v)), 0.0f, 1.0f);
        } else {
          alpha = (std::fabs((float)x - cx) <= rx && std::fabs((float)y - cy) <= ry) ? 1.0f : 0.0f;
        }
        if (alpha <= 0.0f) continue;
        for (int64_t c = 0; c < 3; ++c) {
          float& px = out.at(0, c, y, x);
          px = px + alpha * (col[c] - px);
        }
      }
    }
  }
  return out;
}

int64_t synthesize_dataset(const std::string& clean_dir, const std::string& out_dir,
                           const RainParams& p, int64_t generate, int64_t gen_h, int64_t gen_w) {
  validate(p);
  fs::create_directories(out_dir);
  std::vector<std::pair<std::string, Tensor>> cleans;
  if (generate > 0) {
    for (int64_t i = 0; i < generate; ++i) {
      Pcg32 rng(p.seed, 1000 + (uint64_t)i);
      char id[32];
      std::snprintf(id, sizeof(id), "%03lld", (long long)i);
      cleans.emplace_back(id, synthesize_clean(rng, gen_h, gen_w));
    }
  } else {
    require(fs::is_directory(clean_dir), ErrorCode::Io, "not a directory: " + clean_dir);
    std::vector<fs::path> files;
    for (const auto& it : fs::directory_iterator(clean_dir)) {
      if (it.is_regular_file() && it.path().extension() == ".png") files.push_back(it.path());
    }
    std::sort(files.begin(), files.end());
    require(!files.empty(), ErrorCode::EmptyDataset, "no PNG files in " + clean_dir);
    for (const auto& f : files) cleans.emplace_back(f.stem().string(), img::load_png(f.string()));
  }

  std::ofstream manifest(fs::path(out_dir) / "manifest.tsv", std::ios::trunc);
  require(manifest.good(), ErrorCode::Io, "cannot write manifest in " + out_dir);
  for (size_t i = 0; i < cleans.size(); ++i) {
    const auto& [id, clean] = cleans[i];
    RainParams per = p;
    per.seed = p.seed + i;  // distinct streak layout per image
    const Tensor rainy = synthesize_rain(clean, per);
    const std::string rname = "rain-" + id + ".png", cname = "norain-" + id + ".png";
    img::save_png(rainy, (fs::path(out_dir) / rname).string());
    img::save_png(clean, (fs::path(out_dir) / cname).string());
    manifest << id << '\t' << rname << '\t' << cname << '\n';
  }
  require(manifest.good(), ErrorCode::Io, "manifest write failed in " + out_dir);
  return (int64_t)cleans.size();
}

}  // namespace shark::data
