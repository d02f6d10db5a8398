#include "checkpoint.hpp"

#include <zlib.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "error.hpp"

namespace shark::train {

namespace {

constexpr char kMagic[8] = {'S', 'H', 'R', 'K', 'C', 'K', 'P', 'T'};

struct Writer {
  std::vector<uint8_t> buf;

  void bytes(const void* p, size_t n) {
    const auto* b = (const uint8_t*)p;
    buf.insert(buf.end(), b, b + n);
  }
  void u32(uint32_t v) { bytes(&v, 4); }
  void u64(uint64_t v) { bytes(&v, 8); }
  void i64(int64_t v) { bytes(&v, 8); }
  void f32(float v) { bytes(&v, 4); }
  void str(const std::string& s) {
    u32((uint32_t)s.size());
    bytes(s.data(), s.size());
  }
  void tensor(const Tensor& t) { bytes(t.data(), (size_t)t.numel() * 4); }
};

struct Reader {
  const uint8_t* p;
  size_t left;

  void bytes(void* out, size_t n) {
    require(left >= n, ErrorCode::Checkpoint, "checkpoint truncated");
    std::memcpy(out, p, n);
    p += n;
    left -= n;
  }
  uint32_t u32() {
    uint32_t v;
    bytes(&v, 4);
    return v;
  }
  uint64_t u64() {
    uint64_t v;
    bytes(&v, 8);
    return v;
  }
  int64_t i64() {
    int64_t v;
    bytes(&v, 8);
    return v;
  }
  float f32() {
    float v;
    bytes(&v, 4);
    return v;
  }
  std::string str() {
    const uint32_t n = u32();
    require(left >= n, ErrorCode::Checkpoint, "checkpoint truncated");
    std::string s((const char*)p, n);
    p += n;
    left -= n;
    return s;
  }
  void tensor(Tensor& t) { bytes(t.data(), (size_t)t.numel() * 4); }
};

struct NamedShape {
  std::string name;
  Shape shape;
};

std::vector<NamedShape> model_layout(const net::Model& model) {
  std::vector<NamedShape> out;
  net::for_each_param(const_cast<net::Model&>(model), [&out](const std::string& name, ad::Var& p) {
    out.push_back({name, p.value().shape()});
  });
  return out;
}

}  // namespace

void save_checkpoint(const std::string& path, const net::Model& model, const Adam& adam,
                     const CheckpointMeta& meta) {
  Writer w;
  w.bytes(kMagic, 8);
  w.u32(kCheckpointVersion);
  w.i64(model.config.base_channels);
  w.i64(model.config.cbam_reduction);
  w.i64(meta.epoch);
  w.i64(meta.step);
  w.u64(meta.seed);
  w.u64(meta.rng_state);
  w.u64(meta.rng_inc);
  w.f32(adam.hyper().lr);
  w.f32(adam.hyper().beta1);
  w.f32(adam.hyper().beta2);
  w.f32(adam.hyper().eps);
  w.i64(adam.t());

  const auto layout = model_layout(model);
  require(adam.size() == layout.size(), ErrorCode::Internal,
          "optimizer state does not match the model");
  w.u32((uint32_t)layout.size());
  for (const auto& param : layout) {
    w.str(param.name);
    w.u32((uint32_t)param.shape.n);
    w.u32((uint32_t)param.shape.c);
    w.u32((uint32_t)param.shape.h);
    w.u32((uint32_t)param.shape.w);
  }
  net::for_each_param(const_cast<net::Model&>(model),
                      [&w](const std::string&, ad::Var& p) { w.tensor(p.value()); });
  for (size_t i = 0; i < adam.size(); ++i) w.tensor(adam.m(i));
  for (size_t i = 0; i < adam.size(); ++i) w.tensor(adam.v(i));

  const uint32_t crc = (uint32_t)crc32(0, w.buf.data(), (uInt)w.buf.size());
  w.u32(crc);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::Io, "cannot open for writing: " + tmp);
    out.write((const char*)w.buf.data(), (std::streamsize)w.buf.size());
    out.flush();
    require(out.good(), ErrorCode::Io, "checkpoint write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorCode::Io, "cannot move checkpoint into place: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::Io, "cannot open checkpoint: " + path);
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(in.good() || in.eof(), ErrorCode::Io, "checkpoint read failed: " + path);
  require(buf.size() >= 16, ErrorCode::Checkpoint, "checkpoint too small: " + path);

  uint32_t stored_crc;
  std::memcpy(&stored_crc, buf.data() + buf.size() - 4, 4);
  const uint32_t crc = (uint32_t)crc32(0, buf.data(), (uInt)(buf.size() - 4));
  require(crc == stored_crc, ErrorCode::Checkpoint, "checkpoint checksum mismatch: " + path);

  Reader r{buf.data(), buf.size() - 4};
  char magic[8];
  r.bytes(magic, 8);
  require(std::memcmp(magic, kMagic, 8) == 0, ErrorCode::Checkpoint,
          "not a checkpoint file: " + path);
  const uint32_t version = r.u32();
  require(version == kCheckpointVersion, ErrorCode::VersionMismatch,
          "unsupported checkpoint version " + std::to_string(version) + " in " + path);

  LoadedCheckpoint ck;
  ck.config.base_channels = r.i64();
  ck.config.cbam_reduction = r.i64();
  ck.meta.epoch = r.i64();
  ck.meta.step = r.i64();
  ck.meta.seed = r.u64();
  ck.meta.rng_state = r.u64();
  ck.meta.rng_inc = r.u64();
  ck.adam_hyper.lr = r.f32();
  ck.adam_hyper.beta1 = r.f32();
  ck.adam_hyper.beta2 = r.f32();
  ck.adam_hyper.eps = r.f32();
  ck.adam_t = r.i64();

  ck.model = net::make_model(ck.config);
  const auto layout = model_layout(ck.model);
  const uint32_t count = r.u32();
  require(count == layout.size(), ErrorCode::Checkpoint,
          "checkpoint parameter count does not match its model config: " + path);
  for (const auto& param : layout) {
    const std::string name = r.str();
    const Shape s{(int64_t)r.u32(), (int64_t)r.u32(), (int64_t)r.u32(), (int64_t)r.u32()};
    require(name == param.name && s == param.shape, ErrorCode::Checkpoint,
            "checkpoint layout mismatch at parameter '" + name + "': " + path);
  }
  net::for_each_param(ck.model, [&r](const std::string&, ad::Var& p) { r.tensor(p.value()); });
  ck.adam_m.reserve(layout.size());
  ck.adam_v.reserve(layout.size());
  for (const auto& param : layout) {
    Tensor t(param.shape);
    r.tensor(t);
    ck.adam_m.push_back(std::move(t));
  }
  for (const auto& param : layout) {
    Tensor t(param.shape);
    r.tensor(t);
    ck.adam_v.push_back(std::move(t));
  }
  require(r.left == 0, ErrorCode::Checkpoint, "trailing bytes in checkpoint: " + path);
  return ck;
}

}  // namespace shark::train
