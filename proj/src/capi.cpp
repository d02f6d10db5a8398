#include "shark/shark.h"

#include <algorithm>
#include <cstring>
#include <string>

#include "checkpoint.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "image_io.hpp"
#include "losses.hpp"
#include "metrics.hpp"
#include "network.hpp"
#include "trainer.hpp"

using namespace shark;

struct shark_image {
  Tensor t;  // (1,c,h,w)
};

struct shark_model {
  net::Model model;
};

struct shark_dataset {
  data::Dataset ds;
};

namespace {

thread_local std::string g_last_error;

shark_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return SHARK_ERR_INVALID_ARGUMENT;
    case ErrorCode::Shape: return SHARK_ERR_SHAPE;
    case ErrorCode::Config: return SHARK_ERR_CONFIG;
    case ErrorCode::Validation: return SHARK_ERR_VALIDATION;
    case ErrorCode::Io: return SHARK_ERR_IO;
    case ErrorCode::Decode: return SHARK_ERR_DECODE;
    case ErrorCode::UnsupportedImage: return SHARK_ERR_UNSUPPORTED_IMAGE;
    case ErrorCode::Checkpoint: return SHARK_ERR_CHECKPOINT;
    case ErrorCode::VersionMismatch: return SHARK_ERR_VERSION_MISMATCH;
    case ErrorCode::Numeric: return SHARK_ERR_NUMERIC;
    case ErrorCode::EmptyDataset: return SHARK_ERR_EMPTY_DATASET;
    case ErrorCode::Usage: return SHARK_ERR_USAGE;
    case ErrorCode::Internal: return SHARK_ERR_INTERNAL;
  }
  return SHARK_ERR_INTERNAL;
}

template <typename F>
shark_status guarded(F&& fn) {
  try {
    fn();
    return SHARK_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SHARK_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SHARK_ERR_INTERNAL;
  }
}

void require_arg(bool ok, const char* message) {
  require(ok, ErrorCode::InvalidArgument, message);
}

losses::HarrisParams to_harris(const shark_harris_params* p) {
  losses::HarrisParams out;
  if (p != nullptr) {
    out.k = p->k;
    out.tau = p->tau;
    out.soft_beta = p->soft_beta;
    out.gauss_size = p->gauss_size;
    out.gauss_sigma = p->gauss_sigma;
  }
  return out;
}

void copy_path(char* dst, size_t cap, const std::string& src) {
  const size_t n = std::min(cap - 1, src.size());
  std::memcpy(dst, src.data(), n);
  dst[n] = '\0';
}

}  // namespace

extern "C" {

const char* shark_version(void) { return SHARK_VERSION_STRING; }

const char* shark_status_name(shark_status status) {
  switch (status) {
    case SHARK_OK: return "ok";
    case SHARK_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SHARK_ERR_SHAPE: return "shape";
    case SHARK_ERR_CONFIG: return "config";
    case SHARK_ERR_VALIDATION: return "validation";
    case SHARK_ERR_IO: return "io";
    case SHARK_ERR_DECODE: return "decode";
    case SHARK_ERR_UNSUPPORTED_IMAGE: return "unsupported_image";
    case SHARK_ERR_CHECKPOINT: return "checkpoint";
    case SHARK_ERR_VERSION_MISMATCH: return "version_mismatch";
    case SHARK_ERR_NUMERIC: return "numeric";
    case SHARK_ERR_EMPTY_DATASET: return "empty_dataset";
    case SHARK_ERR_USAGE: return "usage";
    case SHARK_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* shark_last_error(void) { return g_last_error.c_str(); }

/* ---- images ---- */

shark_status shark_image_load(const char* path, shark_image** out) {
  return guarded([&] {
    require_arg(path != nullptr && out != nullptr, "path and out must be non-null");
    *out = new shark_image{img::load_png(path)};
  });
}

shark_status shark_image_save(const shark_image* image, const char* path) {
  return guarded([&] {
    require_arg(image != nullptr && path != nullptr, "image and path must be non-null");
    img::save_png(image->t, path);
  });
}

shark_status shark_image_from_pixels(const float* data, int64_t channels, int64_t height,
                                     int64_t width, shark_image** out) {
  return guarded([&] {
    require_arg(data != nullptr && out != nullptr, "data and out must be non-null");
    require(channels == 1 || channels == 3, ErrorCode::InvalidArgument,
            "channels must be 1 or 3");
    require(height >= 1 && width >= 1, ErrorCode::InvalidArgument, "dims must be positive");
    Tensor t(Shape{1, channels, height, width});
    std::copy(data, data + t.numel(), t.data());
    *out = new shark_image{std::move(t)};
  });
}

shark_status shark_image_pixels(const shark_image* image, float* out) {
  return guarded([&] {
    require_arg(image != nullptr && out != nullptr, "image and out must be non-null");
    std::copy(image->t.data(), image->t.data() + image->t.numel(), out);
  });
}

int64_t shark_image_channels(const shark_image* image) { return image ? image->t.c() : 0; }
int64_t shark_image_height(const shark_image* image) { return image ? image->t.h() : 0; }
int64_t shark_image_width(const shark_image* image) { return image ? image->t.w() : 0; }

shark_status shark_image_resize(const shark_image* image, int64_t height, int64_t width,
                                shark_image** out) {
  return guarded([&] {
    require_arg(image != nullptr && out != nullptr, "image and out must be non-null");
    *out = new shark_image{data::resize_to(image->t, height, width)};
  });
}

shark_status shark_image_add_rain(const shark_image* image, int64_t streak_count, float length,
                                  float angle_deg, float intensity, uint64_t seed,
                                  shark_image** out) {
  return guarded([&] {
    require_arg(image != nullptr && out != nullptr, "image and out must be non-null");
    data::RainParams p{streak_count, length, angle_deg, intensity, seed};
    *out = new shark_image{data::synthesize_rain(image->t, p)};
  });
}

void shark_image_free(shark_image* image) { delete image; }

/* ---- corner maps ---- */

void shark_harris_params_default(shark_harris_params* params) {
  if (params == nullptr) return;
  const losses::HarrisParams d;
  params->k = d.k;
  params->tau = d.tau;
  params->soft_beta = d.soft_beta;
  params->gauss_size = d.gauss_size;
  params->gauss_sigma = d.gauss_sigma;
}

shark_status shark_harris_maps(const shark_image* image, const shark_harris_params* params,
                               shark_image** response_vis, shark_image** hard_map) {
  return guarded([&] {
    require_arg(image != nullptr, "image must be non-null");
    const losses::HarrisParams p = to_harris(params);
    if (response_vis != nullptr) {
      Tensor r = losses::harris_response(ad::Var(image->t), p).value();
      const float lo = r.min_value(), hi = r.max_value();
      const float span = hi > lo ? hi - lo : 1.0f;
      for (int64_t i = 0; i < r.numel(); ++i) r[i] = (r[i] - lo) / span;
      *response_vis = new shark_image{std::move(r)};
    }
    if (hard_map != nullptr) {
      *hard_map = new shark_image{losses::harris_hard_map(image->t, p)};
    }
  });
}

/* ---- metrics ---- */

shark_status shark_psnr(const shark_image* a, const shark_image* b, double* out) {
  return guarded([&] {
    require_arg(a != nullptr && b != nullptr && out != nullptr, "arguments must be non-null");
    *out = metrics::psnr(a->t, b->t);
  });
}

shark_status shark_ssim(const shark_image* a, const shark_image* b, double* out) {
  return guarded([&] {
    require_arg(a != nullptr && b != nullptr && out != nullptr, "arguments must be non-null");
    *out = metrics::ssim(a->t, b->t);
  });
}

/* ---- model ---- */

void shark_model_config_default(shark_model_config* config) {
  if (config == nullptr) return;
  const net::ModelConfig d;
  config->base_channels = d.base_channels;
  config->cbam_reduction = d.cbam_reduction;
}

shark_status shark_model_create(const shark_model_config* config, uint64_t seed,
                                shark_model** out) {
  return guarded([&] {
    require_arg(config != nullptr && out != nullptr, "config and out must be non-null");
    net::ModelConfig cfg{config->base_channels, config->cbam_reduction};
    auto* m = new shark_model{net::make_model(cfg)};
    Pcg32 rng(seed, 0);
    net::init_params(m->model, rng);
    *out = m;
  });
}

shark_status shark_model_load(const char* checkpoint_path, shark_model** out) {
  return guarded([&] {
    require_arg(checkpoint_path != nullptr && out != nullptr,
                "checkpoint_path and out must be non-null");
    train::LoadedCheckpoint ck = train::load_checkpoint(checkpoint_path);
    *out = new shark_model{std::move(ck.model)};
  });
}

shark_status shark_model_save(const shark_model* model, const char* checkpoint_path) {
  return guarded([&] {
    require_arg(model != nullptr && checkpoint_path != nullptr,
                "model and checkpoint_path must be non-null");
    auto& m = const_cast<shark_model*>(model)->model;
    train::Adam adam{train::AdamParams{}, m};
    train::save_checkpoint(checkpoint_path, m, adam, train::CheckpointMeta{});
  });
}

shark_status shark_model_derain(const shark_model* model, const shark_image* input,
                                shark_image** out) {
  return guarded([&] {
    require_arg(model != nullptr && input != nullptr && out != nullptr,
                "arguments must be non-null");
    *out = new shark_image{net::derain(model->model, input->t)};
  });
}

int64_t shark_model_parameter_count(const shark_model* model) {
  return model ? net::parameter_count(model->model) : 0;
}

int64_t shark_model_base_channels(const shark_model* model) {
  return model ? model->model.config.base_channels : 0;
}

void shark_model_free(shark_model* model) { delete model; }

/* ---- datasets ---- */

shark_status shark_dataset_open(const char* path, shark_dataset** out) {
  return guarded([&] {
    require_arg(path != nullptr && out != nullptr, "path and out must be non-null");
    *out = new shark_dataset{data::open_dataset(path)};
  });
}

int64_t shark_dataset_size(const shark_dataset* dataset) {
  return dataset ? (int64_t)dataset->ds.entries.size() : 0;
}

shark_status shark_dataset_entry(const shark_dataset* dataset, int64_t index, const char** id,
                                 const char** rainy_path, const char** clean_path) {
  return guarded([&] {
    require_arg(dataset != nullptr, "dataset must be non-null");
    require(index >= 0 && index < (int64_t)dataset->ds.entries.size(),
            ErrorCode::InvalidArgument, "dataset index out of range");
    const auto& e = dataset->ds.entries[index];
    if (id != nullptr) *id = e.id.c_str();
    if (rainy_path != nullptr) *rainy_path = e.rainy.c_str();
    if (clean_path != nullptr) *clean_path = e.clean.c_str();
  });
}

void shark_dataset_free(shark_dataset* dataset) { delete dataset; }

shark_status shark_dataset_synthesize(const char* clean_dir, const char* out_dir,
                                      int64_t generate_count, int64_t gen_height,
                                      int64_t gen_width, int64_t streak_count, float length,
                                      float angle_deg, float intensity, uint64_t seed,
                                      int64_t* pairs_out) {
  return guarded([&] {
    require_arg(out_dir != nullptr, "out_dir must be non-null");
    require_arg(generate_count > 0 || clean_dir != nullptr,
                "clean_dir is required unless generate_count > 0");
    data::RainParams p{streak_count, length, angle_deg, intensity, seed};
    const int64_t n = data::synthesize_dataset(clean_dir ? clean_dir : "", out_dir, p,
                                               generate_count, gen_height, gen_width);
    if (pairs_out != nullptr) *pairs_out = n;
  });
}

/* ---- evaluation ---- */

shark_status shark_evaluate(const shark_model* model, const char* dataset_path, int64_t resize,
                            const char* csv_path, const char* markdown_path, double* mean_psnr,
                            double* mean_ssim) {
  return guarded([&] {
    require_arg(model != nullptr && dataset_path != nullptr,
                "model and dataset_path must be non-null");
    require(resize >= 0, ErrorCode::InvalidArgument, "resize must be >= 0");
    const data::Dataset ds = data::open_dataset(dataset_path);
    const metrics::EvalReport report = metrics::evaluate_dataset(
        ds, [&model](const Tensor& x) { return net::derain(model->model, x); }, resize, resize);
    if (csv_path != nullptr) metrics::write_csv(report, csv_path);
    if (markdown_path != nullptr) metrics::write_markdown(report, markdown_path);
    if (mean_psnr != nullptr) *mean_psnr = report.mean_psnr;
    if (mean_ssim != nullptr) *mean_ssim = report.mean_ssim;
  });
}

/* ---- training ---- */

void shark_train_options_default(shark_train_options* options) {
  if (options == nullptr) return;
  std::memset(options, 0, sizeof(*options));
  shark_model_config_default(&options->model);
  const train::TrainConfig d;
  options->epochs = d.epochs;
  options->batch_size = d.batch_size;
  options->seed = d.seed;
  options->lr = d.adam.lr;
  options->beta1 = d.adam.beta1;
  options->beta2 = d.adam.beta2;
  options->eps = d.adam.eps;
  options->lambda_l1 = d.weights.l1;
  options->lambda_ssim = d.weights.ssim;
  options->lambda_harris = d.weights.harris;
  options->use_ssim = d.weights.use_ssim ? 1 : 0;
  options->use_harris = d.weights.use_harris ? 1 : 0;
  shark_harris_params_default(&options->harris);
  options->train_height = d.train_h;
  options->train_width = d.train_w;
  options->checkpoint_interval = d.checkpoint_interval;
  options->validation_interval = d.validation_interval;
  options->max_steps = d.max_steps;
}

shark_status shark_train(const shark_train_options* options, shark_progress_fn progress,
                         void* user, shark_train_summary* summary) {
  return guarded([&] {
    require_arg(options != nullptr, "options must be non-null");
    require_arg(options->train_data != nullptr, "train_data is required");
    require_arg(options->out_dir != nullptr, "out_dir is required");

    train::TrainConfig cfg;
    cfg.model = net::ModelConfig{options->model.base_channels, options->model.cbam_reduction};
    cfg.weights.l1 = options->lambda_l1;
    cfg.weights.ssim = options->lambda_ssim;
    cfg.weights.harris = options->lambda_harris;
    cfg.weights.use_ssim = options->use_ssim != 0;
    cfg.weights.use_harris = options->use_harris != 0;
    cfg.harris = to_harris(&options->harris);
    cfg.adam = train::AdamParams{options->lr, options->beta1, options->beta2, options->eps};
    cfg.epochs = options->epochs;
    cfg.batch_size = options->batch_size;
    cfg.seed = options->seed;
    cfg.train_h = options->train_height;
    cfg.train_w = options->train_width;
    cfg.checkpoint_interval = options->checkpoint_interval;
    cfg.validation_interval = options->validation_interval;
    cfg.max_steps = options->max_steps;
    cfg.out_dir = options->out_dir;
    if (options->resume_from != nullptr) cfg.resume_from = options->resume_from;

    const data::Dataset train_ds = data::open_dataset(options->train_data);
    data::Dataset val_ds;
    const bool has_val = options->val_data != nullptr && options->val_data[0] != '\0';
    if (has_val) val_ds = data::open_dataset(options->val_data);

    train::StepCallback cb;
    if (progress != nullptr) {
      cb = [progress, user](const train::StepRecord& r) {
        shark_step_record rec{r.step, r.epoch, r.l1, r.ssim, r.harris, r.total};
        return progress(&rec, user) != 0;
      };
    }
    const train::TrainResult res = train::train(cfg, train_ds, has_val ? &val_ds : nullptr, cb);
    if (summary != nullptr) {
      summary->steps = res.steps;
      summary->epochs = res.epochs;
      summary->best_val_psnr = res.best_val_psnr;
      copy_path(summary->metrics_csv, sizeof(summary->metrics_csv), res.metrics_csv);
      copy_path(summary->last_checkpoint, sizeof(summary->last_checkpoint), res.last_checkpoint);
      copy_path(summary->best_checkpoint, sizeof(summary->best_checkpoint), res.best_checkpoint);
    }
  });
}

}  // extern "C"
