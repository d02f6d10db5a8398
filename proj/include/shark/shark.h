/* C interface to the shark deraining library.
 *
 * Conventions:
 *   - Every fallible call returns a shark_status; SHARK_OK is 0.
 *   - On failure, shark_last_error() returns a thread-local message.
 *   - Objects returned through out-parameters are owned by the caller and
 *     released with the matching *_free function. Out-parameters are left
 *     untouched on failure.
 *   - Images are planar float32 in [0,1], channel-major (c, h, w), with 1
 *     (grayscale) or 3 (RGB) channels.
 */
#ifndef SHARK_H
#define SHARK_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SHARK_API __declspec(dllexport)
#else
#define SHARK_API __attribute__((visibility("default")))
#endif

typedef enum shark_status {
  SHARK_OK = 0,
  SHARK_ERR_INVALID_ARGUMENT = 1,
  SHARK_ERR_SHAPE = 2,
  SHARK_ERR_CONFIG = 3,
  SHARK_ERR_VALIDATION = 4,
  SHARK_ERR_IO = 5,
  SHARK_ERR_DECODE = 6,
  SHARK_ERR_UNSUPPORTED_IMAGE = 7,
  SHARK_ERR_CHECKPOINT = 8,
  SHARK_ERR_VERSION_MISMATCH = 9,
  SHARK_ERR_NUMERIC = 10,
  SHARK_ERR_EMPTY_DATASET = 11,
  SHARK_ERR_USAGE = 12,
  SHARK_ERR_INTERNAL = 13
} shark_status;

SHARK_API const char* shark_version(void);
SHARK_API const char* shark_status_name(shark_status status);
/* Message describing the most recent failure on this thread. */
SHARK_API const char* shark_last_error(void);

typedef struct shark_image shark_image;
typedef struct shark_model shark_model;
typedef struct shark_dataset shark_dataset;

/* ---- images ---------------------------------------------------------- */

/* Strict 8-bit RGB PNG decode; pixel value = byte/255. */
SHARK_API shark_status shark_image_load(const char* path, shark_image** out);
/* RGB or grayscale PNG encode; byte = round(value*255), clamped. */
SHARK_API shark_status shark_image_save(const shark_image* image, const char* path);
SHARK_API shark_status shark_image_from_pixels(const float* data, int64_t channels,
                                               int64_t height, int64_t width, shark_image** out);
/* Copies channels*height*width floats into the caller's buffer. */
SHARK_API shark_status shark_image_pixels(const shark_image* image, float* out);
SHARK_API int64_t shark_image_channels(const shark_image* image);
SHARK_API int64_t shark_image_height(const shark_image* image);
SHARK_API int64_t shark_image_width(const shark_image* image);
/* Bilinear resample to an exact size. */
SHARK_API shark_status shark_image_resize(const shark_image* image, int64_t height, int64_t width,
                                          shark_image** out);
/* Overlays seeded synthetic rain streaks (RGB only). */
SHARK_API shark_status shark_image_add_rain(const shark_image* image, int64_t streak_count,
                                            float length, float angle_deg, float intensity,
                                            uint64_t seed, shark_image** out);
SHARK_API void shark_image_free(shark_image* image);

/* ---- corner maps ------------------------------------------------------ */

typedef struct shark_harris_params {
  float k;            /* trace penalty, default 0.08 */
  float tau;          /* threshold fraction of per-image max, default 0.01 */
  float soft_beta;    /* sigmoid sharpness of the soft map, default 50 */
  int64_t gauss_size; /* structure-tensor window, default 5 */
  double gauss_sigma; /* default 1.0 */
} shark_harris_params;

SHARK_API void shark_harris_params_default(shark_harris_params* params);
/* response_vis: corner response min-max normalized to [0,1] grayscale;
 * hard_map: binary grayscale map. Either out-pointer may be NULL. */
SHARK_API shark_status shark_harris_maps(const shark_image* image,
                                         const shark_harris_params* params,
                                         shark_image** response_vis, shark_image** hard_map);

/* ---- metrics ----------------------------------------------------------- */

/* PSNR in dB over all channels jointly, capped at 100. */
SHARK_API shark_status shark_psnr(const shark_image* a, const shark_image* b, double* out);
/* Mean structural-similarity score (11x11 Gaussian window). */
SHARK_API shark_status shark_ssim(const shark_image* a, const shark_image* b, double* out);

/* ---- model ------------------------------------------------------------- */

typedef struct shark_model_config {
  int64_t base_channels;  /* width at the shallowest level, default 16 */
  int64_t cbam_reduction; /* channel-attention bottleneck divisor, default 8 */
} shark_model_config;

SHARK_API void shark_model_config_default(shark_model_config* config);
/* Fresh model with seeded random initialization. */
SHARK_API shark_status shark_model_create(const shark_model_config* config, uint64_t seed,
                                          shark_model** out);
SHARK_API shark_status shark_model_load(const char* checkpoint_path, shark_model** out);
SHARK_API shark_status shark_model_save(const shark_model* model, const char* checkpoint_path);
/* Restores an RGB image of any size (reflect-padded internally). */
SHARK_API shark_status shark_model_derain(const shark_model* model, const shark_image* input,
                                          shark_image** out);
SHARK_API int64_t shark_model_parameter_count(const shark_model* model);
SHARK_API int64_t shark_model_base_channels(const shark_model* model);
SHARK_API void shark_model_free(shark_model* model);

/* ---- datasets ----------------------------------------------------------- */

/* Accepts a directory (manifest.tsv inside, else rain-/norain- filename
 * pairing) or a manifest file path. */
SHARK_API shark_status shark_dataset_open(const char* path, shark_dataset** out);
SHARK_API int64_t shark_dataset_size(const shark_dataset* dataset);
/* Returned strings stay valid until the dataset is freed. Any out-pointer
 * may be NULL. */
SHARK_API shark_status shark_dataset_entry(const shark_dataset* dataset, int64_t index,
                                           const char** id, const char** rainy_path,
                                           const char** clean_path);
SHARK_API void shark_dataset_free(shark_dataset* dataset);

/* Writes rain-<id>.png / norain-<id>.png pairs plus manifest.tsv into
 * out_dir. With generate_count > 0, procedural clean images of size
 * gen_height x gen_width are created and clean_dir may be NULL; otherwise
 * every PNG in clean_dir is used. */
SHARK_API shark_status shark_dataset_synthesize(const char* clean_dir, const char* out_dir,
                                                int64_t generate_count, int64_t gen_height,
                                                int64_t gen_width, int64_t streak_count,
                                                float length, float angle_deg, float intensity,
                                                uint64_t seed, int64_t* pairs_out);

/* ---- evaluation ---------------------------------------------------------- */

/* Derains every pair and scores it against the clean image. With resize > 0
 * both images are resampled to resize x resize first (0 = native resolution).
 * csv_path / markdown_path / mean out-pointers may be NULL. */
SHARK_API shark_status shark_evaluate(const shark_model* model, const char* dataset_path,
                                      int64_t resize, const char* csv_path,
                                      const char* markdown_path, double* mean_psnr,
                                      double* mean_ssim);

/* ---- training -------------------------------------------------------------- */

typedef struct shark_step_record {
  int64_t step;  /* 1-based optimizer step */
  int64_t epoch; /* 1-based epoch */
  float l1;
  float ssim_loss;
  float harris_loss;
  float total;
} shark_step_record;

/* Return 0 to stop training after the current step. */
typedef int (*shark_progress_fn)(const shark_step_record* record, void* user);

typedef struct shark_train_options {
  const char* train_data; /* dataset directory or manifest */
  const char* val_data;   /* optional, may be NULL */
  const char* out_dir;    /* metric log + checkpoints */
  const char* resume_from; /* optional checkpoint, may be NULL */
  shark_model_config model;
  int64_t epochs;     /* default 500 */
  int64_t batch_size; /* default 4 */
  uint64_t seed;
  float lr;    /* default 1e-4 */
  float beta1; /* default 0.9 */
  float beta2; /* default 0.999 */
  float eps;   /* default 1e-8 */
  float lambda_l1;     /* default 10 */
  float lambda_ssim;   /* default 5 */
  float lambda_harris; /* default 5 */
  int use_ssim;        /* default 1 */
  int use_harris;      /* default 1 */
  shark_harris_params harris;
  int64_t train_height; /* training resize target, default 256 */
  int64_t train_width;
  int64_t checkpoint_interval; /* epochs, default 1 */
  int64_t validation_interval; /* epochs, default 1 */
  int64_t max_steps;           /* 0 = no cap */
} shark_train_options;

SHARK_API void shark_train_options_default(shark_train_options* options);

typedef struct shark_train_summary {
  int64_t steps;  /* completed optimizer steps, including resumed-from ones */
  int64_t epochs; /* completed epochs */
  double best_val_psnr;
  char metrics_csv[1024];
  char last_checkpoint[1024]; /* empty string if never written */
  char best_checkpoint[1024];
} shark_train_summary;

/* Runs the full optimization loop; progress/user/summary may be NULL. */
SHARK_API shark_status shark_train(const shark_train_options* options,
                                   shark_progress_fn progress, void* user,
                                   shark_train_summary* summary);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SHARK_H */
