// Command-line front end; talks to the core exclusively through the C API.
#include <shark/shark.h>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int exit_code_for(shark_status status) {
  switch (status) {
    case SHARK_OK:
      return 0;
    case SHARK_ERR_INVALID_ARGUMENT:
    case SHARK_ERR_CONFIG:
    case SHARK_ERR_VALIDATION:
    case SHARK_ERR_IO:
    case SHARK_ERR_EMPTY_DATASET:
    case SHARK_ERR_USAGE:
      return 2;
    default:
      return 1;
  }
}

int fail(shark_status status) {
  std::cerr << "shark: error (" << shark_status_name(status) << "): " << shark_last_error()
            << "\n";
  return exit_code_for(status);
}

#define CHECK(call)                  \
  do {                               \
    shark_status st__ = (call);      \
    if (st__ != SHARK_OK) {          \
      return fail(st__);             \
    }                                \
  } while (0)

struct ImageGuard {
  shark_image* img = nullptr;
  ~ImageGuard() { shark_image_free(img); }
};

struct ModelGuard {
  shark_model* model = nullptr;
  ~ModelGuard() { shark_model_free(model); }
};

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string val;
  std::string out = "runs/default";
  std::string resume;
  shark_train_options opt{};
  int no_ssim = 0;
  int no_harris = 0;
  int64_t train_size = 256;
  int64_t log_every = 10;
};

void add_harris_flags(CLI::App* cmd, shark_harris_params* h) {
  cmd->add_option("--harris-k", h->k, "corner response trace penalty")->capture_default_str();
  cmd->add_option("--harris-tau", h->tau, "threshold fraction of the per-image max response")
      ->capture_default_str();
  cmd->add_option("--harris-beta", h->soft_beta, "soft-map sigmoid sharpness")
      ->capture_default_str();
  cmd->add_option("--harris-gauss-size", h->gauss_size, "structure-tensor window size (odd)")
      ->capture_default_str();
  cmd->add_option("--harris-gauss-sigma", h->gauss_sigma, "structure-tensor window sigma")
      ->capture_default_str();
}

CLI::App* add_train_command(CLI::App& app, TrainArgs& a) {
  shark_train_options_default(&a.opt);
  auto* cmd = app.add_subcommand("train", "Optimize a deraining model on paired images");
  cmd->set_config("--config", "", "key=value config file; command-line flags take precedence");
  cmd->add_option("--data", a.data, "training dataset directory or manifest.tsv")->required();
  cmd->add_option("--val", a.val, "validation dataset directory or manifest.tsv");
  cmd->add_option("--out", a.out, "output directory for checkpoints and logs")
      ->capture_default_str();
  cmd->add_option("--resume", a.resume, "checkpoint to resume from");
  cmd->add_option("--epochs", a.opt.epochs, "training epochs")->capture_default_str();
  cmd->add_option("--batch-size", a.opt.batch_size, "images per optimizer step")
      ->capture_default_str();
  cmd->add_option("--seed", a.opt.seed, "run seed")->capture_default_str();
  cmd->add_option("--base-channels", a.opt.model.base_channels, "first-level feature width")
      ->capture_default_str();
  cmd->add_option("--cbam-reduction", a.opt.model.cbam_reduction,
                  "channel-attention bottleneck divisor")
      ->capture_default_str();
  cmd->add_option("--lr", a.opt.lr, "learning rate")->capture_default_str();
  cmd->add_option("--beta1", a.opt.beta1, "first-moment decay")->capture_default_str();
  cmd->add_option("--beta2", a.opt.beta2, "second-moment decay")->capture_default_str();
  cmd->add_option("--eps", a.opt.eps, "update denominator floor")->capture_default_str();
  cmd->add_option("--lambda-l1", a.opt.lambda_l1, "pixel loss weight")->capture_default_str();
  cmd->add_option("--lambda-ssim", a.opt.lambda_ssim, "structural loss weight")
      ->capture_default_str();
  cmd->add_option("--lambda-harris", a.opt.lambda_harris, "corner loss weight")
      ->capture_default_str();
  cmd->add_flag("--no-ssim", a.no_ssim, "drop the structural term from the loss");
  cmd->add_flag("--no-harris", a.no_harris, "drop the corner term from the loss");
  add_harris_flags(cmd, &a.opt.harris);
  cmd->add_option("--train-size", a.train_size, "square crop/resize used for training")
      ->capture_default_str();
  cmd->add_option("--checkpoint-interval", a.opt.checkpoint_interval,
                  "epochs between rolling checkpoints")
      ->capture_default_str();
  cmd->add_option("--validation-interval", a.opt.validation_interval,
                  "epochs between validation passes")
      ->capture_default_str();
  cmd->add_option("--max-steps", a.opt.max_steps, "stop after this many steps (0 = no cap)")
      ->capture_default_str();
  cmd->add_option("--log-every", a.log_every, "print one progress line per N steps")
      ->capture_default_str();
  return cmd;
}

int progress_printer(const shark_step_record* r, void* user) {
  const int64_t every = *static_cast<const int64_t*>(user);
  if (r->step == 1 || every <= 1 || r->step % every == 0) {
    std::printf("step %lld epoch %lld  l1 %.6f  ssim %.6f  harris %.6f  total %.6f\n",
                static_cast<long long>(r->step), static_cast<long long>(r->epoch),
                static_cast<double>(r->l1), static_cast<double>(r->ssim_loss),
                static_cast<double>(r->harris_loss), static_cast<double>(r->total));
    std::fflush(stdout);
  }
  return 1;
}

int run_train(CLI::App* cmd, TrainArgs& a) {
  a.opt.train_data = a.data.c_str();
  a.opt.val_data = a.val.empty() ? nullptr : a.val.c_str();
  a.opt.out_dir = a.out.c_str();
  a.opt.resume_from = a.resume.empty() ? nullptr : a.resume.c_str();
  a.opt.use_ssim = a.no_ssim ? 0 : 1;
  a.opt.use_harris = a.no_harris ? 0 : 1;
  a.opt.train_height = a.train_size;
  a.opt.train_width = a.train_size;

  std::error_code ec;
  fs::create_directories(a.out, ec);
  const fs::path echo_path = fs::path(a.out) / "effective-config.ini";
  {
    std::ofstream echo(echo_path);
    if (!echo) {
      std::cerr << "shark: error (io): cannot write " << echo_path.string() << "\n";
      return 2;
    }
    echo << cmd->config_to_str(true, true);
  }
  std::printf("effective config written to %s\n", echo_path.string().c_str());

  shark_train_summary summary{};
  CHECK(shark_train(&a.opt, progress_printer, &a.log_every, &summary));
  std::printf("finished: %lld steps over %lld epochs\n", static_cast<long long>(summary.steps),
              static_cast<long long>(summary.epochs));
  std::printf("metrics: %s\n", summary.metrics_csv);
  if (summary.last_checkpoint[0] != '\0') {
    std::printf("last checkpoint: %s\n", summary.last_checkpoint);
  }
  if (summary.best_checkpoint[0] != '\0') {
    std::printf("best checkpoint: %s (val psnr %.4f dB)\n", summary.best_checkpoint,
                summary.best_val_psnr);
  }
  return 0;
}

// ---- derain ---------------------------------------------------------------

struct DerainArgs {
  std::string model;
  std::string out = ".";
  std::vector<std::string> inputs;
  int resize256 = 0;
};

CLI::App* add_derain_command(CLI::App& app, DerainArgs& a) {
  auto* cmd = app.add_subcommand("derain", "Restore rainy images with a trained model");
  cmd->add_option("--model", a.model, "checkpoint to run")->required();
  cmd->add_option("--out", a.out, "output directory")->capture_default_str();
  cmd->add_flag("--resize-256", a.resize256, "resample inputs to 256x256 first");
  cmd->add_option("inputs", a.inputs, "rainy PNG files")->required()->expected(-1);
  return cmd;
}

int run_derain(DerainArgs& a) {
  ModelGuard m;
  CHECK(shark_model_load(a.model.c_str(), &m.model));
  std::error_code ec;
  fs::create_directories(a.out, ec);
  for (const std::string& input : a.inputs) {
    ImageGuard in, resized, restored;
    CHECK(shark_image_load(input.c_str(), &in.img));
    const shark_image* src = in.img;
    if (a.resize256) {
      CHECK(shark_image_resize(in.img, 256, 256, &resized.img));
      src = resized.img;
    }
    CHECK(shark_model_derain(m.model, src, &restored.img));
    const fs::path out_path = fs::path(a.out) / (fs::path(input).stem().string() + ".png");
    CHECK(shark_image_save(restored.img, out_path.string().c_str()));
    std::printf("%s -> %s\n", input.c_str(), out_path.string().c_str());
  }
  return 0;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string model;
  std::string data;
  std::string out = ".";
  int resize256 = 0;
};

CLI::App* add_eval_command(CLI::App& app, EvalArgs& a) {
  auto* cmd = app.add_subcommand("eval", "Score a model against a paired dataset");
  cmd->add_option("--model", a.model, "checkpoint to run")->required();
  cmd->add_option("--data", a.data, "dataset directory or manifest.tsv")->required();
  cmd->add_option("--out", a.out, "directory for report.csv and report.md")
      ->capture_default_str();
  cmd->add_flag("--resize-256", a.resize256, "score at 256x256 instead of native size");
  return cmd;
}

int run_eval(EvalArgs& a) {
  ModelGuard m;
  CHECK(shark_model_load(a.model.c_str(), &m.model));
  std::error_code ec;
  fs::create_directories(a.out, ec);
  const std::string csv = (fs::path(a.out) / "report.csv").string();
  const std::string md = (fs::path(a.out) / "report.md").string();
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  CHECK(shark_evaluate(m.model, a.data.c_str(), a.resize256 ? 256 : 0, csv.c_str(), md.c_str(),
                       &mean_psnr, &mean_ssim));
  std::printf("mean psnr %.4f dB  mean ssim %.6f\n", mean_psnr, mean_ssim);
  std::printf("report: %s, %s\n", csv.c_str(), md.c_str());
  return 0;
}

// ---- cornermap --------------------------------------------------------------

struct CornermapArgs {
  std::string input;
  std::string out = ".";
  shark_harris_params harris{};
};

CLI::App* add_cornermap_command(CLI::App& app, CornermapArgs& a) {
  shark_harris_params_default(&a.harris);
  auto* cmd = app.add_subcommand("cornermap", "Write corner-response and corner-map images");
  cmd->add_option("input", a.input, "input PNG")->required();
  cmd->add_option("--out", a.out, "output directory")->capture_default_str();
  add_harris_flags(cmd, &a.harris);
  return cmd;
}

int run_cornermap(CornermapArgs& a) {
  ImageGuard in, response, hard;
  CHECK(shark_image_load(a.input.c_str(), &in.img));
  CHECK(shark_harris_maps(in.img, &a.harris, &response.img, &hard.img));
  std::error_code ec;
  fs::create_directories(a.out, ec);
  const std::string stem = fs::path(a.input).stem().string();
  const std::string response_path = (fs::path(a.out) / (stem + "-response.png")).string();
  const std::string map_path = (fs::path(a.out) / (stem + "-corners.png")).string();
  CHECK(shark_image_save(response.img, response_path.c_str()));
  CHECK(shark_image_save(hard.img, map_path.c_str()));
  std::printf("wrote %s and %s\n", response_path.c_str(), map_path.c_str());
  return 0;
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  std::string clean;
  std::string out;
  int64_t generate = 0;
  int64_t gen_size = 256;
  int64_t streaks = 60;
  float length = 16.0f;
  float angle = 20.0f;
  float intensity = 0.35f;
  uint64_t seed = 1;
};

CLI::App* add_synth_command(CLI::App& app, SynthArgs& a) {
  auto* cmd = app.add_subcommand("synth", "Build a paired rainy/clean dataset");
  auto* clean = cmd->add_option("--clean", a.clean, "directory of clean PNGs to rain on");
  cmd->add_option("--generate", a.generate, "instead, generate N procedural clean images")
      ->excludes(clean);
  cmd->add_option("--gen-size", a.gen_size, "square size of generated clean images")
      ->capture_default_str();
  cmd->add_option("--out", a.out, "output dataset directory")->required();
  cmd->add_option("--streaks", a.streaks, "rain streaks per image")->capture_default_str();
  cmd->add_option("--length", a.length, "mean streak length in pixels")->capture_default_str();
  cmd->add_option("--angle", a.angle, "mean streak angle in degrees")->capture_default_str();
  cmd->add_option("--intensity", a.intensity, "mean streak brightness")->capture_default_str();
  cmd->add_option("--seed", a.seed, "dataset seed")->capture_default_str();
  return cmd;
}

int run_synth(SynthArgs& a) {
  if (a.clean.empty() && a.generate <= 0) {
    std::cerr << "shark: error (usage): need --clean DIR or --generate N\n";
    return 2;
  }
  int64_t pairs = 0;
  CHECK(shark_dataset_synthesize(a.clean.empty() ? nullptr : a.clean.c_str(), a.out.c_str(),
                                 a.generate, a.gen_size, a.gen_size, a.streaks, a.length, a.angle,
                                 a.intensity, a.seed, &pairs));
  std::printf("wrote %lld pairs to %s\n", static_cast<long long>(pairs), a.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shark: single-image deraining trainer and toolkit"};
  app.require_subcommand(1);

  TrainArgs train_args;
  DerainArgs derain_args;
  EvalArgs eval_args;
  CornermapArgs cornermap_args;
  SynthArgs synth_args;

  CLI::App* train_cmd = add_train_command(app, train_args);
  CLI::App* derain_cmd = add_derain_command(app, derain_args);
  CLI::App* eval_cmd = add_eval_command(app, eval_args);
  CLI::App* cornermap_cmd = add_cornermap_command(app, cornermap_args);
  CLI::App* synth_cmd = add_synth_command(app, synth_args);
  CLI::App* version_cmd = app.add_subcommand("version", "Print the library version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (version_cmd->parsed()) {
    std::printf("shark %s\n", shark_version());
    return 0;
  }
  if (train_cmd->parsed()) return run_train(train_cmd, train_args);
  if (derain_cmd->parsed()) return run_derain(derain_args);
  if (eval_cmd->parsed()) return run_eval(eval_args);
  if (cornermap_cmd->parsed()) return run_cornermap(cornermap_args);
  if (synth_cmd->parsed()) return run_synth(synth_args);
  return 2;
}
