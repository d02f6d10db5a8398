#include "trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "checkpoint.hpp"
#include "error.hpp"

namespace fs = std::filesystem;

namespace shark::train {

void validate(const AdamParams& p) {
  require(p.lr > 0.0f && std::isfinite(p.lr), ErrorCode::Config, "lr must be positive");
  require(p.beta1 >= 0.0f && p.beta1 < 1.0f, ErrorCode::Config, "beta1 must be in [0,1)");
  require(p.beta2 >= 0.0f && p.beta2 < 1.0f, ErrorCode::Config, "beta2 must be in [0,1)");
  require(p.eps > 0.0f, ErrorCode::Config, "eps must be positive");
}

Adam::Adam(const AdamParams& hyper, net::Model& model) : hyper_(hyper) {
  validate(hyper);
  net::for_each_param(model, [this](const std::string& name, ad::Var& p) {
    params_.push_back(p);
    names_.push_back(name);
    m_.emplace_back(p.value().shape());
    v_.emplace_back(p.value().shape());
  });
}

void Adam::step() {
  require(!params_.empty(), ErrorCode::Usage, "optimizer has no parameters");
  ++t_;
  const float c1 = (float)(1.0 - std::pow((double)hyper_.beta1, (double)t_));
  const float c2 = (float)(1.0 - std::pow((double)hyper_.beta2, (double)t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i].node()->value;
    const Tensor& g = params_[i].grad();
    // An empty grad means the parameter was unreachable from the loss;
    // treat it as zero (moments still decay).
    const float* gp = g.empty() ? nullptr : g.data();
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (int64_t j = 0; j < p.numel(); ++j) {
      const float gj = gp ? gp[j] : 0.0f;
      if (!std::isfinite(gj)) raise(ErrorCode::Numeric, "non-finite gradient in " + names_[i]);
      m[j] = hyper_.beta1 * m[j] + (1.0f - hyper_.beta1) * gj;
      v[j] = hyper_.beta2 * v[j] + (1.0f - hyper_.beta2) * (gj * gj);
      const float mhat = m[j] / c1;
      const float vhat = v[j] / c2;
      p[j] -= hyper_.lr * mhat / (std::sqrt(vhat) + hyper_.eps);
      if (!std::isfinite(p[j])) raise(ErrorCode::Numeric, "non-finite parameter in " + names_[i]);
    }
  }
}

void Adam::restore(const AdamParams& hyper, int64_t t, std::vector<Tensor> m,
                   std::vector<Tensor> v) {
  validate(hyper);
  require(t >= 0, ErrorCode::Checkpoint, "optimizer step count must be >= 0");
  require(m.size() == params_.size() && v.size() == params_.size(), ErrorCode::Checkpoint,
          "optimizer state size mismatch");
  for (size_t i = 0; i < params_.size(); ++i) {
    require(m[i].shape() == params_[i].value().shape() &&
                v[i].shape() == params_[i].value().shape(),
            ErrorCode::Checkpoint, "optimizer moment shape mismatch at " + names_[i]);
  }
  hyper_ = hyper;
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

void validate(const TrainConfig& cfg) {
  require(cfg.epochs >= 1, ErrorCode::Config, "epochs must be >= 1");
  require(cfg.batch_size >= 1, ErrorCode::Config, "batch_size must be >= 1");
  require(cfg.train_h >= net::kSizeMultiple && cfg.train_h % net::kSizeMultiple == 0 &&
              cfg.train_w >= net::kSizeMultiple && cfg.train_w % net::kSizeMultiple == 0,
          ErrorCode::Config, "training size must be a positive multiple of 16");
  require(cfg.checkpoint_interval >= 1 && cfg.validation_interval >= 1, ErrorCode::Config,
          "intervals must be >= 1");
  require(cfg.max_steps >= 0, ErrorCode::Config, "max_steps must be >= 0");
  require(!cfg.out_dir.empty(), ErrorCode::Config, "out_dir is required");
  require(cfg.weights.l1 >= 0.0f && cfg.weights.ssim >= 0.0f && cfg.weights.harris >= 0.0f,
          ErrorCode::Config, "loss weights must be >= 0");
  validate(cfg.adam);
  losses::validate(cfg.harris);
}

namespace {

std::string csv_float(float v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", (double)v);
  return buf;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const data::Dataset& train_ds,
                  const data::Dataset* val_ds, const StepCallback& callback) {
  validate(cfg);
  require(!train_ds.entries.empty(), ErrorCode::EmptyDataset, "training dataset is empty");
  fs::create_directories(cfg.out_dir);

  net::Model model;
  Adam adam;
  uint64_t seed = cfg.seed;
  int64_t start_epoch = 0;
  int64_t step = 0;
  Pcg32 init_rng;
  const bool resume = !cfg.resume_from.empty();

  if (resume) {
    LoadedCheckpoint ck = load_checkpoint(cfg.resume_from);
    require(ck.config.base_channels == cfg.model.base_channels &&
                ck.config.cbam_reduction == cfg.model.cbam_reduction,
            ErrorCode::Config, "checkpoint model config does not match the requested config");
    model = std::move(ck.model);
    adam = Adam(ck.adam_hyper, model);
    adam.restore(ck.adam_hyper, ck.adam_t, std::move(ck.adam_m), std::move(ck.adam_v));
    seed = ck.meta.seed;
    start_epoch = ck.meta.epoch;
    step = ck.meta.step;
    init_rng.restore(ck.meta.rng_state, ck.meta.rng_inc);
    require(start_epoch < cfg.epochs, ErrorCode::Config,
            "checkpoint already has " + std::to_string(start_epoch) + " epochs; raise epochs");
  } else {
    model = net::make_model(cfg.model);
    init_rng = Pcg32(seed, 0);
    net::init_params(model, init_rng);
    adam = Adam(cfg.adam, model);
  }

  // Desk-scale datasets fit in memory; cache the resized pairs up front.
  std::vector<data::ImagePair> pairs;
  pairs.reserve(train_ds.entries.size());
  for (const auto& entry : train_ds.entries) {
    data::ImagePair pr = data::load_pair(entry);
    pr.rainy = data::resize_to(pr.rainy, cfg.train_h, cfg.train_w);
    pr.clean = data::resize_to(pr.clean, cfg.train_h, cfg.train_w);
    pairs.push_back(std::move(pr));
  }

  TrainResult res;
  res.metrics_csv = (fs::path(cfg.out_dir) / "metrics.csv").string();
  std::ofstream csv(res.metrics_csv, resume ? std::ios::app : std::ios::trunc);
  require(csv.good(), ErrorCode::Io, "cannot open metric log: " + res.metrics_csv);
  if (!resume) csv << "step,epoch,l1,ssim_loss,harris_loss,total\n";
  std::ofstream val_csv;
  if (val_ds != nullptr) {
    const std::string path = (fs::path(cfg.out_dir) / "validation.csv").string();
    val_csv.open(path, resume ? std::ios::app : std::ios::trunc);
    require(val_csv.good(), ErrorCode::Io, "cannot open validation log: " + path);
    if (!resume) val_csv << "epoch,psnr,ssim\n";
  }
  const std::string last_path = (fs::path(cfg.out_dir) / "last.ckpt").string();
  const std::string best_path = (fs::path(cfg.out_dir) / "best.ckpt").string();
  if (resume) res.last_checkpoint = cfg.resume_from;
  res.best_val_psnr = -1.0;

  auto save = [&](const std::string& path, int64_t completed_epochs) {
    save_checkpoint(path, model, adam,
                    CheckpointMeta{completed_epochs, step, seed, init_rng.state(),
                                   init_rng.stream()});
  };

  bool stop = false;
  for (int64_t e = start_epoch; e < cfg.epochs && !stop; ++e) {
    const auto batches =
        data::epoch_batches((int64_t)pairs.size(), cfg.batch_size, seed, e);
    for (const auto& batch : batches) {
      std::vector<Tensor> rainy, clean;
      rainy.reserve(batch.size());
      clean.reserve(batch.size());
      for (int64_t idx : batch) {
        rainy.push_back(pairs[idx].rainy);
        clean.push_back(pairs[idx].clean);
      }
      ad::Var pred = net::model_forward(model, ad::Var(data::stack(rainy)));
      losses::LossBreakdown loss =
          losses::composite_loss(pred, data::stack(clean), cfg.weights, cfg.harris);
      const float total = loss.total.value().scalar();
      if (!std::isfinite(total)) {
        raise(ErrorCode::Numeric,
              "non-finite loss at step " + std::to_string(step + 1) +
                  (res.last_checkpoint.empty() ? "; no checkpoint written yet"
                                               : "; last good checkpoint: " +
                                                     res.last_checkpoint));
      }
      ad::backward(loss.total);
      adam.step();
      ++step;

      StepRecord rec{step, e + 1, loss.l1, loss.ssim, loss.harris, total};
      res.history.push_back(rec);
      csv << rec.step << ',' << rec.epoch << ',' << csv_float(rec.l1) << ','
          << csv_float(rec.ssim) << ',' << csv_float(rec.harris) << ','
          << csv_float(rec.total) << '\n';
      csv.flush();
      require(csv.good(), ErrorCode::Io, "metric log write failed");

      if (callback && !callback(rec)) stop = true;
      if (cfg.max_steps > 0 && step >= cfg.max_steps) stop = true;
      if (stop) break;
    }
    if (stop) break;

    res.epochs = e + 1;
    if ((e + 1) % cfg.checkpoint_interval == 0 || e + 1 == cfg.epochs) {
      save(last_path, e + 1);
      res.last_checkpoint = last_path;
    }
    if (val_ds != nullptr && ((e + 1) % cfg.validation_interval == 0 || e + 1 == cfg.epochs)) {
      ad::NoGrad guard;
      const metrics::EvalReport report = metrics::evaluate_dataset(
          *val_ds, [&model](const Tensor& x) { return net::derain(model, x); });
      val_csv << (e + 1) << ',' << csv_float((float)report.mean_psnr) << ','
              << csv_float((float)report.mean_ssim) << '\n';
      val_csv.flush();
      if (report.mean_psnr > res.best_val_psnr) {
        res.best_val_psnr = report.mean_psnr;
        save(best_path, e + 1);
        res.best_checkpoint = best_path;
      }
    }
  }
  res.steps = step;
  return res;
}

}  // namespace shark::train
