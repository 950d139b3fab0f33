#include "srnet/trainer.hpp"

#include "srnet/errors.hpp"
#include "srnet/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <future>
#include <numeric>
#include <ostream>
#include <random>

namespace srnet {

namespace fs = std::filesystem;

double lr_schedule(double epoch, const TrainConfig& c) {
  const double last = c.epochs - 1;
  if (epoch < c.decay_start_epoch) return c.lr_init;
  if (epoch >= last) return c.lr_final;
  if (c.decay_shape == "step") return c.lr_final;
  const double span = last - c.decay_start_epoch;
  const double t = (epoch - c.decay_start_epoch) / span;
  return c.lr_init + (c.lr_final - c.lr_init) * t;
}

// ---------------------------------------------------------------------------
// Batching

SampleSource SampleSource::from_manifest(const DatasetManifest& manifest) {
  SampleSource s;
  s.count = manifest.records.size();
  s.load = [manifest](size_t i) { return load_sample(manifest.root, manifest.records.at(i)); };
  return s;
}

SampleSource SampleSource::from_samples(std::vector<PairedSample> samples) {
  auto shared = std::make_shared<const std::vector<PairedSample>>(std::move(samples));
  SampleSource s;
  s.count = shared->size();
  s.load = [shared](size_t i) { return shared->at(i); };
  return s;
}

int64_t batch_width(const std::vector<int64_t>& widths, int64_t stride) {
  if (widths.empty()) throw ShapeError("batch_width: empty batch");
  const double mean = std::accumulate(widths.begin(), widths.end(), 0.0) / widths.size();
  return std::max<int64_t>(stride, std::llround(mean / stride) * stride);
}

Batch collate(const std::vector<PairedSample>& samples, int64_t height, int64_t width) {
  std::vector<torch::Tensor> i_s, i_t, t_sk, t_t, t_b, t_f;
  for (const auto& s : samples) {
    auto rs = [&](const ImageTensor& img) { return resize_bilinear(img.tensor(), height, width); };
    i_s.push_back(rs(s.i_s));
    i_t.push_back(rs(s.i_t));
    t_sk.push_back((rs(s.t_sk) >= 0.5).to(torch::kFloat32));
    t_t.push_back(rs(s.t_t));
    t_b.push_back(rs(s.t_b));
    t_f.push_back(rs(s.t_f));
  }
  Batch b;
  b.i_s = torch::stack(i_s);
  b.i_t = torch::stack(i_t);
  b.t_sk = torch::stack(t_sk);
  b.t_t = torch::stack(t_t);
  b.t_b = torch::stack(t_b);
  b.t_f = torch::stack(t_f);
  return b;
}

BatchStream::BatchStream(SampleSource source, int batch_size, uint64_t seed, int height, int workers)
    : source_(std::move(source)), batch_size_(batch_size), seed_(seed), height_(height), workers_(workers) {
  if (batch_size_ < 1) throw ConfigError("batch_size must be >= 1");
  if (source_.count == 0) throw Error("cannot batch an empty dataset");
  order_ = epoch_batches(source_.count, batch_size_, seed_, epoch_);
}

std::vector<std::vector<size_t>> BatchStream::epoch_batches(size_t count, int batch_size, uint64_t seed,
                                                            int64_t epoch) {
  std::vector<size_t> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, static_cast<uint64_t>(epoch)));
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::vector<size_t>> batches;
  for (size_t i = 0; i < count; i += batch_size) {
    batches.emplace_back(idx.begin() + i, idx.begin() + std::min(count, i + batch_size));
  }
  return batches;
}

size_t BatchStream::batches_per_epoch() const { return order_.size(); }

void BatchStream::seek(int64_t epoch, size_t batch_index) {
  epoch_ = epoch;
  order_ = epoch_batches(source_.count, batch_size_, seed_, epoch_);
  cursor_ = std::min(batch_index, order_.size());
}

Batch BatchStream::next() {
  if (cursor_ >= order_.size()) seek(epoch_ + 1, 0);
  const auto& ids = order_[cursor_++];
  std::vector<PairedSample> samples(ids.size());
  if (workers_ > 1 && ids.size() > 1) {
    std::vector<std::future<PairedSample>> jobs;
    for (size_t k = 0; k < ids.size(); ++k) {
      jobs.push_back(std::async(std::launch::async, source_.load, ids[k]));
    }
    for (size_t k = 0; k < ids.size(); ++k) samples[k] = jobs[k].get();
  } else {
    for (size_t k = 0; k < ids.size(); ++k) samples[k] = source_.load(ids[k]);
  }
  std::vector<int64_t> widths;
  for (const auto& s : samples) widths.push_back(s.width());
  Batch b = collate(samples, height_, batch_width(widths));
  b.indices = ids;
  return b;
}

BatchStream make_batches(const DatasetManifest& manifest, int batch_size, uint64_t seed) {
  return BatchStream(SampleSource::from_manifest(manifest), batch_size, seed);
}

// ---------------------------------------------------------------------------

bool LossScalars::finite() const {
  for (double v : {text_l1, dice, background_adv, background_l1, fusion_adv, fusion_l1, perceptual,
                   style, generator_total, critic_b, critic_f}) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string LossScalars::to_json(int64_t step, double lr) const {
  nlohmann::json j = {{"step", step},
                      {"lr", lr},
                      {"text_l1", text_l1},
                      {"dice", dice},
                      {"background_adv", background_adv},
                      {"background_l1", background_l1},
                      {"fusion_adv", fusion_adv},
                      {"fusion_l1", fusion_l1},
                      {"perceptual", perceptual},
                      {"style", style},
                      {"generator_total", generator_total},
                      {"critic_b", critic_b},
                      {"critic_f", critic_f}};
  return j.dump();
}

void configure_runtime(bool deterministic, int threads) {
  if (deterministic) {
    torch::set_num_threads(1);
    at::globalContext().setDeterministicAlgorithms(true, /*warn_only=*/true);
  } else if (threads > 0) {
    torch::set_num_threads(threads);
  }
}

Trainer::Trainer(const RunConfig& config) : config_(config) {
  config_.train.validate();
  torch::manual_seed(config_.train.seed);
  generator_ = Generator(config_.model);
  critic_b_ = PatchCritic(config_.model);
  critic_f_ = PatchCritic(config_.model);
  extractor_ = FeatureExtractor(config_.extractor);

  lr_ = config_.train.lr_init;
  auto adam = [&] {
    return torch::optim::AdamOptions(lr_).betas({config_.train.adam_beta1, config_.train.adam_beta2});
  };
  g_opt_ = std::make_unique<torch::optim::Adam>(generator_->parameters(), adam());
  std::vector<torch::Tensor> d_params = critic_b_->parameters();
  for (auto& p : critic_f_->parameters()) d_params.push_back(p);
  d_opt_ = std::make_unique<torch::optim::Adam>(d_params, adam());
}

void Trainer::set_learning_rate(double lr) {
  lr_ = lr;
  for (auto* opt : {g_opt_.get(), d_opt_.get()}) {
    for (auto& group : opt->param_groups()) {
      static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
    }
  }
}

void Trainer::set_critics_trainable(bool on) {
  for (auto* d : {&critic_b_, &critic_f_}) {
    for (auto& p : (*d)->parameters()) p.set_requires_grad(on);
  }
}

LossScalars Trainer::train_step(const Batch& batch) {
  const auto& w = config_.loss;
  generator_->train();
  critic_b_->train();
  critic_f_->train();

  auto out = generator_(batch.i_t, batch.i_s);

  // Critic update on real and detached fake pairs.
  set_critics_trainable(true);
  d_opt_->zero_grad();
  auto d_b = critic_loss(critic_b_(batch.i_s, batch.t_b), critic_b_(batch.i_s, out.o_b.detach()),
                         w.logit_clamp);
  auto d_f = critic_loss(critic_f_(batch.i_t, batch.t_f), critic_f_(batch.i_t, out.o_f.detach()),
                         w.logit_clamp);
  auto d_total = d_b + d_f;
  if (!torch::isfinite(d_total).item<bool>()) {
    throw TrainingDiverged("critic loss is not finite at step " + std::to_string(step_));
  }
  d_total.backward();
  d_opt_->step();

  // Generator update against the refreshed critics.
  set_critics_trainable(false);
  g_opt_->zero_grad();
  LossParts parts;
  parts.text_l1 = srnet::l1_loss(batch.t_t, out.o_t);
  parts.skeleton_dice = dice_loss(out.o_sk, batch.t_sk, w.dice_eps);
  parts.background_adv = generator_adversarial_loss(critic_b_(batch.i_s, out.o_b), w.logit_clamp);
  parts.background_l1 = srnet::l1_loss(batch.t_b, out.o_b);
  parts.fusion_adv = generator_adversarial_loss(critic_f_(batch.i_t, out.o_f), w.logit_clamp);
  parts.fusion_l1 = srnet::l1_loss(batch.t_f, out.o_f);
  std::vector<torch::Tensor> t_feats;
  {
    torch::NoGradGuard no_grad;
    t_feats = extractor_(batch.t_f);
  }
  auto o_feats = extractor_(out.o_f);
  parts.perceptual = perceptual_loss_from_features(t_feats, o_feats);
  parts.style = style_loss_from_features(t_feats, o_feats, w.gram_normalize);
  auto g_total = total_generator_loss(parts, w);

  LossScalars s;
  s.text_l1 = parts.text_l1.item<double>();
  s.dice = parts.skeleton_dice.item<double>();
  s.background_adv = parts.background_adv.item<double>();
  s.background_l1 = parts.background_l1.item<double>();
  s.fusion_adv = parts.fusion_adv.item<double>();
  s.fusion_l1 = parts.fusion_l1.item<double>();
  s.perceptual = parts.perceptual.item<double>();
  s.style = parts.style.item<double>();
  s.generator_total = g_total.item<double>();
  s.critic_b = d_b.item<double>();
  s.critic_f = d_f.item<double>();
  if (!s.finite()) throw TrainingDiverged("generator loss is not finite at step " + std::to_string(step_));

  g_total.backward();
  g_opt_->step();
  set_critics_trainable(true);
  ++step_;
  return s;
}

LossScalars Trainer::evaluate(const std::vector<PairedSample>& samples) {
  torch::NoGradGuard no_grad;
  generator_->eval();
  LossScalars mean;
  for (const auto& s : samples) {
    auto [i_t, rec] = pad_to_stride(s.i_t.tensor().unsqueeze(0), 8);
    auto i_s = pad_to_stride(s.i_s.tensor().unsqueeze(0), 8).first;
    auto out = generator_(i_t, i_s);
    auto crop = [&](const torch::Tensor& t) { return crop_to_record(t, rec); };
    mean.text_l1 += srnet::l1_loss(s.t_t.tensor().unsqueeze(0), crop(out.o_t)).item<double>();
    mean.dice += dice_loss(crop(out.o_sk), s.t_sk.tensor().unsqueeze(0), config_.loss.dice_eps).item<double>();
    mean.background_l1 += srnet::l1_loss(s.t_b.tensor().unsqueeze(0), crop(out.o_b)).item<double>();
    mean.fusion_l1 += srnet::l1_loss(s.t_f.tensor().unsqueeze(0), crop(out.o_f)).item<double>();
  }
  const double n = std::max<size_t>(samples.size(), 1);
  mean.text_l1 /= n;
  mean.dice /= n;
  mean.background_l1 /= n;
  mean.fusion_l1 /= n;
  return mean;
}

void Trainer::save(const fs::path& path) {
  save_checkpoint(path, config_.model,
                  {&generator_, &critic_b_, &critic_f_, g_opt_.get(), d_opt_.get()}, step_);
}

void Trainer::resume(const fs::path& path) {
  step_ = load_checkpoint(path, config_.model,
                          {&generator_, &critic_b_, &critic_f_, g_opt_.get(), d_opt_.get()});
}

void Trainer::fit(const SampleSource& data, const fs::path& out_dir, std::ostream& log) {
  const auto& tc = config_.train;
  fs::create_directories(out_dir);
  BatchStream stream(data, tc.batch_size, tc.seed, tc.height, tc.workers);
  const auto per_epoch = static_cast<int64_t>(stream.batches_per_epoch());
  stream.seek(step_ / per_epoch, static_cast<size_t>(step_ % per_epoch));

  const int64_t total_steps = tc.max_steps > 0 ? std::min<int64_t>(tc.max_steps, tc.epochs * per_epoch)
                                               : tc.epochs * per_epoch;
  while (step_ < total_steps) {
    set_learning_rate(lr_schedule(static_cast<double>(step_ / per_epoch), tc));
    LossScalars s;
    try {
      s = train_step(stream.next());
    } catch (const TrainingDiverged&) {
      save(out_dir / "diverged_snapshot.pt");
      throw;
    }
    if (tc.log_every > 0 && (step_ % tc.log_every == 0 || step_ == 1)) {
      log << s.to_json(step_, lr_) << '\n' << std::flush;
    }
    if (tc.checkpoint_every > 0 && step_ % tc.checkpoint_every == 0) {
      save(out_dir / ("step_" + std::to_string(step_) + ".pt"));
    }
  }
  save(out_dir / "final.pt");
}

double OverfitReport::fusion_l1_reduction() const {
  return train_final.fusion_l1 > 0 ? train_initial.fusion_l1 / train_final.fusion_l1 : INFINITY;
}

namespace {

LossScalars mean_of(std::vector<LossScalars>::const_iterator begin, std::vector<LossScalars>::const_iterator end) {
  LossScalars m;
  const double n = static_cast<double>(std::max<std::ptrdiff_t>(end - begin, 1));
  for (auto it = begin; it != end; ++it) {
    m.text_l1 += it->text_l1 / n;
    m.dice += it->dice / n;
    m.background_l1 += it->background_l1 / n;
    m.fusion_l1 += it->fusion_l1 / n;
    m.perceptual += it->perceptual / n;
    m.style += it->style / n;
  }
  return m;
}

}  // namespace

OverfitReport overfit_smoke(Trainer& trainer, const std::vector<PairedSample>& samples, int64_t steps,
                            std::ostream* progress) {
  if (samples.empty() || samples.size() > 50) throw Error("overfit_smoke expects 1..50 samples");
  const auto& tc = trainer.config().train;
  OverfitReport report;
  report.initial = trainer.evaluate(samples);
  BatchStream stream(SampleSource::from_samples(samples), tc.batch_size, tc.seed, tc.height);
  const auto per_epoch = static_cast<int64_t>(stream.batches_per_epoch());
  for (int64_t k = 0; k < steps; ++k) {
    trainer.set_learning_rate(lr_schedule(static_cast<double>(k / per_epoch), tc));
    report.trace.push_back(trainer.train_step(stream.next()));
    if (progress && (k + 1) % 100 == 0) {
      *progress << report.trace.back().to_json(k + 1, trainer.learning_rate()) << '\n' << std::flush;
    }
  }
  report.steps = steps;
  report.steps_per_epoch = per_epoch;
  const auto window = std::min<int64_t>(per_epoch, steps);
  report.train_initial = mean_of(report.trace.begin(), report.trace.begin() + window);
  report.train_final = mean_of(report.trace.end() - window, report.trace.end());
  report.final = trainer.evaluate(samples);
  return report;
}

}  // namespace srnet
