#include "srnet/checkpoint.hpp"

#include "srnet/errors.hpp"

namespace srnet {

namespace {

torch::serialize::InputArchive open_archive(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw CheckpointError("checkpoint not found: " + path.string());
  torch::serialize::InputArchive archive;
  try {
    archive.load_from(path.string());
  } catch (const c10::Error& e) {
    throw CheckpointError("cannot read checkpoint " + path.string() + ": " + e.what_without_backtrace());
  }
  return archive;
}

ModelConfig stored_config(torch::serialize::InputArchive& archive) {
  c10::IValue value;
  if (!archive.try_read("model_config", value) || !value.isString()) {
    throw CheckpointError("checkpoint has no model_config");
  }
  return model_config_from_yaml(value.toStringRef());
}

template <typename T>
void load_group(torch::serialize::InputArchive& archive, const char* key, T& target) {
  torch::serialize::InputArchive sub;
  if (!archive.try_read(key, sub)) throw CheckpointError(std::string("checkpoint has no '") + key + "'");
  try {
    target.load(sub);
  } catch (const c10::Error& e) {
    throw CheckpointError(std::string("cannot load '") + key + "': " + e.what_without_backtrace());
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config,
                     const CheckpointRefs& refs, int64_t step) {
  torch::serialize::OutputArchive archive;
  archive.write("model_config", c10::IValue(model_config_yaml(config)));
  archive.write("step", c10::IValue(step));
  auto group = [&](const char* key, auto* item) {
    if (!item) return;
    torch::serialize::OutputArchive sub;
    if constexpr (std::is_base_of_v<torch::optim::Optimizer, std::remove_pointer_t<decltype(item)>>) {
      item->save(sub);
    } else {
      (*item)->save(sub);
    }
    archive.write(key, sub);
  };
  group("generator", refs.generator);
  group("critic_b", refs.critic_b);
  group("critic_f", refs.critic_f);
  group("generator_optimizer", refs.generator_optimizer);
  group("critic_optimizer", refs.critic_optimizer);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  archive.save_to(tmp);
  std::filesystem::rename(tmp, path);
}

ModelConfig read_checkpoint_config(const std::filesystem::path& path) {
  auto archive = open_archive(path);
  return stored_config(archive);
}

int64_t load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected,
                        const CheckpointRefs& refs) {
  auto archive = open_archive(path);
  if (!(stored_config(archive) == expected)) {
    throw CheckpointError("checkpoint " + path.string() +
                          " was built with a different model config:\n" +
                          model_config_yaml(stored_config(archive)));
  }
  if (refs.generator) load_group(archive, "generator", **refs.generator);
  if (refs.critic_b) load_group(archive, "critic_b", **refs.critic_b);
  if (refs.critic_f) load_group(archive, "critic_f", **refs.critic_f);
  if (refs.generator_optimizer) load_group(archive, "generator_optimizer", *refs.generator_optimizer);
  if (refs.critic_optimizer) load_group(archive, "critic_optimizer", *refs.critic_optimizer);
  c10::IValue step;
  return archive.try_read("step", step) && step.isInt() ? step.toInt() : 0;
}

Generator load_generator(const std::filesystem::path& path) {
  const auto config = read_checkpoint_config(path);
  Generator g(config);
  load_checkpoint(path, config, {&g});
  g->eval();
  return g;
}

}  // namespace srnet
