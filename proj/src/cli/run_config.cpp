#include "hdc/cli/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "hdc/error.hpp"
#include "hdc/text.hpp"

namespace hdc::cli {
namespace {

void reject_unknown(const YAML::Node& node, const std::string& section,
                    const std::set<std::string>& known) {
  if (!node) return;
  if (!node.IsMap()) throw ConfigError("section '" + section + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!known.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in section '" + section + "'");
    }
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (node && node[key]) out = node[key].as<T>();
}

void read_cascade(const YAML::Node& n, CascadeConfig& c) {
  reject_unknown(n, "cascade",
                 {"input_dim", "block_layers", "embed_dim", "lambda", "hard_fraction", "margin",
                  "seed"});
  read(n, "input_dim", c.input_dim);
  read(n, "block_layers", c.block_layers);
  read(n, "embed_dim", c.embed_dim);
  read(n, "lambda", c.lambda);
  read(n, "hard_fraction", c.hard_fraction);
  read(n, "margin", c.margin);
  read(n, "seed", c.seed);
}

void read_train(const YAML::Node& n, TrainConfig& t) {
  reject_unknown(n, "train",
                 {"iterations", "lr_initial", "lr_decay_every", "lr_decay_factor", "momentum",
                  "mode", "rank_by", "checkpoint_every", "seed", "workers"});
  read(n, "iterations", t.iterations);
  read(n, "lr_initial", t.lr_initial);
  read(n, "lr_decay_every", t.lr_decay_every);
  read(n, "lr_decay_factor", t.lr_decay_factor);
  read(n, "momentum", t.momentum);
  if (n && n["mode"]) t.mode = parse_train_mode(n["mode"].as<std::string>());
  if (n && n["rank_by"]) t.rank_by = parse_rank_by(n["rank_by"].as<std::string>());
  read(n, "checkpoint_every", t.checkpoint_every);
  read(n, "seed", t.seed);
  read(n, "workers", t.workers);
}

void read_sampler(const YAML::Node& n, SamplerConfig& s) {
  reject_unknown(n, "sampler", {"classes_per_batch", "images_per_class", "seed"});
  read(n, "classes_per_batch", s.classes_per_batch);
  read(n, "images_per_class", s.images_per_class);
  read(n, "seed", s.seed);
}

void read_synth(const YAML::Node& n, SynthConfig& s) {
  reject_unknown(n, "data.synth",
                 {"num_classes", "per_class", "dim", "centroid_scale", "noise_sigma",
                  "hard_fraction_mix", "hard_shift", "seed"});
  read(n, "num_classes", s.num_classes);
  read(n, "per_class", s.per_class);
  read(n, "dim", s.dim);
  read(n, "centroid_scale", s.centroid_scale);
  read(n, "noise_sigma", s.noise_sigma);
  read(n, "hard_fraction_mix", s.hard_fraction_mix);
  read(n, "hard_shift", s.hard_shift);
  read(n, "seed", s.seed);
}

void read_data(const YAML::Node& n, DataSource& d) {
  reject_unknown(n, "data", {"path", "synth", "train_fraction", "split_seed"});
  if (n && n["path"]) d.path = n["path"].as<std::string>();
  if (n) read_synth(n["synth"], d.synth);
  read(n, "train_fraction", d.train_fraction);
  read(n, "split_seed", d.split_seed);
}

void read_eval(const YAML::Node& n, EvalSettings& e) {
  reject_unknown(n, "eval", {"recall_at", "bin_count"});
  read(n, "recall_at", e.recall_at);
  read(n, "bin_count", e.bin_count);
}

RunConfig from_node(const YAML::Node& root) {
  RunConfig cfg;
  if (!root || root.IsNull()) return cfg;
  reject_unknown(root, "<root>",
                 {"cascade", "train", "sampler", "data", "eval", "output_dir", "log_wall_time"});
  read_cascade(root["cascade"], cfg.cascade);
  read_train(root["train"], cfg.train);
  read_sampler(root["sampler"], cfg.sampler);
  read_data(root["data"], cfg.data);
  read_eval(root["eval"], cfg.eval);
  if (root["output_dir"]) cfg.output_dir = root["output_dir"].as<std::string>();
  read(root, "log_wall_time", cfg.log_wall_time);
  return cfg;
}

YAML::Node flow(const YAML::Node& n) {
  YAML::Node copy = n;
  copy.SetStyle(YAML::EmitterStyle::Flow);
  return copy;
}

// shortest text that reads back to the same double (0.1, not 0.10000000000000001)
YAML::Node num(double v) { return YAML::Node(format_double(v)); }

YAML::Node nums(const std::vector<double>& vs) {
  YAML::Node seq(YAML::NodeType::Sequence);
  for (double v : vs) seq.push_back(num(v));
  return flow(seq);
}

}  // namespace

RunConfig parse_run_config(const std::string& yaml_text) {
  try {
    return from_node(YAML::Load(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  try {
    return parse_run_config(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string emit_run_config(const RunConfig& cfg) {
  YAML::Node root;
  auto& c = cfg.cascade;
  root["cascade"]["input_dim"] = c.input_dim;
  root["cascade"]["block_layers"] = flow(YAML::Node(c.block_layers));
  root["cascade"]["embed_dim"] = flow(YAML::Node(c.embed_dim));
  root["cascade"]["lambda"] = nums(c.lambda);
  root["cascade"]["hard_fraction"] = nums(c.hard_fraction);
  root["cascade"]["margin"] = num(c.margin);
  root["cascade"]["seed"] = c.seed;
  auto& t = cfg.train;
  root["train"]["iterations"] = t.iterations;
  root["train"]["lr_initial"] = num(t.lr_initial);
  root["train"]["lr_decay_every"] = t.lr_decay_every;
  root["train"]["lr_decay_factor"] = num(t.lr_decay_factor);
  root["train"]["momentum"] = num(t.momentum);
  root["train"]["mode"] = to_string(t.mode);
  root["train"]["rank_by"] = to_string(t.rank_by);
  root["train"]["checkpoint_every"] = t.checkpoint_every;
  root["train"]["seed"] = t.seed;
  root["train"]["workers"] = t.workers;
  root["sampler"]["classes_per_batch"] = cfg.sampler.classes_per_batch;
  root["sampler"]["images_per_class"] = cfg.sampler.images_per_class;
  root["sampler"]["seed"] = cfg.sampler.seed;
  auto& d = cfg.data;
  root["data"]["path"] = d.path.string();
  root["data"]["train_fraction"] = num(d.train_fraction);
  root["data"]["split_seed"] = d.split_seed;
  root["data"]["synth"]["num_classes"] = d.synth.num_classes;
  root["data"]["synth"]["per_class"] = d.synth.per_class;
  root["data"]["synth"]["dim"] = d.synth.dim;
  root["data"]["synth"]["centroid_scale"] = num(d.synth.centroid_scale);
  root["data"]["synth"]["noise_sigma"] = num(d.synth.noise_sigma);
  root["data"]["synth"]["hard_fraction_mix"] = num(d.synth.hard_fraction_mix);
  root["data"]["synth"]["hard_shift"] = num(d.synth.hard_shift);
  root["data"]["synth"]["seed"] = d.synth.seed;
  root["eval"]["recall_at"] = flow(YAML::Node(cfg.eval.recall_at));
  root["eval"]["bin_count"] = cfg.eval.bin_count;
  root["output_dir"] = cfg.output_dir.string();
  root["log_wall_time"] = cfg.log_wall_time;
  YAML::Emitter out;
  out << root;
  return std::string(out.c_str()) + "\n";
}

void apply_seed(RunConfig& config, std::uint64_t seed) {
  config.cascade.seed = seed;
  config.train.seed = seed;
  config.sampler.seed = seed;
  config.data.synth.seed = seed;
  config.data.split_seed = seed;
}

}  // namespace hdc::cli
