#include "equiflow/config.hpp"

#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "equiflow/toybench.hpp"

namespace equiflow {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownKeys = {
    "env",          "order",        "steps",       "exec_steps",
    "m_candidates", "reset_period", "nfe",         "dt",
    "lambda",       "rescale_fabo", "equivariant", "lr",
    "weight_decay", "batch_size",   "train_steps", "n_demos",
    "seed",         "d_obs",        "d_act",       "time_freqs",
    "hidden"};

json to_json(const FlowConfig& c) {
  json j;
  j["env"] = c.env;
  j["order"] = c.order;
  j["steps"] = c.steps;
  j["exec_steps"] = c.exec_steps;
  j["m_candidates"] = c.m_candidates;
  j["reset_period"] = c.reset_period;
  j["nfe"] = c.nfe;
  j["dt"] = c.dt;
  j["lambda"] = c.lambda;
  j["rescale_fabo"] = c.rescale_fabo;
  j["equivariant"] = c.equivariant;
  j["lr"] = c.lr;
  j["weight_decay"] = c.weight_decay;
  j["batch_size"] = c.batch_size;
  j["train_steps"] = c.train_steps;
  j["n_demos"] = c.n_demos;
  j["seed"] = c.seed;
  j["d_obs"] = c.d_obs;
  j["d_act"] = c.d_act;
  j["time_freqs"] = c.time_freqs;
  j["hidden"] = c.hidden;
  return j;
}

}  // namespace

FlowConfig FlowConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be an object");
  for (const auto& [key, _] : j.items())
    if (!kKnownKeys.count(key))
      throw std::invalid_argument("unknown config key: " + key);

  FlowConfig c;
  auto get = [&](const char* k, auto& field) {
    if (j.contains(k)) field = j.at(k).get<std::decay_t<decltype(field)>>();
  };
  get("env", c.env);
  get("order", c.order);
  get("steps", c.steps);
  get("exec_steps", c.exec_steps);
  get("m_candidates", c.m_candidates);
  get("reset_period", c.reset_period);
  get("nfe", c.nfe);
  get("dt", c.dt);
  get("lambda", c.lambda);
  get("rescale_fabo", c.rescale_fabo);
  get("equivariant", c.equivariant);
  get("lr", c.lr);
  get("weight_decay", c.weight_decay);
  get("batch_size", c.batch_size);
  get("train_steps", c.train_steps);
  get("n_demos", c.n_demos);
  get("seed", c.seed);
  get("d_obs", c.d_obs);
  get("d_act", c.d_act);
  get("time_freqs", c.time_freqs);
  get("hidden", c.hidden);

  if (c.order < 1) throw std::invalid_argument("order must be >= 1");
  if (c.steps < 1 || c.exec_steps < 1 || c.exec_steps > c.steps)
    throw std::invalid_argument("need 1 <= exec_steps <= steps");
  if (!(c.dt > 0.0 && c.dt < 1.0))
    throw std::invalid_argument("dt must lie in (0, 1)");
  LambdaSchedule::parse(c.lambda);  // validate early
  return c;
}

FlowConfig FlowConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json_text(ss.str());
}

std::string FlowConfig::to_json_text() const {
  // nlohmann::json keeps object keys sorted, so dump(2) is canonical
  return to_json(*this).dump(2) + "\n";
}

std::uint64_t FlowConfig::hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : to_json_text()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

TrainOptions FlowConfig::train_options() const {
  TrainOptions o;
  o.dt = dt;
  o.lambda = lambda_schedule();
  o.rescale_fabo = rescale_fabo;
  return o;
}

std::unique_ptr<TrainableField> build_field(const FlowConfig& cfg) {
  auto env = make_env(cfg.env, cfg.order);
  NetConfig nc;
  nc.order = cfg.order;
  nc.steps = cfg.steps;
  nc.obs_rep = env->obs_rep();
  nc.action_rep = env->action_rep();
  nc.d_obs = cfg.d_obs;
  nc.d_act = cfg.d_act;
  nc.time_freqs = cfg.time_freqs;
  nc.hidden = cfg.hidden;

  std::unique_ptr<TrainableField> net;
  if (cfg.equivariant) {
    net = std::make_unique<VelocityField>(nc);
  } else {
    // parameter-matched dense baseline
    VelocityField ref(nc);
    int traj_dim = cfg.steps * env->action_dim();
    int w = matched_dense_width(traj_dim, env->obs_dim(), cfg.time_freqs,
                                ref.param_count());
    net = std::make_unique<DenseField>(traj_dim, env->obs_dim(),
                                       cfg.time_freqs,
                                       std::vector<int>{w, w});
  }
  Rng rng(cfg.seed);
  net->init_params(rng);
  return net;
}

static constexpr char kCkptMagic[8] = {'E', 'Q', 'F', 'C', 'K', 'P', 'T', '1'};

void save_checkpoint(const std::string& path, const FlowConfig& cfg,
                     const TrainableField& net) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f.write(kCkptMagic, 8);
  std::string cfg_text = cfg.to_json_text();
  std::uint64_t len = cfg_text.size();
  f.write(reinterpret_cast<const char*>(&len), 8);
  f.write(cfg_text.data(), (std::streamsize)len);
  std::uint64_t h = cfg.hash();
  f.write(reinterpret_cast<const char*>(&h), 8);
  std::uint64_t n = net.params().size();
  f.write(reinterpret_cast<const char*>(&n), 8);
  f.write(reinterpret_cast<const char*>(net.params().data()),
          (std::streamsize)(n * sizeof(double)));
  if (!f) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kCkptMagic, 8) != 0)
    throw std::runtime_error("bad checkpoint file: " + path);
  std::uint64_t len = 0;
  f.read(reinterpret_cast<char*>(&len), 8);
  std::string cfg_text(len, '\0');
  f.read(cfg_text.data(), (std::streamsize)len);
  std::uint64_t h = 0, n = 0;
  f.read(reinterpret_cast<char*>(&h), 8);

  Checkpoint ck;
  ck.config = FlowConfig::from_json_text(cfg_text);
  if (ck.config.hash() != h)
    throw std::runtime_error("checkpoint config hash mismatch: " + path);
  ck.net = build_field(ck.config);
  f.read(reinterpret_cast<char*>(&n), 8);
  if (n != ck.net->params().size())
    throw std::runtime_error("checkpoint parameter count mismatch: " + path);
  f.read(reinterpret_cast<char*>(ck.net->params().data()),
         (std::streamsize)(n * sizeof(double)));
  if (!f) throw std::runtime_error("truncated checkpoint: " + path);
  return ck;
}

MetricsWriter::MetricsWriter(const std::string& path,
                             const std::vector<std::string>& cols)
    : path_(path), n_cols_(cols.size()) {
  std::ofstream f(path_);
  if (!f) throw std::runtime_error("cannot open " + path_);
  for (size_t i = 0; i < cols.size(); ++i)
    f << cols[i] << (i + 1 < cols.size() ? "," : "\n");
}

void MetricsWriter::row(const std::vector<double>& values) {
  if (values.size() != n_cols_)
    throw std::invalid_argument("metrics row width mismatch");
  std::ofstream f(path_, std::ios::app);
  f.precision(17);
  for (size_t i = 0; i < values.size(); ++i)
    f << values[i] << (i + 1 < values.size() ? "," : "\n");
}

}  // namespace equiflow
