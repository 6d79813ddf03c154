#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "equiflow/net.hpp"
#include "equiflow/train.hpp"

namespace equiflow {

// Everything a run needs, serializable to/from JSON. Unknown keys are
// rejected so typos fail fast.
struct FlowConfig {
  std::string env = "reach2d";
  int order = 8;          // cyclic group order u
  int steps = 16;         // chunk length n
  int exec_steps = 8;     // executed prefix n1
  int m_candidates = 5;
  int reset_period = 10;
  int nfe = 5;
  double dt = 0.05;
  std::string lambda = "quadratic:1";
  bool rescale_fabo = true;
  bool equivariant = true;
  double lr = 1e-3;
  double weight_decay = 1e-6;
  int batch_size = 64;
  int train_steps = 2000;
  int n_demos = 100;
  std::uint64_t seed = 0;
  int d_obs = 8;
  int d_act = 8;
  int time_freqs = 8;
  std::vector<int> hidden = {16, 32, 32};

  static FlowConfig from_json_text(const std::string& text);
  static FlowConfig from_file(const std::string& path);
  std::string to_json_text() const;

  // FNV-1a over the canonical JSON text; recorded in checkpoints and
  // manifests so reruns are comparable.
  std::uint64_t hash() const;

  LambdaSchedule lambda_schedule() const { return LambdaSchedule::parse(lambda); }
  TrainOptions train_options() const;
};

// Build the policy network the config describes (equivariant or the matched
// dense baseline), with parameters initialized from config.seed.
std::unique_ptr<TrainableField> build_field(const FlowConfig& cfg);

// Checkpoint = magic, config JSON, raw little-endian doubles. Bit-exact
// round trip.
void save_checkpoint(const std::string& path, const FlowConfig& cfg,
                     const TrainableField& net);
struct Checkpoint {
  FlowConfig config;
  std::unique_ptr<TrainableField> net;
};
Checkpoint load_checkpoint(const std::string& path);

// Append-only CSV metrics writer (header on creation).
class MetricsWriter {
 public:
  MetricsWriter(const std::string& path, const std::vector<std::string>& cols);
  void row(const std::vector<double>& values);

 private:
  std::string path_;
  size_t n_cols_;
};

}  // namespace equiflow
