#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vidpace/corpus.hpp"
#include "vidpace/eval.hpp"
#include "vidpace/model.hpp"
#include "vidpace/trainer.hpp"

namespace vidpace {

// Flat key = value run configuration with dotted namespaces (corpus.*,
// pace.*, model.*, train.*, augment.*, eval.*). Files use one `key = value`
// per line with `#` comments. Unknown keys are hard errors; flags override
// file values which override defaults.
class RunConfig {
 public:
  RunConfig();  // defaults

  static const std::map<std::string, std::string>& registry();

  void load_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  uint64_t get_u64(const std::string& key) const;
  const std::string& get_str(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  // Sorted `key = value` lines of the fully resolved configuration.
  std::string resolved_text() const;

  // Domain configs assembled from the flat map.
  CorpusSpec corpus_spec() const;
  PaceConfig pace_config() const;
  ModelConfig model_config() const;  // input geometry from train.* + corpus.channels
  TrainConfig train_config() const;
  ProbeConfig probe_config() const;
  LayerTag eval_layer() const;
  std::vector<int> eval_ks() const;
  bool eval_per_clip() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace vidpace
