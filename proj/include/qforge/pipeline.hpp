#pragma once

#include "qforge/config.hpp"

#include <map>
#include <string>
#include <vector>

namespace qforge::pipeline {

enum class Stage { ingest, normalize, detect, summarize, embed, reduce, sweep, cluster, topics, report };

const std::vector<Stage>& stages();
std::string to_string(Stage stage);
Stage parse_stage(const std::string& name);

// Anything that went wrong inside a stage that is neither a config nor a data
// problem (CLI exit code 4).
class StageError : public Error {
 public:
  using Error::Error;
};

struct StageRecord {
  std::string stage;
  std::string key;                             // config + inputs + upstream key
  std::map<std::string, std::string> outputs;  // artifact -> checksum
  double seconds = 0;
  bool resumed = false;
};

struct RunManifest {
  std::string config_hash;
  std::string version;
  std::vector<StageRecord> stages;

  // "stage/artifact" -> checksum, the reproducibility fingerprint.
  std::map<std::string, std::string> checksums() const;
  std::string to_json() const;
  static RunManifest from_json(std::string_view content);
};

inline constexpr const char* kVersion = "0.1.0";

// Every stage reads its inputs from the artifacts of earlier stages in
// output_dir and writes its own, together with a stamp recording its key and
// output checksums. Running a stage whose upstream stamp carries a different
// key is a ConfigError; with resume enabled a stage with a matching stamp and
// intact outputs is skipped.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }
  fs::path artifact(const std::string& name) const { return config_.output_dir / name; }
  const std::string& key(Stage stage) const { return keys_.at(stage); }

  StageRecord run_stage(Stage stage);
  // All stages in order; writes run_manifest.json.
  RunManifest run();

 private:
  void execute(Stage stage);
  void check_upstream(Stage stage) const;
  std::vector<std::string> outputs(Stage stage) const;

  PipelineConfig config_;
  std::map<Stage, std::string> keys_;
};

}  // namespace qforge::pipeline
