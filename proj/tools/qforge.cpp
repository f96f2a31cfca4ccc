#include "qforge/config.hpp"
#include "qforge/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

using qforge::pipeline::Stage;

struct Overrides {
  std::string config;
  std::size_t workers = 0;
  bool resume = false;
  std::string engine;
  std::string scores;
  double threshold = -1;
  std::size_t min_cluster_size = 0;
  std::vector<std::size_t> sizes;
};

qforge::PipelineConfig effective_config(const Overrides& o) {
  auto config = qforge::load_config(o.config);
  if (o.workers) config.workers = o.workers;
  if (o.resume) config.resume = true;
  if (!o.engine.empty()) config.detector = qforge::qdetect::parse_engine(o.engine);
  if (!o.scores.empty()) config.question_scores = o.scores;
  if (o.threshold >= 0) config.question_threshold = o.threshold;
  if (o.min_cluster_size) config.min_cluster_size = o.min_cluster_size;
  if (!o.sizes.empty()) config.sweep_sizes = o.sizes;
  config.finalize();
  return config;
}

void print_record(const qforge::pipeline::StageRecord& r) {
  std::cout << r.stage << (r.resumed ? " (resumed)" : "") << ": " << r.outputs.size() << " artifacts";
  if (!r.resumed) {
    char seconds[32];
    std::snprintf(seconds, sizeof seconds, "%.2fs", r.seconds);
    std::cout << " in " << seconds;
  }
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qforge: question detection and topic discovery over forum posts"};
  app.require_subcommand(1);
  Overrides o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config, "pipeline config file (key = value)")->required()->check(CLI::ExistingFile);
    sub->add_option("-w,--workers", o.workers, "worker threads (1 = bitwise reproducible)")->check(CLI::PositiveNumber);
    sub->add_flag("--resume", o.resume, "skip stages whose stamp matches");
  };

  // Overrides are accepted by the stage they affect and every later one, so a
  // chain of verbs can repeat them and keep matching upstream stamps.
  auto overrides = [&](CLI::App* sub, Stage upto) {
    if (upto >= Stage::detect) {
      sub->add_option("--engine", o.engine, "rule | heuristic | external")
          ->check(CLI::IsMember({"rule", "heuristic", "external"}));
      sub->add_option("--scores", o.scores, "external per-sentence scores JSONL");
      sub->add_option("--threshold", o.threshold, "score threshold for external scores")->check(CLI::Range(0.0, 1.0));
    }
    if (upto >= Stage::sweep) sub->add_option("--sizes", o.sizes, "min cluster sizes to try")->delimiter(',');
    if (upto >= Stage::cluster)
      sub->add_option("--min-cluster-size", o.min_cluster_size, "override the sweep selection");
  };

  std::vector<std::pair<CLI::App*, Stage>> verbs;
  for (auto stage : qforge::pipeline::stages()) {
    auto* sub = app.add_subcommand(qforge::pipeline::to_string(stage), "run the " + qforge::pipeline::to_string(stage) + " stage");
    common(sub);
    overrides(sub, stage);
    verbs.emplace_back(sub, stage);
  }
  auto* run = app.add_subcommand("run", "run every stage in order");
  common(run);
  overrides(run, Stage::report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    qforge::pipeline::Pipeline pipeline(effective_config(o));
    if (run->parsed()) {
      const auto manifest = pipeline.run();
      for (const auto& r : manifest.stages) print_record(r);
      std::cout << "manifest: " << pipeline.artifact("run_manifest.json").string() << "\n";
      return 0;
    }
    for (const auto& [sub, stage] : verbs) {
      if (!sub->parsed()) continue;
      print_record(pipeline.run_stage(stage));
    }
    return 0;
  } catch (const qforge::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qforge::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
