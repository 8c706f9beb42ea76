#pragma once

// Year-by-year driver shared by the command-line subcommands.

#include "tiger/config.hpp"
#include "tiger/eval.hpp"
#include "tiger/snapshot.hpp"
#include "tiger/trainer.hpp"

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace tiger {

struct RunSettings {
  std::string entities, mentions, test_mentions, triples;  // templates with {year}
  std::filesystem::path out;
  std::vector<int> years;
  std::vector<std::string> categories;
  AggregateMode mode = AggregateMode::forward_and_backward;
  GraphBuildConfig graph;
  ModelConfig model;
  TrainConfig train;
  int workers = 1;
};

RunSettings resolve_settings(const Config& cfg);

/// Keys left out of the resolved config file and the input hash: they do not
/// change any output.
const std::vector<std::string>& runtime_only_keys();

/// Exclusive claim on an output directory; also writes the resolved config
/// and the version stamp. Released on destruction.
class OutputDir {
 public:
  OutputDir(const std::filesystem::path& dir, const Config& cfg);
  ~OutputDir();
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;

  const std::filesystem::path& path() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::filesystem::path lock_;
};

Snapshot load_year(const RunSettings& s, int year);

/// Builds the three graph artifacts for a loaded snapshot.
void build_graphs(Snapshot& snap, const RunSettings& s, std::ostream* log = nullptr);

/// structure.adj, feature.adj, feature.mat, feature.columns, index.manifest, manifest.
void write_graph_artifacts(const Snapshot& snap, const Tokenizer& tok, const std::filesystem::path& dir);

/// Hash of everything that determines a checkpoint: config (minus runtime-only
/// keys and paths), category, year and the bytes of that year's input files.
std::string input_hash(const Config& cfg, const RunSettings& s, int year, const std::string& category);

std::filesystem::path checkpoint_path(const RunSettings& s, const std::string& category, int year);

struct TrainOutcome {
  Checkpoint checkpoint;
  bool reused = false;
  std::size_t steps = 0;
};

/// Trains one (category, year) model unless a checkpoint with the same input hash exists.
TrainOutcome train_year(const Config& cfg, const RunSettings& s, const Snapshot& snap, const std::string& category,
                        std::ostream* log = nullptr);

struct ExperimentResult {
  std::vector<CategoryResults> matrices;
  std::vector<GapCurve> curves;
  std::size_t trained = 0;
  std::size_t reused = 0;
};

/// Graphs and a checkpoint per year and category, every year pair evaluated,
/// report files under out/report.
ExperimentResult run_experiment(const Config& cfg, const RunSettings& s, std::ostream* log = nullptr);

/// Reads a gap_matrix.csv back.
std::vector<CategoryResults> parse_gap_matrix_csv(std::string_view text);

}  // namespace tiger
