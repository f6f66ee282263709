#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cwb/common.hpp"
#include "cwb/scm.hpp"

namespace cwb {

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

// Dataset CSV: header "x0,x1", one row per observation, full precision.
void write_dataset_csv(const std::string& path, const Dataset& d);
Matrix read_dataset_csv(const std::string& path);

// Manifest: JSON array of {file, label, scm_class, seed} with an optional
// "weight" per entry (used by real-data corpora).
void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::string& path);

// Loads every dataset a manifest references; file paths resolve relative to
// the manifest's directory. Missing files raise IoError naming the file.
std::vector<Dataset> load_corpus(const std::string& manifest_path, int workers = 1);

// One cause-effect benchmark pair: numeric whitespace-delimited data file
// plus a 6-field metadata row (id, cause-start, cause-end, effect-start,
// effect-end, weight), 1-based column indices.
struct TuebingenPair {
  Matrix values;  // n x 2, standardized
  GraphLabel truth = GraphLabel::XtoY;
  double weight = 1.0;
};

// Returns nullopt (skip signal) when the cause or effect spans multiple
// columns; only single-column pairs map onto the bivariate task.
std::optional<TuebingenPair> load_tuebingen_pair(const std::string& data_path,
                                                 const std::string& meta_row);

// Ingests a directory of pairNNNN.txt files driven by a metadata file with
// one row per pair. Emits Datasets (scm_class "tuebingen") for evaluation.
std::vector<Dataset> load_tuebingen_directory(const std::string& dir,
                                              const std::string& meta_path);

}  // namespace cwb
