#include "cwb/io.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cwb/noise.hpp"

namespace cwb {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  require(ec == std::errc(), "format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << contents;
  if (!out) throw IoError("write failed: " + path);
}

void write_dataset_csv(const std::string& path, const Dataset& d) {
  require(d.values.cols() == 2, "write_dataset_csv: dataset must have 2 columns");
  std::string body = "x0,x1\n";
  body.reserve(static_cast<std::size_t>(d.values.rows()) * 48 + 8);
  for (Index i = 0; i < d.values.rows(); ++i) {
    body += format_double(d.values(i, 0));
    body += ',';
    body += format_double(d.values(i, 1));
    body += '\n';
  }
  write_text_file(path, body);
}

Matrix read_dataset_csv(const std::string& path) {
  std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty dataset file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x0,x1")
    throw IoError("dataset file " + path + ": expected header \"x0,x1\", got \"" +
                  line + "\"");
  std::vector<std::array<double, 2>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw IoError("dataset file " + path + " line " + std::to_string(lineno) +
                    ": expected two comma-separated values");
    std::array<double, 2> row;
    for (int c = 0; c < 2; ++c) {
      std::string cell =
          c == 0 ? line.substr(0, comma) : line.substr(comma + 1);
      char* end = nullptr;
      row[c] = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw IoError("dataset file " + path + " line " + std::to_string(lineno) +
                      " column " + std::to_string(c + 1) + ": not a number: \"" +
                      cell + "\"");
    }
    rows.push_back(row);
  }
  Matrix values(static_cast<Index>(rows.size()), 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    values(static_cast<Index>(i), 0) = rows[i][0];
    values(static_cast<Index>(i), 1) = rows[i][1];
  }
  return values;
}

void write_manifest(const std::string& path,
                    const std::vector<ManifestEntry>& entries) {
  json arr = json::array();
  for (const auto& e : entries) {
    json obj = {{"file", e.file},
                {"label", to_string(e.label)},
                {"scm_class", e.scm_class},
                {"seed", e.seed}};
    if (e.weight != 1.0) obj["weight"] = e.weight;
    arr.push_back(std::move(obj));
  }
  write_text_file(path, arr.dump(2) + "\n");
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  json arr;
  try {
    arr = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw IoError("manifest " + path + ": " + e.what());
  }
  if (!arr.is_array()) throw IoError("manifest " + path + ": expected a JSON array");
  std::vector<ManifestEntry> entries;
  entries.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& obj = arr[i];
    if (!obj.is_object())
      throw IoError("manifest " + path + " entry " + std::to_string(i) +
                    ": expected an object");
    for (const auto& [key, _] : obj.items()) {
      if (key != "file" && key != "label" && key != "scm_class" &&
          key != "seed" && key != "weight")
        throw IoError("manifest " + path + " entry " + std::to_string(i) +
                      ": unknown key \"" + key + "\"");
    }
    try {
      ManifestEntry e;
      e.file = obj.at("file").get<std::string>();
      e.label = graph_label_from_string(obj.at("label").get<std::string>());
      e.scm_class = obj.at("scm_class").get<std::string>();
      e.seed = obj.at("seed").get<std::uint64_t>();
      e.weight = obj.value("weight", 1.0);
      entries.push_back(std::move(e));
    } catch (const json::exception& e) {
      throw IoError("manifest " + path + " entry " + std::to_string(i) + ": " +
                    e.what());
    }
  }
  return entries;
}

std::vector<Dataset> load_corpus(const std::string& manifest_path, int workers) {
  std::vector<ManifestEntry> entries = read_manifest(manifest_path);
  std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
  std::vector<Dataset> datasets(entries.size());
  parallel_for(entries.size(), workers, [&](std::size_t i) {
    std::filesystem::path file = base / entries[i].file;
    if (!std::filesystem::exists(file))
      throw IoError("corpus dataset file missing: " + file.string());
    Dataset d;
    d.values = read_dataset_csv(file.string());
    d.label = entries[i].label;
    d.scm_class = entries[i].scm_class;
    d.seed = entries[i].seed;
    d.weight = entries[i].weight;
    datasets[i] = std::move(d);
  });
  return datasets;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

std::optional<TuebingenPair> load_tuebingen_pair(const std::string& data_path,
                                                 const std::string& meta_row) {
  std::vector<std::string> fields = split_ws(meta_row);
  if (fields.size() != 6)
    throw IoError("pair metadata row must have 6 fields, got " +
                  std::to_string(fields.size()));
  long idx[5];
  for (int i = 1; i <= 5; ++i) {
    char* end = nullptr;
    idx[i - 1] = std::strtol(fields[i].c_str(), &end, 10);
    if (end == fields[i].c_str())
      throw IoError("pair metadata: non-numeric field " + std::to_string(i + 1));
  }
  long cause_start = idx[0], cause_end = idx[1];
  long effect_start = idx[2], effect_end = idx[3];
  char* wend = nullptr;
  double weight = std::strtod(fields[5].c_str(), &wend);
  if (wend == fields[5].c_str())
    throw IoError("pair metadata: non-numeric weight");
  if (cause_start != cause_end || effect_start != effect_end)
    return std::nullopt;  // multi-column pair: skip

  std::string text = read_text_file(data_path);
  std::istringstream in(text);
  std::string line;
  std::vector<std::array<double, 2>> rows;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::vector<std::string> cells = split_ws(line);
    if (cells.empty()) continue;
    if (cells.size() < 2)
      throw IoError("pair file " + data_path + " row " + std::to_string(lineno) +
                    ": fewer than 2 columns");
    std::array<double, 2> row;
    for (int c = 0; c < 2; ++c) {
      char* end = nullptr;
      row[c] = std::strtod(cells[c].c_str(), &end);
      if (end == cells[c].c_str() || *end != '\0')
        throw IoError("pair file " + data_path + " row " + std::to_string(lineno) +
                      " column " + std::to_string(c + 1) + ": not a number: \"" +
                      cells[c] + "\"");
    }
    rows.push_back(row);
  }
  if (rows.size() < 2)
    throw IoError("pair file " + data_path + ": fewer than 2 rows");

  Vector x(static_cast<Index>(rows.size())), y(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x(static_cast<Index>(i)) = rows[i][0];
    y(static_cast<Index>(i)) = rows[i][1];
  }
  TuebingenPair pair;
  pair.values.resize(static_cast<Index>(rows.size()), 2);
  pair.values.col(0) = standardize(x);
  pair.values.col(1) = standardize(y);
  pair.truth = cause_start == 1 ? GraphLabel::XtoY : GraphLabel::YtoX;
  pair.weight = weight;
  return pair;
}

std::vector<Dataset> load_tuebingen_directory(const std::string& dir,
                                              const std::string& meta_path) {
  std::string meta = read_text_file(meta_path);
  std::istringstream in(meta);
  std::string line;
  std::vector<Dataset> out;
  while (std::getline(in, line)) {
    std::vector<std::string> fields = split_ws(line);
    if (fields.empty()) continue;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "pair%04ld",
                  std::strtol(fields[0].c_str(), nullptr, 10));
    std::filesystem::path data = std::filesystem::path(dir) / (std::string(buf) + ".txt");
    if (!std::filesystem::exists(data))
      throw IoError("pair data file missing: " + data.string());
    std::optional<TuebingenPair> pair = load_tuebingen_pair(data.string(), line);
    if (!pair) continue;
    Dataset d;
    d.values = std::move(pair->values);
    d.label = pair->truth;
    d.scm_class = "tuebingen";
    d.seed = 0;
    d.weight = pair->weight;
    out.push_back(std::move(d));
  }
  if (out.empty()) throw IoError("no usable pairs found in " + meta_path);
  return out;
}

}  // namespace cwb
