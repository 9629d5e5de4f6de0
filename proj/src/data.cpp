// Copyright 2026 The ldlage Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ldlage/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "ldlage/error.hpp"
#include "ldlage/rng.hpp"

namespace ldlage {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_real(const std::string& text, std::size_t line_no, const char* what) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || std::isnan(value)) {
    throw DataFormatError("line " + std::to_string(line_no) + ": bad " + what +
                              " value '" + text + "'",
                          line_no);
  }
  return value;
}

void check_age(double age, std::size_t line_no) {
  if (!(age > 0.0) || !std::isfinite(age)) {
    throw DataFormatError(
        "line " + std::to_string(line_no) + ": age must be a positive real",
        line_no);
  }
}

std::vector<LabeledSample> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("load_dataset: cannot open '" + path.string() + "'");
  }

  std::string line;
  std::size_t line_no = 0;

  // Header: id[,speaker_id],age,f0,...,f{D-1}
  if (!std::getline(in, line)) {
    throw DataFormatError("'" + path.string() + "' is empty");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.empty() || header[0] != "id") {
    throw DataFormatError("line 1: header must start with 'id'", 1);
  }
  std::size_t col = 1;
  const bool has_speaker = col < header.size() && header[col] == "speaker_id";
  if (has_speaker) ++col;
  if (col >= header.size() || header[col] != "age") {
    throw DataFormatError("line 1: header must declare an 'age' column", 1);
  }
  ++col;
  const std::size_t dim = header.size() - col;
  if (dim == 0) {
    throw DataFormatError("line 1: header declares no feature columns", 1);
  }
  for (std::size_t f = 0; f < dim; ++f) {
    if (header[col + f] != "f" + std::to_string(f)) {
      throw DataFormatError("line 1: feature columns must be named f0..f" +
                                std::to_string(dim - 1),
                            1);
    }
  }

  std::vector<LabeledSample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataFormatError("line " + std::to_string(line_no) + ": expected " +
                                std::to_string(header.size()) + " fields, got " +
                                std::to_string(fields.size()),
                            line_no);
    }
    LabeledSample sample;
    std::size_t f = 0;
    sample.id = fields[f++];
    if (has_speaker) sample.speaker_id = fields[f++];
    if (fields[f].empty()) {
      throw DataFormatError("line " + std::to_string(line_no) + ": missing age",
                            line_no);
    }
    sample.age = parse_real(fields[f++], line_no, "age");
    check_age(sample.age, line_no);
    sample.embedding.reserve(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      sample.embedding.push_back(parse_real(fields[f++], line_no, "feature"));
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

std::vector<LabeledSample> load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("load_dataset: cannot open '" + path.string() + "'");
  }
  std::vector<LabeledSample> samples;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw DataFormatError(
          "line " + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")",
          line_no);
    }
    if (!record.is_object() || !record.contains("id") || !record["id"].is_string()) {
      throw DataFormatError(
          "line " + std::to_string(line_no) + ": record needs a string 'id'",
          line_no);
    }
    LabeledSample sample;
    sample.id = record["id"].get<std::string>();
    if (record.contains("speaker_id") && record["speaker_id"].is_string()) {
      sample.speaker_id = record["speaker_id"].get<std::string>();
    }
    if (!record.contains("age") || !record["age"].is_number()) {
      throw DataFormatError(
          "line " + std::to_string(line_no) + ": record needs a numeric 'age'",
          line_no);
    }
    sample.age = record["age"].get<double>();
    check_age(sample.age, line_no);
    if (record.contains("embedding") && record["embedding"].is_array()) {
      for (const auto& v : record["embedding"]) {
        if (!v.is_number()) {
          throw DataFormatError(
              "line " + std::to_string(line_no) + ": non-numeric embedding entry",
              line_no);
        }
        sample.embedding.push_back(v.get<double>());
      }
    } else {
      // Fallback spelling: individual feature fields f0..f{D-1}.
      for (std::size_t f = 0;; ++f) {
        const std::string key = "f" + std::to_string(f);
        if (!record.contains(key)) break;
        if (!record[key].is_number()) {
          throw DataFormatError(
              "line " + std::to_string(line_no) + ": non-numeric field " + key,
              line_no);
        }
        sample.embedding.push_back(record[key].get<double>());
      }
    }
    if (sample.embedding.empty()) {
      throw DataFormatError(
          "line " + std::to_string(line_no) + ": record carries no features",
          line_no);
    }
    if (dim == 0) {
      dim = sample.embedding.size();
    } else if (sample.embedding.size() != dim) {
      throw DataFormatError("ragged embedding dimensions: line " +
                            std::to_string(line_no) + " has " +
                            std::to_string(sample.embedding.size()) +
                            " features, earlier records have " + std::to_string(dim));
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

void format_real(std::string& out, double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  out += buf;
}

void save_csv(const std::filesystem::path& path,
              const std::vector<LabeledSample>& samples) {
  std::ofstream out(path);
  if (!out) {
    throw Error("save_dataset: cannot open '" + path.string() + "' for writing");
  }
  const std::size_t dim = samples.empty() ? 0 : samples.front().embedding.size();
  out << "id,speaker_id,age";
  for (std::size_t f = 0; f < dim; ++f) {
    out << ",f" << f;
  }
  out << '\n';
  std::string row;
  for (const LabeledSample& sample : samples) {
    if (sample.embedding.size() != dim) {
      throw InvalidParameterError("save_dataset: ragged embedding dimensions");
    }
    row.clear();
    row += sample.id;
    row += ',';
    row += sample.speaker_id;
    row += ',';
    format_real(row, sample.age);
    for (double v : sample.embedding) {
      row += ',';
      format_real(row, v);
    }
    row += '\n';
    out << row;
  }
  if (!out) {
    throw Error("save_dataset: write failed for '" + path.string() + "'");
  }
}

void save_jsonl(const std::filesystem::path& path,
                const std::vector<LabeledSample>& samples) {
  std::ofstream out(path);
  if (!out) {
    throw Error("save_dataset: cannot open '" + path.string() + "' for writing");
  }
  for (const LabeledSample& sample : samples) {
    json record;
    record["id"] = sample.id;
    record["speaker_id"] = sample.speaker_id;
    record["age"] = sample.age;
    record["embedding"] = sample.embedding;
    out << record.dump() << '\n';
  }
  if (!out) {
    throw Error("save_dataset: write failed for '" + path.string() + "'");
  }
}

double draw_age(Rng& rng, const SyntheticSpec& spec) {
  if (spec.age_distribution == AgeDistribution::kUniform) {
    return static_cast<double>(rng.uniform_int(spec.min_age, spec.max_age));
  }
  // Two rounded normal modes at 30% / 70% of the range; out-of-range draws
  // are rejected so ages always stay inside [min_age, max_age].
  const double range = spec.max_age - spec.min_age;
  const double mode_sigma = 0.12 * range;
  while (true) {
    const double mean = rng.uniform() < 0.55 ? spec.min_age + 0.30 * range
                                             : spec.min_age + 0.70 * range;
    const double drawn = std::round(rng.normal(mean, mode_sigma));
    if (drawn >= spec.min_age && drawn <= spec.max_age) {
      return drawn;
    }
  }
}

}  // namespace

DatasetFormat dataset_format_for(const std::filesystem::path& path) {
  return path.extension() == ".jsonl" ? DatasetFormat::kJsonl : DatasetFormat::kCsv;
}

std::vector<LabeledSample> load_dataset(const std::filesystem::path& path) {
  return load_dataset(path, dataset_format_for(path));
}

std::vector<LabeledSample> load_dataset(const std::filesystem::path& path,
                                        DatasetFormat format) {
  std::vector<LabeledSample> samples = format == DatasetFormat::kCsv
                                           ? load_csv(path)
                                           : load_jsonl(path);
  // CSV dimensionality is pinned by the header; recheck anyway so both
  // loaders share the dataset-level guarantee.
  if (!samples.empty()) {
    const std::size_t dim = samples.front().embedding.size();
    for (const LabeledSample& sample : samples) {
      if (sample.embedding.size() != dim) {
        throw DataFormatError("ragged embedding dimensions in '" + path.string() + "'");
      }
    }
  }
  return samples;
}

void save_dataset(const std::filesystem::path& path,
                  const std::vector<LabeledSample>& samples) {
  save_dataset(path, samples, dataset_format_for(path));
}

void save_dataset(const std::filesystem::path& path,
                  const std::vector<LabeledSample>& samples, DatasetFormat format) {
  if (format == DatasetFormat::kCsv) {
    save_csv(path, samples);
  } else {
    save_jsonl(path, samples);
  }
}

void SyntheticSpec::validate() const {
  if (n_samples < 1) {
    throw InvalidParameterError("SyntheticSpec: n_samples must be >= 1");
  }
  if (dim < 2) {
    throw InvalidParameterError("SyntheticSpec: dim must be >= 2");
  }
  if (min_age < 1 || min_age >= max_age) {
    throw InvalidParameterError("SyntheticSpec: need 1 <= min_age < max_age");
  }
  if (!(noise_sigma >= 0.0)) {
    throw InvalidParameterError("SyntheticSpec: noise_sigma must be >= 0");
  }
}

std::vector<LabeledSample> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();

  // Mixing matrix, ages and noise come from separate derived streams, so
  // datasets that differ only in noise_sigma share W and the age sequence.
  Rng mix_rng(derive_seed(spec.seed, 0));
  Rng age_rng(derive_seed(spec.seed, 1));
  Rng noise_rng(derive_seed(spec.seed, 2));

  std::vector<double> mixing(static_cast<std::size_t>(spec.dim) * kSyntheticFeatureCount);
  for (double& w : mixing) {
    w = mix_rng.normal();
  }

  const double range = spec.max_age - spec.min_age;
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<LabeledSample> samples;
  samples.reserve(static_cast<std::size_t>(spec.n_samples));
  char idbuf[32];
  for (int i = 0; i < spec.n_samples; ++i) {
    LabeledSample sample;
    std::snprintf(idbuf, sizeof(idbuf), "syn%06d", i);
    sample.id = idbuf;
    std::snprintf(idbuf, sizeof(idbuf), "spk%06d", i);
    sample.speaker_id = idbuf;
    sample.age = draw_age(age_rng, spec);

    const double u = (sample.age - spec.min_age) / range;
    const double phi[kSyntheticFeatureCount] = {
        u,
        u * u,
        std::sin(two_pi * u),
        std::cos(two_pi * u),
        std::sin(2.0 * two_pi * u),
        std::cos(2.0 * two_pi * u),
    };

    sample.embedding.resize(static_cast<std::size_t>(spec.dim));
    for (int d = 0; d < spec.dim; ++d) {
      double value = 0.0;
      const double* row = &mixing[static_cast<std::size_t>(d) * kSyntheticFeatureCount];
      for (int f = 0; f < kSyntheticFeatureCount; ++f) {
        value += row[f] * phi[f];
      }
      value += spec.noise_sigma * noise_rng.normal();
      sample.embedding[static_cast<std::size_t>(d)] = value;
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

}  // namespace ldlage
