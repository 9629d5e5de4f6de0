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

#ifndef LDLAGE_DATA_HPP_
#define LDLAGE_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ldlage {

/// One utterance (or clip): a precomputed embedding with its age label.
/// speaker_id may be empty when the corpus carries no identities.
struct LabeledSample {
  std::string id;
  std::string speaker_id;
  double age = 0.0;  // years, > 0
  std::vector<double> embedding;
};

enum class DatasetFormat {
  kCsv,    // delimited table: header id,speaker_id,age,f0,...,f{D-1}
  kJsonl,  // one JSON record per line with the same named fields
};

/// Picks the format from the file extension (.csv / .jsonl), defaulting to
/// CSV for anything else.
DatasetFormat dataset_format_for(const std::filesystem::path& path);

/// Loads a dataset, preserving row order. Raises DataFormatError with a
/// 1-based line number for malformed rows (missing or non-numeric age) and a
/// dataset-level DataFormatError when embedding dimensions are ragged.
std::vector<LabeledSample> load_dataset(const std::filesystem::path& path);
std::vector<LabeledSample> load_dataset(const std::filesystem::path& path,
                                        DatasetFormat format);

/// Writes a dataset so that load_dataset(save_dataset(x)) == x field for
/// field (reals are written so they parse back bitwise).
void save_dataset(const std::filesystem::path& path,
                  const std::vector<LabeledSample>& samples);
void save_dataset(const std::filesystem::path& path,
                  const std::vector<LabeledSample>& samples, DatasetFormat format);

enum class AgeDistribution {
  kUniform,  // integer ages uniform on [min_age, max_age]
  kTwoMode,  // mixture of two rounded normals, mimicking call-centre corpora
};

/// Recipe for an age-correlated synthetic dataset. The generative law (see
/// generate_synthetic) is fixed and documented so results stay auditable.
struct SyntheticSpec {
  int n_samples = 2000;
  int dim = 32;
  int min_age = 18;
  int max_age = 80;
  double noise_sigma = 0.5;
  std::uint64_t seed = 0;
  AgeDistribution age_distribution = AgeDistribution::kUniform;

  void validate() const;
};

/// Number of smooth age features the generator mixes into the embedding.
inline constexpr int kSyntheticFeatureCount = 6;

/// Draws integer ages from the requested distribution, then emits
///   embedding = W * phi(u) + noise_sigma * eps,
/// where u = (age - min_age) / (max_age - min_age),
/// phi(u) = [u, u^2, sin 2*pi*u, cos 2*pi*u, sin 4*pi*u, cos 4*pi*u],
/// W is a dim x 6 standard-normal mixing matrix drawn once per seed and
/// eps is per-component standard normal. Deterministic given the seed. With
/// noise_sigma = 0 and dim >= 6 the age is an exact linear function of the
/// embedding, so a least-squares probe recovers it.
std::vector<LabeledSample> generate_synthetic(const SyntheticSpec& spec);

}  // namespace ldlage

#endif  // LDLAGE_DATA_HPP_
