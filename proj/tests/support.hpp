#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "subjaudit/corpus.hpp"
#include "subjaudit/dense.hpp"
#include "subjaudit/rng.hpp"

namespace testing_support {

/// Fresh, empty directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(SUBJAUDIT_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Corpus with one target class "y"; ids are the positions.
inline subjaudit::LabeledCorpus make_corpus(const std::vector<std::string>& texts,
                                            const std::vector<std::string>& labels,
                                            const std::string& target_class = "y") {
  std::vector<subjaudit::Document> docs;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    docs.emplace_back(std::to_string(i), texts[i], std::map<std::string, std::string>{{target_class, labels[i]}});
  }
  return subjaudit::LabeledCorpus(std::move(docs), {target_class});
}

/// Two isotropic Gaussian blobs of `per_blob` points each in `dim`
/// dimensions, centered at -offset and +offset on every axis.
inline subjaudit::DenseMatrix two_blobs(std::size_t per_blob, std::size_t dim, double offset, std::uint64_t seed,
                                        std::vector<std::string>* labels = nullptr) {
  subjaudit::Rng rng(seed);
  subjaudit::DenseMatrix X(2 * per_blob, dim);
  for (std::size_t i = 0; i < X.rows; ++i) {
    const double center = i < per_blob ? -offset : offset;
    for (std::size_t d = 0; d < dim; ++d) X(i, d) = center + rng.normal();
    if (labels) labels->push_back(i < per_blob ? "a" : "b");
  }
  return X;
}

}  // namespace testing_support
