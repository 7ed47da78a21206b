#include "subjaudit/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"
#include "subjaudit/error.hpp"
#include "subjaudit/rng.hpp"

namespace subjaudit {

namespace {

using Json = nlohmann::json;

std::string trim(std::string_view s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

// One record: field name -> value; absent keys mean the field is missing.
using Record = std::map<std::string, std::string, std::less<>>;

std::optional<std::string> json_scalar(const Json& value) {
  if (value.is_null()) return std::nullopt;
  if (value.is_string()) return value.get<std::string>();
  return value.dump();
}

std::vector<Record> parse_jsonl(const std::string& content, const std::filesystem::path& path) {
  std::vector<Record> records;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": record is not a JSON object");
    }
    Record rec;
    for (const auto& [key, value] : obj.items()) {
      if (auto s = json_scalar(value)) rec.emplace(key, std::move(*s));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<Record> parse_csv(const std::string& content, const std::filesystem::path& path) {
  auto rows = detail::parse_csv_rows(content, path);
  if (rows.empty()) return {};
  const auto header = rows.front();
  std::vector<Record> records;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw IoError(path.string() + ": CSV record " + std::to_string(r - 1) + " has " +
                    std::to_string(rows[r].size()) + " fields, header has " +
                    std::to_string(header.size()));
    }
    Record rec;
    for (std::size_t c = 0; c < header.size(); ++c) rec.emplace(header[c], std::move(rows[r][c]));
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

std::size_t utf8_length(std::string_view text) {
  return static_cast<std::size_t>(std::count_if(text.begin(), text.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

std::size_t word_count(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (const char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

Document::Document(std::string id_, std::string text_, std::map<std::string, std::string> labels_)
    : id(std::move(id_)), text(std::move(text_)), labels(std::move(labels_)),
      char_count(utf8_length(text)) {}

const std::string& Document::label(const std::string& target_class) const {
  const auto it = labels.find(target_class);
  if (it == labels.end()) {
    throw InvalidArgument("document '" + id + "' has no label for class '" + target_class + "'");
  }
  return it->second;
}

LabeledCorpus::LabeledCorpus(std::vector<Document> documents,
                             std::vector<std::string> target_classes)
    : documents_(std::move(documents)), target_classes_(std::move(target_classes)) {
  if (target_classes_.empty()) throw InvalidArgument("corpus needs at least one target class");
  std::sort(target_classes_.begin(), target_classes_.end());
  target_classes_.erase(std::unique(target_classes_.begin(), target_classes_.end()),
                        target_classes_.end());
  for (const auto& cls : target_classes_) {
    std::set<std::string> seen;
    for (const auto& doc : documents_) seen.insert(doc.label(cls));
    label_sets_[cls] = {seen.begin(), seen.end()};
  }
}

bool LabeledCorpus::has_class(const std::string& target_class) const {
  return label_sets_.contains(target_class);
}

void LabeledCorpus::require_class(const std::string& target_class) const {
  if (!has_class(target_class)) throw InvalidArgument("unknown target class '" + target_class + "'");
}

const std::vector<std::string>& LabeledCorpus::label_set(const std::string& target_class) const {
  require_class(target_class);
  return label_sets_.at(target_class);
}

std::vector<std::string> LabeledCorpus::labels(const std::string& target_class) const {
  require_class(target_class);
  std::vector<std::string> out;
  out.reserve(documents_.size());
  for (const auto& doc : documents_) out.push_back(doc.labels.at(target_class));
  return out;
}

std::vector<std::string> LabeledCorpus::texts() const {
  std::vector<std::string> out;
  out.reserve(documents_.size());
  for (const auto& doc : documents_) out.push_back(doc.text);
  return out;
}

LabeledCorpus LabeledCorpus::subset(const std::vector<std::size_t>& indices) const {
  std::vector<Document> docs;
  docs.reserve(indices.size());
  for (const auto i : indices) docs.push_back(documents_.at(i));
  return LabeledCorpus(std::move(docs), target_classes_);
}

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::jsonl;
  if (name == "csv") return CorpusFormat::csv;
  throw InvalidArgument("unknown corpus format '" + std::string(name) + "' (expected jsonl or csv)");
}

OnMissing parse_on_missing(std::string_view name) {
  if (name == "skip") return OnMissing::skip;
  if (name == "error") return OnMissing::error;
  throw InvalidArgument("unknown on_missing policy '" + std::string(name) + "' (expected skip or error)");
}

LabeledCorpus load_corpus(const LoadOptions& options) {
  if (options.text_fields.empty()) throw InvalidArgument("load_corpus: no text fields configured");
  if (options.class_fields.empty()) throw InvalidArgument("load_corpus: no class fields configured");

  const auto content = detail::read_text_file(options.path);
  const auto records = options.format == CorpusFormat::jsonl ? parse_jsonl(content, options.path)
                                                             : parse_csv(content, options.path);

  std::vector<std::string> required = options.text_fields;
  required.insert(required.end(), options.class_fields.begin(), options.class_fields.end());
  if (options.id_field) required.push_back(*options.id_field);

  std::vector<Document> docs;
  docs.reserve(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    const auto missing = std::find_if(required.begin(), required.end(),
                                      [&](const std::string& f) { return !rec.contains(f); });
    if (missing != required.end()) {
      if (options.on_missing == OnMissing::skip) continue;
      throw IoError(options.path.string() + ": record " + std::to_string(r) +
                    " is missing field '" + *missing + "'");
    }
    std::string text;
    for (std::size_t f = 0; f < options.text_fields.size(); ++f) {
      if (f > 0) text.push_back('\n');
      text += rec.find(options.text_fields[f])->second;
    }
    std::map<std::string, std::string> labels;
    for (const auto& cls : options.class_fields) labels.emplace(cls, trim(rec.find(cls)->second));
    std::string id = options.id_field ? rec.find(*options.id_field)->second : std::to_string(r);
    docs.emplace_back(std::move(id), std::move(text), std::move(labels));
  }
  if (docs.empty()) throw IoError(options.path.string() + ": no records accepted");
  return LabeledCorpus(std::move(docs), options.class_fields);
}

void write_jsonl(const LabeledCorpus& corpus, const std::filesystem::path& path,
                 const std::string& text_field, const std::string& id_field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file: " + path.string());
  for (const auto& doc : corpus.documents()) {
    Json obj;
    obj[id_field] = doc.id;
    obj[text_field] = doc.text;
    for (const auto& [cls, label] : doc.labels) obj[cls] = label;
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("failed writing corpus file: " + path.string());
}

LabeledCorpus filter_by_char_length(const LabeledCorpus& corpus, std::size_t min_chars,
                                    std::size_t max_chars) {
  if (min_chars > max_chars) throw InvalidArgument("filter_by_char_length: min_chars > max_chars");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto n = corpus[i].char_count;
    if (n >= min_chars && n <= max_chars) keep.push_back(i);
  }
  return corpus.subset(keep);
}

LabeledCorpus filter_by_length_zscore(const LabeledCorpus& corpus, double z_max) {
  if (corpus.empty()) throw InvalidArgument("filter_by_length_zscore: empty corpus");
  std::vector<double> counts;
  counts.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) counts.push_back(static_cast<double>(word_count(doc.text)));

  double mean = 0.0;
  for (const double c : counts) mean += c;
  mean /= static_cast<double>(counts.size());
  double var = 0.0;
  for (const double c : counts) var += (c - mean) * (c - mean);
  const double sigma = std::sqrt(var / static_cast<double>(counts.size()));
  if (sigma == 0.0) return corpus;

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if ((counts[i] - mean) / sigma < z_max) keep.push_back(i);
  }
  return corpus.subset(keep);
}

SplitPair stratified_split(const LabeledCorpus& corpus, const std::string& target_class,
                           double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("stratified_split: train_fraction must lie in (0, 1)");
  }
  const auto& label_set = corpus.label_set(target_class);
  const auto labels = corpus.labels(target_class);

  std::vector<std::vector<std::size_t>> by_label(label_set.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto pos = std::lower_bound(label_set.begin(), label_set.end(), labels[i]) - label_set.begin();
    by_label[static_cast<std::size_t>(pos)].push_back(i);
  }

  SplitPair split;
  split.seed = seed;
  for (std::size_t l = 0; l < by_label.size(); ++l) {
    auto& members = by_label[l];
    if (members.size() < 2) {
      throw InvalidArgument("stratified_split: label '" + label_set[l] + "' has fewer than 2 documents");
    }
    Rng rng(mix_seed(seed, l));
    rng.shuffle(std::span<std::size_t>(members));
    const auto n = members.size();
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    split.train_indices.insert(split.train_indices.end(), members.begin(), members.begin() + n_train);
    split.test_indices.insert(split.test_indices.end(), members.begin() + n_train, members.end());
  }
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  split.train = corpus.subset(split.train_indices);
  split.test = corpus.subset(split.test_indices);
  return split;
}

std::vector<LabelShare> label_distribution(const LabeledCorpus& corpus,
                                           const std::string& target_class) {
  const auto& label_set = corpus.label_set(target_class);
  std::map<std::string, std::size_t> counts;
  for (const auto& l : label_set) counts[l] = 0;
  for (const auto& doc : corpus.documents()) ++counts[doc.labels.at(target_class)];

  std::vector<LabelShare> out;
  const double total = static_cast<double>(corpus.size());
  for (const auto& [label, count] : counts) {
    out.push_back({label, count, total > 0 ? 100.0 * static_cast<double>(count) / total : 0.0});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const LabelShare& a, const LabelShare& b) { return a.count > b.count; });
  return out;
}

}  // namespace subjaudit
