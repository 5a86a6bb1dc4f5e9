// Copyright 2026 The phrasereg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "phrasereg/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <fmt/core.h>
#include <json.hpp>

#include "phrasereg/porter_stemmer.hpp"
#include "phrasereg/random.hpp"

namespace phrasereg {
namespace {

using Json = nlohmann::ordered_json;

void check_stemming(const ModelState& model, const Corpus& corpus) {
  if (model.stemmed != corpus.stemmed()) {
    throw Error(ErrorKind::kStemMismatch,
                model.stemmed ? "model was fit on a stemmed corpus but the "
                                "corpus is not stemmed"
                              : "model was fit on an unstemmed corpus but the "
                                "corpus is stemmed");
  }
}

SummaryRow count_row(const Phrase& phrase, const PostingIndex& index,
                     const Labeling& labeling) {
  SummaryRow row;
  row.phrase = phrase.display();
  const OccurrenceList occ = occurrences(phrase, index);
  occ.for_each_document([&](std::uint32_t doc, std::uint32_t count) {
    row.num_phrase += count;
    ++row.num_reports;
    if (labeling[doc] > 0) ++row.num_tag;
  });
  if (row.num_reports > 0) {
    row.pct_tag = 100.0 * static_cast<double>(row.num_tag) /
                  static_cast<double>(row.num_reports);
  }
  if (labeling.positive_count() > 0) {
    row.pct_phrase = 100.0 * static_cast<double>(row.num_tag) /
                     static_cast<double>(labeling.positive_count());
  }
  return row;
}

// Feature positions of a model in summary order.
std::vector<std::size_t> summary_order(const ModelState& model) {
  std::vector<std::size_t> order(model.features.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ba = std::abs(model.features[a].beta);
    const double bb = std::abs(model.features[b].beta);
    if (ba != bb) return ba > bb;
    return model.features[a].phrase < model.features[b].phrase;
  });
  return order;
}

std::string number(double v) { return fmt::format("{}", v); }

std::string percent(double v) { return fmt::format("{:.0f}", v); }

std::string text_table(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == 0) {
        line += fmt::format("{:<{}}", cells[c], width[c]);
      } else {
        line += fmt::format("  {:>{}}", cells[c], width[c]);
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    out += '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return out;
}

std::string tsv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out += '\t';
      out += cells[c];
    }
    out += '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return out;
}

std::string json_lines(const std::vector<Json>& records) {
  std::string out;
  for (const Json& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

}  // namespace

std::vector<SummaryRow> summary_table(const ModelState& model,
                                      const Corpus& corpus,
                                      const Labeling& labeling) {
  check_stemming(model, corpus);
  const PostingIndex index = PostingIndex::build(corpus, labeling, {});
  std::vector<SummaryRow> rows;
  for (std::size_t j : summary_order(model)) {
    SummaryRow row = count_row(model.features[j].phrase, index, labeling);
    row.beta = model.features[j].beta;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SummaryRow> phrase_count_table(const std::vector<Phrase>& phrases,
                                           const Corpus& corpus,
                                           const Labeling& labeling) {
  const PostingIndex index = PostingIndex::build(corpus, labeling, {});
  std::vector<SummaryRow> rows;
  rows.reserve(phrases.size());
  for (const Phrase& p : phrases) rows.push_back(count_row(p, index, labeling));
  return rows;
}

ListTable list_table(
    const std::vector<std::pair<std::string, ModelState>>& runs,
    const Corpus& corpus, const Labeling& labeling) {
  ListTable table;
  std::vector<Phrase> phrases;
  std::map<Phrase, std::size_t> row_of;
  for (const auto& [label, model] : runs) {
    check_stemming(model, corpus);
    for (std::uint32_t doc : model.rows) {
      if (doc >= corpus.size()) {
        throw Error(ErrorKind::kCorpusMismatch,
                    "run '" + label + "' was fit on a different corpus");
      }
    }
    table.run_labels.push_back(label);
    for (std::size_t j : summary_order(model)) {
      const Phrase& p = model.features[j].phrase;
      if (row_of.emplace(p, phrases.size()).second) phrases.push_back(p);
    }
  }
  const PostingIndex index = PostingIndex::build(corpus, labeling, {});
  for (const Phrase& p : phrases) {
    ListTable::Row row;
    row.phrase = p.display();
    row.stats = count_row(p, index, labeling);
    row.betas.assign(runs.size(), std::nullopt);
    table.rows.push_back(std::move(row));
  }
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const SelectedPhrase& f : runs[r].second.features) {
      table.rows[row_of.at(f.phrase)].betas[r] = f.beta;
    }
  }
  return table;
}

Phrase normalize_phrase(const Phrase& phrase, bool stemmed) {
  std::vector<std::optional<std::string>> elements;
  for (std::size_t i = 0; i < phrase.size(); ++i) {
    if (phrase.is_gap(i)) {
      elements.emplace_back(std::nullopt);
      continue;
    }
    const std::string& raw = phrase.token(i);
    if (stemmed && raw.size() > 1 && raw.back() == kStemMarker) {
      elements.emplace_back(raw);
      continue;
    }
    const std::vector<std::string> tokens = tokenize(clean_text(raw));
    if (tokens.size() != 1) {
      throw Error(ErrorKind::kInvalidArgument,
                  fmt::format("phrase element '{}' does not clean to a single "
                              "token",
                              raw));
    }
    elements.emplace_back(stemmed ? stem_token(tokens[0]) : tokens[0]);
  }
  return Phrase(std::move(elements));
}

std::vector<Fragment> sample_fragments(const Phrase& phrase,
                                       const Corpus& corpus,
                                       const Labeling& labeling, int n,
                                       int window, std::uint64_t seed) {
  if (n < 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "number of fragments must be at least 1");
  }
  if (window < 0) {
    throw Error(ErrorKind::kInvalidArgument, "window must be non-negative");
  }
  const Phrase target = normalize_phrase(phrase, corpus.stemmed());
  const PostingIndex index = labeling.size() == 0
                                 ? PostingIndex::build(corpus)
                                 : PostingIndex::build(corpus, labeling, {});
  const OccurrenceList occ = occurrences(target, index);
  std::vector<Occurrence> picked(occ.entries().begin(), occ.entries().end());
  const auto wanted = static_cast<std::size_t>(n);
  if (picked.size() > wanted) {
    // Partial Fisher-Yates: the first `wanted` slots become the sample.
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < wanted; ++i) {
      const std::size_t j = i + uniform_below(rng, picked.size() - i);
      std::swap(picked[i], picked[j]);
    }
    picked.resize(wanted);
    std::sort(picked.begin(), picked.end(),
              [](const Occurrence& a, const Occurrence& b) {
                return std::tie(a.doc, a.end) < std::tie(b.doc, b.end);
              });
  }
  std::vector<Fragment> fragments;
  const std::size_t length = target.size();
  for (const Occurrence& o : picked) {
    const auto& surface = corpus[o.doc].surface;
    const std::size_t first = o.end + 1 - length;
    const std::size_t from =
        first >= static_cast<std::size_t>(window) ? first - window : 0;
    const std::size_t to =
        std::min(surface.size(), o.end + 1 + static_cast<std::size_t>(window));
    std::string text;
    for (std::size_t p = from; p < to; ++p) {
      if (p > from) text += ' ';
      if (p == first) text += "**";
      text += surface[p];
      if (p == o.end) text += "**";
    }
    Fragment f;
    f.doc = o.doc;
    f.label = labeling.size() == 0 ? 0 : labeling[o.doc];
    f.text = std::move(text);
    fragments.push_back(std::move(f));
  }
  return fragments;
}

std::vector<double> predict(const ModelState& model, const PostingIndex& index) {
  std::vector<double> scores(index.document_count(), model.intercept);
  const bool binary = model.config.rescale.binary_features;
  for (const SelectedPhrase& f : model.features) {
    const auto ids = index.resolve(f.phrase);
    if (!ids) continue;
    occurrences(*ids, index)
        .for_each_document([&](std::uint32_t doc, std::uint32_t count) {
          const double c = binary ? 1.0 : static_cast<double>(count);
          scores[doc] += f.beta * c / f.z;
        });
  }
  return scores;
}

std::vector<double> predict(const ModelState& model, const Corpus& corpus) {
  check_stemming(model, corpus);
  return predict(model, PostingIndex::build(corpus));
}

ClassificationMetrics evaluate(const std::vector<double>& scores,
                               std::span<const int> truth) {
  if (scores.size() != truth.size()) {
    throw Error(ErrorKind::kLengthMismatch,
                fmt::format("{} scores for {} labels", scores.size(),
                            truth.size()));
  }
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<std::pair<double, int>> ranked;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (truth[i] == 0) continue;
    const bool predicted = scores[i] > 0.0;
    const bool actual = truth[i] > 0;
    tp += predicted && actual;
    fp += predicted && !actual;
    fn += !predicted && actual;
    ranked.emplace_back(scores[i], truth[i]);
  }
  const std::size_t positives = tp + fn;
  const std::size_t negatives = ranked.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorKind::kSingleClass,
                "evaluation needs both positive and negative documents");
  }
  ClassificationMetrics m;
  m.recall = static_cast<double>(tp) / static_cast<double>(positives);
  if (tp + fp > 0) {
    m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    m.f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  }
  // Mann-Whitney statistic with midranks for ties.
  std::sort(ranked.begin(), ranked.end());
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < ranked.size()) {
    std::size_t j = i;
    while (j < ranked.size() && ranked[j].first == ranked[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (ranked[k].second > 0) positive_rank_sum += midrank;
    }
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double q = static_cast<double>(negatives);
  m.auc = (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * q);
  return m;
}

DesignMatrix design_matrix(const ModelState& model, const Corpus& corpus) {
  check_stemming(model, corpus);
  const PostingIndex index = PostingIndex::build(corpus);
  const bool binary = model.config.rescale.binary_features;
  const std::vector<std::size_t> order = summary_order(model);
  DesignMatrix matrix;
  matrix.columns.push_back("(intercept)");
  matrix.rows.assign(corpus.size(), std::vector<double>(order.size() + 1, 0.0));
  for (auto& row : matrix.rows) row[0] = 1.0;
  for (std::size_t c = 0; c < order.size(); ++c) {
    const SelectedPhrase& f = model.features[order[c]];
    matrix.columns.push_back(f.phrase.display());
    const auto ids = index.resolve(f.phrase);
    if (!ids) continue;
    occurrences(*ids, index)
        .for_each_document([&](std::uint32_t doc, std::uint32_t count) {
          const double v = binary ? 1.0 : static_cast<double>(count);
          matrix.rows[doc][c + 1] = v / f.z;
        });
  }
  return matrix;
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "text") return OutputFormat::kText;
  if (name == "tsv") return OutputFormat::kTsv;
  if (name == "json-lines") return OutputFormat::kJsonLines;
  throw Error(ErrorKind::kInvalidArgument,
              fmt::format("unknown output format '{}'", name));
}

std::string format_summary(const std::vector<SummaryRow>& rows,
                           OutputFormat format) {
  if (format == OutputFormat::kJsonLines) {
    std::vector<Json> records;
    for (const SummaryRow& r : rows) {
      Json j;
      j["phrase"] = r.phrase;
      j["beta"] = r.beta ? Json(*r.beta) : Json(nullptr);
      j["num_phrase"] = r.num_phrase;
      j["num_reports"] = r.num_reports;
      j["num_tag"] = r.num_tag;
      j["pct_tag"] = r.pct_tag;
      j["pct_phrase"] = r.pct_phrase;
      records.push_back(std::move(j));
    }
    return json_lines(records);
  }
  const bool text = format == OutputFormat::kText;
  std::vector<std::vector<std::string>> cells;
  for (const SummaryRow& r : rows) {
    std::string beta;
    if (r.beta) beta = text ? fmt::format("{:.2f}", *r.beta) : number(*r.beta);
    cells.push_back({r.phrase, beta, std::to_string(r.num_phrase),
                     std::to_string(r.num_reports), std::to_string(r.num_tag),
                     text ? percent(r.pct_tag) : number(r.pct_tag),
                     text ? percent(r.pct_phrase) : number(r.pct_phrase)});
  }
  if (text) {
    return text_table({"phrase", "beta", "#phrase", "#reports", "#tag", "%tag",
                       "%phrase"},
                      cells);
  }
  return tsv_table({"phrase", "beta", "num_phrase", "num_reports", "num_tag",
                    "pct_tag", "pct_phrase"},
                   cells);
}

std::string format_list_table(const ListTable& table, OutputFormat format) {
  if (format == OutputFormat::kJsonLines) {
    std::vector<Json> records;
    for (const ListTable::Row& r : table.rows) {
      Json j;
      j["phrase"] = r.phrase;
      Json betas = Json::object();
      for (std::size_t k = 0; k < table.run_labels.size(); ++k) {
        betas[table.run_labels[k]] =
            r.betas[k] ? Json(*r.betas[k]) : Json(nullptr);
      }
      j["beta"] = std::move(betas);
      j["num_reports"] = r.stats.num_reports;
      j["num_tag"] = r.stats.num_tag;
      j["pct_tag"] = r.stats.pct_tag;
      j["pct_phrase"] = r.stats.pct_phrase;
      records.push_back(std::move(j));
    }
    return json_lines(records);
  }
  const bool text = format == OutputFormat::kText;
  std::vector<std::string> header{"phrase"};
  header.insert(header.end(), table.run_labels.begin(), table.run_labels.end());
  for (const char* h : {"num_reports", "num_tag", "pct_tag", "pct_phrase"}) {
    header.push_back(h);
  }
  std::vector<std::vector<std::string>> cells;
  for (const ListTable::Row& r : table.rows) {
    std::vector<std::string> row{r.phrase};
    for (const auto& b : r.betas) {
      row.push_back(!b ? "" : text ? fmt::format("{:.2f}", *b) : number(*b));
    }
    row.push_back(std::to_string(r.stats.num_reports));
    row.push_back(std::to_string(r.stats.num_tag));
    row.push_back(text ? percent(r.stats.pct_tag) : number(r.stats.pct_tag));
    row.push_back(text ? percent(r.stats.pct_phrase)
                       : number(r.stats.pct_phrase));
    cells.push_back(std::move(row));
  }
  return text ? text_table(header, cells) : tsv_table(header, cells);
}

std::string format_fragments(const std::vector<Fragment>& fragments,
                             OutputFormat format) {
  std::string out;
  for (const Fragment& f : fragments) {
    switch (format) {
      case OutputFormat::kText:
        out += fmt::format("[{}] {:+d}  {}\n", f.doc, f.label, f.text);
        break;
      case OutputFormat::kTsv:
        out += fmt::format("{}\t{}\t{}\n", f.doc, f.label, f.text);
        break;
      case OutputFormat::kJsonLines: {
        Json j;
        j["doc"] = f.doc;
        j["label"] = f.label;
        j["text"] = f.text;
        out += j.dump() + "\n";
        break;
      }
    }
  }
  if (format == OutputFormat::kTsv) out = "doc\tlabel\ttext\n" + out;
  return out;
}

std::string format_threshold_report(const ThresholdReport& report,
                                     OutputFormat format) {
  const std::vector<double> sorted = report.sorted_permutations();
  std::string perms;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (k > 0) perms += ',';
    perms += number(sorted[k]);
  }
  switch (format) {
    case OutputFormat::kText:
      return fmt::format(
          "c_obs    {}\np_value  {}\nseed     {}\nR        {}\nc_perm   {}\n",
          number(report.c_obs), number(report.p_value), report.seed,
          report.replicates(), perms);
    case OutputFormat::kTsv:
      return fmt::format("c_obs\tp_value\tseed\tR\tc_perm\n{}\t{}\t{}\t{}\t{}\n",
                         number(report.c_obs), number(report.p_value),
                         report.seed, report.replicates(), perms);
    case OutputFormat::kJsonLines: {
      Json j;
      j["c_obs"] = report.c_obs;
      j["c_perm"] = sorted;
      j["p_value"] = report.p_value;
      j["seed"] = report.seed;
      j["R"] = report.replicates();
      return j.dump() + "\n";
    }
  }
  return {};
}

std::string format_cross_validation(const CrossValidationReport& report,
                                    OutputFormat format) {
  if (format == OutputFormat::kJsonLines) {
    std::vector<Json> records;
    for (std::size_t g = 0; g < report.C_grid.size(); ++g) {
      Json j;
      j["C"] = report.C_grid[g];
      j["mse"] = report.mse[g];
      j["best"] = report.C_grid[g] == report.best_C;
      records.push_back(std::move(j));
    }
    return json_lines(records);
  }
  std::vector<std::vector<std::string>> cells;
  for (std::size_t g = 0; g < report.C_grid.size(); ++g) {
    cells.push_back({number(report.C_grid[g]), number(report.mse[g]),
                     report.C_grid[g] == report.best_C ? "*" : ""});
  }
  if (format == OutputFormat::kTsv) {
    return tsv_table({"C", "mse", "best"}, cells);
  }
  return text_table({"C", "mse", "best"}, cells);
}

std::string format_predictions(const std::vector<double>& scores,
                               OutputFormat format) {
  std::vector<std::vector<std::string>> cells;
  std::vector<Json> records;
  for (std::size_t d = 0; d < scores.size(); ++d) {
    const int cls = scores[d] > 0.0 ? 1 : -1;
    if (format == OutputFormat::kJsonLines) {
      Json j;
      j["doc"] = d;
      j["score"] = scores[d];
      j["class"] = cls;
      records.push_back(std::move(j));
    } else {
      const std::string score = format == OutputFormat::kText
                                    ? fmt::format("{:.4f}", scores[d])
                                    : number(scores[d]);
      cells.push_back({std::to_string(d), score, fmt::format("{:+d}", cls)});
    }
  }
  switch (format) {
    case OutputFormat::kText:
      return text_table({"doc", "score", "class"}, cells);
    case OutputFormat::kTsv:
      return tsv_table({"doc", "score", "class"}, cells);
    case OutputFormat::kJsonLines:
      return json_lines(records);
  }
  return {};
}

std::string format_metrics(const ClassificationMetrics& metrics,
                           OutputFormat format) {
  const std::string f1 = metrics.f1 ? number(*metrics.f1) : "NA";
  switch (format) {
    case OutputFormat::kText:
      return fmt::format("precision  {}\nrecall     {}\nf1         {}\nauc        {}\n",
                         number(metrics.precision), number(metrics.recall), f1,
                         number(metrics.auc));
    case OutputFormat::kTsv:
      return fmt::format("precision\trecall\tf1\tauc\n{}\t{}\t{}\t{}\n",
                         number(metrics.precision), number(metrics.recall), f1,
                         number(metrics.auc));
    case OutputFormat::kJsonLines: {
      Json j;
      j["precision"] = metrics.precision;
      j["recall"] = metrics.recall;
      j["f1"] = metrics.f1 ? Json(*metrics.f1) : Json(nullptr);
      j["auc"] = metrics.auc;
      return j.dump() + "\n";
    }
  }
  return {};
}

std::vector<Phrase> parse_phrase_list(const std::vector<std::string>& lines) {
  std::vector<Phrase> phrases;
  for (const std::string& line : lines) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '{') {
      Json j;
      try {
        j = Json::parse(line);
      } catch (const Json::exception& e) {
        throw Error(ErrorKind::kInvalidValue,
                    fmt::format("malformed phrase record: {}", e.what()));
      }
      if (!j.contains("phrase") || !j["phrase"].is_string()) {
        throw Error(ErrorKind::kInvalidValue,
                    "phrase record has no \"phrase\" string");
      }
      phrases.push_back(Phrase::parse(j["phrase"].get<std::string>()));
    } else {
      std::string trimmed = line.substr(first);
      while (!trimmed.empty() &&
             (trimmed.back() == ' ' || trimmed.back() == '\t')) {
        trimmed.pop_back();
      }
      phrases.push_back(Phrase::parse(trimmed));
    }
  }
  return phrases;
}

}  // namespace phrasereg
