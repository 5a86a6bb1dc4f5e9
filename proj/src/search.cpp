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

#include "phrasereg/search.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <deque>
#include <ostream>
#include <thread>

#include <fmt/core.h>
#include <fmt/ostream.h>

namespace phrasereg {
namespace {

constexpr double kBoundSlack = 1e-9;
constexpr double kEvictionThreshold = 1e-12;
constexpr double kLineSearchTolerance = 1e-10;
constexpr double kMaxStep = 1e12;
constexpr int kMaxBisections = 200;

std::uint64_t magnitude_key(double magnitude) {
  if (!(magnitude > 0.0)) return 0;
  return std::bit_cast<std::uint64_t>(magnitude) & ~((std::uint64_t{1} << 20) - 1);
}

// Accumulates a per-class r-norm of the weights.
class ClassNorm {
 public:
  explicit ClassNorm(NormOrder r) : r_(r) {}

  void add(double w) {
    if (r_.is_infinite()) {
      acc_ = std::max(acc_, w);
    } else if (r_.value() == 1.0) {
      acc_ += w;
    } else if (r_.value() == 2.0) {
      acc_ += w * w;
    } else {
      acc_ += std::pow(w, r_.value());
    }
  }

  double value() const {
    if (r_.is_infinite() || r_.value() == 1.0) return acc_;
    if (r_.value() == 2.0) return std::sqrt(acc_);
    return std::pow(acc_, 1.0 / r_.value());
  }

 private:
  NormOrder r_;
  double acc_ = 0.0;
};

double finish_bound(double positive, double negative,
                    const PenaltyConfig& penalty) {
  const double side =
      penalty.positive_only ? positive : std::max(positive, negative);
  return std::max(0.0, side - penalty.l1_weight());
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned n = requested == 0 ? std::thread::hardware_concurrency() : requested;
  n = std::max(1u, n);
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

}  // namespace

void validate(const FitConfig& config) {
  const PenaltyConfig& p = config.penalty;
  const SearchConfig& s = config.search;
  auto fail = [](const std::string& message) {
    throw Error(ErrorKind::kInvalidArgument, message);
  };
  if (!(p.C >= 0.0) || !std::isfinite(p.C)) fail("C must be non-negative");
  if (!(p.elastic_a > 0.0 && p.elastic_a <= 1.0)) {
    fail("elastic mixing weight must lie in (0, 1]");
  }
  if (s.max_iter < 1) fail("max-iter must be positive");
  if (!(s.convergence_threshold > 0.0)) {
    fail("convergence threshold must be positive");
  }
  if (s.min_support < 1) fail("min-support must be positive");
  if (s.min_pattern < 1) fail("min-pattern must be positive");
  if (s.max_pattern < s.min_pattern) {
    fail("max-pattern must be at least min-pattern");
  }
  if (s.gap < 0) fail("gap must be non-negative");
}

const SelectedPhrase* ModelState::find(const Phrase& phrase) const {
  for (const SelectedPhrase& f : features) {
    if (f.phrase == phrase) return &f;
  }
  return nullptr;
}

bool ranks_before(const Candidate& a, const Candidate& b) {
  const std::uint64_t ka = magnitude_key(a.magnitude);
  const std::uint64_t kb = magnitude_key(b.magnitude);
  if (ka != kb) return ka > kb;
  return canonical_less(a.phrase, b.phrase);
}

bool can_prune(double bound, std::size_t node_length,
               const std::optional<Candidate>& best) {
  const double padded = bound * (1.0 + kBoundSlack);
  if (padded <= kMinDescent) return true;
  if (!best) return false;
  const std::uint64_t kb = magnitude_key(padded);
  const std::uint64_t kbest = magnitude_key(best->magnitude);
  // Every phrase below the node is longer than it, so on an exact tie a best
  // candidate no longer than the node still wins.
  return kb < kbest || (kb == kbest && best->phrase.size() <= node_length);
}

double prune_bound(std::span<const std::uint32_t> rows,
                   std::span<const double> counts,
                   std::span<const double> margins,
                   std::span<const std::int8_t> y, LossKind kind,
                   const RescaleConfig& rescale,
                   const PenaltyConfig& penalty) {
  ClassNorm positive(rescale.no_rescaling ? NormOrder::finite(1.0)
                                          : rescale.q.conjugate());
  ClassNorm negative = positive;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (!(counts[k] > 0)) continue;
    const std::uint32_t i = rows[k];
    double w = -loss_derivative(kind, margins[i]);
    if (rescale.no_rescaling && !rescale.binary_features) w *= counts[k];
    (y[i] > 0 ? positive : negative).add(w);
  }
  return finish_bound(positive.value(), negative.value(), penalty);
}

bool converged(std::span<const double> losses, double threshold) {
  if (losses.size() < 2) return false;
  const double previous = losses[losses.size() - 2];
  const double current = losses.back();
  return (previous - current) / std::max(previous, 1e-12) < threshold;
}

Trainer::Trainer(const PostingIndex& index, const Labeling& labeling,
                 FitConfig config)
    : index_(index), config_(std::move(config)) {
  validate(config_);
  if (labeling.size() != index.document_count()) {
    throw Error(ErrorKind::kCorpusMismatch,
                "labeling length does not match the indexed corpus");
  }
  row_of_doc_.assign(labeling.size(), -1);
  for (std::size_t d = 0; d < labeling.size(); ++d) {
    if (labeling.included(d) != index.included(d)) {
      throw Error(ErrorKind::kCorpusMismatch,
                  "labeling excludes different documents than the index");
    }
    if (!labeling.included(d)) continue;
    row_of_doc_[d] = static_cast<std::int32_t>(y_.size());
    row_docs_.push_back(static_cast<std::uint32_t>(d));
    y_.push_back(static_cast<std::int8_t>(labeling[d]));
  }
  all_rows_.resize(y_.size());
  intercept_effect_.resize(y_.size());
  for (std::size_t i = 0; i < y_.size(); ++i) {
    all_rows_[i] = static_cast<std::uint32_t>(i);
    intercept_effect_[i] = y_[i];
  }
  margins_.assign(y_.size(), 0.0);
  loss_ = data_loss(config_.loss, margins_);
}

double Trainer::coefficient(const PhraseIds& phrase) const {
  auto it = slot_of_.find(phrase);
  return it == slot_of_.end() ? 0.0 : features_[it->second].beta;
}

FeatureColumn Trainer::column_for(const OccurrenceList& occurrences,
                                  double* z) const {
  std::vector<std::uint32_t> rows;
  std::vector<double> counts;
  occurrences.for_each_document([&](std::uint32_t doc, std::uint32_t count) {
    rows.push_back(static_cast<std::uint32_t>(row_of_doc_[doc]));
    counts.push_back(count);
  });
  return rescaled_column(rows, counts, config_.rescale, z);
}

void Trainer::assign(
    double intercept,
    const std::vector<std::pair<PhraseIds, double>>& coefficients) {
  features_.clear();
  slot_of_.clear();
  intercept_ = intercept;
  for (const auto& [phrase, beta] : coefficients) {
    if (beta == 0.0) continue;
    Feature f;
    f.phrase = phrase;
    f.beta = beta;
    f.column = column_for(occurrences(phrase, index_), &f.z);
    slot_of_[phrase] = features_.size();
    features_.push_back(std::move(f));
  }
  std::vector<FeatureColumn> columns;
  std::vector<double> betas;
  for (const Feature& f : features_) {
    columns.push_back(f.column);
    betas.push_back(f.beta);
  }
  margins_ = compute_margins(intercept_, columns, betas, y_);
  loss_ = loss_from_scratch();
}

double Trainer::loss_from_scratch() const {
  std::vector<FeatureColumn> columns;
  std::vector<double> betas;
  for (const Feature& f : features_) {
    columns.push_back(f.column);
    betas.push_back(f.beta);
  }
  const std::vector<double> m = compute_margins(intercept_, columns, betas, y_);
  return data_loss(config_.loss, m) + penalty_value(betas, config_.penalty);
}

Trainer::Evaluation Trainer::evaluate(const OccurrenceList& occurrences,
                                      std::span<const double> weights) const {
  const RescaleConfig& rescale = config_.rescale;
  const bool binary = rescale.binary_features;
  ClassNorm positive(rescale.no_rescaling ? NormOrder::finite(1.0)
                                          : rescale.q.conjugate());
  ClassNorm negative = positive;
  double weighted = 0.0;  // sum_i w_i y_i c_i
  double z_acc = 0.0;
  const double q = rescale.q.value();
  const bool q_inf = rescale.q.is_infinite();
  occurrences.for_each_document([&](std::uint32_t doc, std::uint32_t count) {
    const auto row = static_cast<std::size_t>(row_of_doc_[doc]);
    const double c = binary ? 1.0 : static_cast<double>(count);
    const double w = weights[row];
    weighted += w * y_[row] * c;
    if (q_inf) {
      z_acc = std::max(z_acc, c);
    } else if (q == 1.0) {
      z_acc += c;
    } else if (q == 2.0) {
      z_acc += c * c;
    } else {
      z_acc += std::pow(c, q);
    }
    (y_[row] > 0 ? positive : negative).add(rescale.no_rescaling ? w * c : w);
  });
  double z = 1.0;
  if (!rescale.no_rescaling) {
    if (q_inf || q == 1.0) {
      z = z_acc;
    } else if (q == 2.0) {
      z = std::sqrt(z_acc);
    } else {
      z = std::pow(z_acc, 1.0 / q);
    }
  }
  Evaluation ev;
  // xi' = -w, so the smooth gradient is -sum w y c / z.
  ev.smooth = z > 0 ? -weighted / z : 0.0;
  ev.bound = finish_bound(positive.value(), negative.value(), config_.penalty);
  return ev;
}

double Trainer::at_zero(double smooth) const {
  return descent_magnitude(penalized_subgradient(smooth, 0.0, config_.penalty),
                           0.0, config_.penalty.positive_only);
}

double Trainer::at_zero_magnitude(const OccurrenceList& occurrences) const {
  return at_zero(smooth_gradient_of(occurrences));
}

double Trainer::smooth_gradient_of(const OccurrenceList& occurrences) const {
  if (occurrences.empty()) return 0.0;
  double z = 1.0;
  const FeatureColumn column = column_for(occurrences, &z);
  return smooth_gradient(column, margins_, y_, config_.loss);
}

double Trainer::prune_bound_of(const OccurrenceList& occurrences) const {
  std::vector<std::uint32_t> rows;
  std::vector<double> counts;
  occurrences.for_each_document([&](std::uint32_t doc, std::uint32_t count) {
    rows.push_back(static_cast<std::uint32_t>(row_of_doc_[doc]));
    counts.push_back(count);
  });
  return prune_bound(rows, counts, margins_, y_, config_.loss, config_.rescale,
                     config_.penalty);
}

std::optional<Candidate> Trainer::find_highest_gradient(SearchMode mode) const {
  const SearchConfig& search = config_.search;
  const bool exhaustive = mode == SearchMode::kExhaustive;
  std::vector<double> weights(margins_.size());
  for (std::size_t i = 0; i < margins_.size(); ++i) {
    weights[i] = -loss_derivative(config_.loss, margins_[i]);
  }

  std::optional<Candidate> best;
  auto consider = [](std::optional<Candidate>& current, Candidate&& c) {
    if (c.magnitude <= kMinDescent) return;
    if (!current || ranks_before(c, *current)) current = std::move(c);
  };

  for (const Feature& f : features_) {
    const double smooth = smooth_gradient(f.column, margins_, y_, config_.loss);
    Candidate c;
    c.phrase = f.phrase;
    c.in_model = true;
    c.magnitude = descent_magnitude(
        penalized_subgradient(smooth, f.beta, config_.penalty), f.beta,
        config_.penalty.positive_only);
    consider(best, std::move(c));
  }

  struct Node {
    PhraseIds phrase;
    OccurrenceList occurrences;
    double bound = 0.0;
  };
  const auto min_pattern = static_cast<std::size_t>(search.min_pattern);
  auto make_candidate = [&](const PhraseIds& phrase,
                            const OccurrenceList& occurrences,
                            const Evaluation& ev) -> std::optional<Candidate> {
    if (phrase.size() < min_pattern || slot_of_.count(phrase) != 0) {
      return std::nullopt;
    }
    Candidate c;
    c.phrase = phrase;
    c.magnitude = at_zero(ev.smooth);
    if (c.magnitude <= kMinDescent) return std::nullopt;
    c.occurrences = occurrences;
    return c;
  };

  std::vector<Node> roots;
  for (TokenId u : index_.unigrams()) {
    const auto postings = index_.postings(u);
    if (postings.size() < static_cast<std::size_t>(search.min_support)) {
      continue;
    }
    Node node;
    node.phrase = {u};
    node.occurrences =
        OccurrenceList(std::vector<Occurrence>(postings.begin(), postings.end()));
    const Evaluation ev = evaluate(node.occurrences, weights);
    node.bound = ev.bound;
    if (auto c = make_candidate(node.phrase, node.occurrences, ev)) {
      consider(best, std::move(*c));
    }
    roots.push_back(std::move(node));
  }

  const ExpansionLimits limits{search.gap, search.min_support,
                               search.max_pattern};
  std::atomic<std::uint64_t> shared_key{best ? magnitude_key(best->magnitude)
                                             : 0};
  std::atomic<std::size_t> next_root{0};

  auto work = [&](std::optional<Candidate>& local) {
    std::deque<Node> queue;
    while (true) {
      const std::size_t r = next_root.fetch_add(1);
      if (r >= roots.size()) return;
      queue.clear();
      queue.push_back(std::move(roots[r]));
      while (!queue.empty()) {
        Node node = std::move(queue.front());
        queue.pop_front();
        if (!exhaustive) {
          if (can_prune(node.bound, node.phrase.size(), local)) continue;
          const double padded = node.bound * (1.0 + kBoundSlack);
          if (magnitude_key(padded) < shared_key.load(std::memory_order_relaxed)) {
            continue;
          }
        }
        for (ChildPhrase& child :
             expand(node.phrase, node.occurrences, index_, limits)) {
          const Evaluation ev = evaluate(child.occurrences, weights);
          if (auto c = make_candidate(child.phrase, child.occurrences, ev)) {
            consider(local, std::move(*c));
            if (local && !exhaustive) {
              const std::uint64_t key = magnitude_key(local->magnitude);
              std::uint64_t seen = shared_key.load(std::memory_order_relaxed);
              while (key > seen &&
                     !shared_key.compare_exchange_weak(seen, key)) {
              }
            }
          }
          queue.push_back(
              Node{std::move(child.phrase), std::move(child.occurrences),
                   ev.bound});
        }
      }
    }
  };

  const unsigned workers = worker_count(search.threads, roots.size());
  if (workers <= 1) {
    work(best);
    return best;
  }
  std::vector<std::optional<Candidate>> locals(workers, best);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) {
    threads.emplace_back([&work, &locals, t] { work(locals[t]); });
  }
  for (std::thread& t : threads) t.join();
  for (auto& local : locals) {
    if (local) consider(best, std::move(*local));
  }
  return best;
}

double Trainer::minimize_along(std::span<const std::uint32_t> rows,
                               std::span<const double> effect, double current,
                               bool penalized) const {
  const LossKind kind = config_.loss;
  const double l1 = penalized ? config_.penalty.l1_weight() : 0.0;
  const double l2 = penalized ? config_.penalty.l2_weight() : 0.0;
  auto smooth = [&](double t) {
    double s = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      s += effect[k] * loss_derivative(kind, margins_[rows[k]] +
                                                 effect[k] * (t - current));
    }
    return s;
  };

  // Finds the root of the increasing function d on the ray from `origin` in
  // direction `dir`, given d(origin) has sign -dir.
  auto root_on_ray = [&](auto&& d, double origin, double dir) {
    double near = origin;
    double step = std::max(1.0, std::abs(current - origin));
    double far = origin + dir * step;
    while (dir * d(far) < 0.0) {
      near = far;
      step *= 2.0;
      if (step > kMaxStep) return far;
      far = origin + dir * step;
    }
    for (int i = 0; i < kMaxBisections; ++i) {
      if (std::abs(far - near) <= kLineSearchTolerance) break;
      const double mid = 0.5 * (near + far);
      if (mid == near || mid == far) break;
      if (dir * d(mid) < 0.0) {
        near = mid;
      } else {
        far = mid;
      }
    }
    return 0.5 * (near + far);
  };

  if (!penalized) {
    const double d0 = smooth(current);
    if (d0 == 0.0) return current;
    return root_on_ray(smooth, current, d0 < 0.0 ? 1.0 : -1.0);
  }

  const double s0 = smooth(0.0);
  if (s0 + l1 >= 0.0 && (config_.penalty.positive_only || s0 - l1 <= 0.0)) {
    return 0.0;
  }
  if (s0 + l1 < 0.0) {
    return root_on_ray([&](double t) { return smooth(t) + l1 + 2.0 * l2 * t; },
                       0.0, 1.0);
  }
  return root_on_ray([&](double t) { return smooth(t) - l1 + 2.0 * l2 * t; },
                     0.0, -1.0);
}

double Trainer::objective_change(std::span<const std::uint32_t> rows,
                                 std::span<const double> effect,
                                 double current, double next,
                                 bool penalized) const {
  const LossKind kind = config_.loss;
  double change = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double m = margins_[rows[k]];
    change += phrasereg::loss(kind, m + effect[k] * (next - current)) -
              phrasereg::loss(kind, m);
  }
  if (penalized) {
    change += config_.penalty.l1_weight() * (std::abs(next) - std::abs(current));
    change += config_.penalty.l2_weight() * (next * next - current * current);
  }
  return change;
}

void Trainer::apply(std::span<const std::uint32_t> rows,
                    std::span<const double> effect, double delta) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    margins_[rows[k]] += effect[k] * delta;
  }
}

void Trainer::update_intercept() {
  const double next =
      minimize_along(all_rows_, intercept_effect_, intercept_, false);
  const double change =
      objective_change(all_rows_, intercept_effect_, intercept_, next, false);
  if (!(change <= 0.0)) return;
  apply(all_rows_, intercept_effect_, next - intercept_);
  intercept_ = next;
  loss_ += change;
}

void Trainer::remove_feature(std::size_t slot) {
  slot_of_.erase(features_[slot].phrase);
  if (slot + 1 != features_.size()) {
    features_[slot] = std::move(features_.back());
    slot_of_[features_[slot].phrase] = slot;
  }
  features_.pop_back();
}

double Trainer::line_search_update(const Candidate& candidate) {
  auto it = slot_of_.find(candidate.phrase);
  Feature fresh;
  Feature* feature = nullptr;
  if (it != slot_of_.end()) {
    feature = &features_[it->second];
  } else {
    const OccurrenceList occ = candidate.occurrences.empty()
                                   ? occurrences(candidate.phrase, index_)
                                   : candidate.occurrences;
    if (occ.empty()) return 0.0;
    fresh.phrase = candidate.phrase;
    fresh.column = column_for(occ, &fresh.z);
    feature = &fresh;
  }

  const FeatureColumn& col = feature->column;
  std::vector<double> effect(col.rows.size());
  for (std::size_t k = 0; k < col.rows.size(); ++k) {
    effect[k] = y_[col.rows[k]] * col.values[k];
  }
  const double current = feature->beta;
  double next = minimize_along(col.rows, effect, current, true);
  if (std::abs(next) <= kEvictionThreshold) next = 0.0;
  if (config_.penalty.positive_only && next < 0.0) next = 0.0;
  const double change = objective_change(col.rows, effect, current, next, true);
  if (!(change <= 0.0)) return current;

  apply(col.rows, effect, next - current);
  loss_ += change;
  feature->beta = next;
  if (it != slot_of_.end()) {
    if (next == 0.0) remove_feature(it->second);
  } else if (next != 0.0) {
    slot_of_[fresh.phrase] = features_.size();
    features_.push_back(std::move(fresh));
  }
  return next;
}

ModelState Trainer::run() {
  const SearchConfig& search = config_.search;
  trace_.clear();
  trace_.push_back({std::nullopt, loss_});
  std::vector<double> losses{loss_};
  converged_ = false;
  iterations_ = 0;
  while (iterations_ < search.max_iter) {
    ++iterations_;
    update_intercept();
    const std::optional<Candidate> best = find_highest_gradient();
    if (!best) {
      trace_.push_back({std::nullopt, loss_});
      converged_ = true;
      break;
    }
    const double beta = line_search_update(*best);
    const Phrase phrase = index_.to_phrase(best->phrase);
    trace_.push_back({phrase, loss_});
    losses.push_back(loss_);
    if (search.verbosity >= 2 && search.log != nullptr) {
      fmt::print(*search.log,
                 "iter {}: '{}' gradient {:.6g} beta {:.6g} intercept {:.6g} "
                 "loss {:.10g}\n",
                 iterations_, phrase.display(), best->magnitude, beta,
                 intercept_, loss_);
    }
    if (converged(losses, search.convergence_threshold)) {
      converged_ = true;
      break;
    }
  }
  return snapshot();
}

ModelState Trainer::snapshot() const {
  ModelState model;
  model.intercept = intercept_;
  model.config = config_;
  model.config.search.log = nullptr;
  for (const Feature& f : features_) {
    model.features.push_back({index_.to_phrase(f.phrase), f.beta, f.z});
  }
  model.rows = row_docs_;
  model.margins = margins_;
  model.trace = trace_;
  model.loss = loss_;
  model.iterations = iterations_;
  model.converged = converged_;
  return model;
}

ModelState fit(const Corpus& corpus, const Labeling& labeling,
               const BanList& ban, const FitConfig& config) {
  validate(config);
  const PostingIndex index = PostingIndex::build(corpus, labeling, ban);
  Trainer trainer(index, labeling, config);
  ModelState model = trainer.run();
  model.stemmed = corpus.stemmed();
  return model;
}

std::optional<Phrase> find_highest_gradient(const ModelState& model,
                                            const PostingIndex& index,
                                            const Labeling& labeling,
                                            SearchMode mode) {
  Trainer trainer(index, labeling, model.config);
  std::vector<std::pair<PhraseIds, double>> coefficients;
  for (const SelectedPhrase& f : model.features) {
    auto ids = index.resolve(f.phrase);
    if (!ids) {
      throw Error(ErrorKind::kCorpusMismatch,
                  "model phrase '" + f.phrase.display() +
                      "' does not occur in the indexed corpus");
    }
    coefficients.emplace_back(std::move(*ids), f.beta);
  }
  trainer.assign(model.intercept, coefficients);
  auto best = trainer.find_highest_gradient(mode);
  if (!best) return std::nullopt;
  return index.to_phrase(best->phrase);
}

}  // namespace phrasereg
