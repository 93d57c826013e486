#ifndef TAGAD_METRICS_HPP
#define TAGAD_METRICS_HPP

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagad/error.hpp"
#include "tagad/graph.hpp"
#include "tagad/ingest.hpp"

namespace tagad {

namespace detail {

inline void check_lengths(std::size_t scores, std::size_t labels) {
  if (scores != labels) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(scores) + " scores vs " +
                    std::to_string(labels) + " labels");
  }
}

}  // namespace detail

// Mann-Whitney form with average ranks over tie groups:
// (R_pos - n_pos(n_pos+1)/2) / (n_pos n_neg).
inline double roc_auc(const std::vector<double>& scores,
                      const std::vector<int>& labels) {
  detail::check_lengths(scores.size(), labels.size());
  std::size_t n_pos = 0;
  for (int l : labels) n_pos += l != 0;
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(ErrorCode::kSingleClass,
                "ROC-AUC needs both classes (" + std::to_string(n_pos) +
                    " positive, " + std::to_string(n_neg) + " negative)");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] != 0) rank_sum += avg_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(n_pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(n_neg));
}

// Step-wise AP: order by score descending, ties by id ascending, then
// average the precision at each positive. Ids default to positions.
inline double average_precision(const std::vector<double>& scores,
                                const std::vector<int>& labels,
                                const std::vector<NodeId>& ids = {}) {
  detail::check_lengths(scores.size(), labels.size());
  if (!ids.empty()) detail::check_lengths(scores.size(), ids.size());
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  auto id_of = [&](std::size_t i) {
    return ids.empty() ? static_cast<NodeId>(i) : ids[i];
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return id_of(a) < id_of(b);
  });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] != 0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  if (hits == 0) throw Error(ErrorCode::kNoPositives, "no positive labels");
  return sum / static_cast<double>(hits);
}

struct KindMetrics {
  double roc_auc = 0.0;
  double average_precision = 0.0;
  std::size_t n_pos = 0;
};

struct MetricsReport {
  double roc_auc = 0.0;
  double average_precision = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::map<std::string, KindMetrics> per_kind;
  std::size_t parse_failure_count = 0;
};

struct ScoredRow {
  NodeId id = 0;
  double score = 0.0;
  bool parse_ok = true;
};

// Positives are manifest nodes. Each kind is also scored alone against all
// normal nodes. With `universe`, every scored id must belong to it.
inline MetricsReport evaluate(const std::vector<ScoredRow>& rows,
                              const AnomalyManifest& manifest,
                              const std::optional<std::set<NodeId>>& universe =
                                  std::nullopt) {
  const auto kinds = manifest.kinds_by_node();
  MetricsReport report;
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<NodeId> ids;
  std::set<NodeId> seen;
  for (const auto& r : rows) {
    if (universe && !universe->count(r.id)) {
      throw Error(ErrorCode::kMissingGroundTruth,
                  "scored node " + std::to_string(r.id) +
                      " is not in the dataset");
    }
    if (!seen.insert(r.id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "node " + std::to_string(r.id) + " scored twice");
    }
    scores.push_back(r.score);
    labels.push_back(kinds.count(r.id) ? 1 : 0);
    ids.push_back(r.id);
    report.parse_failure_count += r.parse_ok ? 0 : 1;
  }
  report.roc_auc = roc_auc(scores, labels);
  report.average_precision = average_precision(scores, labels, ids);
  for (int l : labels) (l ? report.n_pos : report.n_neg)++;

  for (AnomalyKind kind : kAllKinds) {
    std::vector<double> ks;
    std::vector<int> kl;
    std::vector<NodeId> kid;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto it = kinds.find(ids[i]);
      if (it != kinds.end() && it->second != kind) continue;
      const int label = it != kinds.end() ? 1 : 0;
      pos += label;
      ks.push_back(scores[i]);
      kl.push_back(label);
      kid.push_back(ids[i]);
    }
    if (pos == 0) continue;
    report.per_kind[std::string(kind_name(kind))] = {
        roc_auc(ks, kl), average_precision(ks, kl, kid), pos};
  }
  return report;
}

inline std::vector<ScoredRow> rows_from_score_file(const ScoreFile& file) {
  std::vector<ScoredRow> rows;
  rows.reserve(file.rows.size());
  for (const auto& r : file.rows) rows.push_back({r.id, r.score, r.parse_ok});
  return rows;
}

inline std::string format_metric(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", x);
  return buf;
}

inline std::string render_table(const MetricsReport& report,
                                const std::string& title = "") {
  std::vector<std::array<std::string, 4>> rows;
  rows.push_back({"subset", "ROC-AUC", "AP", "positives"});
  rows.push_back({"all", format_metric(report.roc_auc),
                  format_metric(report.average_precision),
                  std::to_string(report.n_pos)});
  for (const auto& [kind, m] : report.per_kind) {
    rows.push_back({kind, format_metric(m.roc_auc),
                    format_metric(m.average_precision),
                    std::to_string(m.n_pos)});
  }
  std::array<std::size_t, 4> width{};
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::string out;
  if (!title.empty()) out += title + "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < 4; ++c) {
      const auto& cell = rows[i][c];
      const std::string pad(width[c] - cell.size(), ' ');
      out += c == 0 ? cell + pad : "  " + pad + cell;
    }
    out += "\n";
    if (i == 0) {
      std::size_t total = width[0];
      for (std::size_t c = 1; c < 4; ++c) total += 2 + width[c];
      out += std::string(total, '-') + "\n";
    }
  }
  out += "normal nodes: " + std::to_string(report.n_neg) +
         ", parse failures: " + std::to_string(report.parse_failure_count) +
         "\n";
  return out;
}

struct SummaryContext {
  std::string run_id;
  std::string dataset;
  std::string framework_kind;
  std::string model_tag;
};

inline nlohmann::json summary_json(const MetricsReport& report,
                                   const SummaryContext& context) {
  nlohmann::json kinds = nlohmann::json::array();
  nlohmann::json breakdown = nlohmann::json::object();
  for (const auto& [kind, m] : report.per_kind) {
    kinds.push_back(kind);
    breakdown[kind] = {{"roc_auc", m.roc_auc},
                       {"ap", m.average_precision},
                       {"n_pos", m.n_pos}};
  }
  return {{"run_id", context.run_id},
          {"dataset", context.dataset},
          {"anomaly_kinds", kinds},
          {"framework_kind", context.framework_kind},
          {"model_tag", context.model_tag},
          {"roc_auc", report.roc_auc},
          {"ap", report.average_precision},
          {"n_pos", report.n_pos},
          {"n_neg", report.n_neg},
          {"parse_failures", report.parse_failure_count},
          {"ap_tie_rule", "score desc, node id asc"},
          {"per_kind", breakdown}};
}

}  // namespace tagad

#endif  // TAGAD_METRICS_HPP
