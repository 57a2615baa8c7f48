#include "gatehub/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gatehub/errors.hpp"

namespace gatehub {
namespace {

void check_aligned(std::span<const double> scores, std::span<const std::uint8_t> positives) {
  if (scores.size() != positives.size()) throw ContractError("scores and positives differ in length");
}

std::vector<std::size_t> ranking(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::size_t count_positives(std::span<const std::uint8_t> positives) {
  return static_cast<std::size_t>(std::count_if(positives.begin(), positives.end(), [](auto p) { return p != 0; }));
}

// Mean over positives of TP / (TP + FP * fp_weight) at each positive's rank.
double weighted_ap(std::span<const double> scores, std::span<const std::uint8_t> positives, double fp_weight) {
  double tp = 0.0;
  double fp = 0.0;
  double sum = 0.0;
  for (std::size_t i : ranking(scores)) {
    if (positives[i]) {
      tp += 1.0;
      sum += tp / (tp + fp * fp_weight);
    } else {
      fp += 1.0;
    }
  }
  return sum / tp;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

double average_precision(std::span<const double> scores, std::span<const std::uint8_t> positives) {
  check_aligned(scores, positives);
  if (count_positives(positives) == 0) throw ContractError("average precision is undefined without positives");
  return weighted_ap(scores, positives, 1.0);
}

double calibrated_average_precision(std::span<const double> scores, std::span<const std::uint8_t> positives) {
  check_aligned(scores, positives);
  const std::size_t pos = count_positives(positives);
  const std::size_t neg = positives.size() - pos;
  if (pos == 0 || neg == 0) throw ContractError("calibrated precision needs positives and negatives");
  return calibrated_average_precision(scores, positives, static_cast<double>(neg) / static_cast<double>(pos));
}

double calibrated_average_precision(std::span<const double> scores, std::span<const std::uint8_t> positives,
                                    double w) {
  check_aligned(scores, positives);
  if (!(w > 0.0) || !std::isfinite(w)) throw ContractError("calibration weight must be positive and finite");
  if (count_positives(positives) == 0) throw ContractError("average precision is undefined without positives");
  return weighted_ap(scores, positives, 1.0 / w);
}

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> positives) {
  check_aligned(scores, positives);
  const std::size_t n = scores.size();
  const std::size_t pos = count_positives(positives);
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw ContractError("AUC needs positives and negatives");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of midranks of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (positives[order[k]]) rank_sum += midrank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

std::vector<PrecisionRecallPoint> precision_recall_curve(std::span<const double> scores,
                                                         std::span<const std::uint8_t> positives) {
  check_aligned(scores, positives);
  const auto total = static_cast<double>(count_positives(positives));
  std::vector<PrecisionRecallPoint> curve;
  if (total == 0.0) return curve;
  const auto order = ranking(scores);
  double tp = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (positives[order[k]]) tp += 1.0;
    const bool last_of_score = k + 1 == order.size() || scores[order[k + 1]] != scores[order[k]];
    if (last_of_score) {
      curve.push_back({scores[order[k]], tp / static_cast<double>(k + 1), tp / total});
    }
  }
  return curve;
}

GateDiagnostics gate_diagnostics(const GateSamples& gates) {
  if (gates.values.size() != gates.tags.size()) throw ContractError("gate values and tags differ in length");
  std::vector<double> scores;
  std::vector<std::uint8_t> informative;
  GateDiagnostics out;
  double sum_inf = 0.0;
  double sum_dis = 0.0;
  for (std::size_t i = 0; i < gates.values.size(); ++i) {
    const FrameTag tag = gates.tags[i];
    if (is_informative(tag)) {
      sum_inf += gates.values[i];
      ++out.informative_count;
    } else if (tag == FrameTag::kDistractor) {
      sum_dis += gates.values[i];
      ++out.distractor_count;
    } else {
      continue;
    }
    scores.push_back(gates.values[i]);
    informative.push_back(is_informative(tag) ? 1 : 0);
  }
  if (out.informative_count > 0) out.mean_informative = sum_inf / static_cast<double>(out.informative_count);
  if (out.distractor_count > 0) out.mean_distractor = sum_dis / static_cast<double>(out.distractor_count);
  if (out.informative_count > 0 && out.distractor_count > 0) out.auc = roc_auc(scores, informative);
  return out;
}

Evaluation evaluate(std::span<const PredictionFrame> preds, std::size_t num_classes, const GateSamples* gates) {
  if (num_classes < 1) throw ContractError("evaluate needs at least one action class");
  Evaluation ev;
  MetricReport& r = ev.report;
  r.num_classes = num_classes;
  r.frames = preds.size();
  r.positives.assign(num_classes, 0);
  r.class_ap.assign(num_classes, std::nullopt);
  r.class_cap.assign(num_classes, std::nullopt);
  for (const PredictionFrame& p : preds) {
    if (p.probs.size() != num_classes + 1) throw ContractError("prediction width does not match the class count");
    if (p.label < 0 || static_cast<std::size_t>(p.label) > num_classes) {
      throw ContractError("prediction at time " + std::to_string(p.time) + " has no valid label");
    }
  }

  std::vector<double> scores(preds.size());
  std::vector<std::uint8_t> positives(preds.size());
  double ap_sum = 0.0;
  double cap_sum = 0.0;
  std::size_t ap_count = 0;
  std::size_t cap_count = 0;
  for (std::size_t c = 1; c <= num_classes; ++c) {
    for (std::size_t i = 0; i < preds.size(); ++i) {
      scores[i] = preds[i].probs[c];
      positives[i] = preds[i].label == static_cast<int>(c) ? 1 : 0;
    }
    const std::size_t pos = count_positives(positives);
    r.positives[c - 1] = pos;
    if (pos == 0) {
      r.warnings.push_back("class " + std::to_string(c) + " has no positive frames; skipped");
      continue;
    }
    r.class_ap[c - 1] = average_precision(scores, positives);
    ap_sum += *r.class_ap[c - 1];
    ++ap_count;
    if (pos == preds.size()) {
      r.warnings.push_back("class " + std::to_string(c) + " has no negative frames; cAP skipped");
      continue;
    }
    r.class_cap[c - 1] = calibrated_average_precision(scores, positives);
    cap_sum += *r.class_cap[c - 1];
    ++cap_count;
  }
  r.mean_ap = ap_count ? ap_sum / static_cast<double>(ap_count) : 0.0;
  r.mean_cap = cap_count ? cap_sum / static_cast<double>(cap_count) : 0.0;
  if (gates) ev.gates = gate_diagnostics(*gates);
  return ev;
}

std::string metric_report_json(const Evaluation& evaluation) {
  const MetricReport& r = evaluation.report;
  nlohmann::ordered_json j;
  j["frames"] = r.frames;
  j["num_classes"] = r.num_classes;
  j["mAP"] = r.mean_ap;
  j["mcAP"] = r.mean_cap;
  auto classes = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < r.num_classes; ++c) {
    nlohmann::ordered_json row;
    row["class"] = c + 1;
    row["positives"] = r.positives[c];
    row["ap"] = r.class_ap[c] ? nlohmann::ordered_json(*r.class_ap[c]) : nlohmann::ordered_json(nullptr);
    row["cap"] = r.class_cap[c] ? nlohmann::ordered_json(*r.class_cap[c]) : nlohmann::ordered_json(nullptr);
    classes.push_back(row);
  }
  j["classes"] = classes;
  j["warnings"] = r.warnings;
  if (evaluation.gates) {
    const GateDiagnostics& g = *evaluation.gates;
    j["gates"] = {{"mean_informative", g.mean_informative},
                  {"mean_distractor", g.mean_distractor},
                  {"auc", g.auc},
                  {"informative_count", g.informative_count},
                  {"distractor_count", g.distractor_count}};
  }
  return j.dump(2);
}

std::string precision_recall_csv(std::span<const PredictionFrame> preds, std::size_t num_classes) {
  std::ostringstream out;
  out << "class,threshold,precision,recall\n";
  std::vector<double> scores(preds.size());
  std::vector<std::uint8_t> positives(preds.size());
  for (std::size_t c = 1; c <= num_classes; ++c) {
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (preds[i].probs.size() <= c) throw ContractError("prediction width does not match the class count");
      scores[i] = preds[i].probs[c];
      positives[i] = preds[i].label == static_cast<int>(c) ? 1 : 0;
    }
    for (const auto& pt : precision_recall_curve(scores, positives)) {
      out << c << ',' << format_double(pt.threshold) << ',' << format_double(pt.precision) << ','
          << format_double(pt.recall) << '\n';
    }
  }
  return out.str();
}

}  // namespace gatehub
