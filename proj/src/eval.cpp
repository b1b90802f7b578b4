#include "qens/eval.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "qens/error.hpp"

namespace qens {

namespace {

void check_pair(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw Error(ErrorCategory::input, "label and prediction counts differ");
  for (int v : y_true)
    if (v != 1 && v != -1) throw Error(ErrorCategory::input, "labels must be +1 or -1");
  for (int v : y_pred)
    if (v != 1 && v != -1) throw Error(ErrorCategory::input, "predictions must be +1 or -1");
}

double ratio(std::size_t num, std::size_t den, bool& zero_div) {
  if (den == 0) {
    zero_div = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassMetrics m;
  m.precision = ratio(tp, tp + fp, m.zero_division);
  m.recall = ratio(tp, tp + fn, m.zero_division);
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1 = 0.0;
    m.zero_division = true;
  }
  m.support = tp + fn;
  return m;
}

}  // namespace

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred) {
  check_pair(y_true, y_pred);
  ConfusionMatrix c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] > 0)
      (y_pred[i] > 0 ? c.tp : c.fn)++;
    else
      (y_pred[i] > 0 ? c.fp : c.tn)++;
  }
  return c;
}

ClassificationReport classification_report(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.empty()) throw Error(ErrorCategory::input, "empty label vector");
  ClassificationReport r;
  r.confusion = confusion_matrix(y_true, y_pred);
  const auto& c = r.confusion;
  r.phishing = class_metrics(c.tp, c.fp, c.fn);
  // The negative class sees the matrix with roles swapped.
  r.non_phishing = class_metrics(c.tn, c.fn, c.fp);
  r.macro_precision = 0.5 * (r.phishing.precision + r.non_phishing.precision);
  r.macro_recall = 0.5 * (r.phishing.recall + r.non_phishing.recall);
  r.macro_f1 = 0.5 * (r.phishing.f1 + r.non_phishing.f1);
  r.zero_division = r.phishing.zero_division || r.non_phishing.zero_division;
  return r;
}

std::size_t false_positive_count(std::span<const int> y_true, std::span<const int> y_pred) {
  return confusion_matrix(y_true, y_pred).fp;
}

namespace {

nlohmann::json class_json(const ClassMetrics& m) {
  return {{"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"support", m.support},
          {"zero_division", m.zero_division}};
}

}  // namespace

nlohmann::json to_json(const ClassificationReport& r) {
  return {{"phishing", class_json(r.phishing)},
          {"non_phishing", class_json(r.non_phishing)},
          {"macro", {{"precision", r.macro_precision}, {"recall", r.macro_recall}, {"f1", r.macro_f1}}},
          {"confusion", {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}}},
          {"zero_division", r.zero_division}};
}

ClassificationReport mean_report(std::span<const ClassificationReport> reports) {
  if (reports.empty()) throw Error(ErrorCategory::input, "no reports to average");
  ClassificationReport m;
  const double k = static_cast<double>(reports.size());
  auto add = [k](ClassMetrics& acc, const ClassMetrics& v) {
    acc.precision += v.precision / k;
    acc.recall += v.recall / k;
    acc.f1 += v.f1 / k;
    acc.support += v.support;
    acc.zero_division |= v.zero_division;
  };
  for (const auto& r : reports) {
    add(m.phishing, r.phishing);
    add(m.non_phishing, r.non_phishing);
    m.macro_precision += r.macro_precision / k;
    m.macro_recall += r.macro_recall / k;
    m.macro_f1 += r.macro_f1 / k;
    m.confusion.tp += r.confusion.tp;
    m.confusion.fp += r.confusion.fp;
    m.confusion.tn += r.confusion.tn;
    m.confusion.fn += r.confusion.fn;
    m.zero_division |= r.zero_division;
  }
  return m;
}

void write_score_table(std::ostream& out, std::span<const ScoreRow> rows) {
  out << "circuit_id,layers,encoder,precision,recall,f1,phishing_f1,false_positives\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.circuit_id << ',' << r.layers << ',' << r.encoder << ',' << r.precision << ',' << r.recall << ','
        << r.f1 << ',' << r.phishing_f1 << ',' << r.false_positives << '\n';
  }
}

std::vector<ScoreRow> read_score_table(std::istream& in) {
  std::vector<ScoreRow> rows;
  std::string line;
  std::getline(in, line);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (cells.size() != 8) throw Error(ErrorCategory::parse, "score table line " + std::to_string(line_no) + ": expected 8 columns");
    try {
      rows.push_back({std::stoi(cells[0]), std::stoi(cells[1]), cells[2], std::stod(cells[3]), std::stod(cells[4]),
                      std::stod(cells[5]), std::stod(cells[6]), static_cast<std::size_t>(std::stoull(cells[7]))});
    } catch (const std::exception&) {
      throw Error(ErrorCategory::parse, "score table line " + std::to_string(line_no) + ": bad number");
    }
  }
  return rows;
}

std::vector<CorrelationEntry> correlation_report(std::span<const MetricsRow> metrics, std::span<const ScoreRow> scores) {
  using Key = std::tuple<std::string, int, int>;  // encoder, circuit, layers
  std::map<Key, const MetricsRow*> by_key;
  for (const auto& m : metrics) by_key[{m.encoder, m.circuit_id, m.layers}] = &m;

  std::set<int> circuits;
  std::map<std::string, std::vector<std::pair<const MetricsRow*, const ScoreRow*>>> per_encoder;
  for (const auto& s : scores) {
    auto it = by_key.find({s.encoder, s.circuit_id, s.layers});
    if (it == by_key.end()) continue;
    per_encoder[s.encoder].emplace_back(it->second, &s);
    circuits.insert(s.circuit_id);
  }
  if (circuits.size() < 3) throw Error(ErrorCategory::input, "correlation report needs at least 3 circuits");

  static const std::vector<std::pair<std::string, double MetricsRow::*>> metric_cols{
      {"expressibility", &MetricsRow::expressibility_kl},
      {"meyer_wallach", &MetricsRow::meyer_wallach},
      {"von_neumann", &MetricsRow::von_neumann}};
  static const std::vector<std::pair<std::string, double ScoreRow::*>> score_cols{
      {"precision", &ScoreRow::precision}, {"recall", &ScoreRow::recall}, {"f1", &ScoreRow::f1}};

  std::vector<CorrelationEntry> out;
  for (const auto& [enc, pairs] : per_encoder) {
    for (const auto& [mname, mptr] : metric_cols) {
      for (const auto& [sname, sptr] : score_cols) {
        std::vector<double> xv, yv;
        for (const auto& [m, s] : pairs) {
          xv.push_back(m->*mptr);
          yv.push_back(s->*sptr);
        }
        CorrelationEntry e{enc, mname, sname, static_cast<int>(xv.size()), 0.0, false};
        try {
          e.r = pearson(xv, yv);
          e.defined = true;
        } catch (const Error&) {
          e.defined = false;
        }
        out.push_back(std::move(e));
      }
    }
  }
  return out;
}

void write_correlation_table(std::ostream& out, std::span<const CorrelationEntry> rows) {
  out << "encoder,metric,score,n,pearson_r,defined\n";
  out.precision(17);
  for (const auto& e : rows) {
    out << e.encoder << ',' << e.metric << ',' << e.score << ',' << e.n << ',';
    if (e.defined)
      out << e.r;
    else
      out << "nan";
    out << ',' << (e.defined ? 1 : 0) << '\n';
  }
}

}  // namespace qens
