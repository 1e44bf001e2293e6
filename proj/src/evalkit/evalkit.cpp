#include "courtesy/evalkit/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "courtesy/errors.hpp"

namespace courtesy::evalkit {

namespace {

using Counts = std::map<std::vector<std::string>, int>;

Counts ngrams(const TokenSeq& seq, int n) {
  Counts out;
  const auto len = static_cast<int>(seq.size());
  for (int i = 0; i + n <= len; ++i) ++out[TokenSeq(seq.begin() + i, seq.begin() + i + n)];
  return out;
}

void check_aligned(std::size_t h, std::size_t r) {
  if (h != r) throw UsageError("BLEU needs one reference per hypothesis");
}

double combine(const NgramStats& s, const BleuOptions& opts) {
  if (s.hyp_length == 0) return 0;
  double log_sum = 0;
  for (int n = 0; n < opts.max_order; ++n) {
    double m = s.matches[static_cast<std::size_t>(n)];
    double t = s.totals[static_cast<std::size_t>(n)];
    if (opts.smooth && n > 0) {
      m += 1;
      t += 1;
    }
    if (m == 0 || t == 0) return 0;
    log_sum += std::log(m / t);
  }
  const double bp = s.hyp_length < s.ref_length ? std::exp(1.0 - s.ref_length / s.hyp_length) : 1.0;
  return 100.0 * bp * std::exp(log_sum / opts.max_order);
}

}  // namespace

NgramStats ngram_stats(const std::vector<TokenSeq>& hypotheses, const std::vector<TokenSeq>& references,
                       int max_order) {
  check_aligned(hypotheses.size(), references.size());
  if (max_order < 1) throw UsageError("BLEU order must be >= 1");
  NgramStats s;
  s.matches.assign(static_cast<std::size_t>(max_order), 0);
  s.totals.assign(static_cast<std::size_t>(max_order), 0);
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    s.hyp_length += static_cast<double>(hypotheses[i].size());
    s.ref_length += static_cast<double>(references[i].size());
    for (int n = 1; n <= max_order; ++n) {
      const auto h = ngrams(hypotheses[i], n);
      const auto r = ngrams(references[i], n);
      for (const auto& [g, c] : h) {
        auto it = r.find(g);
        s.matches[static_cast<std::size_t>(n - 1)] += it == r.end() ? 0 : std::min(c, it->second);
        s.totals[static_cast<std::size_t>(n - 1)] += c;
      }
    }
  }
  return s;
}

double bleu(const std::vector<TokenSeq>& hypotheses, const std::vector<TokenSeq>& references,
            const BleuOptions& opts) {
  return combine(ngram_stats(hypotheses, references, opts.max_order), opts);
}

double sentence_bleu(const std::vector<TokenSeq>& hypotheses, const std::vector<TokenSeq>& references,
                     const BleuOptions& opts) {
  check_aligned(hypotheses.size(), references.size());
  if (hypotheses.empty()) return 0;
  double total = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    total += combine(ngram_stats({hypotheses[i]}, {references[i]}, opts.max_order), opts);
  }
  return total / static_cast<double>(hypotheses.size());
}

MeanScore mean_politeness(const classifier::Classifier& clf, const std::vector<TokenSeq>& responses) {
  if (responses.empty()) throw UsageError("mean_politeness needs at least one response");
  MeanScore out;
  double total = 0;
  for (const auto& r : responses) {
    if (r.empty()) {
      total += kEmptyScore;
      ++out.empty;
    } else {
      total += classifier::score(clf, r).value();
    }
  }
  out.count = responses.size();
  out.mean = total / static_cast<double>(out.count);
  return out;
}

std::string to_string(CorrelationKind kind) { return kind == CorrelationKind::pearson ? "pearson" : "spearman"; }

CorrelationKind parse_correlation(const std::string& name) {
  if (name == "pearson") return CorrelationKind::pearson;
  if (name == "spearman") return CorrelationKind::spearman;
  throw UsageError("unknown correlation '" + name + "' (pearson | spearman)");
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw UsageError("correlation inputs differ in length");
  if (a.size() < 3) throw UsageError("correlation needs at least 3 points");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0 || sbb == 0) throw UndefinedError("correlation undefined: zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw UsageError("correlation inputs differ in length");
  return pearson(average_ranks(a), average_ranks(b));
}

Correlation correlate(const std::vector<double>& a, const std::vector<double>& b, CorrelationKind kind) {
  Correlation c;
  c.n = a.size();
  if (kind == CorrelationKind::pearson) {
    c.r = pearson(a, b);
    c.note = "pearson r, no significance test";
  } else {
    c.r = spearman(a, b);
    c.note = "spearman rho (average ranks for ties), no significance test";
  }
  return c;
}

void AnnotationTable::add(const std::string& item, const std::string& annotator, int rating) {
  if (rating < kMin || rating > kMax) {
    throw UsageError("rating " + std::to_string(rating) + " outside " + std::to_string(kMin) + ".." +
                     std::to_string(kMax));
  }
  auto [it, added] = ratings_[item].emplace(annotator, rating);
  if (!added) throw UsageError("duplicate rating for item '" + item + "' by '" + annotator + "'");
}

AnnotationTable AnnotationTable::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  AnnotationTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    auto where = [&] { return path.string() + ":" + std::to_string(lineno); };
    if (cells.size() != 3) throw ParseError(where() + ": expected item_id,annotator_id,rating");
    if (lineno == 1 && cells[2] == "rating") continue;
    int rating = 0;
    try {
      std::size_t used = 0;
      rating = std::stoi(cells[2], &used);
      if (used != cells[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(where() + ": rating is not an integer");
    }
    try {
      table.add(cells[0], cells[1], rating);
    } catch (const UsageError& e) {
      throw ParseError(where() + ": " + e.what());
    }
  }
  return table;
}

std::vector<std::string> AnnotationTable::annotators() const {
  std::set<std::string> names;
  for (const auto& [item, by] : ratings_)
    for (const auto& [who, r] : by) names.insert(who);
  return {names.begin(), names.end()};
}

std::vector<std::pair<int, int>> AnnotationTable::pairs() const {
  const auto who = annotators();
  if (who.size() != 2) throw UsageError("kappa needs exactly two annotators");
  if (ratings_.empty()) throw UsageError("kappa needs at least one item");
  std::vector<std::pair<int, int>> out;
  for (const auto& [item, by] : ratings_) {
    if (by.size() != 2) throw UsageError("item '" + item + "' is not rated by both annotators");
    out.emplace_back(by.at(who[0]), by.at(who[1]));
  }
  return out;
}

int collapse(int rating) {
  if (rating < AnnotationTable::kMin || rating > AnnotationTable::kMax) throw UsageError("rating outside 1..5");
  return rating <= 2 ? 0 : rating == 3 ? 1 : 2;
}

double cohen_kappa(const std::vector<std::vector<double>>& confusion) {
  const std::size_t k = confusion.size();
  double total = 0;
  for (const auto& row : confusion) {
    if (row.size() != k) throw UsageError("confusion table must be square");
    for (double c : row) {
      if (c < 0) throw UsageError("negative count in confusion table");
      total += c;
    }
  }
  if (total == 0) throw UsageError("kappa needs at least one item");
  double agree = 0, chance = 0;
  for (std::size_t i = 0; i < k; ++i) {
    agree += confusion[i][i];
    double row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += confusion[i][j];
      col += confusion[j][i];
    }
    chance += (row / total) * (col / total);
  }
  const double po = agree / total;
  if (chance == 1.0) throw UndefinedError("kappa undefined: chance agreement is 1");
  return (po - chance) / (1.0 - chance);
}

double cohen_kappa(const AnnotationTable& table, bool collapsed) {
  const std::size_t k = collapsed ? 3 : AnnotationTable::kMax;
  std::vector<std::vector<double>> confusion(k, std::vector<double>(k, 0.0));
  for (auto [a, b] : table.pairs()) {
    const auto i = static_cast<std::size_t>(collapsed ? collapse(a) : a - 1);
    const auto j = static_cast<std::size_t>(collapsed ? collapse(b) : b - 1);
    confusion[i][j] += 1;
  }
  return cohen_kappa(confusion);
}

namespace {

nlohmann::json scored(const Scored& s) { return {{"value", s.value}, {"count", s.count}}; }

std::string fmt(double v, int precision) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& m : models) {
    nlohmann::json row = {{"id", m.id}, {"politeness", scored(m.politeness)}, {"bleu4", scored(m.bleu4)}};
    if (m.ppl) row["ppl"] = scored(*m.ppl);
    if (m.wer) row["wer"] = scored(*m.wer);
    if (m.ppl_last) row["ppl_last"] = scored(*m.ppl_last);
    if (m.wer_last) row["wer_last"] = scored(*m.wer_last);
    rows.push_back(row);
  }
  nlohmann::json corr = nlohmann::json::array();
  for (const auto& c : correlations) {
    corr.push_back({{"name", c.name}, {"kind", c.kind}, {"r", c.value.r}, {"count", c.value.n},
                    {"note", c.value.note}});
  }
  return {{"schema_version", kSchemaVersion},
          {"metadata", {{"seed", seed}, {"dataset", dataset}, {"checkpoints", checkpoints}}},
          {"models", rows},
          {"correlations", corr}};
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os << "dataset " << dataset << "  seed " << seed << "\n";
  os << std::left << std::setw(24) << "model" << std::setw(18) << "politeness" << std::setw(16) << "BLEU-4"
     << "extra\n";
  for (const auto& m : models) {
    os << std::setw(24) << m.id << std::setw(18) << (fmt(m.politeness.value, 3) + " (n=" + std::to_string(m.politeness.count) + ")")
       << std::setw(16) << (fmt(m.bleu4.value, 2) + " (n=" + std::to_string(m.bleu4.count) + ")");
    auto extra = [&](const char* name, const std::optional<Scored>& s) {
      if (s) os << name << "=" << fmt(s->value, 3) << " (n=" << s->count << ") ";
    };
    extra("PPL", m.ppl);
    extra("WER", m.wer);
    extra("PPL@L", m.ppl_last);
    extra("WER@L", m.wer_last);
    os << "\n";
  }
  for (const auto& c : correlations) {
    os << c.kind << " " << c.name << ": r=" << fmt(c.value.r, 4) << " (n=" << c.value.n << ")\n";
  }
  return os.str();
}

}  // namespace courtesy::evalkit
