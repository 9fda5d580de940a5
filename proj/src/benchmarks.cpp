#include "ctxgeo/benchmarks.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "ctxgeo/errors.hpp"
#include "ctxgeo/metrics.hpp"
#include "ctxgeo/seeding.hpp"

namespace ctxgeo {

nlohmann::json to_json(const BenchResult& r) {
  return {{"task", r.task},
          {"score", r.score},
          {"coverage", r.coverage},
          {"n_evaluated", r.n_evaluated},
          {"seed", r.seed}};
}

// ---------------------------------------------------------------------------
// Spearman

namespace {

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && xs[order[j]] == xs[order[i]]) ++j;
    // Positions i..j-1 (1-based i+1..j) share the mean rank.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = rank;
    i = j;
  }
  return ranks;
}

bool constant(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); });
}

}  // namespace

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw ContractError("spearman of sequences with lengths " + std::to_string(xs.size()) +
                        " and " + std::to_string(ys.size()));
  }
  if (xs.size() < 2) throw InsufficientDataError("spearman needs at least 2 observations");
  if (constant(xs) || constant(ys)) {
    throw UndefinedCorrelationError("spearman correlation undefined: one side is constant");
  }
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Evaluators

BenchResult eval_similarity(const SimilarityDataset& ds, const StaticEmbeddingTable& table) {
  if (table.empty()) throw ContractError("empty embedding table");
  std::vector<double> model;
  std::vector<double> human;
  for (const auto& p : ds.pairs) {
    auto i = table.find(p.first);
    auto j = table.find(p.second);
    if (!i || !j) continue;
    model.push_back(cosine(table.vector(*i), table.vector(*j)));
    human.push_back(p.human_score);
  }
  if (model.size() < 2) {
    throw InsufficientDataError("similarity: only " + std::to_string(model.size()) +
                                " in-vocabulary pairs");
  }
  BenchResult r;
  r.task = "similarity";
  r.score = spearman(model, human);
  r.n_evaluated = model.size();
  r.coverage = static_cast<double>(model.size()) / static_cast<double>(ds.pairs.size());
  return r;
}

BenchResult eval_analogy(const AnalogyDataset& ds, const StaticEmbeddingTable& table) {
  if (table.empty()) throw ContractError("empty embedding table");
  struct Query {
    std::size_t a, a_star, b, b_star;
  };
  std::vector<Query> queries;
  for (const auto& q : ds.questions) {
    auto a = table.find(q.a);
    auto as = table.find(q.a_star);
    auto b = table.find(q.b);
    auto bs = table.find(q.b_star);
    if (a && as && b && bs) queries.push_back({*a, *as, *b, *bs});
  }
  if (queries.empty()) throw InsufficientDataError("analogy: no in-vocabulary questions");

  const auto vocab = table.matrix();
  constexpr std::size_t kBatch = 128;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < queries.size(); start += kBatch) {
    const std::size_t count = std::min(kBatch, queries.size() - start);
    Eigen::MatrixXd targets(static_cast<Eigen::Index>(table.dim()), static_cast<Eigen::Index>(count));
    for (std::size_t c = 0; c < count; ++c) {
      const auto& q = queries[start + c];
      targets.col(static_cast<Eigen::Index>(c)) =
          table.vector(q.a_star) - table.vector(q.a) + table.vector(q.b);
    }
    // Table vectors are unit, so argmax cos == argmax dot for a fixed target.
    const Eigen::MatrixXd scores = vocab.transpose() * targets;
    for (std::size_t c = 0; c < count; ++c) {
      const auto& q = queries[start + c];
      if (targets.col(static_cast<Eigen::Index>(c)).norm() == 0.0) continue;
      std::size_t best = table.size();
      double best_score = -std::numeric_limits<double>::infinity();
      for (std::size_t w = 0; w < table.size(); ++w) {
        if (w == q.a || w == q.a_star || w == q.b) continue;
        const double s = scores(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(c));
        if (s > best_score) {
          best_score = s;
          best = w;
        }
      }
      if (best == q.b_star) ++correct;
    }
  }

  BenchResult r;
  r.task = "analogy";
  r.n_evaluated = queries.size();
  r.score = static_cast<double>(correct) / static_cast<double>(queries.size());
  r.coverage = static_cast<double>(queries.size()) / static_cast<double>(ds.questions.size());
  return r;
}

double purity(std::span<const std::size_t> assignment, std::span<const std::size_t> labels) {
  if (assignment.size() != labels.size() || assignment.empty()) {
    throw ContractError("purity needs one label per assigned item");
  }
  std::map<std::size_t, std::map<std::size_t, std::size_t>> counts;
  for (std::size_t i = 0; i < assignment.size(); ++i) ++counts[assignment[i]][labels[i]];
  std::size_t majority = 0;
  for (const auto& [cluster, by_label] : counts) {
    std::size_t best = 0;
    for (const auto& [label, c] : by_label) best = std::max(best, c);
    majority += best;
  }
  return static_cast<double>(majority) / static_cast<double>(assignment.size());
}

namespace {

std::size_t nearest(const Eigen::MatrixXd& centroids, const Eigen::Ref<const Eigen::VectorXd>& p,
                    double& dist2) {
  std::size_t best = 0;
  dist2 = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.cols(); ++c) {
    const double d = (centroids.col(c) - p).squaredNorm();
    if (d < dist2) {
      dist2 = d;
      best = static_cast<std::size_t>(c);
    }
  }
  return best;
}

Eigen::MatrixXd plus_plus_seeds(const Eigen::Ref<const Eigen::MatrixXd>& points, std::size_t k,
                                Engine& engine) {
  const auto n = static_cast<std::size_t>(points.cols());
  Eigen::MatrixXd centroids(points.rows(), static_cast<Eigen::Index>(k));
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  centroids.col(0) = points.col(static_cast<Eigen::Index>(first(engine)));
  std::vector<double> d2(n);
  for (std::size_t c = 1; c < k; ++c) {
    const Eigen::MatrixXd chosen = centroids.leftCols(static_cast<Eigen::Index>(c));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest(chosen, points.col(static_cast<Eigen::Index>(i)), d2[i]);
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      std::discrete_distribution<std::size_t> weighted(d2.begin(), d2.end());
      pick = weighted(engine);
    } else {
      // Every point coincides with a chosen seed.
      pick = first(engine);
    }
    centroids.col(static_cast<Eigen::Index>(c)) = points.col(static_cast<Eigen::Index>(pick));
  }
  return centroids;
}

}  // namespace

namespace {

void recompute_centroids(const Eigen::Ref<const Eigen::MatrixXd>& points, KMeansResult& r,
                         std::vector<std::size_t>& counts) {
  const auto k = static_cast<std::size_t>(r.centroids.cols());
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(points.rows(), static_cast<Eigen::Index>(k));
  counts.assign(k, 0);
  for (std::size_t i = 0; i < r.assignment.size(); ++i) {
    sums.col(static_cast<Eigen::Index>(r.assignment[i])) += points.col(static_cast<Eigen::Index>(i));
    ++counts[r.assignment[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) {
      r.centroids.col(static_cast<Eigen::Index>(c)) =
          sums.col(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
    }
  }
}

// Hartigan single-point moves: relocate a point whenever that lowers the total
// inertia once both centroids are updated. Lloyd fixed points can still admit
// such moves; the result of this pass cannot.
void hartigan_refine(const Eigen::Ref<const Eigen::MatrixXd>& points, KMeansResult& r,
                     std::size_t max_passes) {
  std::vector<std::size_t> counts;
  recompute_centroids(points, r, counts);
  const auto k = counts.size();
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < r.assignment.size(); ++i) {
      const std::size_t a = r.assignment[i];
      if (counts[a] < 2) continue;
      const auto x = points.col(static_cast<Eigen::Index>(i));
      const double na = static_cast<double>(counts[a]);
      const double leave = na / (na - 1.0) * (x - r.centroids.col(static_cast<Eigen::Index>(a))).squaredNorm();
      double best_delta = -1e-12 * std::max(1.0, leave);
      std::size_t target = k;
      for (std::size_t b = 0; b < k; ++b) {
        if (b == a) continue;
        const double nb = static_cast<double>(counts[b]);
        const double join =
            counts[b] == 0 ? 0.0 : nb / (nb + 1.0) * (x - r.centroids.col(static_cast<Eigen::Index>(b))).squaredNorm();
        if (join - leave < best_delta) {
          best_delta = join - leave;
          target = b;
        }
      }
      if (target == k) continue;
      const double nb = static_cast<double>(counts[target]);
      auto ca = r.centroids.col(static_cast<Eigen::Index>(a));
      auto cb = r.centroids.col(static_cast<Eigen::Index>(target));
      ca = (na * ca - x) / (na - 1.0);
      cb = (nb * cb + x) / (nb + 1.0);
      --counts[a];
      ++counts[target];
      r.assignment[i] = target;
      moved = true;
    }
    if (!moved) break;
  }
  recompute_centroids(points, r, counts);
}

}  // namespace

KMeansResult kmeans(const Eigen::Ref<const Eigen::MatrixXd>& points, std::size_t k,
                    std::size_t restarts, std::uint64_t seed, std::size_t max_iterations) {
  const auto n = static_cast<std::size_t>(points.cols());
  if (k < 1 || k > n) {
    throw InsufficientDataError("k-means with k=" + std::to_string(k) + " over " +
                                std::to_string(n) + " points");
  }
  if (restarts < 1) throw ContractError("k-means needs at least one restart");

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t run = 0; run < restarts; ++run) {
    auto engine = derive_engine(seed, Stream::kmeans, {run});
    KMeansResult cur;
    cur.centroids = plus_plus_seeds(points, k, engine);
    cur.assignment.assign(n, k);  // k = unassigned
    std::vector<std::size_t> counts;
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        double d2 = 0.0;
        const auto c = nearest(cur.centroids, points.col(static_cast<Eigen::Index>(i)), d2);
        if (c != cur.assignment[i]) {
          cur.assignment[i] = c;
          changed = true;
        }
      }
      if (!changed) break;
      recompute_centroids(points, cur, counts);
    }
    hartigan_refine(points, cur, max_iterations);
    cur.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cur.inertia += (points.col(static_cast<Eigen::Index>(i)) -
                      cur.centroids.col(static_cast<Eigen::Index>(cur.assignment[i])))
                         .squaredNorm();
    }
    if (cur.inertia < best.inertia) best = std::move(cur);
  }
  return best;
}

BenchResult eval_categorization(const CategorizationDataset& ds, const StaticEmbeddingTable& table,
                                std::size_t restarts, std::uint64_t seed) {
  if (table.empty()) throw ContractError("empty embedding table");
  std::map<std::string, std::size_t> category_ids;
  std::vector<std::size_t> rows;
  std::vector<std::string> categories;
  for (const auto& item : ds.items) {
    auto i = table.find(item.word);
    if (!i) continue;
    rows.push_back(*i);
    categories.push_back(item.category);
    category_ids.emplace(item.category, 0);
  }
  std::size_t next = 0;
  for (auto& [name, id] : category_ids) id = next++;
  const std::size_t k = category_ids.size();
  if (k < 2) {
    throw InsufficientDataError("categorization: " + std::to_string(k) +
                                " in-vocabulary categories (need >= 2)");
  }
  if (rows.size() < k) {
    throw InsufficientDataError("categorization: " + std::to_string(rows.size()) +
                                " in-vocabulary items for " + std::to_string(k) + " clusters");
  }

  Eigen::MatrixXd points(static_cast<Eigen::Index>(table.dim()), static_cast<Eigen::Index>(rows.size()));
  std::vector<std::size_t> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    points.col(static_cast<Eigen::Index>(i)) = table.vector(rows[i]);
    labels[i] = category_ids.at(categories[i]);
  }
  const auto result = kmeans(points, k, restarts, seed);

  BenchResult r;
  r.task = "categorization";
  r.seed = seed;
  r.score = purity(result.assignment, labels);
  r.n_evaluated = rows.size();
  r.coverage = static_cast<double>(rows.size()) / static_cast<double>(ds.items.size());
  return r;
}

// ---------------------------------------------------------------------------
// Loaders

namespace {

std::vector<std::string_view> split_on(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view chomp(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  return line;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

template <typename Dataset, typename Loader>
Dataset load_file(const std::filesystem::path& path, Loader loader) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  return loader(in, path.string());
}

}  // namespace

SimilarityDataset load_similarity_tsv(std::istream& in, const std::string& source) {
  SimilarityDataset ds;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = chomp(raw);
    if (blank(line)) continue;
    auto fields = split_on(line, '\t');
    if (fields.size() != 3) {
      throw ParseError(source, line_no,
                       "expected word1<TAB>word2<TAB>score, got " + std::to_string(fields.size()) +
                           " fields");
    }
    if (fields[0].empty() || fields[1].empty()) throw ParseError(source, line_no, "empty word");
    double score = 0.0;
    auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), score);
    if (ec != std::errc() || ptr != fields[2].data() + fields[2].size() || !std::isfinite(score)) {
      throw ParseError(source, line_no, "invalid score '" + std::string(fields[2]) + "'");
    }
    ds.pairs.push_back({std::string(fields[0]), std::string(fields[1]), score});
  }
  if (ds.pairs.size() < 2) throw ParseError(source, line_no, "fewer than 2 similarity pairs");
  return ds;
}

SimilarityDataset load_similarity_tsv(const std::filesystem::path& path) {
  return load_file<SimilarityDataset>(
      path, [](std::istream& in, const std::string& src) { return load_similarity_tsv(in, src); });
}

AnalogyDataset load_analogy_txt(std::istream& in, const std::string& source) {
  AnalogyDataset ds;
  std::string section;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = chomp(raw);
    if (blank(line)) continue;
    if (line.starts_with(": ")) {
      auto name = split_whitespace(line.substr(2));
      if (name.size() != 1) throw ParseError(source, line_no, "malformed section header");
      section = std::string(name.front());
      continue;
    }
    auto words = split_whitespace(line);
    if (words.size() != 4) {
      throw ParseError(source, line_no,
                       "expected 4 words, got " + std::to_string(words.size()));
    }
    ds.questions.push_back({std::string(words[0]), std::string(words[1]), std::string(words[2]),
                            std::string(words[3]), section});
  }
  if (ds.questions.empty()) throw ParseError(source, line_no, "no analogy questions");
  return ds;
}

AnalogyDataset load_analogy_txt(const std::filesystem::path& path) {
  return load_file<AnalogyDataset>(
      path, [](std::istream& in, const std::string& src) { return load_analogy_txt(in, src); });
}

CategorizationDataset load_categorization_tsv(std::istream& in, const std::string& source) {
  CategorizationDataset ds;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = chomp(raw);
    if (blank(line)) continue;
    auto fields = split_on(line, '\t');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw ParseError(source, line_no, "expected word<TAB>category");
    }
    ds.items.push_back({std::string(fields[0]), std::string(fields[1])});
  }
  std::map<std::string, std::size_t> sizes;
  for (const auto& item : ds.items) ++sizes[item.category];
  if (sizes.size() < 2) throw ParseError(source, line_no, "fewer than 2 categories");
  for (const auto& [category, size] : sizes) {
    if (size < 2) throw ParseError(source, line_no, "category '" + category + "' has one word");
  }
  return ds;
}

CategorizationDataset load_categorization_tsv(const std::filesystem::path& path) {
  return load_file<CategorizationDataset>(path, [](std::istream& in, const std::string& src) {
    return load_categorization_tsv(in, src);
  });
}

}  // namespace ctxgeo
