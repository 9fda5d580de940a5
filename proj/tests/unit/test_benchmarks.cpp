#include <gtest/gtest.h>

#include <Eigen/QR>

#include <cmath>
#include <random>
#include <sstream>

#include "ctxgeo/benchmarks.hpp"
#include "ctxgeo/errors.hpp"
#include "ctxgeo/oracles.hpp"
#include "test_support.hpp"

using namespace ctxgeo;
using ctxgeo::testing::random_matrix;

namespace {

StaticEmbeddingTable table_of(const std::vector<std::pair<std::string, Eigen::VectorXd>>& rows) {
  StaticEmbeddingTable t(static_cast<std::size_t>(rows.front().second.size()));
  for (const auto& [w, v] : rows) t.insert(w, v.normalized());
  return t;
}

Eigen::VectorXd polar(double degrees) {
  const double r = degrees * 3.14159265358979323846 / 180.0;
  return Eigen::Vector2d(std::cos(r), std::sin(r));
}

template <typename F>
std::string parse_error_of(F&& load, const std::string& text) {
  std::istringstream in(text);
  try {
    load(in);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Spearman, Examples) {
  const std::vector<double> a{1, 2, 3, 4}, b{10, 20, 30, 40}, c{4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(spearman(a, b), 1.0);
  EXPECT_DOUBLE_EQ(spearman(a, c), -1.0);
  const std::vector<double> x{1, 2, 2, 4}, y{1, 3, 2, 4};
  EXPECT_NEAR(spearman(x, y), 0.9486832980505138, 1e-12);
}

TEST(Spearman, Errors) {
  const std::vector<double> a{1, 2, 3}, flat{5, 5, 5}, shorter{1, 2};
  EXPECT_THROW(spearman(a, flat), UndefinedCorrelationError);
  EXPECT_THROW(spearman(a, shorter), ContractError);
  const std::vector<double> one{1};
  EXPECT_THROW(spearman(one, one), InsufficientDataError);
}

TEST(Spearman, MatchesCountingRankOracleWithTies) {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> small(0, 5);
  std::uniform_int_distribution<int> len(3, 30);
  for (int t = 0; t < 500; ++t) {
    const int n = len(rng);
    std::vector<double> xs(static_cast<std::size_t>(n)), ys(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      xs[static_cast<std::size_t>(i)] = small(rng);
      ys[static_cast<std::size_t>(i)] = small(rng) * 0.5;
    }
    double expected = 0.0;
    try {
      expected = oracle::oracle_spearman(xs, ys);
    } catch (const std::invalid_argument&) {
      ASSERT_THROW(spearman(xs, ys), UndefinedCorrelationError);
      continue;
    }
    const double got = spearman(xs, ys);
    ASSERT_NEAR(got, expected, 1e-12);
    ASSERT_NEAR(got, spearman(ys, xs), 1e-15);
    ASSERT_LE(std::abs(got), 1.0 + 1e-15);
  }
}

TEST(Spearman, InvariantUnderStrictlyIncreasingTransforms) {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> xs(20), ys(20), ex(20);
    for (std::size_t i = 0; i < 20; ++i) {
      xs[i] = normal(rng);
      ys[i] = normal(rng);
      ex[i] = std::exp(3.0 * xs[i]) + 2.0;
    }
    ASSERT_NEAR(spearman(xs, ys), spearman(ex, ys), 1e-12);
  }
}

TEST(EvalSimilarity, PerfectAndReversedAgreement) {
  // Cosines with "a" fall as the angle grows.
  const auto table = table_of({{"a", polar(0)}, {"b", polar(10)}, {"c", polar(40)}, {"d", polar(80)}});
  SimilarityDataset ds{{{"a", "b", 9.0}, {"a", "c", 5.0}, {"a", "d", 1.0}, {"a", "zzz", 3.0}}};
  const auto r = eval_similarity(ds, table);
  EXPECT_EQ(r.task, "similarity");
  EXPECT_DOUBLE_EQ(r.score, 1.0);
  EXPECT_DOUBLE_EQ(r.coverage, 0.75);
  EXPECT_EQ(r.n_evaluated, 3U);
  for (auto& p : ds.pairs) p.human_score = -p.human_score;
  EXPECT_DOUBLE_EQ(eval_similarity(ds, table).score, -1.0);
  // Any strictly increasing map of human scores leaves the score unchanged.
  for (auto& p : ds.pairs) p.human_score = std::exp(p.human_score);
  EXPECT_DOUBLE_EQ(eval_similarity(ds, table).score, -1.0);
}

TEST(EvalSimilarity, ConstantCosinesAreUndefined) {
  const auto table = table_of({{"a", polar(0)}, {"b", polar(90)}, {"c", polar(180)}});
  SimilarityDataset ds{{{"a", "b", 1.0}, {"b", "c", 2.0}, {"c", "b", 3.0}}};
  EXPECT_THROW(eval_similarity(ds, table), UndefinedCorrelationError);
}

TEST(EvalSimilarity, TooFewCoveredPairs) {
  const auto table = table_of({{"a", polar(0)}, {"b", polar(90)}});
  SimilarityDataset ds{{{"a", "b", 1.0}, {"a", "x", 2.0}}};
  EXPECT_THROW(eval_similarity(ds, table), InsufficientDataError);
}

namespace {

// man/woman and king/queen differ by the same offset; the other words are far away.
StaticEmbeddingTable gender_table() {
  return table_of({{"man", Eigen::Vector3d(1, 0, 0)},
                   {"woman", Eigen::Vector3d(1, 1, 0)},
                   {"king", Eigen::Vector3d(0, 0, 1)},
                   {"queen", Eigen::Vector3d(0, 1, 1)},
                   {"apple", Eigen::Vector3d(-1, -1, -1)}});
}

}  // namespace

TEST(EvalAnalogy, ConstructedOffsetsScoreOne) {
  AnalogyDataset ds{{{"man", "woman", "king", "queen", ""}, {"king", "queen", "man", "woman", ""}}};
  const auto r = eval_analogy(ds, gender_table());
  EXPECT_EQ(r.task, "analogy");
  EXPECT_DOUBLE_EQ(r.score, 1.0);
  EXPECT_DOUBLE_EQ(r.coverage, 1.0);
  EXPECT_EQ(r.n_evaluated, 2U);
}

TEST(EvalAnalogy, OutOfVocabularyQuestionsAreSkipped) {
  AnalogyDataset ds{{{"man", "woman", "king", "queen", ""},
                     {"man", "woman", "prince", "princess", ""},
                     {"man", "woman", "king", "apple", ""}}};
  const auto r = eval_analogy(ds, gender_table());
  EXPECT_EQ(r.n_evaluated, 2U);
  EXPECT_NEAR(r.coverage, 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.score, 0.5);
}

TEST(EvalAnalogy, NothingCoveredIsInsufficient) {
  AnalogyDataset ds{{{"x", "y", "z", "w", ""}}};
  EXPECT_THROW(eval_analogy(ds, gender_table()), InsufficientDataError);
}

TEST(EvalAnalogy, InvariantUnderOrthogonalMaps) {
  std::mt19937_64 rng(47);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index d = 3 + t % 6;
    Eigen::MatrixXd basis = random_matrix(rng, d, 12);
    std::vector<std::pair<std::string, Eigen::VectorXd>> rows;
    for (Eigen::Index j = 0; j < 12; ++j) rows.emplace_back("w" + std::to_string(j), basis.col(j));
    AnalogyDataset ds;
    for (int q = 0; q < 30; ++q) {
      ds.questions.push_back({"w" + std::to_string(q % 12), "w" + std::to_string((q + 1) % 12),
                              "w" + std::to_string((q + 5) % 12), "w" + std::to_string((q * 7 + 3) % 12), ""});
    }
    const Eigen::MatrixXd q_rot = random_matrix(rng, d, d).householderQr().householderQ();
    std::vector<std::pair<std::string, Eigen::VectorXd>> rotated;
    for (const auto& [w, v] : rows) rotated.emplace_back(w, q_rot * v);
    ASSERT_DOUBLE_EQ(eval_analogy(ds, table_of(rows)).score, eval_analogy(ds, table_of(rotated)).score);
  }
}

TEST(EvalCategorization, SeparableClustersScoreOne) {
  const auto table = table_of({{"cat", polar(0)}, {"dog", polar(5)}, {"cow", polar(10)},
                               {"red", polar(120)}, {"blue", polar(125)}, {"green", polar(130)},
                               {"oak", polar(240)}, {"elm", polar(245)}});
  CategorizationDataset ds{{{"cat", "animal"}, {"dog", "animal"}, {"cow", "animal"},
                            {"red", "color"}, {"blue", "color"}, {"green", "color"},
                            {"oak", "tree"}, {"elm", "tree"}, {"yew", "tree"}}};
  const auto r = eval_categorization(ds, table, 10, 0);
  EXPECT_EQ(r.task, "categorization");
  EXPECT_DOUBLE_EQ(r.score, 1.0);
  EXPECT_NEAR(r.coverage, 8.0 / 9.0, 1e-15);
  EXPECT_EQ(r.n_evaluated, 8U);
}

TEST(EvalCategorization, IndistinguishableVectorsGiveHalf) {
  // Two items per category, all pointing the same way: every split scores 2/4.
  StaticEmbeddingTable t(2);
  for (const char* w : {"a", "b", "c", "d"}) t.insert(w, Eigen::Vector2d(1, 0));
  CategorizationDataset ds{{{"a", "x"}, {"b", "x"}, {"c", "y"}, {"d", "y"}}};
  EXPECT_DOUBLE_EQ(eval_categorization(ds, t, 5, 1).score, 0.5);
}

TEST(EvalCategorization, TooFewItems) {
  const auto t = table_of({{"a", polar(0)}, {"b", polar(90)}});
  CategorizationDataset one_category{{{"a", "x"}, {"b", "x"}}};
  EXPECT_THROW(eval_categorization(one_category, t), InsufficientDataError);
  CategorizationDataset uncovered{{{"a", "x"}, {"q", "y"}, {"r", "z"}}};
  EXPECT_THROW(eval_categorization(uncovered, t), InsufficientDataError);
}

TEST(KMeans, MatchesExhaustivePartitionOracle) {
  std::mt19937_64 rng(53);
  std::uniform_int_distribution<int> n_points(4, 8);
  std::normal_distribution<double> noise(0.0, 0.6);
  for (int t = 0; t < 60; ++t) {
    const int n = n_points(rng);
    const int k = 2 + t % 2;
    Eigen::MatrixXd centers = 2.0 * random_matrix(rng, 2, k);
    Eigen::MatrixXd points(2, n);
    std::vector<int> labels(static_cast<std::size_t>(n));
    std::vector<std::size_t> ulabels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const int c = i % k;
      labels[static_cast<std::size_t>(i)] = c;
      ulabels[static_cast<std::size_t>(i)] = static_cast<std::size_t>(c);
      points.col(i) = centers.col(c) + Eigen::Vector2d(noise(rng), noise(rng));
    }
    const auto best = oracle::best_partition(points, labels, k);
    const auto km = kmeans(points, static_cast<std::size_t>(k), 20, static_cast<std::uint64_t>(t));
    ASSERT_NEAR(km.inertia, best.inertia, 1e-9) << "trial " << t;
    ASSERT_DOUBLE_EQ(purity(km.assignment, ulabels), best.purity) << "trial " << t;
  }
}

TEST(KMeans, NoSinglePointMoveLowersInertia) {
  std::mt19937_64 rng(71);
  for (int t = 0; t < 50; ++t) {
    const Eigen::MatrixXd points = random_matrix(rng, 2, 12);
    const std::size_t k = 3;
    const auto km = kmeans(points, k, 3, static_cast<std::uint64_t>(t));
    auto inertia_of = [&](const std::vector<std::size_t>& assign) {
      double total = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        Eigen::Vector2d mean = Eigen::Vector2d::Zero();
        int count = 0;
        for (std::size_t i = 0; i < assign.size(); ++i) {
          if (assign[i] == c) mean += points.col(static_cast<Eigen::Index>(i)), ++count;
        }
        if (count == 0) continue;
        mean /= count;
        for (std::size_t i = 0; i < assign.size(); ++i) {
          if (assign[i] == c) total += (points.col(static_cast<Eigen::Index>(i)) - mean).squaredNorm();
        }
      }
      return total;
    };
    ASSERT_NEAR(inertia_of(km.assignment), km.inertia, 1e-9);
    for (std::size_t i = 0; i < km.assignment.size(); ++i) {
      for (std::size_t c = 0; c < k; ++c) {
        auto moved = km.assignment;
        moved[i] = c;
        if (std::count(moved.begin(), moved.end(), km.assignment[i]) == 0) continue;
        ASSERT_GE(inertia_of(moved), km.inertia - 1e-9) << "trial " << t << " point " << i;
      }
    }
  }
}

TEST(KMeans, DeterministicAndMonotoneInRestarts) {
  std::mt19937_64 rng(59);
  const Eigen::MatrixXd points = random_matrix(rng, 3, 40);
  const auto a = kmeans(points, 4, 5, 99);
  const auto b = kmeans(points, 4, 5, 99);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.inertia, b.inertia);
  // More restarts from the same seed stream can only find lower inertia.
  EXPECT_LE(kmeans(points, 4, 20, 99).inertia, a.inertia);
}

TEST(Purity, BoundsAndExamples) {
  const std::vector<std::size_t> assign{0, 0, 1, 1, 1}, labels{0, 1, 1, 1, 0};
  EXPECT_DOUBLE_EQ(purity(assign, labels), 0.6);
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<std::size_t> pick(0, 3);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::size_t> a(12), l(12);
    std::vector<std::size_t> counts(4, 0);
    for (std::size_t i = 0; i < 12; ++i) {
      a[i] = pick(rng);
      l[i] = pick(rng);
      ++counts[l[i]];
    }
    const double p = purity(a, l);
    ASSERT_LE(p, 1.0);
    ASSERT_GE(p, static_cast<double>(*std::max_element(counts.begin(), counts.end())) / 12.0);
  }
}

TEST(Loaders, SimilarityTsv) {
  std::istringstream in("old\tnew\t1.5\r\n\nbig\tlarge\t9\n");
  const auto ds = load_similarity_tsv(in);
  ASSERT_EQ(ds.pairs.size(), 2U);
  EXPECT_EQ(ds.pairs[0].second, "new");
  EXPECT_DOUBLE_EQ(ds.pairs[1].human_score, 9.0);
  const auto load = [](std::istream& s) { return load_similarity_tsv(s, "sim.tsv"); };
  EXPECT_NE(parse_error_of(load, "a\tb\t1\nc\td\n").find(":2"), std::string::npos);
  EXPECT_NE(parse_error_of(load, "a\tb\t1\nc\td\tx\n").find(":2"), std::string::npos);
  EXPECT_FALSE(parse_error_of(load, "a\tb\t1\n").empty());
}

TEST(Loaders, AnalogyText) {
  std::istringstream in(": capital\nathens greece paris france\n: family\nboy girl son daughter\n");
  const auto ds = load_analogy_txt(in);
  ASSERT_EQ(ds.questions.size(), 2U);
  EXPECT_EQ(ds.questions[0].section, "capital");
  EXPECT_EQ(ds.questions[1].b_star, "daughter");
  const auto load = [](std::istream& s) { return load_analogy_txt(s, "q.txt"); };
  EXPECT_NE(parse_error_of(load, "a b c d\na b c\n").find(":2"), std::string::npos);
}

TEST(Loaders, CategorizationTsv) {
  std::istringstream in("cat\tanimal\ndog\tanimal\nred\tcolor\nblue\tcolor\n");
  EXPECT_EQ(load_categorization_tsv(in).items.size(), 4U);
  const auto load = [](std::istream& s) { return load_categorization_tsv(s, "c.tsv"); };
  EXPECT_NE(parse_error_of(load, "cat\tanimal\ndog\n").find(":2"), std::string::npos);
  EXPECT_FALSE(parse_error_of(load, "cat\tanimal\ndog\tanimal\n").empty());
  EXPECT_FALSE(parse_error_of(load, "cat\tanimal\ndog\tanimal\nred\tcolor\n").empty());
}

TEST(BenchResult, JsonShape) {
  const auto j = to_json(BenchResult{"analogy", 0.5, 0.25, 4, 7});
  EXPECT_EQ(j.at("task"), "analogy");
  EXPECT_EQ(j.at("n_evaluated"), 4);
  EXPECT_EQ(j.at("seed"), 7);
}
