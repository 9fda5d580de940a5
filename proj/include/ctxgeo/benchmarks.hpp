#pragma once

// Word-vector benchmark evaluators: similarity (Spearman), analogy (3CosAdd)
// and concept categorization (k-means purity), plus their data loaders.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "ctxgeo/distill.hpp"

namespace ctxgeo {

struct SimilarityPair {
  std::string first;
  std::string second;
  double human_score = 0.0;
};

struct SimilarityDataset {
  std::vector<SimilarityPair> pairs;
};

/// a : a_star :: b : b_star
struct AnalogyQuestion {
  std::string a;
  std::string a_star;
  std::string b;
  std::string b_star;
  std::string section;  // empty when the file has no ": name" lines
};

struct AnalogyDataset {
  std::vector<AnalogyQuestion> questions;
};

struct CategorizationItem {
  std::string word;
  std::string category;
};

struct CategorizationDataset {
  std::vector<CategorizationItem> items;
};

struct BenchResult {
  std::string task;
  double score = 0.0;
  double coverage = 0.0;  // fraction of items fully in-vocabulary
  std::size_t n_evaluated = 0;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const BenchResult& r);

/// Pearson correlation of average ranks (ties share their mean rank).
/// Throws UndefinedCorrelationError when either side is constant.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// Spearman between table cosines and human scores over in-vocabulary pairs.
BenchResult eval_similarity(const SimilarityDataset& ds, const StaticEmbeddingTable& table);

/// 3CosAdd accuracy: argmax over the whole table of cos(v, v_a* - v_a + v_b),
/// excluding a, a*, b. Questions with any out-of-vocabulary word are skipped.
BenchResult eval_analogy(const AnalogyDataset& ds, const StaticEmbeddingTable& table);

/// k-means (k = number of in-vocabulary categories, k-means++ seeding) with
/// `restarts` seeded restarts; the lowest-inertia run is scored by purity.
BenchResult eval_categorization(const CategorizationDataset& ds, const StaticEmbeddingTable& table,
                                std::size_t restarts = 10, std::uint64_t seed = 0);

struct KMeansResult {
  std::vector<std::size_t> assignment;
  Eigen::MatrixXd centroids;
  double inertia = 0.0;
};

/// Lloyd iterations from k-means++ seeds over the columns of `points`, then
/// Hartigan single-point moves until no move lowers the inertia. Ties in Lloyd
/// assignment go to the lowest cluster index; a cluster emptied by Lloyd keeps
/// its previous centroid. Deterministic for a fixed seed.
KMeansResult kmeans(const Eigen::Ref<const Eigen::MatrixXd>& points, std::size_t k,
                    std::size_t restarts, std::uint64_t seed, std::size_t max_iterations = 300);

/// (1/N) * sum over clusters of the largest single-label count in the cluster.
double purity(std::span<const std::size_t> assignment, std::span<const std::size_t> labels);

SimilarityDataset load_similarity_tsv(std::istream& in, const std::string& source = "<stream>");
SimilarityDataset load_similarity_tsv(const std::filesystem::path& path);
AnalogyDataset load_analogy_txt(std::istream& in, const std::string& source = "<stream>");
AnalogyDataset load_analogy_txt(const std::filesystem::path& path);
CategorizationDataset load_categorization_tsv(std::istream& in,
                                              const std::string& source = "<stream>");
CategorizationDataset load_categorization_tsv(const std::filesystem::path& path);

}  // namespace ctxgeo
