#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scenesense {

class CooccurrenceTable;

/// How a backend's numbers should be read.
enum class ScoreSemantics {
  kSumLogProb,          // sum of token log-probabilities (natural log)
  kMeanLogProb,         // per-token normalized
  kPseudoLogLikelihood  // masked-LM scoring; declared only, no implementation ships
};

const char* to_string(ScoreSemantics semantics);

struct BackendInfo {
  std::string model;
  ScoreSemantics semantics = ScoreSemantics::kSumLogProb;
};

/// Λ(W): a log-probability-like score for a whole string, higher is more
/// probable. Implementations must tolerate concurrent calls.
class LmScorer {
 public:
  virtual ~LmScorer() = default;

  virtual double score(std::string_view text) const;
  virtual std::vector<double> batch_score(std::span<const std::string> texts) const = 0;
  virtual BackendInfo info() const = 0;
};

using Embedding = std::vector<double>;

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;

  virtual Embedding embed(std::string_view text) const;
  virtual std::vector<Embedding> batch_embed(std::span<const std::string> texts) const = 0;
  /// Zero until known (HTTP embedders learn it from the first response).
  virtual std::size_t dimension() const = 0;
  virtual std::string name() const = 0;
};

/// Exact-match lookup table with a default; the simplest test double.
class TableScorer final : public LmScorer {
 public:
  explicit TableScorer(std::map<std::string, double> entries = {}, double default_score = 0.0,
                       std::string model = "mock-table");

  std::vector<double> batch_score(std::span<const std::string> texts) const override;
  BackendInfo info() const override { return {model_, ScoreSemantics::kSumLogProb}; }

 private:
  std::map<std::string, double, std::less<>> entries_;
  double default_score_;
  std::string model_;
};

/// Scores the zero-shot templates ("A room containing ... is called a(n) r.")
/// as Σ ln p(r|o_i) under a fixed co-occurrence table, so zero-shot argmax
/// coincides with the naive-Bayes baseline. Terms are accumulated in
/// lexicographic label order, matching `classify_statistical`.
class ConditionalScorer final : public LmScorer {
 public:
  ConditionalScorer(std::shared_ptr<const CooccurrenceTable> table, bool strict = false,
                    double default_score = 0.0);

  std::vector<double> batch_score(std::span<const std::string> texts) const override;
  BackendInfo info() const override { return {"mock-conditionals", ScoreSemantics::kSumLogProb}; }

  struct Parsed {
    std::vector<std::string> objects;
    std::string room;
  };
  /// Returns false for strings that are not a zero-shot template over the
  /// table's room labels.
  bool parse(std::string_view text, Parsed& out) const;

 private:
  double score_one(std::string_view text) const;

  std::shared_ptr<const CooccurrenceTable> table_;
  bool strict_;
  double default_score_;
};

std::shared_ptr<ConditionalScorer> mock_scorer_from_conditionals(
    std::shared_ptr<const CooccurrenceTable> table, bool strict = false);

/// Feature-hashing bag of word unigrams and bigrams, L2-normalized.
/// Bit-reproducible: hashing is FNV-1a 64 over UTF-8 bytes, seeded.
class HashEmbedder final : public TextEmbedder {
 public:
  HashEmbedder(std::size_t dimension, std::uint64_t seed);

  Embedding embed(std::string_view text) const override;
  std::vector<Embedding> batch_embed(std::span<const std::string> texts) const override;
  std::size_t dimension() const override { return dimension_; }
  std::string name() const override;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

std::shared_ptr<HashEmbedder> hash_embedder(std::size_t dimension, std::uint64_t seed);

}  // namespace scenesense
