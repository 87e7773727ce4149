#include "scenesense/lm_backend.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "scenesense/cooccurrence.hpp"
#include "scenesense/error.hpp"

namespace scenesense {

const char* to_string(ScoreSemantics semantics) {
  switch (semantics) {
    case ScoreSemantics::kSumLogProb: return "sum_logprob";
    case ScoreSemantics::kMeanLogProb: return "mean_logprob";
    case ScoreSemantics::kPseudoLogLikelihood: return "pseudo_log_likelihood";
  }
  return "unknown";
}

double LmScorer::score(std::string_view text) const {
  const std::string owned(text);
  return batch_score({&owned, 1}).front();
}

Embedding TextEmbedder::embed(std::string_view text) const {
  const std::string owned(text);
  return batch_embed({&owned, 1}).front();
}

TableScorer::TableScorer(std::map<std::string, double> entries, double default_score, std::string model)
    : entries_(entries.begin(), entries.end()), default_score_(default_score), model_(std::move(model)) {}

std::vector<double> TableScorer::batch_score(std::span<const std::string> texts) const {
  std::vector<double> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto it = entries_.find(t);
    out.push_back(it == entries_.end() ? default_score_ : it->second);
  }
  return out;
}

ConditionalScorer::ConditionalScorer(std::shared_ptr<const CooccurrenceTable> table, bool strict,
                                     double default_score)
    : table_(std::move(table)), strict_(strict), default_score_(default_score) {
  if (!table_) fail(ErrorKind::kConfig, "conditional scorer needs a table");
}

namespace {

constexpr std::string_view kPrefix = "A room containing ";
constexpr std::string_view kCalled = " is called ";

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

}  // namespace

bool ConditionalScorer::parse(std::string_view text, Parsed& out) const {
  if (!starts_with(text, kPrefix) || text.empty() || text.back() != '.') return false;
  const auto called = text.rfind(kCalled);
  if (called == std::string_view::npos || called < kPrefix.size()) return false;
  std::string_view list = text.substr(kPrefix.size(), called - kPrefix.size());
  std::string_view tail = text.substr(called + kCalled.size());
  tail.remove_suffix(1);
  if (starts_with(tail, "an ")) {
    tail.remove_prefix(3);
  } else if (starts_with(tail, "a ")) {
    tail.remove_prefix(2);
  } else {
    return false;
  }
  if (table_->room_index(tail) < 0) return false;
  out.room = std::string(tail);
  out.objects.clear();
  if (list.empty()) return false;

  auto known = [this](std::string_view o) { return table_->object_index(o) >= 0; };
  if (known(list)) {
    out.objects.emplace_back(list);
    return true;
  }
  if (list.find(", ") != std::string_view::npos) {
    std::size_t start = 0;
    while (true) {
      const auto comma = list.find(", ", start);
      if (comma == std::string_view::npos) {
        out.objects.emplace_back(list.substr(start));
        break;
      }
      out.objects.emplace_back(list.substr(start, comma - start));
      start = comma + 2;
    }
    if (out.objects.size() < 3 || !starts_with(out.objects.back(), "and ")) return false;
    out.objects.back().erase(0, 4);
    return true;
  }
  // Two items: prefer the split where both halves are known labels.
  constexpr std::string_view kAnd = " and ";
  std::size_t fallback = std::string_view::npos;
  for (auto pos = list.find(kAnd); pos != std::string_view::npos; pos = list.find(kAnd, pos + 1)) {
    if (fallback == std::string_view::npos) fallback = pos;
    if (known(list.substr(0, pos)) && known(list.substr(pos + kAnd.size()))) {
      fallback = pos;
      break;
    }
  }
  if (fallback == std::string_view::npos) {
    out.objects.emplace_back(list);
  } else {
    out.objects.emplace_back(list.substr(0, fallback));
    out.objects.emplace_back(list.substr(fallback + kAnd.size()));
  }
  return true;
}

double ConditionalScorer::score_one(std::string_view text) const {
  Parsed parsed;
  if (!parse(text, parsed)) {
    if (strict_) throw BackendError(ErrorKind::kProtocol, "not a zero-shot template: \"" + std::string(text) + "\"", {});
    return default_score_;
  }
  std::sort(parsed.objects.begin(), parsed.objects.end());
  parsed.objects.erase(std::unique(parsed.objects.begin(), parsed.objects.end()), parsed.objects.end());
  const auto r = static_cast<std::size_t>(table_->room_index(parsed.room));
  double total = 0.0;
  for (const auto& o : parsed.objects) {
    if (strict_ && table_->object_index(o) < 0)
      throw BackendError(ErrorKind::kProtocol, "unknown object '" + o + "' in \"" + std::string(text) + "\"", {});
    total += std::log(table_->conditional(o)[r]);
  }
  return total;
}

std::vector<double> ConditionalScorer::batch_score(std::span<const std::string> texts) const {
  std::vector<double> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(score_one(t));
  return out;
}

std::shared_ptr<ConditionalScorer> mock_scorer_from_conditionals(std::shared_ptr<const CooccurrenceTable> table,
                                                                 bool strict) {
  return std::make_shared<ConditionalScorer>(std::move(table), strict);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ULL ^ splitmix64(seed);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current += static_cast<char>(std::tolower(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

}  // namespace

HashEmbedder::HashEmbedder(std::size_t dimension, std::uint64_t seed) : dimension_(dimension), seed_(seed) {
  if (dimension_ == 0) fail(ErrorKind::kValidation, "embedding dimension must be positive");
}

std::string HashEmbedder::name() const { return "hash-" + std::to_string(seed_); }

Embedding HashEmbedder::embed(std::string_view text) const {
  const auto tokens = word_tokens(text);
  std::vector<std::string> features;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    features.push_back("u:" + tokens[i]);
    if (i + 1 < tokens.size()) features.push_back("b:" + tokens[i] + " " + tokens[i + 1]);
  }
  if (features.empty()) features.emplace_back("e:");
  Embedding v(dimension_, 0.0);
  for (const auto& f : features) {
    const std::uint64_t h = fnv1a(f, seed_);
    const double sign = (splitmix64(h) >> 63) ? -1.0 : 1.0;
    v[h % dimension_] += sign;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    // Every feature cancelled out; fall back to a fixed unit vector.
    v[fnv1a(text, seed_) % dimension_] = 1.0;
    return v;
  }
  for (double& x : v) x /= norm;
  return v;
}

std::vector<Embedding> HashEmbedder::batch_embed(std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

std::shared_ptr<HashEmbedder> hash_embedder(std::size_t dimension, std::uint64_t seed) {
  return std::make_shared<HashEmbedder>(dimension, seed);
}

}  // namespace scenesense
