#include "collex/mapping.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "collex/error.hpp"
#include "collex/io.hpp"
#include "collex/parallel.hpp"
#include "collex/rng.hpp"
#include "collex/text.hpp"

namespace collex::mapping {

namespace fs = std::filesystem;

namespace {

// Cosine ties closer than this go to the smaller concept_id; unit vectors
// built from equal-angle inputs can differ in the last bit after
// normalization.
constexpr double cosine_tie = 1e-12;

double parse_double(std::string_view s, const std::string& source, std::size_t line) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::validation, fmt::format("{}:{}: bad number '{}'", source, line, s));
  }
  return v;
}

std::vector<double> normalized(std::span<const double> v) {
  double sq = 0;
  for (double x : v) sq += x * x;
  if (!(sq > 0)) return {};
  const double norm = std::sqrt(sq);
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

ConceptInventory ConceptInventory::load(const fs::path& path) {
  auto in = io::open_input(path);
  return parse(in, path.string());
}

ConceptInventory ConceptInventory::parse(std::istream& in, const std::string& source) {
  io::TsvReader reader(in, source);
  const auto id_col = reader.column("concept_id");
  const auto name_col = reader.column("name");
  const auto pref_col = reader.column("is_preferred");
  std::vector<Concept> concepts;
  std::unordered_map<std::string, std::size_t> index;
  io::TsvRow row;
  while (reader.next(row)) {
    const std::string id(text::trim(row.at(id_col)));
    const std::string name = text::collapse_whitespace(row.at(name_col));
    const auto& pref = row.at(pref_col);
    if (id.empty() || name.empty()) {
      throw Error(ErrorCode::validation,
                  fmt::format("{}:{}: empty concept_id or name", source, row.line));
    }
    if (pref != "0" && pref != "1") {
      throw Error(ErrorCode::validation,
                  fmt::format("{}:{}: is_preferred must be 0 or 1", source, row.line));
    }
    auto [it, fresh] = index.emplace(id, concepts.size());
    if (fresh) concepts.push_back(Concept{id, {}, {}});
    auto& c = concepts[it->second];
    if (pref == "1") {
      if (!c.preferred_name.empty()) {
        throw Error(ErrorCode::validation,
                    fmt::format("{}:{}: second preferred name for {}", source, row.line, id));
      }
      c.preferred_name = name;
    } else {
      c.synonyms.push_back(name);
    }
  }
  for (const auto& c : concepts) {
    if (c.preferred_name.empty()) {
      throw Error(ErrorCode::validation,
                  fmt::format("{}: concept {} has no preferred name", source, c.concept_id));
    }
  }
  return from_concepts(std::move(concepts));
}

ConceptInventory ConceptInventory::from_concepts(std::vector<Concept> concepts) {
  std::sort(concepts.begin(), concepts.end(),
            [](const Concept& a, const Concept& b) { return a.concept_id < b.concept_id; });
  ConceptInventory inv;
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    auto& c = concepts[i];
    if (c.concept_id.empty() || text::trim(c.preferred_name).empty()) {
      throw Error(ErrorCode::validation, "concept with empty id or preferred name");
    }
    if (!inv.id_index_.emplace(c.concept_id, static_cast<std::uint32_t>(i)).second) {
      throw Error(ErrorCode::validation, fmt::format("duplicate concept_id {}", c.concept_id));
    }
    std::set<std::string> seen;
    auto add_name = [&](const std::string& name) {
      std::string key = text::phrase_key(name);
      if (key.empty() || !seen.insert(key).second) return false;
      inv.name_index_.emplace(key, static_cast<std::uint32_t>(i));
      inv.names_.push_back(Name{static_cast<std::uint32_t>(i), name, text::decode_utf8(key)});
      return true;
    };
    add_name(c.preferred_name);
    std::vector<std::string> kept;
    for (auto& s : c.synonyms) {
      if (add_name(s)) kept.push_back(std::move(s));
    }
    c.synonyms = std::move(kept);
  }
  inv.concepts_ = std::move(concepts);
  return inv;
}

const Concept* ConceptInventory::find(std::string_view concept_id) const {
  auto it = id_index_.find(std::string(concept_id));
  return it == id_index_.end() ? nullptr : &concepts_[it->second];
}

const Concept* ConceptInventory::find_by_name(std::string_view name) const {
  auto it = name_index_.find(text::phrase_key(name));
  return it == name_index_.end() ? nullptr : &concepts_[it->second];
}

EmbeddingStore::EmbeddingStore(std::size_t dimension) : dim_(dimension) {}

EmbeddingStore EmbeddingStore::load(const fs::path& path) {
  auto in = io::open_input(path);
  return parse(in, path.string());
}

EmbeddingStore EmbeddingStore::parse(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = text::trim(line);
    if (t.empty()) continue;
    if (!t.starts_with("dim ")) {
      throw Error(ErrorCode::validation,
                  fmt::format("{}:{}: expected 'dim <d>' header", source, line_no));
    }
    const auto d = text::trim(t.substr(4));
    const auto [ptr, ec] = std::from_chars(d.data(), d.data() + d.size(), dim);
    if (ec != std::errc{} || ptr != d.data() + d.size() || dim == 0) {
      throw Error(ErrorCode::validation,
                  fmt::format("{}:{}: bad dimension '{}'", source, line_no, d));
    }
    break;
  }
  if (dim == 0) throw Error(ErrorCode::validation, fmt::format("{}: empty embedding store", source));
  EmbeddingStore store(dim);
  std::vector<double> v;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::validation, fmt::format("{}:{}: expected term<TAB>vector", source,
                                                     line_no));
    }
    v.clear();
    for (auto part : text::split(std::string_view(line).substr(tab + 1), ' ')) {
      if (part.empty()) continue;
      v.push_back(parse_double(part, source, line_no));
    }
    if (v.size() != dim) {
      throw Error(ErrorCode::validation, fmt::format("{}:{}: expected {} values, got {}", source,
                                                     line_no, dim, v.size()));
    }
    std::string term = io::unescape_field(std::string_view(line).substr(0, tab));
    if (store.index_.contains(term)) {
      throw Error(ErrorCode::validation,
                  fmt::format("{}:{}: duplicate term '{}'", source, line_no, term));
    }
    try {
      store.add(std::move(term), v);
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("{}:{}: {}", source, line_no, e.what()));
    }
  }
  return store;
}

void EmbeddingStore::add(std::string term, std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw Error(ErrorCode::validation, fmt::format("vector for '{}' has dimension {}, expected {}",
                                                   term, vector.size(), dim_));
  }
  auto unit = normalized(vector);
  if (unit.empty()) {
    throw Error(ErrorCode::degenerate_vector, fmt::format("zero vector for '{}'", term));
  }
  auto it = index_.find(term);
  if (it != index_.end()) {
    std::copy(unit.begin(), unit.end(), data_.begin() + static_cast<std::ptrdiff_t>(it->second));
    return;
  }
  index_.emplace(std::move(term), data_.size());
  data_.insert(data_.end(), unit.begin(), unit.end());
}

std::span<const double> EmbeddingStore::find(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) it = index_.find(text::phrase_key(term));
  if (it == index_.end()) return {};
  return {data_.data() + it->second, dim_};
}

std::vector<double> TrigramHashEmbedder::embed(std::string_view term,
                                               std::size_t dimension) const {
  std::vector<double> v(dimension, 0.0);
  if (dimension == 0) return v;
  const auto cps = text::decode_utf8("#" + text::phrase_key(term) + "#");
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    const auto gram = text::encode_utf8(std::u32string_view(cps).substr(i, 3));
    const auto h = stable_hash(gram, seed_);
    v[h % dimension] += (h >> 63) != 0 ? -1.0 : 1.0;
  }
  auto unit = normalized(v);
  if (unit.empty()) {
    unit.assign(dimension, 0.0);
    unit[stable_hash(term, seed_) % dimension] = 1.0;
  }
  return unit;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(text::decode_utf8(a), text::decode_utf8(b));
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() > b.size()) std::swap(a, b);
  std::vector<std::size_t> row(a.size() + 1);
  for (std::size_t i = 0; i <= a.size(); ++i) row[i] = i;
  for (std::size_t j = 1; j <= b.size(); ++j) {
    std::size_t diag = row[0];
    row[0] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
      const std::size_t up = row[i];
      row[i] = std::min({row[i] + 1, row[i - 1] + 1, diag + (a[i - 1] != b[j - 1] ? 1u : 0u)});
      diag = up;
    }
  }
  return row[a.size()];
}

std::size_t levenshtein_bounded(std::u32string_view a, std::u32string_view b, std::size_t bound) {
  if (a.size() > b.size()) std::swap(a, b);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t big = bound + 1;
  if (m - n > bound) return big;
  if (n == 0) return m;
  std::vector<std::size_t> prev(m + 2, big), cur(m + 2, big);
  for (std::size_t j = 0; j <= m && j <= bound; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t lo = i > bound ? i - bound : 1;
    const std::size_t hi = std::min(m, i + bound);
    cur[lo - 1] = lo == 1 ? std::min(i, big) : big;
    std::size_t row_min = cur[lo - 1];
    for (std::size_t j = lo; j <= hi; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] != b[j - 1] ? 1 : 0);
      const std::size_t v = std::min({sub, prev[j] + 1, cur[j - 1] + 1, big});
      cur[j] = v;
      row_min = std::min(row_min, v);
    }
    if (hi < m) cur[hi + 1] = big;
    if (row_min > bound) return big;
    std::swap(prev, cur);
  }
  return std::min(prev[m], big);
}

double fuzzy_similarity(std::string_view a, std::string_view b) {
  const auto ua = text::decode_utf8(a);
  const auto ub = text::decode_utf8(b);
  const std::size_t m = std::max(ua.size(), ub.size());
  if (m == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(ua, ub)) / static_cast<double>(m);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::invalid_argument,
                fmt::format("cosine of vectors with dimensions {} and {}", u.size(), v.size()));
  }
  const double nu = std::sqrt(dot(u, u));
  const double nv = std::sqrt(dot(v, v));
  if (!(nu > 0) || !(nv > 0)) throw Error(ErrorCode::degenerate_vector, "zero-norm vector");
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

std::string_view to_string(Channel channel) noexcept {
  switch (channel) {
    case Channel::semantic: return "semantic";
    case Channel::lexical: return "lexical";
    case Channel::both: return "both";
  }
  return "semantic";
}

Channel parse_channel(std::string_view text) {
  if (text == "semantic") return Channel::semantic;
  if (text == "lexical") return Channel::lexical;
  if (text == "both") return Channel::both;
  throw Error(ErrorCode::validation, fmt::format("unknown channel '{}'", text));
}

void ThresholdConfig::validate() const {
  for (double t : {tau_semantic, tau_lexical}) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw Error(ErrorCode::configuration, fmt::format("threshold {} outside [0, 1]", t));
    }
  }
}

Mapper::Mapper(const ConceptInventory& inventory, const EmbeddingStore* store,
               const Embedder* fallback)
    : inventory_(inventory), store_(store), fallback_(fallback) {
  if (store_ == nullptr) return;
  std::vector<std::string> missing;
  name_vectors_.reserve(inventory_.names().size());
  for (const auto& name : inventory_.names()) {
    const auto v = store_->find(name.text);
    if (!v.empty()) {
      name_vectors_.emplace_back(v.begin(), v.end());
    } else if (fallback_ != nullptr) {
      name_vectors_.push_back(fallback_->embed(name.text, store_->dimension()));
    } else {
      missing.push_back(name.text);
      name_vectors_.emplace_back();
    }
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    throw MissingEmbeddingError(std::move(missing));
  }
}

std::vector<double> Mapper::lemma_vector(std::string_view lemma) const {
  const auto v = store_->find(lemma);
  if (!v.empty()) return {v.begin(), v.end()};
  if (fallback_ != nullptr) return fallback_->embed(lemma, store_->dimension());
  throw MissingEmbeddingError({std::string(lemma)});
}

void Mapper::require_vectors(std::span<const std::string> lemmas) const {
  if (store_ == nullptr || fallback_ != nullptr) return;
  std::vector<std::string> missing;
  for (const auto& l : lemmas) {
    if (!store_->contains(l)) missing.push_back(l);
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    throw MissingEmbeddingError(std::move(missing));
  }
}

std::optional<MappingCandidate> Mapper::semantic(std::string_view lemma) const {
  if (store_ == nullptr || inventory_.empty()) return std::nullopt;
  const auto v = lemma_vector(lemma);
  const auto& names = inventory_.names();
  double best = -2.0;
  std::uint32_t best_concept = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double s = dot(v, name_vectors_[i]);
    if (s > best + cosine_tie) {
      best = s;
      best_concept = names[i].concept_index;
    }
  }
  return MappingCandidate{std::string(lemma), inventory_.concepts()[best_concept].concept_id,
                          std::clamp(best, 0.0, 1.0), Channel::semantic};
}

std::optional<MappingCandidate> Mapper::lexical(std::string_view lemma, double floor) const {
  const auto key = text::decode_utf8(text::phrase_key(lemma));
  const auto la = key.size();
  bool found = false;
  double best = 0;
  std::uint32_t best_concept = 0;
  for (const auto& name : inventory_.names()) {
    const auto lb = name.folded.size();
    const auto m = std::max(la, lb);
    double sim = 1.0;
    if (m > 0) {
      const auto diff = la > lb ? la - lb : lb - la;
      const double upper = 1.0 - static_cast<double>(diff) / static_cast<double>(m);
      if (found ? upper <= best : !reaches(upper, floor)) continue;
      const double target = found ? best : floor - threshold_slack;
      const auto bound =
          static_cast<std::size_t>(std::floor((1.0 - target) * static_cast<double>(m) + 1e-9));
      const auto d = levenshtein_bounded(key, name.folded, bound);
      if (d > bound) continue;
      sim = 1.0 - static_cast<double>(d) / static_cast<double>(m);
    }
    if (found ? sim > best : reaches(sim, floor)) {
      found = true;
      best = sim;
      best_concept = name.concept_index;
      if (best >= 1.0) break;
    }
  }
  if (!found) return std::nullopt;
  return MappingCandidate{std::string(lemma), inventory_.concepts()[best_concept].concept_id, best,
                          Channel::lexical};
}

std::vector<MappingCandidate> combine(const std::optional<MappingCandidate>& semantic,
                                      const std::optional<MappingCandidate>& lexical,
                                      const ThresholdConfig& cfg) {
  const bool s = semantic && reaches(semantic->score, cfg.tau_semantic);
  const bool l = lexical && reaches(lexical->score, cfg.tau_lexical);
  std::vector<MappingCandidate> out;
  if (s && l && semantic->concept_id == lexical->concept_id) {
    auto c = *semantic;
    c.score = std::max(semantic->score, lexical->score);
    c.channel = Channel::both;
    out.push_back(std::move(c));
    return out;
  }
  if (s) out.push_back(*semantic);
  if (l) out.push_back(*lexical);
  return out;
}

std::vector<MappingCandidate> Mapper::ensemble(std::string_view lemma,
                                               const ThresholdConfig& cfg) const {
  return combine(semantic(lemma), lexical(lemma, cfg.tau_lexical), cfg);
}

std::vector<Mapper::Top1> Mapper::top1_all(std::span<const std::string> lemmas,
                                           unsigned threads) const {
  require_vectors(lemmas);
  std::vector<Top1> out(lemmas.size());
  parallel_chunks(lemmas.size(), threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i].semantic = semantic(lemmas[i]);
      out[i].lexical = lexical(lemmas[i]);
    }
  });
  return out;
}

std::optional<MappingCandidate> semantic_top1(std::string_view lemma,
                                              const ConceptInventory& inventory,
                                              const EmbeddingStore& store,
                                              const Embedder* fallback) {
  return Mapper(inventory, &store, fallback).semantic(lemma);
}

std::optional<MappingCandidate> lexical_top1(std::string_view lemma,
                                             const ConceptInventory& inventory) {
  return Mapper(inventory, nullptr).lexical(lemma);
}

std::vector<MappingCandidate> ensemble_map(std::string_view lemma,
                                           const ConceptInventory& inventory,
                                           const EmbeddingStore& store,
                                           const ThresholdConfig& cfg, const Embedder* fallback) {
  return Mapper(inventory, &store, fallback).ensemble(lemma, cfg);
}

std::vector<double> default_taus() {
  std::vector<double> taus;
  for (int i = 0; i <= 20; ++i) taus.push_back(i / 20.0);
  return taus;
}

Sweep sweep_from_scores(std::span<const double> semantic_scores,
                        std::span<const double> lexical_scores, std::span<const double> taus) {
  if (!std::is_sorted(taus.begin(), taus.end())) {
    throw Error(ErrorCode::invalid_argument, "sweep thresholds must be ascending");
  }
  Sweep sweep;
  sweep.taus.assign(taus.begin(), taus.end());
  auto count = [&](std::span<const double> scores) {
    std::vector<std::uint64_t> counts;
    for (double tau : taus) {
      counts.push_back(static_cast<std::uint64_t>(std::count_if(
          scores.begin(), scores.end(), [tau](double s) { return reaches(s, tau); })));
    }
    return counts;
  };
  sweep.semantic = count(semantic_scores);
  sweep.lexical = count(lexical_scores);
  return sweep;
}

Sweep threshold_sweep(std::span<const std::string> lemmas, const Mapper& mapper,
                      std::span<const double> taus, unsigned threads) {
  const auto top = mapper.top1_all(lemmas, threads);
  std::vector<double> sem, lex;
  for (const auto& t : top) {
    if (t.semantic) sem.push_back(t.semantic->score);
    if (t.lexical) lex.push_back(t.lexical->score);
  }
  return sweep_from_scores(sem, lex, taus);
}

double elbow(std::span<const double> taus, std::span<const std::uint64_t> counts) {
  if (taus.size() != counts.size()) {
    throw Error(ErrorCode::invalid_argument, "sweep thresholds and counts differ in length");
  }
  if (taus.size() < 3) {
    throw Error(ErrorCode::insufficient_data,
                fmt::format("elbow needs at least 3 sweep points, got {}", taus.size()));
  }
  const double step = taus[1] - taus[0];
  if (!(step > 0)) throw Error(ErrorCode::invalid_argument, "sweep thresholds must ascend");
  for (std::size_t i = 1; i < taus.size(); ++i) {
    if (std::abs((taus[i] - taus[i - 1]) - step) > 1e-6) {
      throw Error(ErrorCode::invalid_argument, "sweep thresholds are not evenly spaced");
    }
  }
  auto drop = [&](std::size_t i) {
    return static_cast<double>(counts[i]) - static_cast<double>(counts[i + 1]);
  };
  std::size_t best_i = 1;
  double best = drop(1) - drop(0);
  for (std::size_t i = 2; i + 1 < counts.size(); ++i) {
    const double s = drop(i) - drop(i - 1);
    if (s >= best) {
      best = s;
      best_i = i;
    }
  }
  return taus[best_i];
}

void write_sweep(std::ostream& out, const Sweep& sweep) {
  out << "tau\tsemantic\tlexical\n";
  for (std::size_t i = 0; i < sweep.taus.size(); ++i) {
    out << fmt::format("{}\t{}\t{}\n", sweep.taus[i],
                       i < sweep.semantic.size() ? sweep.semantic[i] : 0,
                       i < sweep.lexical.size() ? sweep.lexical[i] : 0);
  }
}

Sweep read_sweep(std::istream& in, const std::string& source) {
  io::TsvReader reader(in, source);
  const auto tau_col = reader.column("tau");
  const auto sem_col = reader.column("semantic");
  const auto lex_col = reader.column("lexical");
  Sweep sweep;
  io::TsvRow row;
  while (reader.next(row)) {
    sweep.taus.push_back(parse_double(row.at(tau_col), source, row.line));
    sweep.semantic.push_back(
        static_cast<std::uint64_t>(parse_double(row.at(sem_col), source, row.line)));
    sweep.lexical.push_back(
        static_cast<std::uint64_t>(parse_double(row.at(lex_col), source, row.line)));
  }
  return sweep;
}

std::string format_score(double score) { return fmt::format("{:.6f}", score); }

void write_candidates(std::ostream& out, std::vector<MappingCandidate> candidates,
                      const ConceptInventory& inventory, int round) {
  std::sort(candidates.begin(), candidates.end(),
            [](const MappingCandidate& a, const MappingCandidate& b) {
              if (a.lemma != b.lemma) return a.lemma < b.lemma;
              if (a.concept_id != b.concept_id) return a.concept_id < b.concept_id;
              return a.channel < b.channel;
            });
  out << candidates_header << '\n';
  for (const auto& c : candidates) {
    const auto* concept_ = inventory.find(c.concept_id);
    if (concept_ == nullptr) {
      throw Error(ErrorCode::not_found, fmt::format("unknown concept {}", c.concept_id));
    }
    io::write_row(out, {c.lemma, c.concept_id, concept_->preferred_name, format_score(c.score),
                        to_string(c.channel), std::to_string(round)});
  }
}

CandidateFile read_candidates(std::istream& in, const std::string& source) {
  io::TsvReader reader(in, source);
  const auto lemma_col = reader.column("lemma");
  const auto id_col = reader.column("concept_id");
  const auto score_col = reader.column("score");
  const auto channel_col = reader.column("channel");
  const auto round_col = reader.column("round");
  CandidateFile file;
  bool first = true;
  io::TsvRow row;
  while (reader.next(row)) {
    MappingCandidate c;
    c.lemma = row.at(lemma_col);
    c.concept_id = row.at(id_col);
    c.score = parse_double(row.at(score_col), source, row.line);
    c.channel = parse_channel(row.at(channel_col));
    if (!(c.score >= 0.0 && c.score <= 1.0)) {
      throw Error(ErrorCode::validation,
                  fmt::format("{}:{}: score outside [0, 1]", source, row.line));
    }
    const int round = static_cast<int>(parse_double(row.at(round_col), source, row.line));
    if (first) {
      file.round = round;
      first = false;
    } else if (round != file.round) {
      throw Error(ErrorCode::validation,
                  fmt::format("{}:{}: mixed rounds in one candidates file", source, row.line));
    }
    file.candidates.push_back(std::move(c));
  }
  return file;
}

}  // namespace collex::mapping
