#include "collex/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <nlohmann/json.hpp>
#include <sstream>

#include "collex/error.hpp"
#include "collex/io.hpp"
#include "collex/parallel.hpp"
#include "collex/rng.hpp"
#include "collex/text.hpp"

namespace collex::pipeline {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::io, fmt::format("cannot create directory {}: {}", dir.string(),
                                           ec.message()));
  }
}

void require_file(const fs::path& path, std::string_view produced_by) {
  if (!fs::exists(path)) {
    throw Error(ErrorCode::configuration,
                fmt::format("{} not found; run `{}` first", path.string(), produced_by));
  }
}

template <typename Writer>
void write_atomic(const fs::path& path, Writer&& writer) {
  std::ostringstream out;
  writer(out);
  io::write_file_atomic(path, out.str());
}

std::optional<double> safe_elbow(const std::vector<double>& taus,
                                 const std::vector<std::uint64_t>& counts) {
  try {
    return mapping::elbow(taus, counts);
  } catch (const Error&) {
    return std::nullopt;
  }
}

void write_elbow(const RunLayout& run, const SweepResult& r) {
  ojson j;
  j["semantic"] = r.elbow_semantic ? ojson(*r.elbow_semantic) : ojson(nullptr);
  j["lexical"] = r.elbow_lexical ? ojson(*r.elbow_lexical) : ojson(nullptr);
  io::write_file_atomic(run.elbow(), j.dump(2) + "\n");
}

SweepResult finish_sweep(const RunLayout& run, mapping::Sweep sweep) {
  SweepResult r;
  r.elbow_semantic = safe_elbow(sweep.taus, sweep.semantic);
  r.elbow_lexical = safe_elbow(sweep.taus, sweep.lexical);
  r.sweep = std::move(sweep);
  ensure_dir(run.dir);
  write_atomic(run.sweep(), [&](std::ostream& out) { mapping::write_sweep(out, r.sweep); });
  write_elbow(run, r);
  return r;
}

std::map<std::string, std::vector<std::string>> surfaces_by_lemma(const fs::path& path) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& r : load_lemmas(path).records()) {
    auto& v = out[r.lemma];
    for (const auto& [s, n] : r.surface_forms) v.push_back(s);
  }
  return out;
}

}  // namespace

IngestStats ingest(const fs::path& corpus_path, corpus::CorpusFormat format,
                   const corpus::FilterPolicy& policy, const RunLayout& run) {
  policy.validate();
  auto in = io::open_input(corpus_path);
  corpus::TweetReader reader(in, format, corpus_path.string());
  IngestStats stats;
  std::vector<corpus::Tweet> kept;
  while (auto t = reader.next()) {
    if (!policy.allowed_langs.contains(t->lang)) {
      ++stats.dropped_lang;
    } else if (policy.drop_retweets && t->is_retweet) {
      ++stats.dropped_retweet;
    } else if (policy.drop_url_tweets && t->has_url) {
      ++stats.dropped_url;
    } else {
      kept.push_back(std::move(*t));
    }
  }
  stats.records = reader.records();
  stats.malformed = reader.skipped();
  stats.admitted = kept.size();

  const auto index = corpus::ContextIndex::build(kept);
  ensure_dir(run.dir);
  write_atomic(run.tweets(), [&](std::ostream& out) {
    for (const auto& t : kept) out << corpus::to_jsonl(t) << '\n';
  });
  index.save(run.context());
  ojson j{{"records", stats.records},
          {"malformed", stats.malformed},
          {"admitted", stats.admitted},
          {"dropped_lang", stats.dropped_lang},
          {"dropped_retweet", stats.dropped_retweet},
          {"dropped_url", stats.dropped_url}};
  io::write_file_atomic(run.ingest_stats(), j.dump(2) + "\n");
  return stats;
}

std::size_t extract_mentions(const RunLayout& run, const extract::Extractor& extractor,
                             const extract::EmojiMap& emoji, unsigned threads) {
  require_file(run.tweets(), "ingest");
  const auto tweets = corpus::load_tweets(run.tweets(), corpus::CorpusFormat::jsonl).tweets;
  if (threads == 0) threads = default_threads();
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(threads, tweets.size()));
  std::vector<std::vector<extract::EntityMention>> parts(workers);
  parallel_chunks(tweets.size(), static_cast<unsigned>(workers),
                  [&](std::size_t w, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      const auto clean = extract::preclean_text(tweets[i].text, emoji);
                      auto found = extract::extract_entities(tweets[i].id, clean, extractor);
                      for (auto& m : found) parts[w].push_back(std::move(m));
                    }
                  });
  std::vector<extract::EntityMention> all;
  for (auto& p : parts) {
    for (auto& m : p) all.push_back(std::move(m));
  }
  write_atomic(run.mentions(), [&](std::ostream& out) { extract::write_mentions(out, all); });
  return all.size();
}

NormalizeResult normalize_mentions(std::span<const extract::EntityMention> mentions,
                                   const normalize::RuleSet& rules,
                                   const normalize::Lemmatizer& lemmatizer,
                                   std::uint64_t min_count, std::uint64_t seed, unsigned threads) {
  if (threads == 0) threads = default_threads();
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(threads, mentions.size()));
  std::vector<normalize::LemmaTable> parts;
  for (std::size_t w = 0; w < workers; ++w) parts.emplace_back(normalize::default_sample_cap, seed);
  parallel_chunks(mentions.size(), static_cast<unsigned>(workers),
                  [&](std::size_t w, std::size_t begin, std::size_t end) {
                    normalize::Normalizer normalizer(rules, lemmatizer);
                    auto& table = parts[w];
                    for (std::size_t i = begin; i < end; ++i) {
                      for (const auto& [piece, lemma] : normalizer.normalize(mentions[i].surface)) {
                        if (!lemma.empty()) table.add(lemma, piece, mentions[i].tweet_id);
                      }
                    }
                  });
  NormalizeResult r{normalize::LemmaTable(normalize::default_sample_cap, seed),
                    normalize::LemmaTable(normalize::default_sample_cap, seed),
                    {},
                    std::nullopt};
  for (const auto& p : parts) r.all.merge(p);
  if (r.all.empty()) throw Error(ErrorCode::empty_input, "no lemmas were produced");
  r.filtered = normalize::frequency_filter(r.all, min_count);
  r.stats_all = normalize::summarize(r.all);
  if (!r.filtered.empty()) r.stats_filtered = normalize::summarize(r.filtered);
  return r;
}

NormalizeResult run_normalize(const RunLayout& run, const normalize::RuleSet& rules,
                              const normalize::Lemmatizer& lemmatizer, std::uint64_t min_count,
                              std::uint64_t seed, unsigned threads) {
  require_file(run.mentions(), "extract");
  auto in = io::open_input(run.mentions());
  const auto mentions = extract::read_mentions(in, run.mentions().string());
  auto r = normalize_mentions(mentions, rules, lemmatizer, min_count, seed, threads);
  write_atomic(run.lemmas_all(), [&](std::ostream& out) { normalize::write_lemma_table(out, r.all); });
  write_atomic(run.lemmas(),
               [&](std::ostream& out) { normalize::write_lemma_table(out, r.filtered); });
  io::write_file_atomic(run.stats_text(),
                        normalize::render_stats_text(r.stats_all, r.stats_filtered, min_count));
  io::write_file_atomic(run.stats_tsv(),
                        normalize::render_stats_tsv(r.stats_all, r.stats_filtered, min_count));
  return r;
}

normalize::LemmaTable load_lemmas(const fs::path& path) {
  require_file(path, "normalize");
  auto in = io::open_input(path);
  return normalize::read_lemma_table(in, path.string());
}

SweepResult run_sweep(const RunLayout& run, const mapping::Mapper& mapper, unsigned threads) {
  std::vector<std::string> lemmas;
  for (const auto& r : load_lemmas(run.lemmas()).records()) lemmas.push_back(r.lemma);
  std::sort(lemmas.begin(), lemmas.end());
  const auto taus = mapping::default_taus();
  return finish_sweep(run, mapping::threshold_sweep(lemmas, mapper, taus, threads));
}

SweepResult sweep_scores(const fs::path& scores, const RunLayout& run) {
  auto in = io::open_input(scores);
  io::TsvReader reader(in, scores.string());
  const auto c_sem = reader.column("semantic");
  const auto c_lex = reader.column("lexical");
  std::vector<double> sem;
  std::vector<double> lex;
  io::TsvRow row;
  const auto parse = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::validation,
                  fmt::format("{}:{}: bad score '{}'", scores.string(), row.line, s));
    }
  };
  while (reader.next(row)) {
    sem.push_back(parse(row.at(c_sem)));
    lex.push_back(parse(row.at(c_lex)));
  }
  const auto taus = mapping::default_taus();
  return finish_sweep(run, mapping::sweep_from_scores(sem, lex, taus));
}

curation::IterationState load_state(const RunLayout& run) {
  require_file(run.state(), "map");
  try {
    return curation::state_from_json(nlohmann::json::parse(io::read_file(run.state())));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::validation,
                fmt::format("{}: malformed state: {}", run.state().string(), e.what()));
  }
}

void save_state(const RunLayout& run, const curation::IterationState& state) {
  state.check_conservation();
  io::write_file_atomic(run.state(), curation::to_json(state).dump(2) + "\n");
}

const curation::IterationState& map_round(curation::IterationState& state, const RunLayout& run,
                                          const mapping::Mapper& mapper,
                                          const curation::LoopConfig& config, unsigned threads) {
  if (fs::exists(run.state())) {
    state = load_state(run);
  } else {
    state = curation::start_loop(load_lemmas(run.lemmas()), config);
  }
  curation::open_round(state, mapper, threads);
  ensure_dir(run.round_dir(state.round));
  write_atomic(run.candidates(state.round), [&](std::ostream& out) {
    mapping::write_candidates(out, state.candidates, mapper.inventory(), state.round);
  });
  write_sample(run, state, mapper.inventory());
  save_state(run, state);
  return state;
}

std::size_t write_sample(const RunLayout& run, const curation::IterationState& state,
                         const mapping::ConceptInventory& inventory) {
  ensure_dir(run.round_dir(state.round));
  write_atomic(run.sample(state.round), [&](std::ostream& out) {
    mapping::write_candidates(out, state.sample, inventory, state.round);
  });
  return state.sample.size();
}

std::vector<annotation::AnnotationTask> make_tasks(const RunLayout& run,
                                                   const curation::IterationState& state,
                                                   const mapping::ConceptInventory& inventory,
                                                   const std::vector<std::string>& annotators) {
  if (state.status != curation::LoopStatus::awaiting_labels) {
    throw Error(ErrorCode::conflict, fmt::format("round {} is not awaiting labels (state {})",
                                                 state.round, curation::to_string(state.status)));
  }
  const auto surfaces = surfaces_by_lemma(run.lemmas());
  std::vector<annotation::PairRef> pairs;
  for (const auto& c : state.candidates) {
    const auto* target = inventory.find(c.concept_id);
    if (!target) {
      throw Error(ErrorCode::not_found, fmt::format("concept {} not in inventory", c.concept_id));
    }
    annotation::PairRef p{c.lemma, c.concept_id, target->preferred_name, {}};
    if (auto it = surfaces.find(c.lemma); it != surfaces.end()) p.surfaces = it->second;
    pairs.push_back(std::move(p));
  }
  const auto seed = mix64(state.config.seed ^ static_cast<std::uint64_t>(state.round));
  auto tasks = annotation::split_and_assign(std::move(pairs), annotators, seed, state.round);
  require_file(run.context(), "ingest");
  const auto index = corpus::ContextIndex::load(run.context());
  for (auto& t : tasks) annotation::attach_context(t, index, seed);
  ensure_dir(run.round_dir(state.round));
  write_atomic(run.tasks(state.round), [&](std::ostream& out) {
    for (const auto& t : tasks) out << annotation::to_json(t).dump() << '\n';
  });
  return tasks;
}

std::size_t import_labels(const RunLayout& run, const curation::IterationState& state,
                          std::vector<curation::LabeledPair> labels) {
  if (state.status != curation::LoopStatus::awaiting_labels) {
    throw Error(ErrorCode::conflict, fmt::format("round {} is not awaiting labels (state {})",
                                                 state.round, curation::to_string(state.status)));
  }
  std::set<std::pair<std::string, std::string>> proposed;
  for (const auto& c : state.candidates) proposed.emplace(c.lemma, c.concept_id);
  std::map<std::pair<std::string, std::string>, int> seen;
  for (const auto& l : labels) {
    if (!proposed.contains({l.lemma, l.concept_id})) {
      throw Error(ErrorCode::validation,
                  fmt::format("pair ({}, {}) was not proposed in round {}", l.lemma, l.concept_id,
                              state.round));
    }
    auto [it, fresh] = seen.emplace(std::make_pair(l.lemma, l.concept_id), l.label);
    if (!fresh && it->second != l.label) {
      throw Error(ErrorCode::conflict, fmt::format("pair ({}, {}) has labels {} and {}", l.lemma,
                                                   l.concept_id, it->second, l.label));
    }
  }
  std::vector<curation::LabeledPair> unique;
  for (const auto& [key, label] : seen) unique.push_back({key.first, key.second, label});
  ensure_dir(run.round_dir(state.round));
  write_atomic(run.labels(state.round),
               [&](std::ostream& out) { curation::write_labels(out, unique); });
  return unique.size();
}

curation::RoundOutcome close_round(curation::IterationState& state, const RunLayout& run,
                                   const mapping::ConceptInventory& inventory) {
  const int round = state.round;
  std::vector<curation::LabeledPair> labels;
  if (fs::exists(run.labels(round))) {
    auto in = io::open_input(run.labels(round));
    labels = curation::read_labels(in, run.labels(round).string());
  } else if (fs::exists(run.annotation())) {
    annotation::RoundService service(run.annotation());
    if (!service.has_round(round) || !service.closed(round)) {
      throw Error(ErrorCode::incomplete_round,
                  fmt::format("round {} has no imported labels and its annotation round is not "
                              "closed",
                              round));
    }
    labels = service.export_labels(round);
    import_labels(run, state, labels);
  } else {
    throw Error(ErrorCode::incomplete_round,
                fmt::format("no labels for round {}; run `labels-import` first", round));
  }

  const auto lemmas = load_lemmas(run.lemmas());
  auto outcome = curation::close_round(state, labels, lemmas, inventory);
  write_atomic(run.round_triplets(round), [&](std::ostream& out) {
    curation::write_triplets(out, outcome.triplets.triplets);
  });
  write_atomic(run.triplets(), [&](std::ostream& out) {
    curation::write_triplets(out, outcome.triplets.triplets);
  });
  write_atomic(run.dictionary(),
               [&](std::ostream& out) { curation::write_dictionary(out, state.dictionary); });
  const auto& rec = state.history.back();
  ojson summary{{"round", round},
                {"accuracy", outcome.exit.accuracy},
                {"correct", outcome.exit.correct},
                {"incorrect", outcome.exit.incorrect},
                {"not_symptom", outcome.exit.not_symptom},
                {"decision", outcome.exit.decision == curation::Decision::stop ? "stop" : "proceed"},
                {"adopted", rec.adopted},
                {"removed", rec.removed},
                {"carried", rec.carried},
                {"triplets", outcome.triplets.triplets.size()},
                {"skipped_concepts", outcome.triplets.skipped},
                {"status", curation::to_string(state.status)}};
  io::write_file_atomic(run.summary(round), summary.dump(2) + "\n");
  save_state(run, state);
  return outcome;
}

curation::Dictionary load_dictionary(const fs::path& path) {
  require_file(path, "round-close");
  auto in = io::open_input(path);
  return curation::read_dictionary(in, path.string());
}

std::vector<std::string> load_texts(const fs::path& corpus_path, const extract::EmojiMap& emoji) {
  auto in = io::open_input(corpus_path);
  corpus::TweetReader reader(in, corpus::format_for_path(corpus_path), corpus_path.string());
  std::vector<std::string> texts;
  while (auto t = reader.next()) texts.push_back(extract::preclean_text(t->text, emoji));
  return texts;
}

analytics::MatchResult run_match(std::span<const std::string> texts,
                                 const curation::Dictionary& dictionary, const RunLayout& run,
                                 unsigned threads) {
  const analytics::DictionaryMatcher matcher(dictionary);
  auto result = analytics::match_corpus(texts, matcher, threads);
  ojson counts = ojson::object();
  for (const auto& [id, n] : result.concept_counts) counts[id] = n;
  ojson j{{"tweets", result.tweets}, {"matched_tweets", result.matched_tweets},
          {"concept_counts", counts}};
  ensure_dir(run.dir);
  io::write_file_atomic(run.matches(), j.dump(2) + "\n");
  return result;
}

analytics::MatchResult load_match(const fs::path& path) {
  require_file(path, "match");
  analytics::MatchResult r;
  try {
    const auto j = nlohmann::json::parse(io::read_file(path));
    r.tweets = j.at("tweets").get<std::uint64_t>();
    r.matched_tweets = j.at("matched_tweets").get<std::uint64_t>();
    for (const auto& [id, n] : j.at("concept_counts").items()) {
      r.concept_counts[id] = n.get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::validation, fmt::format("{}: {}", path.string(), e.what()));
  }
  return r;
}

analytics::FrequencyReport run_report(const analytics::MatchResult& matches,
                                      const curation::Dictionary& dictionary,
                                      const analytics::MergeMap* merge_map,
                                      std::uint64_t min_count, const RunLayout& run) {
  auto counts = analytics::counts_by_name(matches, dictionary);
  if (merge_map) counts = analytics::merge(counts, *merge_map);
  auto r = analytics::report(counts, matches.matched_tweets, min_count);
  ensure_dir(run.dir);
  write_atomic(run.report_tsv(), [&](std::ostream& out) { analytics::write_report_tsv(out, r); });
  io::write_file_atomic(run.report_text(), analytics::render_report_text(r));
  return r;
}

}  // namespace collex::pipeline
