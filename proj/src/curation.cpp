#include "collex/curation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>

#include "collex/error.hpp"
#include "collex/io.hpp"
#include "collex/rng.hpp"
#include "collex/text.hpp"

namespace collex::curation {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

bool candidate_less(const MappingCandidate& a, const MappingCandidate& b) {
  if (a.lemma != b.lemma) return a.lemma < b.lemma;
  if (a.concept_id != b.concept_id) return a.concept_id < b.concept_id;
  return a.channel < b.channel;
}

int parse_int(std::string_view s, const std::string& source, std::size_t line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::validation, fmt::format("{}:{}: bad integer '{}'", source, line, s));
  }
  return v;
}

double parse_real(std::string_view s, const std::string& source, std::size_t line) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::validation, fmt::format("{}:{}: bad number '{}'", source, line, s));
  }
  return v;
}

ojson candidate_json(const MappingCandidate& c) {
  ojson j;
  j["lemma"] = c.lemma;
  j["concept_id"] = c.concept_id;
  j["score"] = c.score;
  j["channel"] = mapping::to_string(c.channel);
  return j;
}

MappingCandidate candidate_from_json(const json& j) {
  return MappingCandidate{j.at("lemma").get<std::string>(), j.at("concept_id").get<std::string>(),
                          j.at("score").get<double>(),
                          mapping::parse_channel(j.at("channel").get<std::string>())};
}

std::string_view decision_name(Decision d) { return d == Decision::stop ? "stop" : "continue"; }

}  // namespace

bool valid_label(int label) noexcept { return label >= 0 && label <= 2; }

std::vector<MappingCandidate> sample_for_validation(std::vector<MappingCandidate> candidates,
                                                    std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::invalid_argument, "sample size must be at least 1");
  if (candidates.empty()) throw Error(ErrorCode::empty_input, "no candidates to sample");
  std::sort(candidates.begin(), candidates.end(), candidate_less);
  if (candidates.size() <= n) return candidates;
  Rng rng(seed);
  auto picks = rng.sample_indices(candidates.size(), n);
  std::sort(picks.begin(), picks.end());
  std::vector<MappingCandidate> out;
  out.reserve(n);
  for (auto i : picks) out.push_back(std::move(candidates[i]));
  return out;
}

ExitEvaluation evaluate_exit(std::span<const int> labels, double exit_accuracy) {
  if (labels.empty()) throw Error(ErrorCode::empty_input, "no labels in the validation sample");
  ExitEvaluation e;
  for (int l : labels) {
    switch (l) {
      case label_incorrect: ++e.incorrect; break;
      case label_correct: ++e.correct; break;
      case label_not_symptom: ++e.not_symptom; break;
      default: throw Error(ErrorCode::validation, fmt::format("label {} not in {{0, 1, 2}}", l));
    }
  }
  if (e.correct + e.incorrect == 0) {
    throw Error(ErrorCode::undefined_accuracy,
                "every sampled pair is labeled 2; accuracy is undefined");
  }
  e.accuracy = static_cast<double>(e.correct) / static_cast<double>(e.correct + e.incorrect);
  e.decision = e.accuracy < exit_accuracy ? Decision::stop : Decision::proceed;
  return e;
}

Partition partition_annotations(std::span<const LabeledPair> records) {
  std::map<std::pair<std::string, std::string>, int> finals;
  for (const auto& r : records) {
    if (!valid_label(r.label)) {
      throw Error(ErrorCode::validation,
                  fmt::format("label {} for ({}, {}) not in {{0, 1, 2}}", r.label, r.lemma,
                              r.concept_id));
    }
    auto [it, fresh] = finals.emplace(std::make_pair(r.lemma, r.concept_id), r.label);
    if (!fresh && it->second != r.label) {
      throw Error(ErrorCode::adjudication_integrity,
                  fmt::format("pair ({}, {}) has final labels {} and {}", r.lemma, r.concept_id,
                              it->second, r.label));
    }
  }
  Partition p;
  std::set<std::string> correct_lemmas;
  for (const auto& [key, label] : finals) {
    const auto& [lemma, concept_id] = key;
    if (label == label_correct) {
      p.positives[concept_id].insert(lemma);
      correct_lemmas.insert(lemma);
    } else if (label == label_incorrect) {
      p.negatives[concept_id].insert(lemma);
    }
  }
  for (const auto& [key, label] : finals) {
    if (label == label_not_symptom && !correct_lemmas.contains(key.first)) {
      p.removed.insert(key.first);
    }
  }
  return p;
}

TripletResult build_triplets(const Partition& partition,
                             const mapping::ConceptInventory& inventory, std::uint64_t seed,
                             std::size_t k) {
  std::set<std::string> concept_ids;
  for (const auto& [id, lemmas] : partition.positives) {
    if (!lemmas.empty()) concept_ids.insert(id);
  }
  for (const auto& [id, lemmas] : partition.negatives) {
    if (!lemmas.empty()) concept_ids.insert(id);
  }
  static const std::set<std::string> none;
  auto lookup = [](const auto& m, const std::string& id) -> const std::set<std::string>& {
    auto it = m.find(id);
    return it == m.end() ? none : it->second;
  };

  TripletResult result;
  for (const auto& id : concept_ids) {
    const auto* concept_ = inventory.find(id);
    if (concept_ == nullptr) {
      throw Error(ErrorCode::not_found, fmt::format("unknown concept {}", id));
    }
    TrainingTriplet t;
    t.query = concept_->preferred_name;
    const auto& pos = lookup(partition.positives, id);
    if (pos.empty()) {
      t.positives = {t.query};
    } else {
      t.positives.assign(pos.begin(), pos.end());
    }
    const std::set<std::string> pos_set(t.positives.begin(), t.positives.end());
    for (const auto& n : lookup(partition.negatives, id)) {
      if (!pos_set.contains(n)) t.negatives.push_back(n);
    }
    if (t.negatives.empty()) {
      std::set<std::string> pool_set;
      for (const auto& [other, lemmas] : partition.positives) {
        if (other == id) continue;
        for (const auto& l : lemmas) {
          if (!pos_set.contains(l)) pool_set.insert(l);
        }
      }
      if (pool_set.empty()) {
        result.skipped.push_back(id);
        continue;
      }
      const std::vector<std::string> pool(pool_set.begin(), pool_set.end());
      Rng rng(mix64(seed ^ stable_hash(id)));
      for (auto i : rng.sample_indices(pool.size(), k)) t.negatives.push_back(pool[i]);
      std::sort(t.negatives.begin(), t.negatives.end());
    }
    result.triplets.push_back(std::move(t));
  }
  return result;
}

ojson to_json(const TrainingTriplet& triplet) {
  ojson j;
  j["query"] = triplet.query;
  j["positives"] = triplet.positives;
  j["negatives"] = triplet.negatives;
  return j;
}

void write_triplets(std::ostream& out, const std::vector<TrainingTriplet>& triplets) {
  for (const auto& t : triplets) out << to_json(t).dump() << '\n';
}

std::vector<TrainingTriplet> read_triplets(std::istream& in, const std::string& source) {
  std::vector<TrainingTriplet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      out.push_back(TrainingTriplet{j.at("query").get<std::string>(),
                                    j.at("positives").get<std::vector<std::string>>(),
                                    j.at("negatives").get<std::vector<std::string>>()});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::validation, fmt::format("{}:{}: {}", source, line_no, e.what()));
    }
  }
  return out;
}

void Dictionary::adopt(const std::string& concept_id, const std::string& concept_name,
                       DictionaryEntry entry) {
  if (entry.lemma.empty()) throw Error(ErrorCode::validation, "dictionary entry without lemma");
  if (entry.surfaces.empty()) entry.surfaces.push_back(entry.lemma);
  std::sort(entry.surfaces.begin(), entry.surfaces.end());
  entry.surfaces.erase(std::unique(entry.surfaces.begin(), entry.surfaces.end()),
                       entry.surfaces.end());
  auto owner = owner_.find(entry.lemma);
  if (owner != owner_.end()) {
    if (owner->second != concept_id) {
      throw Error(ErrorCode::conflict,
                  fmt::format("lemma '{}' is already adopted under {}; re-adjudicate before "
                              "adding it under {}",
                              entry.lemma, owner->second, concept_id));
    }
    return;
  }
  owner_.emplace(entry.lemma, concept_id);
  names_.emplace(concept_id, concept_name);
  const std::string lemma = entry.lemma;
  entries_[concept_id].emplace(lemma, std::move(entry));
}

const std::string& Dictionary::concept_name(const std::string& concept_id) const {
  static const std::string empty;
  auto it = names_.find(concept_id);
  return it == names_.end() ? empty : it->second;
}

const std::string* Dictionary::concept_of(const std::string& lemma) const {
  auto it = owner_.find(lemma);
  return it == owner_.end() ? nullptr : &it->second;
}

void write_dictionary(std::ostream& out, const Dictionary& dictionary) {
  out << dictionary_header << '\n';
  for (const auto& [concept_id, lemmas] : dictionary.entries()) {
    for (const auto& [lemma, e] : lemmas) {
      io::write_row(out, {concept_id, dictionary.concept_name(concept_id), lemma,
                          io::join_escaped(e.surfaces, ';'), std::to_string(e.round),
                          mapping::format_score(e.score)});
    }
  }
}

Dictionary read_dictionary(std::istream& in, const std::string& source) {
  io::TsvReader reader(in, source);
  const auto id_col = reader.column("concept_id");
  const auto name_col = reader.column("concept_name");
  const auto lemma_col = reader.column("lemma");
  const auto surf_col = reader.column("surfaces");
  const auto round_col = reader.column("round");
  const auto score_col = reader.column("score");
  Dictionary d;
  io::TsvRow row;
  while (reader.next(row)) {
    DictionaryEntry e;
    e.lemma = row.at(lemma_col);
    e.surfaces = io::split_escaped(row.at(surf_col), ';');
    e.round = parse_int(row.at(round_col), source, row.line);
    e.score = parse_real(row.at(score_col), source, row.line);
    d.adopt(row.at(id_col), row.at(name_col), std::move(e));
  }
  return d;
}

void accumulate(Dictionary& dictionary, const Partition& partition,
                const normalize::LemmaTable& lemmas, std::span<const MappingCandidate> candidates,
                const mapping::ConceptInventory& inventory, int round) {
  std::map<std::pair<std::string, std::string>, double> scores;
  for (const auto& c : candidates) {
    auto& s = scores[{c.lemma, c.concept_id}];
    s = std::max(s, c.score);
  }
  // Check every adoption first so a conflict leaves the dictionary untouched.
  std::map<std::string, std::string> planned;
  for (const auto& [concept_id, lemma_set] : partition.positives) {
    for (const auto& lemma : lemma_set) {
      const auto* owner = dictionary.concept_of(lemma);
      auto [it, fresh] = planned.emplace(lemma, concept_id);
      if ((owner != nullptr && *owner != concept_id) || (!fresh && it->second != concept_id)) {
        throw Error(ErrorCode::conflict,
                    fmt::format("lemma '{}' labeled correct for {} and {}", lemma,
                                owner != nullptr && *owner != concept_id ? *owner : it->second,
                                concept_id));
      }
    }
  }
  for (const auto& [concept_id, lemma_set] : partition.positives) {
    const auto* concept_ = inventory.find(concept_id);
    if (concept_ == nullptr) {
      throw Error(ErrorCode::not_found, fmt::format("unknown concept {}", concept_id));
    }
    for (const auto& lemma : lemma_set) {
      DictionaryEntry e;
      e.lemma = lemma;
      if (const auto* rec = lemmas.find(lemma)) {
        for (const auto& [surface, n] : rec->surface_forms) e.surfaces.push_back(surface);
      }
      e.round = round;
      auto it = scores.find({lemma, concept_id});
      e.score = it == scores.end() ? 0.0 : it->second;
      dictionary.adopt(concept_id, concept_->preferred_name, std::move(e));
    }
  }
}

void write_labels(std::ostream& out, std::vector<LabeledPair> labels) {
  std::sort(labels.begin(), labels.end(), [](const LabeledPair& a, const LabeledPair& b) {
    if (a.lemma != b.lemma) return a.lemma < b.lemma;
    return a.concept_id < b.concept_id;
  });
  out << labels_header << '\n';
  for (const auto& l : labels) {
    io::write_row(out, {l.lemma, l.concept_id, std::to_string(l.label)});
  }
}

std::vector<LabeledPair> read_labels(std::istream& in, const std::string& source) {
  io::TsvReader reader(in, source);
  const auto lemma_col = reader.column("lemma");
  const auto id_col = reader.column("concept_id");
  const auto label_col = reader.column("final_label");
  std::vector<LabeledPair> out;
  io::TsvRow row;
  while (reader.next(row)) {
    LabeledPair p{row.at(lemma_col), row.at(id_col), parse_int(row.at(label_col), source, row.line)};
    if (!valid_label(p.label)) {
      throw Error(ErrorCode::validation,
                  fmt::format("{}:{}: label {} not in {{0, 1, 2}}", source, row.line, p.label));
    }
    out.push_back(std::move(p));
  }
  return out;
}

void LoopConfig::validate() const {
  if (sample_size == 0) throw Error(ErrorCode::configuration, "sample_size must be at least 1");
  if (!(exit_accuracy >= 0.0 && exit_accuracy <= 1.0)) {
    throw Error(ErrorCode::configuration, "exit_accuracy must lie in [0, 1]");
  }
  if (max_rounds < 1) throw Error(ErrorCode::configuration, "max_rounds must be at least 1");
  if (negatives_k == 0) throw Error(ErrorCode::configuration, "negatives_k must be at least 1");
  thresholds.validate();
}

std::string_view to_string(LoopStatus status) noexcept {
  switch (status) {
    case LoopStatus::awaiting_mapping: return "awaiting_mapping";
    case LoopStatus::awaiting_labels: return "awaiting_labels";
    case LoopStatus::complete: return "complete";
    case LoopStatus::stopped: return "stopped";
  }
  return "awaiting_mapping";
}

void IterationState::check_conservation() const {
  const std::size_t total = adopted.size() + abandoned.size() + removed.size() + pending.size();
  std::set<std::string> all;
  for (const auto* s : {&adopted, &abandoned, &removed, &pending}) all.insert(s->begin(), s->end());
  if (total != initial_count || all.size() != total) {
    throw Error(ErrorCode::integrity,
                fmt::format("lemma accounting broken: adopted {} + abandoned {} + removed {} + "
                            "pending {} vs initial {} ({} distinct)",
                            adopted.size(), abandoned.size(), removed.size(), pending.size(),
                            initial_count, all.size()));
  }
  for (const auto& l : pending) {
    if (dictionary.concept_of(l) != nullptr) {
      throw Error(ErrorCode::integrity, fmt::format("pending lemma '{}' is in the dictionary", l));
    }
  }
}

IterationState start_loop(const normalize::LemmaTable& filtered, const LoopConfig& config) {
  config.validate();
  IterationState s;
  s.config = config;
  for (const auto& r : filtered.records()) s.pending.insert(r.lemma);
  s.initial_count = s.pending.size();
  if (s.pending.empty()) s.status = LoopStatus::complete;
  return s;
}

void open_round(IterationState& state, const mapping::Mapper& mapper, unsigned threads) {
  if (state.status != LoopStatus::awaiting_mapping) {
    throw Error(ErrorCode::conflict, fmt::format("round {} cannot be mapped in state {}",
                                                 state.round, to_string(state.status)));
  }
  const std::vector<std::string> lemmas(state.pending.begin(), state.pending.end());
  const auto top = mapper.top1_all(lemmas, threads);
  state.candidates.clear();
  RoundRecord rec;
  rec.round = state.round;
  for (std::size_t i = 0; i < lemmas.size(); ++i) {
    auto found = mapping::combine(top[i].semantic, top[i].lexical, state.config.thresholds);
    if (found.empty()) {
      state.pending.erase(lemmas[i]);
      state.abandoned.insert(lemmas[i]);
      ++rec.unmapped_lemmas;
      continue;
    }
    ++rec.mapped_lemmas;
    for (auto& c : found) state.candidates.push_back(std::move(c));
  }
  std::sort(state.candidates.begin(), state.candidates.end(), candidate_less);
  rec.candidates = state.candidates.size();
  if (state.candidates.empty()) {
    state.sample.clear();
    rec.outcome = "no candidates";
    state.history.push_back(std::move(rec));
    state.status = LoopStatus::complete;
    state.check_conservation();
    return;
  }
  state.sample = sample_for_validation(state.candidates, state.config.sample_size,
                                       mix64(state.config.seed ^ static_cast<std::uint64_t>(state.round)));
  rec.sampled = state.sample.size();
  state.history.push_back(std::move(rec));
  state.status = LoopStatus::awaiting_labels;
  state.check_conservation();
}

RoundOutcome close_round(IterationState& state, std::span<const LabeledPair> labels,
                         const normalize::LemmaTable& lemmas,
                         const mapping::ConceptInventory& inventory) {
  if (state.status != LoopStatus::awaiting_labels) {
    throw Error(ErrorCode::conflict, fmt::format("round {} is not awaiting labels (state {})",
                                                 state.round, to_string(state.status)));
  }
  std::set<std::pair<std::string, std::string>> proposed;
  for (const auto& c : state.candidates) proposed.emplace(c.lemma, c.concept_id);
  std::map<std::pair<std::string, std::string>, int> final_labels;
  for (const auto& l : labels) {
    const auto key = std::make_pair(l.lemma, l.concept_id);
    if (!proposed.contains(key)) {
      throw Error(ErrorCode::validation,
                  fmt::format("label for ({}, {}) which round {} did not propose", l.lemma,
                              l.concept_id, state.round));
    }
    final_labels.emplace(key, l.label);
  }
  std::vector<std::string> missing;
  std::vector<int> sample_labels;
  for (const auto& c : state.sample) {
    auto it = final_labels.find({c.lemma, c.concept_id});
    if (it == final_labels.end()) {
      missing.push_back(fmt::format("{}|{}", c.lemma, c.concept_id));
    } else {
      sample_labels.push_back(it->second);
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::incomplete_round,
                fmt::format("round {}: {} sampled pair(s) have no final label: {}", state.round,
                            missing.size(), fmt::join(missing, ", ")));
  }

  RoundOutcome out;
  out.exit = evaluate_exit(sample_labels, state.config.exit_accuracy);
  out.partition = partition_annotations(labels);
  accumulate(state.dictionary, out.partition, lemmas, state.candidates, inventory, state.round);
  out.triplets = build_triplets(out.partition, inventory,
                                mix64(state.config.seed + static_cast<std::uint64_t>(state.round)),
                                state.config.negatives_k);

  auto& rec = state.history.back();
  rec.exit = out.exit;
  std::set<std::string> round_lemmas;
  for (const auto& c : state.candidates) round_lemmas.insert(c.lemma);
  for (const auto& lemma : round_lemmas) {
    if (state.dictionary.concept_of(lemma) != nullptr) {
      state.pending.erase(lemma);
      state.adopted.insert(lemma);
      ++rec.adopted;
    } else if (out.partition.removed.contains(lemma)) {
      state.pending.erase(lemma);
      state.removed.insert(lemma);
      ++rec.removed;
    } else {
      ++rec.carried;
    }
  }

  if (out.exit.decision == Decision::stop) {
    rec.outcome = fmt::format("stop: accuracy {:.4f} below {}", out.exit.accuracy,
                              state.config.exit_accuracy);
    state.abandoned.insert(state.pending.begin(), state.pending.end());
    state.pending.clear();
    state.status = LoopStatus::stopped;
  } else if (state.pending.empty()) {
    rec.outcome = "complete";
    state.status = LoopStatus::complete;
  } else if (state.round >= state.config.max_rounds) {
    rec.outcome = fmt::format("stop: reached {} rounds", state.config.max_rounds);
    state.abandoned.insert(state.pending.begin(), state.pending.end());
    state.pending.clear();
    state.status = LoopStatus::stopped;
  } else {
    rec.outcome = "continue";
    ++state.round;
    state.status = LoopStatus::awaiting_mapping;
  }
  state.candidates.clear();
  state.sample.clear();
  state.check_conservation();
  return out;
}

ojson to_json(const IterationState& s) {
  ojson j;
  j["round"] = s.round;
  j["status"] = to_string(s.status);
  ojson cfg;
  cfg["sample_size"] = s.config.sample_size;
  cfg["exit_accuracy"] = s.config.exit_accuracy;
  cfg["max_rounds"] = s.config.max_rounds;
  cfg["seed"] = s.config.seed;
  cfg["negatives_k"] = s.config.negatives_k;
  cfg["tau_semantic"] = s.config.thresholds.tau_semantic;
  cfg["tau_lexical"] = s.config.thresholds.tau_lexical;
  j["config"] = cfg;
  j["initial_count"] = s.initial_count;
  j["pending"] = s.pending;
  j["adopted"] = s.adopted;
  j["removed"] = s.removed;
  j["abandoned"] = s.abandoned;
  j["candidates"] = ojson::array();
  for (const auto& c : s.candidates) j["candidates"].push_back(candidate_json(c));
  j["sample"] = ojson::array();
  for (const auto& c : s.sample) j["sample"].push_back(candidate_json(c));
  j["dictionary"] = ojson::array();
  for (const auto& [concept_id, lemmas] : s.dictionary.entries()) {
    for (const auto& [lemma, e] : lemmas) {
      ojson d;
      d["concept_id"] = concept_id;
      d["concept_name"] = s.dictionary.concept_name(concept_id);
      d["lemma"] = lemma;
      d["surfaces"] = e.surfaces;
      d["round"] = e.round;
      d["score"] = e.score;
      j["dictionary"].push_back(d);
    }
  }
  j["history"] = ojson::array();
  for (const auto& r : s.history) {
    ojson h;
    h["round"] = r.round;
    h["mapped_lemmas"] = r.mapped_lemmas;
    h["unmapped_lemmas"] = r.unmapped_lemmas;
    h["candidates"] = r.candidates;
    h["sampled"] = r.sampled;
    if (r.exit) {
      h["accuracy"] = r.exit->accuracy;
      h["correct"] = r.exit->correct;
      h["incorrect"] = r.exit->incorrect;
      h["not_symptom"] = r.exit->not_symptom;
      h["decision"] = decision_name(r.exit->decision);
    }
    h["adopted"] = r.adopted;
    h["removed"] = r.removed;
    h["carried"] = r.carried;
    h["outcome"] = r.outcome;
    j["history"].push_back(h);
  }
  return j;
}

IterationState state_from_json(const json& j) {
  try {
    IterationState s;
    s.round = j.at("round").get<int>();
    const auto status = j.at("status").get<std::string>();
    bool known = false;
    for (auto st : {LoopStatus::awaiting_mapping, LoopStatus::awaiting_labels,
                    LoopStatus::complete, LoopStatus::stopped}) {
      if (to_string(st) == status) {
        s.status = st;
        known = true;
      }
    }
    if (!known) throw Error(ErrorCode::validation, fmt::format("unknown loop status '{}'", status));
    const auto& cfg = j.at("config");
    s.config.sample_size = cfg.at("sample_size").get<std::size_t>();
    s.config.exit_accuracy = cfg.at("exit_accuracy").get<double>();
    s.config.max_rounds = cfg.at("max_rounds").get<int>();
    s.config.seed = cfg.at("seed").get<std::uint64_t>();
    s.config.negatives_k = cfg.at("negatives_k").get<std::size_t>();
    s.config.thresholds.tau_semantic = cfg.at("tau_semantic").get<double>();
    s.config.thresholds.tau_lexical = cfg.at("tau_lexical").get<double>();
    s.initial_count = j.at("initial_count").get<std::size_t>();
    s.pending = j.at("pending").get<std::set<std::string>>();
    s.adopted = j.at("adopted").get<std::set<std::string>>();
    s.removed = j.at("removed").get<std::set<std::string>>();
    s.abandoned = j.at("abandoned").get<std::set<std::string>>();
    for (const auto& c : j.at("candidates")) s.candidates.push_back(candidate_from_json(c));
    for (const auto& c : j.at("sample")) s.sample.push_back(candidate_from_json(c));
    for (const auto& d : j.at("dictionary")) {
      s.dictionary.adopt(d.at("concept_id").get<std::string>(),
                         d.at("concept_name").get<std::string>(),
                         DictionaryEntry{d.at("lemma").get<std::string>(),
                                         d.at("surfaces").get<std::vector<std::string>>(),
                                         d.at("round").get<int>(), d.at("score").get<double>()});
    }
    for (const auto& h : j.at("history")) {
      RoundRecord r;
      r.round = h.at("round").get<int>();
      r.mapped_lemmas = h.at("mapped_lemmas").get<std::size_t>();
      r.unmapped_lemmas = h.at("unmapped_lemmas").get<std::size_t>();
      r.candidates = h.at("candidates").get<std::size_t>();
      r.sampled = h.at("sampled").get<std::size_t>();
      if (h.contains("accuracy")) {
        ExitEvaluation e;
        e.accuracy = h.at("accuracy").get<double>();
        e.correct = h.at("correct").get<std::size_t>();
        e.incorrect = h.at("incorrect").get<std::size_t>();
        e.not_symptom = h.at("not_symptom").get<std::size_t>();
        e.decision = h.at("decision").get<std::string>() == "stop" ? Decision::stop
                                                                     : Decision::proceed;
        r.exit = e;
      }
      r.adopted = h.at("adopted").get<std::size_t>();
      r.removed = h.at("removed").get<std::size_t>();
      r.carried = h.at("carried").get<std::size_t>();
      r.outcome = h.at("outcome").get<std::string>();
      s.history.push_back(std::move(r));
    }
    s.check_conservation();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::validation, fmt::format("loop state: {}", e.what()));
  }
}

}  // namespace collex::curation
