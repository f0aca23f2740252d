#include "collex/annotation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <mutex>
#include <set>

#include "collex/error.hpp"
#include "collex/io.hpp"
#include "collex/rng.hpp"
#include "collex/text.hpp"

namespace collex::annotation {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::time_point_cast<std::chrono::seconds>(
      std::chrono::system_clock::now());
  return corpus::format_timestamp(now);
}

void check_label(int label) {
  if (!curation::valid_label(label)) {
    throw Error(ErrorCode::validation, fmt::format("label {} not in {{0, 1, 2}}", label));
  }
}

}  // namespace

std::vector<AnnotationTask> split_and_assign(std::vector<PairRef> pairs,
                                             const std::vector<std::string>& annotators,
                                             std::uint64_t seed, int round) {
  const std::set<std::string> distinct(annotators.begin(), annotators.end());
  if (annotators.size() != annotator_count || distinct.size() != annotator_count ||
      distinct.contains("")) {
    throw Error(ErrorCode::configuration,
                fmt::format("exactly {} distinct annotator ids are required, got {}",
                            annotator_count, annotators.size()));
  }
  if (pairs.size() < annotator_count) {
    throw Error(ErrorCode::insufficient_data,
                fmt::format("need at least {} pairs to split, got {}", annotator_count,
                            pairs.size()));
  }
  std::sort(pairs.begin(), pairs.end(), [](const PairRef& a, const PairRef& b) {
    if (a.lemma != b.lemma) return a.lemma < b.lemma;
    return a.concept_id < b.concept_id;
  });
  std::vector<AnnotationTask> tasks;
  tasks.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    AnnotationTask t;
    t.pair_id = fmt::format("r{}-{:04d}", round, i + 1);
    t.lemma = std::move(pairs[i].lemma);
    t.concept_id = std::move(pairs[i].concept_id);
    t.concept_name = std::move(pairs[i].concept_name);
    t.surfaces = std::move(pairs[i].surfaces);
    tasks.push_back(std::move(t));
  }
  std::vector<std::size_t> order(tasks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t n = tasks.size();
  std::size_t pos = 0;
  for (std::size_t set = 0; set < annotator_count; ++set) {
    const std::size_t size = n / annotator_count + (set < n % annotator_count ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k, ++pos) {
      auto& t = tasks[order[pos]];
      t.set_index = static_cast<int>(set);
      t.assigned_annotators = {annotators[set], annotators[(set + 1) % annotator_count]};
    }
  }
  return tasks;
}

void attach_context(AnnotationTask& task, const corpus::ContextIndex& index, std::uint64_t seed) {
  std::vector<std::string> phrases = task.surfaces;
  if (phrases.empty()) phrases.push_back(task.lemma);
  task.context_tweets.clear();
  for (const auto& id :
       index.sample_containing(phrases, context_limit, mix64(seed ^ stable_hash(task.lemma)))) {
    if (auto text = index.lookup(id)) task.context_tweets.emplace_back(*text);
  }
  task.low_context = task.context_tweets.empty();
}

KappaResult cohen_kappa(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::invalid_argument,
                fmt::format("rater label counts differ: {} vs {}", a.size(), b.size()));
  }
  if (a.empty()) throw Error(ErrorCode::empty_input, "no items rated by both annotators");
  std::array<std::size_t, 3> na{}, nb{};
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    check_label(a[i]);
    check_label(b[i]);
    ++na[static_cast<std::size_t>(a[i])];
    ++nb[static_cast<std::size_t>(b[i])];
    if (a[i] == b[i]) ++agree;
  }
  const double n = static_cast<double>(a.size());
  KappaResult r;
  r.n_items = a.size();
  r.observed_agreement = static_cast<double>(agree) / n;
  double pe = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    pe += (static_cast<double>(na[c]) / n) * (static_cast<double>(nb[c]) / n);
  }
  r.expected_agreement = pe;
  // p_e is 1 only when both raters used one and the same category.
  bool single = false;
  for (std::size_t c = 0; c < 3; ++c) single = single || (na[c] == a.size() && nb[c] == a.size());
  if (single) {
    r.degenerate = true;
    r.kappa = agree == a.size() ? 1.0 : 0.0;
  } else {
    r.kappa = (r.observed_agreement - pe) / (1.0 - pe);
  }
  return r;
}

KappaResult cohen_kappa(const std::map<std::string, int>& a, const std::map<std::string, int>& b) {
  std::vector<int> la, lb;
  for (const auto& [id, label] : a) {
    auto it = b.find(id);
    if (it == b.end()) continue;
    la.push_back(label);
    lb.push_back(it->second);
  }
  return cohen_kappa(la, lb);
}

std::vector<FinalLabel> adjudicate(std::span<const TwoLabels> pairs,
                                   const std::map<std::string, Resolution>& resolutions) {
  std::vector<FinalLabel> out;
  std::vector<std::string> unresolved;
  for (const auto& p : pairs) {
    check_label(p.first);
    check_label(p.second);
    if (p.first == p.second) {
      out.push_back(FinalLabel{p.pair_id, p.first, false, {}});
      continue;
    }
    auto it = resolutions.find(p.pair_id);
    if (it == resolutions.end()) {
      unresolved.push_back(p.pair_id);
      continue;
    }
    const auto& r = it->second;
    check_label(r.label);
    if (r.label != p.first && r.label != p.second && text::trim(r.note).empty()) {
      throw Error(ErrorCode::validation,
                  fmt::format("resolution {} for {} overrides both raters without a note",
                              r.label, p.pair_id));
    }
    out.push_back(FinalLabel{p.pair_id, r.label, true, r.note});
  }
  if (!unresolved.empty()) {
    throw Error(ErrorCode::incomplete_adjudication,
                fmt::format("{} disagreement(s) unresolved: {}", unresolved.size(),
                            fmt::join(unresolved, ", ")));
  }
  return out;
}

std::vector<SanityItem> sanity_sample(const curation::Dictionary& dictionary, std::size_t n,
                                      const corpus::ContextIndex& index, std::uint64_t seed) {
  if (dictionary.empty()) throw Error(ErrorCode::empty_input, "dictionary is empty");
  std::vector<SanityItem> all;
  for (const auto& [concept_id, lemmas] : dictionary.entries()) {
    for (const auto& [lemma, e] : lemmas) {
      all.push_back(SanityItem{concept_id, dictionary.concept_name(concept_id), lemma, e.surfaces,
                               {}});
    }
  }
  Rng rng(seed);
  auto picks = rng.sample_indices(all.size(), n);
  std::sort(picks.begin(), picks.end());
  std::vector<SanityItem> out;
  for (auto i : picks) {
    auto item = std::move(all[i]);
    for (const auto& id : index.sample_containing(item.surfaces, context_limit,
                                                  mix64(seed ^ stable_hash(item.lemma)))) {
      if (auto t = index.lookup(id)) item.context_tweets.emplace_back(*t);
    }
    out.push_back(std::move(item));
  }
  return out;
}

std::string render_accuracy(std::size_t correct, std::size_t total) {
  if (total == 0) throw Error(ErrorCode::invalid_argument, "accuracy over zero items");
  if (correct > total) throw Error(ErrorCode::invalid_argument, "more correct items than items");
  if ((correct * 100) % total == 0) return fmt::format("{}%", correct * 100 / total);
  return fmt::format("{:.1f}%", 100.0 * static_cast<double>(correct) / static_cast<double>(total));
}

ojson to_json(const AnnotationTask& t) {
  ojson j;
  j["pair_id"] = t.pair_id;
  j["lemma"] = t.lemma;
  j["concept_id"] = t.concept_id;
  j["concept_name"] = t.concept_name;
  j["surfaces"] = t.surfaces;
  j["context_tweets"] = t.context_tweets;
  j["set_index"] = t.set_index;
  j["assigned_annotators"] = t.assigned_annotators;
  j["low_context"] = t.low_context;
  return j;
}

AnnotationTask task_from_json(const json& j) {
  AnnotationTask t;
  t.pair_id = j.at("pair_id").get<std::string>();
  t.lemma = j.at("lemma").get<std::string>();
  t.concept_id = j.at("concept_id").get<std::string>();
  t.concept_name = j.at("concept_name").get<std::string>();
  t.surfaces = j.value("surfaces", std::vector<std::string>{});
  t.context_tweets = j.value("context_tweets", std::vector<std::string>{});
  t.set_index = j.at("set_index").get<int>();
  t.assigned_annotators = j.at("assigned_annotators").get<std::array<std::string, 2>>();
  t.low_context = j.value("low_context", t.context_tweets.empty());
  if (t.context_tweets.size() > context_limit) {
    throw Error(ErrorCode::validation, fmt::format("task {} has more than {} context tweets",
                                                   t.pair_id, context_limit));
  }
  return t;
}

RoundService::RoundService(fs::path dir, Clock clock, std::size_t snapshot_every)
    : dir_(std::move(dir)),
      clock_(clock ? std::move(clock) : Clock(utc_now)),
      snapshot_every_(snapshot_every == 0 ? 100 : snapshot_every) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) {
    throw Error(ErrorCode::io, fmt::format("cannot create {}: {}", dir_.string(), ec.message()));
  }
  std::size_t replay_from = 0;
  const auto snap = dir_ / "snapshot.json";
  if (fs::exists(snap)) {
    const auto doc = json::parse(io::read_file(snap));
    load_snapshot(doc.at("state"));
    replay_from = doc.at("events").get<std::size_t>();
  }
  const auto journal_path = dir_ / "journal.jsonl";
  std::size_t line_no = 0;
  if (fs::exists(journal_path)) {
    auto in = io::open_input(journal_path);
    std::string line;
    while (std::getline(in, line)) {
      if (text::trim(line).empty()) continue;
      ++line_no;
      if (line_no <= replay_from) continue;
      json event;
      try {
        event = json::parse(line);
      } catch (const json::exception&) {
        // A torn final line from a crash mid-write; everything before it is intact.
        if (in.peek() == std::char_traits<char>::eof()) break;
        throw Error(ErrorCode::integrity,
                    fmt::format("{}: corrupt journal line {}", journal_path.string(), line_no));
      }
      apply(event);
    }
  }
  events_ = std::max(line_no, replay_from);
  journal_.open(journal_path, std::ios::app);
  if (!journal_) {
    throw Error(ErrorCode::io, fmt::format("cannot append to {}", journal_path.string()));
  }
}

void RoundService::append(const ojson& event) {
  journal_ << event.dump() << '\n';
  journal_.flush();
  if (!journal_) throw Error(ErrorCode::io, "journal write failed");
  apply(event);
  ++events_;
  if (events_ % snapshot_every_ == 0) snapshot_locked();
}

void RoundService::snapshot_locked() {
  ojson doc;
  doc["events"] = events_;
  doc["state"] = snapshot_json();
  io::write_file_atomic(dir_ / "snapshot.json", doc.dump());
}

ojson RoundService::snapshot_json() const {
  ojson rounds = ojson::array();
  for (const auto& [number, r] : rounds_) {
    ojson jr;
    jr["round"] = number;
    jr["closed"] = r.closed;
    jr["audit"] = r.audit;
    jr["pairs"] = ojson::array();
    for (const auto& id : r.order) {
      const auto& p = r.pairs.at(id);
      ojson jp;
      jp["task"] = to_json(p.task);
      jp["labels"] = p.labels;
      if (p.resolution) {
        jp["resolution"] = {{"label", p.resolution->label}, {"note", p.resolution->note}};
      }
      jr["pairs"].push_back(jp);
    }
    rounds.push_back(jr);
  }
  return rounds;
}

void RoundService::load_snapshot(const json& doc) {
  rounds_.clear();
  pair_round_.clear();
  for (const auto& jr : doc) {
    const int number = jr.at("round").get<int>();
    Round r;
    r.closed = jr.at("closed").get<bool>();
    for (const auto& a : jr.at("audit")) {
      r.audit.push_back(ojson{{"pair_id", a.at("pair_id").get<std::string>()},
                              {"annotator_id", a.at("annotator_id").get<std::string>()},
                              {"old_label", a.at("old_label").get<int>()},
                              {"new_label", a.at("new_label").get<int>()},
                              {"timestamp", a.at("timestamp").get<std::string>()}});
    }
    for (const auto& jp : jr.at("pairs")) {
      PairState p;
      p.task = task_from_json(jp.at("task"));
      p.labels = jp.at("labels").get<std::map<std::string, int>>();
      if (jp.contains("resolution")) {
        p.resolution = Resolution{jp["resolution"].at("label").get<int>(),
                                  jp["resolution"].at("note").get<std::string>()};
      }
      r.order.push_back(p.task.pair_id);
      pair_round_[p.task.pair_id] = number;
      r.pairs.emplace(p.task.pair_id, std::move(p));
    }
    rounds_.emplace(number, std::move(r));
  }
}

void RoundService::apply(const json& e) {
  const auto type = e.at("type").get<std::string>();
  if (type == "open") {
    const int number = e.at("round").get<int>();
    Round r;
    for (const auto& jt : e.at("tasks")) {
      PairState p;
      p.task = task_from_json(jt);
      r.order.push_back(p.task.pair_id);
      pair_round_[p.task.pair_id] = number;
      r.pairs.emplace(p.task.pair_id, std::move(p));
    }
    rounds_[number] = std::move(r);
  } else if (type == "label") {
    const auto pair_id = e.at("pair_id").get<std::string>();
    const auto annotator = e.at("annotator_id").get<std::string>();
    const int label = e.at("label").get<int>();
    auto& round = rounds_.at(pair_round_.at(pair_id));
    auto& p = round.pairs.at(pair_id);
    auto [it, fresh] = p.labels.emplace(annotator, label);
    if (!fresh) {
      round.audit.push_back(ojson{{"pair_id", pair_id},
                                  {"annotator_id", annotator},
                                  {"old_label", it->second},
                                  {"new_label", label},
                                  {"timestamp", e.value("timestamp", "")}});
      it->second = label;
    }
  } else if (type == "resolve") {
    const auto pair_id = e.at("pair_id").get<std::string>();
    auto& p = rounds_.at(pair_round_.at(pair_id)).pairs.at(pair_id);
    p.resolution = Resolution{e.at("label").get<int>(), e.value("note", "")};
  } else if (type == "close") {
    rounds_.at(e.at("round").get<int>()).closed = true;
  } else {
    throw Error(ErrorCode::integrity, fmt::format("unknown journal event '{}'", type));
  }
}

const RoundService::Round& RoundService::round_ref(int round) const {
  auto it = rounds_.find(round);
  if (it == rounds_.end()) throw Error(ErrorCode::not_found, fmt::format("no round {}", round));
  return it->second;
}

const RoundService::PairState& RoundService::pair_ref(const std::string& pair_id) const {
  auto it = pair_round_.find(pair_id);
  if (it == pair_round_.end()) {
    throw Error(ErrorCode::not_found, fmt::format("no pair {}", pair_id));
  }
  return rounds_.at(it->second).pairs.at(pair_id);
}

void RoundService::open_round(int round, std::vector<AnnotationTask> tasks) {
  std::unique_lock lock(mutex_);
  if (rounds_.contains(round)) {
    throw Error(ErrorCode::conflict, fmt::format("round {} is already open", round));
  }
  std::set<std::string> ids;
  ojson jt = ojson::array();
  for (const auto& t : tasks) {
    if (!ids.insert(t.pair_id).second || pair_round_.contains(t.pair_id)) {
      throw Error(ErrorCode::validation, fmt::format("duplicate pair id {}", t.pair_id));
    }
    if (t.assigned_annotators[0].empty() || t.assigned_annotators[1].empty() ||
        t.assigned_annotators[0] == t.assigned_annotators[1]) {
      throw Error(ErrorCode::validation,
                  fmt::format("pair {} needs two distinct annotators", t.pair_id));
    }
    jt.push_back(to_json(t));
  }
  append(ojson{{"type", "open"}, {"round", round}, {"tasks", jt}});
}

bool RoundService::has_round(int round) const {
  std::shared_lock lock(mutex_);
  return rounds_.contains(round);
}

std::vector<int> RoundService::rounds() const {
  std::shared_lock lock(mutex_);
  std::vector<int> out;
  for (const auto& [n, _] : rounds_) out.push_back(n);
  return out;
}

std::optional<AnnotationTask> RoundService::next_task(int round,
                                                      const std::string& annotator) const {
  std::shared_lock lock(mutex_);
  const auto& r = round_ref(round);
  bool assigned_any = false;
  for (const auto& id : r.order) {
    const auto& p = r.pairs.at(id);
    const auto& who = p.task.assigned_annotators;
    if (who[0] != annotator && who[1] != annotator) continue;
    assigned_any = true;
    if (!p.labels.contains(annotator)) return p.task;
  }
  if (!assigned_any) {
    throw Error(ErrorCode::authorization,
                fmt::format("annotator '{}' has no tasks in round {}", annotator, round));
  }
  return std::nullopt;
}

AnnotationTask RoundService::task(const std::string& pair_id) const {
  std::shared_lock lock(mutex_);
  return pair_ref(pair_id).task;
}

std::optional<int> RoundService::label_of(const std::string& pair_id,
                                          const std::string& annotator) const {
  std::shared_lock lock(mutex_);
  const auto& p = pair_ref(pair_id);
  auto it = p.labels.find(annotator);
  if (it == p.labels.end()) return std::nullopt;
  return it->second;
}

Ack RoundService::record_label(AnnotationRecord record) {
  std::unique_lock lock(mutex_);
  const auto& p = pair_ref(record.pair_id);
  const auto& who = p.task.assigned_annotators;
  if (who[0] != record.annotator_id && who[1] != record.annotator_id) {
    throw Error(ErrorCode::authorization,
                fmt::format("annotator '{}' is not assigned to pair {}", record.annotator_id,
                            record.pair_id));
  }
  check_label(record.label);
  const int round = pair_round_.at(record.pair_id);
  if (rounds_.at(round).closed) {
    throw Error(ErrorCode::conflict, fmt::format("round {} is closed", round));
  }
  if (record.timestamp.empty()) record.timestamp = clock_();
  Ack ack;
  ack.overwritten = p.labels.contains(record.annotator_id);
  append(ojson{{"type", "label"},
               {"pair_id", record.pair_id},
               {"annotator_id", record.annotator_id},
               {"label", record.label},
               {"timestamp", record.timestamp}});
  for (const auto& [id, ps] : rounds_.at(round).pairs) {
    const auto& w = ps.task.assigned_annotators;
    if (w[0] != record.annotator_id && w[1] != record.annotator_id) continue;
    ++ack.annotator_total;
    if (ps.labels.contains(record.annotator_id)) ++ack.annotator_done;
  }
  return ack;
}

void RoundService::resolve(int round, const std::string& pair_id, Resolution resolution) {
  std::unique_lock lock(mutex_);
  const auto& r = round_ref(round);
  auto it = r.pairs.find(pair_id);
  if (it == r.pairs.end()) {
    throw Error(ErrorCode::not_found, fmt::format("no pair {} in round {}", pair_id, round));
  }
  if (r.closed) throw Error(ErrorCode::conflict, fmt::format("round {} is closed", round));
  check_label(resolution.label);
  const auto& labels = it->second.labels;
  if (labels.size() < 2) {
    throw Error(ErrorCode::conflict, fmt::format("pair {} has {} of 2 labels", pair_id,
                                                 labels.size()));
  }
  const bool matches = std::any_of(labels.begin(), labels.end(),
                                   [&](const auto& kv) { return kv.second == resolution.label; });
  if (!matches && text::trim(resolution.note).empty()) {
    throw Error(ErrorCode::validation,
                fmt::format("resolution {} for {} overrides both raters without a note",
                            resolution.label, pair_id));
  }
  append(ojson{{"type", "resolve"},
               {"round", round},
               {"pair_id", pair_id},
               {"label", resolution.label},
               {"note", resolution.note},
               {"timestamp", clock_()}});
}

ojson RoundService::progress(int round) const {
  std::shared_lock lock(mutex_);
  const auto& r = round_ref(round);
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_annotator;
  std::array<std::pair<std::size_t, std::size_t>, annotator_count> per_set{};
  std::size_t complete = 0, disagreements = 0, unresolved = 0;
  for (const auto& id : r.order) {
    const auto& p = r.pairs.at(id);
    for (const auto& a : p.task.assigned_annotators) {
      auto& c = per_annotator[a];
      ++c.second;
      if (p.labels.contains(a)) ++c.first;
    }
    auto& s = per_set[static_cast<std::size_t>(p.task.set_index) % annotator_count];
    ++s.second;
    const auto& who = p.task.assigned_annotators;
    const bool both = p.labels.contains(who[0]) && p.labels.contains(who[1]);
    if (both) {
      ++s.first;
      ++complete;
      if (p.labels.at(who[0]) != p.labels.at(who[1])) {
        ++disagreements;
        if (!p.resolution) ++unresolved;
      }
    }
  }
  ojson j;
  j["round"] = round;
  j["pairs"] = r.order.size();
  j["fully_labeled"] = complete;
  j["disagreements"] = disagreements;
  j["unresolved"] = unresolved;
  j["closed"] = r.closed;
  j["can_close"] = !r.closed && complete == r.order.size() && unresolved == 0;
  j["annotators"] = ojson::array();
  for (const auto& [a, c] : per_annotator) {
    j["annotators"].push_back(ojson{{"annotator_id", a}, {"done", c.first}, {"total", c.second}});
  }
  j["sets"] = ojson::array();
  for (std::size_t s = 0; s < annotator_count; ++s) {
    j["sets"].push_back(ojson{
        {"set_index", s}, {"fully_labeled", per_set[s].first}, {"pairs", per_set[s].second}});
  }
  return j;
}

RoundKappa RoundService::kappa(int round) const {
  std::shared_lock lock(mutex_);
  const auto& r = round_ref(round);
  std::array<std::vector<int>, annotator_count> a, b;
  for (const auto& id : r.order) {
    const auto& p = r.pairs.at(id);
    const auto& who = p.task.assigned_annotators;
    auto ia = p.labels.find(who[0]);
    auto ib = p.labels.find(who[1]);
    if (ia == p.labels.end() || ib == p.labels.end()) continue;
    const auto s = static_cast<std::size_t>(p.task.set_index) % annotator_count;
    a[s].push_back(ia->second);
    b[s].push_back(ib->second);
  }
  RoundKappa out;
  double wk = 0, wo = 0, we = 0;
  std::size_t total = 0;
  for (std::size_t s = 0; s < annotator_count; ++s) {
    if (a[s].empty()) continue;
    const auto k = cohen_kappa(a[s], b[s]);
    out.per_set[s] = k;
    const double n = static_cast<double>(k.n_items);
    wk += n * k.kappa;
    wo += n * k.observed_agreement;
    we += n * k.expected_agreement;
    total += k.n_items;
  }
  if (total > 0) {
    const double n = static_cast<double>(total);
    KappaResult w;
    w.kappa = wk / n;
    w.observed_agreement = wo / n;
    w.expected_agreement = we / n;
    w.n_items = total;
    w.degenerate = std::any_of(out.per_set.begin(), out.per_set.end(),
                               [](const auto& k) { return k && k->degenerate; });
    out.weighted = w;
  }
  return out;
}

std::vector<Disagreement> RoundService::disagreements(int round, bool unresolved_only) const {
  std::shared_lock lock(mutex_);
  const auto& r = round_ref(round);
  std::vector<Disagreement> out;
  for (const auto& id : r.order) {
    const auto& p = r.pairs.at(id);
    const auto& who = p.task.assigned_annotators;
    auto ia = p.labels.find(who[0]);
    auto ib = p.labels.find(who[1]);
    if (ia == p.labels.end() || ib == p.labels.end() || ia->second == ib->second) continue;
    if (unresolved_only && p.resolution) continue;
    out.push_back(Disagreement{id, p.task.lemma, p.task.concept_id, who,
                               {ia->second, ib->second}, p.resolution});
  }
  return out;
}

std::vector<FinalLabel> RoundService::final_labels_locked(int round) const {
  const auto& r = round_ref(round);
  std::vector<std::string> missing;
  std::vector<TwoLabels> pairs;
  std::map<std::string, Resolution> resolutions;
  for (const auto& id : r.order) {
    const auto& p = r.pairs.at(id);
    const auto& who = p.task.assigned_annotators;
    auto ia = p.labels.find(who[0]);
    auto ib = p.labels.find(who[1]);
    if (ia == p.labels.end() || ib == p.labels.end()) {
      missing.push_back(id);
      continue;
    }
    pairs.push_back(TwoLabels{id, ia->second, ib->second});
    if (p.resolution) resolutions.emplace(id, *p.resolution);
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::incomplete_round,
                fmt::format("round {}: {} pair(s) still need labels: {}", round, missing.size(),
                            fmt::join(missing, ", ")));
  }
  return adjudicate(pairs, resolutions);
}

std::vector<FinalLabel> RoundService::final_labels(int round) const {
  std::shared_lock lock(mutex_);
  return final_labels_locked(round);
}

std::vector<curation::LabeledPair> RoundService::export_labels(int round) const {
  std::shared_lock lock(mutex_);
  const auto finals = final_labels_locked(round);
  const auto& r = round_ref(round);
  std::vector<curation::LabeledPair> out;
  for (const auto& f : finals) {
    const auto& t = r.pairs.at(f.pair_id).task;
    out.push_back(curation::LabeledPair{t.lemma, t.concept_id, f.label});
  }
  return out;
}

void RoundService::close(int round) {
  std::unique_lock lock(mutex_);
  const auto& r = round_ref(round);
  if (r.closed) return;
  final_labels_locked(round);
  append(ojson{{"type", "close"}, {"round", round}});
  snapshot_locked();
}

bool RoundService::closed(int round) const {
  std::shared_lock lock(mutex_);
  return round_ref(round).closed;
}

ojson RoundService::audit(int round) const {
  std::shared_lock lock(mutex_);
  return round_ref(round).audit;
}

std::size_t RoundService::events() const {
  std::shared_lock lock(mutex_);
  return events_;
}

}  // namespace collex::annotation
