#include <CLI11.hpp>
#include <fmt/format.h>
#include <httplib.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "collex/analytics.hpp"
#include "collex/annotation.hpp"
#include "collex/corpus.hpp"
#include "collex/curation.hpp"
#include "collex/error.hpp"
#include "collex/extract.hpp"
#include "collex/io.hpp"
#include "collex/mapping.hpp"
#include "collex/normalize.hpp"
#include "collex/pipeline.hpp"
#include "collex/server.hpp"
#include "collex/text.hpp"

#ifndef COLLEX_ASSET_DIR
#define COLLEX_ASSET_DIR "assets"
#endif

namespace fs = std::filesystem;
using namespace collex;
using ojson = nlohmann::ordered_json;

namespace {

// Error tied to the flag whose value caused it.
class FlagError : public Error {
 public:
  FlagError(std::string flag, ErrorCode code, const std::string& message)
      : Error(code, message), flag_(std::move(flag)) {}
  const std::string& flag() const noexcept { return flag_; }

 private:
  std::string flag_;
};

struct RunConfig {
  std::string run_dir = "run";
  std::string corpus;
  std::string corpus_format = "auto";
  std::string inventory;
  std::string embeddings;
  std::string embed_fallback = "none";
  std::string rules = std::string(COLLEX_ASSET_DIR) + "/rules.tsv";
  std::string lemma_exceptions = std::string(COLLEX_ASSET_DIR) + "/lemma-exceptions.tsv";
  std::string emoji = std::string(COLLEX_ASSET_DIR) + "/emoji.tsv";
  std::string gazetteer;
  std::string merge_map;
  std::string ner_url;
  std::string ner_token;
  int ner_timeout_ms = 5000;
  std::vector<std::string> langs{"en"};
  bool keep_retweets = false;
  bool keep_url_tweets = false;
  double tau_semantic = 0.8;
  double tau_lexical = 0.8;
  std::uint64_t min_count = 10;
  std::uint64_t report_min_count = 500;
  double exit_accuracy = 0.10;
  std::size_t sample_size = 50;
  int max_rounds = 10;
  std::size_t negatives_k = 3;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

fs::path need_file(const std::string& value, const std::string& flag, std::string_view command) {
  if (value.empty()) {
    throw FlagError(flag, ErrorCode::configuration,
                    fmt::format("{} is required for `{}`", flag, command));
  }
  fs::path p(value);
  if (!fs::is_regular_file(p)) {
    throw FlagError(flag, ErrorCode::configuration,
                    fmt::format("{}: file '{}' does not exist", flag, value));
  }
  return p;
}

std::optional<fs::path> optional_file(const std::string& value, const std::string& flag) {
  if (value.empty()) return std::nullopt;
  if (!fs::is_regular_file(value)) {
    throw FlagError(flag, ErrorCode::configuration,
                    fmt::format("{}: file '{}' does not exist", flag, value));
  }
  return fs::path(value);
}

curation::LoopConfig loop_config(const RunConfig& c) {
  curation::LoopConfig lc;
  lc.sample_size = c.sample_size;
  lc.exit_accuracy = c.exit_accuracy;
  lc.max_rounds = c.max_rounds;
  lc.seed = c.seed;
  lc.negatives_k = c.negatives_k;
  lc.thresholds = {c.tau_semantic, c.tau_lexical};
  lc.validate();
  return lc;
}

extract::EmojiMap load_emoji(const RunConfig& c) {
  if (c.emoji.empty()) return {};
  return extract::EmojiMap::load(need_file(c.emoji, "--emoji", "extract"));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto part : text::split(s, ',')) {
    const auto t = text::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

// Inventory, embeddings and the optional fallback embedder, bundled so the
// Mapper's references stay valid.
struct MappingInputs {
  mapping::ConceptInventory inventory;
  std::unique_ptr<mapping::EmbeddingStore> store;
  std::unique_ptr<mapping::Embedder> fallback;
  std::unique_ptr<mapping::Mapper> mapper;
};

std::unique_ptr<MappingInputs> load_mapping(const RunConfig& c, std::string_view command) {
  auto in = std::make_unique<MappingInputs>();
  in->inventory = mapping::ConceptInventory::load(need_file(c.inventory, "--inventory", command));
  if (c.embed_fallback == "trigram") {
    in->fallback = std::make_unique<mapping::TrigramHashEmbedder>(c.seed);
  } else if (c.embed_fallback != "none") {
    throw FlagError("--embed-fallback", ErrorCode::configuration,
                    fmt::format("--embed-fallback: unknown embedder '{}'", c.embed_fallback));
  }
  if (!c.embeddings.empty()) {
    in->store = std::make_unique<mapping::EmbeddingStore>(
        mapping::EmbeddingStore::load(need_file(c.embeddings, "--embeddings", command)));
  } else if (in->fallback) {
    in->store = std::make_unique<mapping::EmbeddingStore>(64);
  } else {
    throw FlagError("--embeddings", ErrorCode::configuration,
                    fmt::format("--embeddings is required for `{}`", command));
  }
  in->mapper = std::make_unique<mapping::Mapper>(in->inventory, in->store.get(), in->fallback.get());
  return in;
}

void print_json(const ojson& j) { std::cout << j.dump(2) << '\n'; }

ojson kappa_json(const std::optional<annotation::KappaResult>& k) {
  if (!k) return nullptr;
  return ojson{{"kappa", k->kappa},
               {"observed_agreement", k->observed_agreement},
               {"expected_agreement", k->expected_agreement},
               {"n_items", k->n_items},
               {"degenerate", k->degenerate}};
}

void append_journal(const pipeline::RunLayout& run, const std::string& command) {
  std::error_code ec;
  fs::create_directories(run.dir, ec);
  std::ofstream out(run.journal(), std::ios::app);
  out << ojson{{"command", command}, {"config", "config.ini"}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"collex: colloquial symptom lexicon pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value run configuration file; flags win");

  RunConfig c;
  app.add_option("--run-dir", c.run_dir, "run directory")->envname("COLLEX_RUN_DIR");
  app.add_option("--corpus", c.corpus, "tweet corpus (.jsonl or .tsv)");
  app.add_option("--corpus-format", c.corpus_format, "auto, jsonl or tsv")
      ->check(CLI::IsMember({"auto", "jsonl", "tsv"}));
  app.add_option("--inventory", c.inventory, "concept inventory TSV");
  app.add_option("--embeddings", c.embeddings, "embedding store");
  app.add_option("--embed-fallback", c.embed_fallback, "none or trigram");
  app.add_option("--rules", c.rules, "rewrite rules TSV");
  app.add_option("--lemma-exceptions", c.lemma_exceptions, "lemmatizer exception table");
  app.add_option("--emoji", c.emoji, "emoji alias table");
  app.add_option("--gazetteer", c.gazetteer, "symptom term list for extraction");
  app.add_option("--merge-map", c.merge_map, "concept to symptom merge TSV");
  app.add_option("--ner-url", c.ner_url, "remote span extractor endpoint");
  app.add_option("--ner-token", c.ner_token, "token for the remote extractor");
  app.add_option("--ner-timeout-ms", c.ner_timeout_ms)->check(CLI::PositiveNumber);
  app.add_option("--langs", c.langs, "admitted languages")->delimiter(',');
  app.add_flag("--keep-retweets", c.keep_retweets);
  app.add_flag("--keep-url-tweets", c.keep_url_tweets);
  app.add_option("--tau-semantic", c.tau_semantic)->check(CLI::Range(0.0, 1.0));
  app.add_option("--tau-lexical", c.tau_lexical)->check(CLI::Range(0.0, 1.0));
  app.add_option("--min-count", c.min_count, "lemma frequency floor")
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
  app.add_option("--report-min-count", c.report_min_count, "report row floor");
  app.add_option("--exit-accuracy", c.exit_accuracy)->check(CLI::Range(0.0, 1.0));
  app.add_option("--sample-size", c.sample_size)->check(CLI::PositiveNumber);
  app.add_option("--max-rounds", c.max_rounds)->check(CLI::PositiveNumber);
  app.add_option("--negatives-k", c.negatives_k)->check(CLI::PositiveNumber);
  app.add_option("--seed", c.seed);
  app.add_option("--threads", c.threads, "worker threads (0 = all cores)");

  auto* ingest = app.add_subcommand("ingest", "filter the corpus and build the context index");
  auto* extract_cmd = app.add_subcommand("extract", "extract symptom mentions");
  auto* normalize_cmd = app.add_subcommand("normalize", "build the lemma table and statistics");
  auto* map_cmd = app.add_subcommand("map", "map pending lemmas for the current round");
  auto* sweep = app.add_subcommand("sweep", "threshold curves and elbow");
  std::string scores;
  sweep->add_option("--scores", scores, "precomputed scores TSV (semantic, lexical)");
  auto* sample = app.add_subcommand("sample", "write the validation sample and annotation tasks");
  std::string annotators;
  sample->add_option("--annotators", annotators, "three comma-separated annotator ids");
  auto* labels_import = app.add_subcommand("labels-import", "import final labels for the round");
  std::string labels_path;
  labels_import->add_option("labels", labels_path, "labels TSV")->required();
  auto* round_close = app.add_subcommand("round-close", "close the current round");
  auto* serve = app.add_subcommand("serve", "annotation API and static UI");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string token;
  std::string ui_dir;
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(1, 65535));
  serve->add_option("--token", token)->envname("COLLEX_TOKEN");
  serve->add_option("--annotators", annotators);
  serve->add_option("--ui-dir", ui_dir);
  auto* kappa = app.add_subcommand("kappa", "inter-annotator agreement of a round");
  int kappa_round = 0;
  kappa->add_option("--round", kappa_round, "round (default: current)");
  auto* dict_export = app.add_subcommand("dict-export", "export the dictionary");
  std::string out_path;
  std::string out_format = "tsv";
  dict_export->add_option("--out", out_path, "output file (default: stdout)");
  dict_export->add_option("--format", out_format)->check(CLI::IsMember({"tsv", "json"}));
  auto* match = app.add_subcommand("match", "count dictionary concepts over a corpus");
  std::string dictionary_path;
  match->add_option("--dictionary", dictionary_path);
  auto* report = app.add_subcommand("report", "symptom frequency report");
  report->add_option("--dictionary", dictionary_path);
  auto* compare = app.add_subcommand("compare", "side-by-side frequency reports");
  std::string report_a, report_b, alignment, label_a = "A", label_b = "B";
  compare->add_option("--a", report_a)->required();
  compare->add_option("--b", report_b)->required();
  compare->add_option("--alignment", alignment, "TSV renaming b's symptoms (from, to)");
  compare->add_option("--label-a", label_a);
  compare->add_option("--label-b", label_b);
  compare->add_option("--out", out_path);
  auto* sanity = app.add_subcommand("sanity", "physician sanity-check sample");
  std::size_t sanity_n = 20;
  sanity->add_option("--n", sanity_n)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << ojson{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const pipeline::RunLayout run{fs::path(c.run_dir)};
  try {
    fs::create_directories(run.dir);
    io::write_file_atomic(run.dir / "config.ini", app.config_to_str(true, false));

    if (ingest->parsed()) {
      const auto path = need_file(c.corpus, "--corpus", command);
      const auto format = c.corpus_format == "auto" ? corpus::format_for_path(path)
                                                    : corpus::parse_format(c.corpus_format);
      corpus::FilterPolicy policy;
      policy.allowed_langs = {c.langs.begin(), c.langs.end()};
      policy.drop_retweets = !c.keep_retweets;
      policy.drop_url_tweets = !c.keep_url_tweets;
      const auto s = pipeline::ingest(path, format, policy, run);
      fmt::print("ingested {} records: {} admitted, {} malformed, {} language, {} retweet, {} url\n",
                 s.records, s.admitted, s.malformed, s.dropped_lang, s.dropped_retweet,
                 s.dropped_url);
    } else if (extract_cmd->parsed()) {
      const auto emoji = load_emoji(c);
      std::unique_ptr<extract::Extractor> extractor;
      if (!c.ner_url.empty()) {
        extract::RemoteConfig rc;
        rc.url = c.ner_url;
        rc.token = c.ner_token;
        rc.timeout = std::chrono::milliseconds(c.ner_timeout_ms);
        extractor = std::make_unique<extract::RemoteExtractor>(rc);
      } else {
        extractor = std::make_unique<extract::GazetteerExtractor>(
            extract::Gazetteer::load(need_file(c.gazetteer, "--gazetteer", command)));
      }
      const auto n = pipeline::extract_mentions(run, *extractor, emoji, c.threads);
      fmt::print("{} mentions -> {}\n", n, run.mentions().string());
    } else if (normalize_cmd->parsed()) {
      const auto rules = normalize::RuleSet::load(need_file(c.rules, "--rules", command));
      normalize::SuffixLemmatizer lemmatizer;
      if (auto p = optional_file(c.lemma_exceptions, "--lemma-exceptions")) {
        lemmatizer = normalize::SuffixLemmatizer::load(*p);
      }
      const auto r = pipeline::run_normalize(run, rules, lemmatizer, c.min_count, c.seed, c.threads);
      fmt::print("{} lemmas, {} with at least {} occurrences\n", r.all.size(), r.filtered.size(),
                 c.min_count);
      std::cout << normalize::render_stats_text(r.stats_all, r.stats_filtered, c.min_count);
    } else if (map_cmd->parsed()) {
      const auto inputs = load_mapping(c, command);
      curation::IterationState state;
      pipeline::map_round(state, run, *inputs->mapper, loop_config(c), c.threads);
      const auto& rec = state.history.back();
      fmt::print("round {}: {} candidates for {} lemmas, {} below threshold; sample of {}\n",
                 state.round, state.candidates.size(), rec.mapped_lemmas, rec.unmapped_lemmas,
                 state.sample.size());
    } else if (sweep->parsed()) {
      pipeline::SweepResult r;
      if (!scores.empty()) {
        r = pipeline::sweep_scores(need_file(scores, "--scores", command), run);
      } else {
        const auto inputs = load_mapping(c, command);
        r = pipeline::run_sweep(run, *inputs->mapper, c.threads);
      }
      const auto show = [](const std::optional<double>& v) {
        return v ? fmt::format("{:.2f}", *v) : std::string("undefined");
      };
      fmt::print("elbow: semantic {} lexical {} -> {}\n", show(r.elbow_semantic),
                 show(r.elbow_lexical), run.sweep().string());
    } else if (sample->parsed()) {
      auto state = pipeline::load_state(run);
      const auto inventory =
          mapping::ConceptInventory::load(need_file(c.inventory, "--inventory", command));
      const auto n = pipeline::write_sample(run, state, inventory);
      fmt::print("round {}: {} sampled pairs -> {}\n", state.round, n,
                 run.sample(state.round).string());
      if (!annotators.empty()) {
        const auto tasks = pipeline::make_tasks(run, state, inventory, split_list(annotators));
        fmt::print("{} annotation tasks -> {}\n", tasks.size(), run.tasks(state.round).string());
      }
    } else if (labels_import->parsed()) {
      auto state = pipeline::load_state(run);
      const auto path = need_file(labels_path, "labels", command);
      auto in = io::open_input(path);
      const auto n = pipeline::import_labels(run, state, curation::read_labels(in, path.string()));
      fmt::print("round {}: {} labels imported\n", state.round, n);
    } else if (round_close->parsed()) {
      auto state = pipeline::load_state(run);
      const auto inventory =
          mapping::ConceptInventory::load(need_file(c.inventory, "--inventory", command));
      const int round = state.round;
      const auto outcome = pipeline::close_round(state, run, inventory);
      fmt::print("round {}: accuracy {} ({} correct, {} incorrect, {} not a symptom); {}\n", round,
                 annotation::render_accuracy(outcome.exit.correct,
                                             outcome.exit.correct + outcome.exit.incorrect),
                 outcome.exit.correct, outcome.exit.incorrect, outcome.exit.not_symptom,
                 curation::to_string(state.status));
      fmt::print("dictionary: {} lemmas, {} concepts\n", state.dictionary.lemma_count(),
                 state.dictionary.concept_count());
    } else if (serve->parsed()) {
      annotation::RoundService service(run.annotation());
      if (fs::exists(run.state())) {
        auto state = pipeline::load_state(run);
        if (state.status == curation::LoopStatus::awaiting_labels && !service.has_round(state.round)) {
          if (annotators.empty()) {
            throw FlagError("--annotators", ErrorCode::configuration,
                            "--annotators is required to open the annotation round");
          }
          const auto inventory =
              mapping::ConceptInventory::load(need_file(c.inventory, "--inventory", command));
          service.open_round(state.round,
                             pipeline::make_tasks(run, state, inventory, split_list(annotators)));
        }
      }
      httplib::Server server;
      annotation::ServerOptions options{token, ui_dir};
      annotation::install_routes(server, service, options);
      fmt::print("listening on http://{}:{}\n", host, port);
      std::cout.flush();
      if (!server.listen(host, port)) {
        throw Error(ErrorCode::io, fmt::format("cannot listen on {}:{}", host, port));
      }
    } else if (kappa->parsed()) {
      int round = kappa_round;
      if (round == 0) round = pipeline::load_state(run).round;
      const annotation::RoundService service(run.annotation());
      const auto k = service.kappa(round);
      ojson sets = ojson::array();
      for (const auto& s : k.per_set) sets.push_back(kappa_json(s));
      print_json(ojson{{"round", round}, {"per_set", sets}, {"weighted", kappa_json(k.weighted)}});
    } else if (dict_export->parsed()) {
      const auto dict = pipeline::load_dictionary(run.dictionary());
      std::ostringstream out;
      if (out_format == "json") {
        ojson j = ojson::object();
        for (const auto& [id, lemmas] : dict.entries()) {
          ojson list = ojson::array();
          for (const auto& [lemma, e] : lemmas) {
            list.push_back(ojson{{"lemma", e.lemma},
                                 {"surfaces", e.surfaces},
                                 {"round", e.round},
                                 {"score", e.score}});
          }
          j[id] = ojson{{"name", dict.concept_name(id)}, {"lemmas", list}};
        }
        out << j.dump(2) << '\n';
      } else {
        curation::write_dictionary(out, dict);
      }
      if (out_path.empty()) {
        std::cout << out.str();
      } else {
        io::write_file_atomic(out_path, out.str());
      }
    } else if (match->parsed()) {
      const auto dict = pipeline::load_dictionary(
          dictionary_path.empty() ? run.dictionary()
                                  : need_file(dictionary_path, "--dictionary", command));
      const fs::path corpus_path =
          c.corpus.empty() ? run.tweets() : need_file(c.corpus, "--corpus", command);
      if (!fs::exists(corpus_path)) {
        throw FlagError("--corpus", ErrorCode::configuration,
                        "--corpus is required for `match` when the run has no ingested tweets");
      }
      const auto texts = pipeline::load_texts(corpus_path, load_emoji(c));
      const auto r = pipeline::run_match(texts, dict, run, c.threads);
      fmt::print("{} tweets, {} matched (N) -> {}\n", r.tweets, r.matched_tweets,
                 run.matches().string());
    } else if (report->parsed()) {
      const auto dict = pipeline::load_dictionary(
          dictionary_path.empty() ? run.dictionary()
                                  : need_file(dictionary_path, "--dictionary", command));
      std::optional<analytics::MergeMap> merge_map;
      if (auto p = optional_file(c.merge_map, "--merge-map")) merge_map = analytics::MergeMap::load(*p);
      const auto r = pipeline::run_report(pipeline::load_match(run.matches()), dict,
                                          merge_map ? &*merge_map : nullptr, c.report_min_count,
                                          run);
      std::cout << analytics::render_report_text(r);
    } else if (compare->parsed()) {
      auto in_a = io::open_input(need_file(report_a, "--a", command));
      auto in_b = io::open_input(need_file(report_b, "--b", command));
      const auto a = analytics::read_report_tsv(in_a, report_a);
      const auto b = analytics::read_report_tsv(in_b, report_b);
      std::map<std::string, std::string> renames;
      if (auto p = optional_file(alignment, "--alignment")) {
        auto in = io::open_input(*p);
        io::TsvReader reader(in, p->string());
        const auto from = reader.column("from");
        const auto to = reader.column("to");
        io::TsvRow row;
        while (reader.next(row)) renames[row.at(from)] = row.at(to);
      }
      std::ostringstream out;
      analytics::write_comparison_tsv(out, analytics::compare(a, b, renames), label_a, label_b);
      if (out_path.empty()) {
        std::cout << out.str();
      } else {
        io::write_file_atomic(out_path, out.str());
      }
    } else if (sanity->parsed()) {
      const auto dict = pipeline::load_dictionary(run.dictionary());
      const auto index = corpus::ContextIndex::load(run.context());
      const auto items = annotation::sanity_sample(dict, sanity_n, index, c.seed);
      std::ostringstream out;
      for (const auto& it : items) {
        out << ojson{{"concept_id", it.concept_id},
                     {"concept_name", it.concept_name},
                     {"lemma", it.lemma},
                     {"surfaces", it.surfaces},
                     {"context_tweets", it.context_tweets}}
                   .dump()
            << '\n';
      }
      io::write_file_atomic(run.dir / "sanity.jsonl", out.str());
      fmt::print("{} sanity items -> {}\n", items.size(), (run.dir / "sanity.jsonl").string());
    }
    append_journal(run, command);
  } catch (const FlagError& e) {
    std::cerr << ojson{{"error", to_string(e.code())}, {"flag", e.flag()}, {"message", e.what()}}
                     .dump()
              << '\n';
    return exit_code_for(e.code());
  } catch (const Error& e) {
    std::cerr << ojson{{"error", to_string(e.code())}, {"message", e.what()}}.dump() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << ojson{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }
  return 0;
}
