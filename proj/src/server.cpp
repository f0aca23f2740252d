#include "collex/server.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <charconv>
#include <sstream>

#include "collex/error.hpp"

namespace collex::annotation {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

void send_json(httplib::Response& res, int status, const ojson& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind,
                std::string_view message) {
  send_json(res, status, ojson{{"error", kind}, {"message", message}});
}

int round_param(const httplib::Request& req) {
  const auto s = req.matches[1].str();
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::validation, fmt::format("bad round '{}'", s));
  }
  return v;
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::validation, fmt::format("request body is not JSON: {}", e.what()));
  }
}

template <typename T>
T field(const json& body, const char* name) {
  if (!body.is_object() || !body.contains(name)) {
    throw Error(ErrorCode::validation, fmt::format("missing field '{}'", name));
  }
  try {
    return body.at(name).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::validation, fmt::format("field '{}' has the wrong type", name));
  }
}

ojson kappa_json(const std::optional<KappaResult>& k) {
  if (!k) return nullptr;
  return ojson{{"kappa", k->kappa},
               {"observed_agreement", k->observed_agreement},
               {"expected_agreement", k->expected_agreement},
               {"n_items", k->n_items},
               {"degenerate", k->degenerate}};
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, http_status_for(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

int http_status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::authorization: return 403;
    case ErrorCode::not_found: return 404;
    case ErrorCode::validation:
    case ErrorCode::invalid_argument: return 400;
    case ErrorCode::conflict:
    case ErrorCode::incomplete_round:
    case ErrorCode::incomplete_adjudication:
    case ErrorCode::adjudication_integrity: return 409;
    default: return 500;
  }
}

void install_routes(httplib::Server& server, RoundService& service, const ServerOptions& options) {
  const std::string token = options.token;
  server.set_pre_routing_handler([token](const httplib::Request& req, httplib::Response& res) {
    if (token.empty() || !req.path.starts_with("/api/")) {
      return httplib::Server::HandlerResponse::Unhandled;
    }
    if (req.get_header_value("X-Collex-Token") != token) {
      send_error(res, 401, "unauthenticated", "missing or wrong X-Collex-Token header");
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  server.Get("/api/rounds", guarded([&service](const httplib::Request&, httplib::Response& res) {
               ojson list = ojson::array();
               for (int r : service.rounds()) {
                 list.push_back(ojson{{"round", r}, {"closed", service.closed(r)}});
               }
               send_json(res, 200, ojson{{"rounds", list}});
             }));

  server.Get(R"(/api/rounds/(\d+)/next)",
             guarded([&service](const httplib::Request& req, httplib::Response& res) {
               const int round = round_param(req);
               const auto annotator = req.get_param_value("annotator");
               if (annotator.empty()) {
                 throw Error(ErrorCode::validation, "query parameter 'annotator' is required");
               }
               const auto task = service.next_task(round, annotator);
               if (!task) {
                 res.status = 204;
                 return;
               }
               send_json(res, 200, to_json(*task));
             }));

  server.Post("/api/labels", guarded([&service](const httplib::Request& req,
                                                httplib::Response& res) {
                const auto body = parse_body(req);
                AnnotationRecord rec;
                rec.pair_id = field<std::string>(body, "pair_id");
                rec.annotator_id = field<std::string>(body, "annotator_id");
                rec.label = field<int>(body, "label");
                const auto ack = service.record_label(std::move(rec));
                send_json(res, 200,
                          ojson{{"stored", true},
                                {"overwritten", ack.overwritten},
                                {"progress", {{"done", ack.annotator_done},
                                              {"total", ack.annotator_total}}}});
              }));

  server.Get(R"(/api/pairs/([^/]+)/context)",
             guarded([&service](const httplib::Request& req, httplib::Response& res) {
               const auto task = service.task(req.matches[1].str());
               send_json(res, 200,
                         ojson{{"pair_id", task.pair_id},
                               {"lemma", task.lemma},
                               {"surfaces", task.surfaces},
                               {"context_tweets", task.context_tweets},
                               {"low_context", task.low_context}});
             }));

  server.Get(R"(/api/rounds/(\d+)/progress)",
             guarded([&service](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, service.progress(round_param(req)));
             }));

  server.Get(R"(/api/rounds/(\d+)/kappa)",
             guarded([&service](const httplib::Request& req, httplib::Response& res) {
               const auto k = service.kappa(round_param(req));
               ojson sets = ojson::array();
               for (std::size_t s = 0; s < k.per_set.size(); ++s) {
                 sets.push_back(ojson{{"set_index", s}, {"result", kappa_json(k.per_set[s])}});
               }
               send_json(res, 200,
                         ojson{{"per_set", sets},
                               {"weighted", kappa_json(k.weighted)},
                               {"aggregation", "sample-size weighted mean over sets"}});
             }));

  server.Get(R"(/api/rounds/(\d+)/disagreements)",
             guarded([&service](const httplib::Request& req, httplib::Response& res) {
               const bool unresolved = req.get_param_value("unresolved") == "1";
               ojson list = ojson::array();
               for (const auto& d : service.disagreements(round_param(req), unresolved)) {
                 ojson j{{"pair_id", d.pair_id},
                         {"lemma", d.lemma},
                         {"concept_id", d.concept_id},
                         {"annotators", d.annotators},
                         {"labels", d.labels},
                         {"resolved", d.resolution.has_value()}};
                 if (d.resolution) {
                   j["resolution"] = {{"label", d.resolution->label},
                                      {"note", d.resolution->note}};
                 }
                 list.push_back(j);
               }
               send_json(res, 200, ojson{{"disagreements", list}});
             }));

  server.Post(R"(/api/rounds/(\d+)/adjudicate)",
              guarded([&service](const httplib::Request& req, httplib::Response& res) {
                const int round = round_param(req);
                const auto body = parse_body(req);
                std::vector<json> items;
                if (body.is_object() && body.contains("resolutions")) {
                  for (const auto& item : body.at("resolutions")) items.push_back(item);
                } else {
                  items.push_back(body);
                }
                for (const auto& item : items) {
                  Resolution r;
                  r.label = field<int>(item, "label");
                  r.note = item.is_object() ? item.value("note", "") : "";
                  service.resolve(round, field<std::string>(item, "pair_id"), std::move(r));
                }
                send_json(res, 200,
                          ojson{{"resolved", items.size()},
                                {"unresolved", service.disagreements(round, true).size()}});
              }));

  server.Get(R"(/api/rounds/(\d+)/labels)",
             guarded([&service](const httplib::Request& req, httplib::Response& res) {
               std::ostringstream out;
               curation::write_labels(out, service.export_labels(round_param(req)));
               res.status = 200;
               res.set_content(out.str(), "text/tab-separated-values");
             }));

  server.Post(R"(/api/rounds/(\d+)/close)",
              guarded([&service](const httplib::Request& req, httplib::Response& res) {
                const int round = round_param(req);
                service.close(round);
                send_json(res, 200, ojson{{"round", round}, {"closed", true}});
              }));

  server.Get(R"(/api/rounds/(\d+)/audit)",
             guarded([&service](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, ojson{{"audit", service.audit(round_param(req))}});
             }));

  if (!options.ui_dir.empty()) {
    if (!server.set_mount_point("/", options.ui_dir.string())) {
      throw Error(ErrorCode::configuration,
                  fmt::format("UI directory {} does not exist", options.ui_dir.string()));
    }
  }
}

}  // namespace collex::annotation
