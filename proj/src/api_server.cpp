#include "fcm/api_server.hpp"

#include <charconv>
#include <thread>

#include "httplib.h"

#include "fcm/error.hpp"
#include "fcm/io_util.hpp"
#include "fcm/pipeline.hpp"
#include "fcm/preprocess.hpp"
#include "fcm/svd.hpp"

namespace fcm::api {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

ordered_json LabelStore::to_json() const {
  ordered_json l = ordered_json::object();
  for (const auto& [concept_name, terms] : labels) {
    ordered_json t = ordered_json::object();
    for (const auto& [term, facet] : terms) t[term] = std::string(concepts::to_string(facet));
    l[concept_name] = std::move(t);
  }
  ordered_json notes = ordered_json::object();
  for (const auto& [c, text] : scenario_notes) notes[c] = text;
  return {{"run_id", run_id}, {"revision", revision}, {"labels", std::move(l)}, {"scenario_notes", std::move(notes)}};
}

LabelStore LabelStore::from_json(const json& j) {
  LabelStore s;
  s.run_id = j.value("run_id", "");
  s.revision = j.value("revision", std::uint64_t{0});
  if (j.contains("labels")) {
    for (const auto& [c, terms] : j["labels"].items()) {
      for (const auto& [term, facet] : terms.items()) {
        auto f = concepts::parse_facet(facet.get<std::string>());
        if (!f) throw Error(ErrorKind::data, "BadLabel", "unknown facet '" + facet.get<std::string>() + "'");
        s.labels[c][term] = *f;
      }
    }
  }
  if (j.contains("scenario_notes"))
    for (const auto& [c, text] : j["scenario_notes"].items()) s.scenario_notes[c] = text.get<std::string>();
  return s;
}

LabelStore load_labels(const fs::path& run_dir, const std::string& run_id) {
  const auto path = run_dir / pipeline::kLabelsFile;
  if (!fs::exists(path)) {
    LabelStore s;
    s.run_id = run_id;
    return s;
  }
  return LabelStore::from_json(json::parse(io::read_file(path)));
}

void save_labels(const fs::path& run_dir, const LabelStore& store) {
  io::write_file_atomic(run_dir / pipeline::kLabelsFile, store.to_json().dump(2) + "\n");
}

RunView RunView::load(const fs::path& run_dir) {
  if (!fs::exists(run_dir / pipeline::kConceptsFile) || !fs::exists(run_dir / pipeline::kManifestFile))
    throw RunNotFound(run_dir.string());
  RunView v;
  v.manifest = ordered_json::parse(io::read_file(run_dir / pipeline::kManifestFile));
  v.document = concepts::concepts_from_json(json::parse(io::read_file(run_dir / pipeline::kConceptsFile)));

  const auto factors = svd::read_factors(run_dir / pipeline::kFactorsDir);
  const auto vocab = json::parse(io::read_file(run_dir / pipeline::kVocabFile));
  std::vector<std::string> terms;
  for (const auto& t : vocab.at("terms")) terms.push_back(t.at("term").get<std::string>());
  std::vector<std::string> ids;
  for (const auto& d : preprocess::parse_token_dump(io::read_file(run_dir / pipeline::kTokensFile)))
    ids.push_back(d.record_id);
  v.model = concepts::build_concept_model(factors, v.document.k, std::move(terms), std::move(ids), v.document.component);

  const std::string text = io::read_file(run_dir / pipeline::kRecordsFile);
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = io::trim(std::string_view(text).substr(start, end - start));
    if (!line.empty()) {
      auto rec = ordered_json::parse(line);
      const auto id = rec.at("record_id").get<std::string>();
      v.records[id] = std::move(rec);
    }
    start = end + 1;
  }
  return v;
}

std::optional<std::size_t> RunView::find_concept(const std::string& name) const {
  for (std::size_t i = 0; i < document.concepts.size(); ++i)
    if (document.concepts[i].name == name) return i;
  return std::nullopt;
}

namespace {

void send_json(httplib::Response& res, const ordered_json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, {{"error", code}, {"message", message}}, status);
}

struct BadRequest {
  std::string message;
};

std::size_t query_limit(const httplib::Request& req, std::size_t fallback) {
  if (!req.has_param("limit")) return fallback;
  const std::string s = req.get_param_value("limit");
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v < 1) throw BadRequest{"limit must be a positive integer"};
  return v;
}

std::optional<double> query_min_loading(const httplib::Request& req) {
  if (!req.has_param("min_loading")) return std::nullopt;
  const std::string s = req.get_param_value("min_loading");
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw BadRequest{"min_loading must be a number"};
  }
}

ordered_json loadings(const std::vector<concepts::Loading>& ls, const char* key) {
  auto arr = ordered_json::array();
  for (const auto& l : ls) arr.push_back({{key, l.key}, {"loading", l.loading}});
  return arr;
}

}  // namespace

struct Server::Impl {
  fs::path run_dir;
  RunView view;
  std::mutex write_mutex;
  LabelStore store;
  httplib::Server http;
  std::thread thread;
  int port = 0;

  // Rejects a write whose If-Match header names another revision.
  bool precondition_ok(const httplib::Request& req, httplib::Response& res) {
    if (!req.has_header("If-Match")) return true;
    std::string tag = req.get_header_value("If-Match");
    if (tag.size() >= 2 && tag.front() == '"' && tag.back() == '"') tag = tag.substr(1, tag.size() - 2);
    if (tag == std::to_string(store.revision)) return true;
    send_json(res, {{"error", "RevisionConflict"},
                    {"message", "If-Match revision " + tag + " does not match current revision"},
                    {"revision", store.revision}},
              409);
    return false;
  }

  void commit(httplib::Response& res) {
    LabelStore next = store;
    ++next.revision;
    save_labels(run_dir, next);
    store = std::move(next);
    res.set_header("ETag", "\"" + std::to_string(store.revision) + "\"");
    send_json(res, store.to_json());
  }

  // The ranked list either from the full model or scaled like concepts.json.
  std::vector<concepts::Loading> ranked(std::size_t c, bool terms, std::size_t limit, std::optional<double> min) {
    const bool scaled = view.document.loading_scale == "sigma";
    const double sigma = view.model.singular_values.at(c);
    std::optional<double> unit_min = min;
    if (scaled && min) unit_min = sigma > 0.0 ? *min / sigma : (*min <= 0.0 ? std::optional<double>() : *min);
    auto out = terms ? concepts::top_terms(view.model, c, limit, unit_min)
                     : concepts::top_documents(view.model, c, limit, unit_min);
    if (scaled)
      for (auto& l : out) l.loading *= sigma;
    if (min) std::erase_if(out, [&](const concepts::Loading& l) { return l.loading < *min; });
    return out;
  }

  void routes() {
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type, If-Match"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Expose-Headers", "ETag"}});
    http.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const BadRequest& e) {
        send_error(res, 400, "BadRequest", e.message);
      } catch (const json::exception& e) {
        send_error(res, 400, "BadJson", e.what());
      } catch (const UnknownLabeledTerm& e) {
        send_error(res, 422, e.code(), e.what());
      } catch (const Error& e) {
        send_error(res, e.kind() == ErrorKind::usage ? 400 : 500, e.code(), e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "Internal", e.what());
      }
    });

    http.Get("/api/run", [this](const httplib::Request&, httplib::Response& res) { send_json(res, view.manifest); });

    http.Get("/api/singular-values", [this](const httplib::Request&, httplib::Response& res) {
      const auto& d = view.document;
      send_json(res, {{"values", d.singular_values},
                      {"elbow_index", d.elbow_index ? ordered_json(*d.elbow_index) : ordered_json()}});
    });

    http.Get("/api/concepts", [this](const httplib::Request&, httplib::Response& res) {
      auto arr = ordered_json::array();
      for (const auto& c : view.document.concepts)
        arr.push_back({{"name", c.name},
                       {"sigma", c.sigma},
                       {"terms", loadings(c.terms, "term")},
                       {"documents", loadings(c.documents, "record_id")}});
      send_json(res, arr);
    });

    auto concept_list = [this](bool terms) {
      return [this, terms](const httplib::Request& req, httplib::Response& res) {
        const std::string name = req.matches[1];
        auto c = view.find_concept(name);
        if (!c) return send_error(res, 404, "UnknownConcept", "no concept named '" + name + "'");
        const std::size_t limit = query_limit(req, terms ? 25 : 10);
        send_json(res, loadings(ranked(*c, terms, limit, query_min_loading(req)), terms ? "term" : "record_id"));
      };
    };
    http.Get(R"(/api/concepts/([^/]+)/terms)", concept_list(true));
    http.Get(R"(/api/concepts/([^/]+)/documents)", concept_list(false));

    http.Get(R"(/api/documents/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      auto it = view.records.find(id);
      if (it == view.records.end()) return send_error(res, 404, "UnknownDocument", "no record '" + id + "'");
      send_json(res, it->second);
    });

    http.Get("/api/labels", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(write_mutex);
      res.set_header("ETag", "\"" + std::to_string(store.revision) + "\"");
      send_json(res, store.to_json());
    });

    http.Post("/api/labels", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = json::parse(req.body);
      const std::string name = body.at("concept").get<std::string>();
      const std::string term = body.at("term").get<std::string>();
      auto c = view.find_concept(name);
      if (!c) return send_error(res, 404, "UnknownConcept", "no concept named '" + name + "'");
      std::optional<concepts::Facet> facet;
      if (!body.at("facet").is_null()) {
        facet = concepts::parse_facet(body["facet"].get<std::string>());
        if (!facet) throw BadRequest{"unknown facet '" + body["facet"].get<std::string>() + "'"};
      }
      const auto& listed = view.document.concepts[*c].terms;
      if (std::none_of(listed.begin(), listed.end(), [&](const auto& l) { return l.key == term; }))
        throw UnknownLabeledTerm(term);

      std::lock_guard lock(write_mutex);
      if (!precondition_ok(req, res)) return;
      LabelStore before = store;
      if (facet)
        store.labels[name][term] = *facet;
      else if (store.labels.count(name)) {
        store.labels[name].erase(term);
        if (store.labels[name].empty()) store.labels.erase(name);
      }
      try {
        commit(res);
      } catch (...) {
        store = std::move(before);
        throw;
      }
    });

    http.Post(R"(/api/scenarios/([^/]+)/narrative)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string name = req.matches[1];
      if (!view.find_concept(name)) return send_error(res, 404, "UnknownConcept", "no concept named '" + name + "'");
      const auto body = json::parse(req.body);
      std::lock_guard lock(write_mutex);
      if (!precondition_ok(req, res)) return;
      LabelStore before = store;
      if (body.at("narrative").is_null())
        store.scenario_notes.erase(name);
      else
        store.scenario_notes[name] = body["narrative"].get<std::string>();
      try {
        commit(res);
      } catch (...) {
        store = std::move(before);
        throw;
      }
    });

    http.Get("/api/export", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(write_mutex);
      auto arr = ordered_json::array();
      for (const auto& summary : view.document.concepts) {
        std::map<std::string, concepts::Facet> labels;
        if (auto it = store.labels.find(summary.name); it != store.labels.end()) labels = it->second;
        std::optional<std::string> note;
        if (auto it = store.scenario_notes.find(summary.name); it != store.scenario_notes.end()) note = it->second;
        arr.push_back(concepts::to_json(concepts::assemble_scenario(summary, view.document.component, labels, note)));
      }
      send_json(res, {{"run_id", store.run_id}, {"revision", store.revision}, {"scenarios", std::move(arr)}});
    });
  }
};

Server::Server(const fs::path& run_dir, int port, const std::string& host) : impl_(std::make_unique<Impl>()) {
  impl_->run_dir = run_dir;
  impl_->view = RunView::load(run_dir);
  impl_->store = load_labels(run_dir, impl_->view.manifest.value("run_id", ""));
  impl_->routes();
  // httplib defaults to SO_REUSEPORT, which would let a second server share the port.
  impl_->http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  if (port == 0) {
    impl_->port = impl_->http.bind_to_any_port(host);
    if (impl_->port < 0) throw PortInUse(0);
  } else {
    if (!impl_->http.bind_to_port(host, port)) throw PortInUse(port);
    impl_->port = port;
  }
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
}

Server::~Server() { stop(); }

int Server::port() const { return impl_->port; }

void Server::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void Server::stop() {
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace fcm::api
