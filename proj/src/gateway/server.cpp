#include "mpst/gateway.hpp"

#include <httplib.h>

namespace mpst {

namespace {

int http_status(const std::string& code)
{
    if (code == "E-NOSESSION" || code == "E-NOPART") return 404;
    if (code == "E-STALE") return 409;
    return 400;
}

void reply_error(httplib::Response& res, const Error& e)
{
    res.status = http_status(e.code());
    nlohmann::json body = {{"code", e.code()}, {"message", e.diagnostics().front().message}};
    res.set_content(body.dump(), "application/json");
}

int path_participant(const std::string& text)
{
    try {
        return std::stoi(text);
    } catch (const std::exception&) {
        throw Error("E-NOPART", "bad participant '" + text + "'");
    }
}

}  // namespace

struct GatewayServer::Impl {
    Gateway& gw;
    httplib::Server http;
    explicit Impl(Gateway& g) : gw(g) {}
};

GatewayServer::GatewayServer(Gateway& gw) : impl_(std::make_unique<Impl>(gw))
{
    auto& http = impl_->http;
    Gateway& g = gw;

    http.Get("/sessions", [&g](const httplib::Request&, httplib::Response& res) {
        res.set_content(nlohmann::json{{"sessions", g.sessions()}}.dump(), "application/json");
    });

    http.Get(R"(/sessions/([^/]+)/participants/([^/]+)/pending)",
             [&g](const httplib::Request& req, httplib::Response& res) {
                 try {
                     auto pc = g.pending(req.matches[1], path_participant(req.matches[2]));
                     res.set_content(pc ? to_json(*pc).dump() : "null", "application/json");
                 } catch (const Error& e) {
                     reply_error(res, e);
                 }
             });

    http.Post(R"(/sessions/([^/]+)/participants/([^/]+)/decision)",
              [&g](const httplib::Request& req, httplib::Response& res) {
                  try {
                      nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
                      if (body.is_discarded()) throw Error("E-PARSE", "decision is not JSON");
                      if (body.is_object()) {
                          if (!body.contains("sessionId")) body["sessionId"] = std::string(req.matches[1]);
                          if (!body.contains("participant")) body["participant"] = std::string(req.matches[2]);
                      }
                      Decision d = decision_from_json(body);
                      if (d.session_id != req.matches[1] || d.participant != path_participant(req.matches[2]))
                          throw Error("E-PARSE", "decision does not match the request path");
                      SubmitResult r = g.submit(d);
                      nlohmann::json out = {{"ok", true}, {"resolved", nullptr}};
                      if (r.resolved) out["resolved"] = to_json(*r.resolved);
                      res.set_content(out.dump(), "application/json");
                  } catch (const Error& e) {
                      reply_error(res, e);
                  }
              });

    http.Get("/events", [&g](const httplib::Request&, httplib::Response& res) {
        auto sent = std::make_shared<size_t>(0);
        res.set_chunked_content_provider("text/event-stream", [&g, sent](size_t, httplib::DataSink& sink) {
            for (const auto& r : g.events_after(*sent, 200)) {
                std::string frame = "event: resolved\ndata: " + to_json(r).dump() + "\n\n";
                if (!sink.write(frame.data(), frame.size())) return false;
                ++*sent;
            }
            if (g.closed()) {
                sink.done();
                return true;
            }
            return sink.is_writable();
        });
    });
}

GatewayServer::~GatewayServer() { stop(); }

int GatewayServer::bind(const std::string& host, int port)
{
    if (port == 0) return impl_->http.bind_to_any_port(host);
    return impl_->http.bind_to_port(host, port) ? port : -1;
}

void GatewayServer::listen() { impl_->http.listen_after_bind(); }

void GatewayServer::stop() { impl_->http.stop(); }

}  // namespace mpst
