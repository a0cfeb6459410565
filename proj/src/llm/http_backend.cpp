#include "orsum/llm/http_backend.hpp"

#include <cstdlib>
#include <regex>

#include <httplib.h>

namespace orsum::llm {

using nlohmann::json;

std::string Url::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

Url parse_url(const std::string& url) {
  static const std::regex re(R"(^(https?)://([^/:]+)(?::(\d+))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw std::invalid_argument("invalid URL: " + url);
  Url u;
  u.scheme = m[1];
  u.host = m[2];
  u.port = m[3].matched ? std::stoi(m[3]) : (u.scheme == "https" ? 443 : 80);
  u.path = m[4].matched ? std::string(m[4]) : "/";
  return u;
}

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)),
      url_(parse_url(config_.endpoint)),
      gate_(std::make_shared<ConcurrencyGate>(config_.max_in_flight)) {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url_.scheme == "https")
    throw std::invalid_argument("https endpoints need a build with OpenSSL support");
#endif
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }
}

std::string parse_completion(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    throw BackendError(200, "response is not JSON: " + body.substr(0, 200));
  }
  const auto* content = [&]() -> const json* {
    auto choices = j.find("choices");
    if (choices == j.end() || !choices->is_array() || choices->empty()) return nullptr;
    auto msg = (*choices)[0].find("message");
    if (msg == (*choices)[0].end()) return nullptr;
    auto c = msg->find("content");
    return c == msg->end() ? nullptr : &*c;
  }();
  if (!content) throw BackendError(200, "response lacks choices[0].message.content");
  return content->is_string() ? content->get<std::string>() : std::string();
}

ChatReply HttpBackend::complete(const ChatRequest& request) {
  ConcurrencyGate::Ticket ticket(*gate_);
  const auto start = std::chrono::steady_clock::now();

  httplib::Client client(url_.origin());
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = client.Post(url_.path, headers, request_body(request).dump(), "application/json");
  const auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write ||
        err == httplib::Error::ConnectionTimeout)
      throw Timeout("request to " + config_.endpoint + " failed: " + httplib::to_string(err));
    throw TransientBackendError(0, "request to " + config_.endpoint +
                                       " failed: " + httplib::to_string(err));
  }
  if (res->status != 200) {
    if (is_transient_status(res->status)) throw TransientBackendError(res->status, res->body);
    throw BackendError(res->status, res->body);
  }
  return {parse_completion(res->body), elapsed.count()};
}

}  // namespace orsum::llm
