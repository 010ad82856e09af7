#include "sie/gateway/http_provider.hpp"

#include <algorithm>
#include <cstdlib>

#include "httplib.h"
#include "json.hpp"
#include "sie/common/error.hpp"

namespace sie::gateway {

using nlohmann::json;

namespace {

bool is_transient(int status) { return status == 408 || status == 429 || status >= 500; }

httplib::Result post_json(const HttpEndpoint& ep, const std::string& path, const json& body,
                          const CallLimits& limits) {
  httplib::Client client(ep.base_url);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(limits.timeout).count();
  client.set_connection_timeout(std::max<long long>(1, std::min<long long>(secs, 30)), 0);
  client.set_read_timeout(std::max<long long>(1, secs), 0);
  client.set_write_timeout(std::max<long long>(1, secs), 0);
  httplib::Headers headers;
  if (!ep.api_key.empty()) headers.emplace("Authorization", "Bearer " + ep.api_key);
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res)
    fail(Errc::transport, "request to " + ep.base_url + path + " failed: " +
                              httplib::to_string(res.error()));
  if (is_transient(res->status))
    fail(Errc::transport, "HTTP " + std::to_string(res->status) + " from " + ep.base_url + path,
         std::to_string(res->status));
  if (res->status < 200 || res->status >= 300) throw ProviderError(res->status, res->body);
  return res;
}

json parse_body(const httplib::Result& res) {
  try {
    return json::parse(res->body);
  } catch (const json::parse_error&) {
    throw ProviderError(res->status, "response body is not JSON: " + res->body.substr(0, 200));
  }
}

}  // namespace

std::string resolve_credential(const std::string& credential_ref) {
  if (credential_ref.empty()) return {};
  const char* v = std::getenv(credential_ref.c_str());
  return v ? std::string(v) : std::string{};
}

ProviderReply HttpChatProvider::chat(const ModelRef& model, std::span<const Message> messages,
                                     const Decoding& decoding, const CallLimits& limits) {
  json msgs = json::array();
  for (const auto& m : messages)
    msgs.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  const json body = {{"model", model.model_name},
                     {"messages", std::move(msgs)},
                     {"temperature", decoding.temperature},
                     {"max_tokens", decoding.max_output_tokens}};
  const auto res = post_json(endpoint_, endpoint_.chat_path, body, limits);
  const auto j = parse_body(res);
  ProviderReply reply;
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    reply.text = content.is_string() ? content.get<std::string>() : std::string{};
    if (j.contains("usage")) {
      reply.input_tokens = j["usage"].value("prompt_tokens", std::uint64_t{0});
      reply.output_tokens = j["usage"].value("completion_tokens", std::uint64_t{0});
    }
  } catch (const json::exception& e) {
    throw ProviderError(res->status, std::string("unexpected completion payload: ") + e.what());
  }
  if (reply.input_tokens == 0) {
    std::string joined;
    for (const auto& m : messages) joined += m.content;
    reply.input_tokens = estimate_tokens(joined);
  }
  if (reply.output_tokens == 0) reply.output_tokens = estimate_tokens(reply.text);
  return reply;
}

std::vector<Vector> HttpEmbeddingProvider::embed(const ModelRef& model,
                                                 std::span<const std::string> texts,
                                                 const CallLimits& limits) {
  const json body = {{"model", model.model_name},
                     {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const auto res = post_json(endpoint_, endpoint_.embed_path, body, limits);
  const auto j = parse_body(res);
  std::vector<std::pair<std::size_t, Vector>> indexed;
  try {
    for (const auto& d : j.at("data"))
      indexed.emplace_back(d.value("index", indexed.size()), d.at("embedding").get<Vector>());
  } catch (const json::exception& e) {
    throw ProviderError(res->status, std::string("unexpected embedding payload: ") + e.what());
  }
  std::sort(indexed.begin(), indexed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Vector> out;
  out.reserve(indexed.size());
  for (auto& [_, v] : indexed) out.push_back(std::move(v));
  return out;
}

}  // namespace sie::gateway
