#include "sie/gateway/scripted.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "sie/common/digest.hpp"
#include "sie/common/error.hpp"
#include "sie/common/text.hpp"

namespace sie::gateway {

using nlohmann::json;

std::string request_digest(std::string_view model_name, std::span<const Message> messages,
                           double temperature) {
  std::string buf(model_name);
  buf += '\n';
  for (const auto& m : messages) {
    buf += to_string(m.role);
    buf += ':';
    buf += m.content;
    buf += '\x1e';
  }
  char temp[32];
  std::snprintf(temp, sizeof temp, "\n%.4f", temperature);
  buf += temp;
  return sha256_hex(buf);
}

ScriptedChatProvider::ScriptedChatProvider(std::vector<ScriptedResponse> responses)
    : responses_(std::move(responses)) {}

std::vector<ScriptedResponse> ScriptedChatProvider::parse_script(std::string_view bytes) {
  json root;
  try {
    root = json::parse(bytes);
  } catch (const json::parse_error& e) {
    fail(Errc::syntax, std::string("scripted fixture is not valid JSON: ") + e.what());
  }
  const auto list = root.is_array() ? root : root.value("responses", json::array());
  std::vector<ScriptedResponse> out;
  for (const auto& r : list) {
    ScriptedResponse s;
    if (r.contains("digest")) s.digest = r.at("digest").get<std::string>();
    if (r.contains("model")) s.model = r.at("model").get<std::string>();
    s.contains = r.value("contains", std::vector<std::string>{});
    s.excludes = r.value("excludes", std::vector<std::string>{});
    const auto& t = r.at("text");
    s.text = t.is_string() ? t.get<std::string>() : t.dump();
    if (r.contains("input_tokens")) s.input_tokens = r.at("input_tokens").get<std::uint64_t>();
    if (r.contains("output_tokens")) s.output_tokens = r.at("output_tokens").get<std::uint64_t>();
    s.latency_seconds = r.value("latency", 0.0);
    out.push_back(std::move(s));
  }
  return out;
}

ScriptedChatProvider ScriptedChatProvider::from_json(std::string_view bytes) {
  return ScriptedChatProvider(parse_script(bytes));
}

void ScriptedChatProvider::add(ScriptedResponse response) {
  std::lock_guard lock(mu_);
  responses_.push_back(std::move(response));
}

std::size_t ScriptedChatProvider::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

ProviderReply ScriptedChatProvider::chat(const ModelRef& model, std::span<const Message> messages,
                                         const Decoding& decoding, const CallLimits&) {
  const auto digest = request_digest(model.model_name, messages, decoding.temperature);
  std::string joined;
  for (const auto& m : messages) {
    joined += m.content;
    joined += '\n';
  }

  std::lock_guard lock(mu_);
  ++calls_;
  const ScriptedResponse* hit = nullptr;
  for (const auto& r : responses_)
    if (r.digest && *r.digest == digest) {
      hit = &r;
      break;
    }
  if (!hit) {
    for (const auto& r : responses_) {
      if (r.digest) continue;
      if (r.model && *r.model != model.model_name) continue;
      bool ok = true;
      for (const auto& needle : r.contains)
        if (joined.find(needle) == std::string::npos) ok = false;
      for (const auto& needle : r.excludes)
        if (joined.find(needle) != std::string::npos) ok = false;
      if (ok) {
        hit = &r;
        break;
      }
    }
  }
  if (!hit) throw ProviderError(404, "no scripted response for digest " + digest);

  ProviderReply reply;
  reply.text = hit->text;
  reply.input_tokens = hit->input_tokens.value_or(estimate_tokens(joined));
  reply.output_tokens = hit->output_tokens.value_or(estimate_tokens(hit->text));
  reply.latency_seconds = hit->latency_seconds;
  return reply;
}

Vector HashingEmbeddingProvider::embed_one(std::string_view s) const {
  Vector v(dim_, 0.0);
  auto toks = text::content_words(s);
  if (toks.empty()) toks = text::words(s);
  if (toks.empty()) {
    v[fnv1a64(s) % dim_] = 1.0;
    return v;
  }
  for (const auto& t : toks) {
    const auto h = fnv1a64(t);
    v[h % dim_] += (h >> 63) != 0 ? -1.0 : 1.0;
  }
  return v;
}

std::vector<Vector> HashingEmbeddingProvider::embed(const ModelRef&,
                                                    std::span<const std::string> texts,
                                                    const CallLimits&) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

ScriptedEmbeddingProvider::ScriptedEmbeddingProvider(std::map<std::string, Vector> fixtures,
                                                     std::size_t fallback_dim)
    : fixtures_(std::move(fixtures)),
      fallback_(fallback_dim != 0        ? fallback_dim
                : !fixtures_.empty()     ? fixtures_.begin()->second.size()
                                         : 256),
      dim_(fallback_dim != 0    ? fallback_dim
           : !fixtures_.empty() ? fixtures_.begin()->second.size()
                                : 256) {}

ScriptedEmbeddingProvider ScriptedEmbeddingProvider::from_json(std::string_view bytes) {
  json root;
  try {
    root = json::parse(bytes);
  } catch (const json::parse_error& e) {
    fail(Errc::syntax, std::string("embedding fixture is not valid JSON: ") + e.what());
  }
  std::map<std::string, Vector> fixtures;
  for (const auto& [text, vec] : root.value("vectors", json::object()).items())
    fixtures[text] = vec.get<Vector>();
  return ScriptedEmbeddingProvider(std::move(fixtures), root.value("dim", std::size_t{0}));
}

void ScriptedEmbeddingProvider::set(std::string text, Vector v) {
  fixtures_[std::move(text)] = std::move(v);
}

std::vector<Vector> ScriptedEmbeddingProvider::embed(const ModelRef&,
                                                     std::span<const std::string> texts,
                                                     const CallLimits&) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    const auto it = fixtures_.find(t);
    out.push_back(it != fixtures_.end() ? it->second : fallback_.embed_one(t));
  }
  return out;
}

}  // namespace sie::gateway
