#include "sie/config/profiles.hpp"

#include <cmath>

#include "sie/common/error.hpp"
#include "yaml_util.hpp"

namespace sie::config {

using nlohmann::json;

void validate(const AgentProfile& p) {
  const auto role = std::string(to_string(p.role));
  if (p.model.provider.empty() || p.model.model_name.empty())
    fail(Errc::invalid_argument, "profile for " + role + " needs provider/model", role);
  if (!(p.decoding.temperature >= 0.0) || !std::isfinite(p.decoding.temperature))
    fail(Errc::invalid_argument, "temperature must be >= 0 for " + role, role);
  if (p.decoding.max_output_tokens < 1)
    fail(Errc::invalid_argument, "max_output_tokens must be >= 1 for " + role, role);
}

ProfilesFile load_profiles(std::string_view source) {
  using namespace detail;
  const auto root = parse_yaml(source, "profiles file");
  std::vector<std::string> bad;
  unknown_keys(root, {"providers", "embedding", "agents"}, "", bad);

  ProfilesFile out;
  if (const auto providers = root["providers"]) {
    if (!providers.IsMap()) {
      bad.push_back("providers");
    } else {
      for (const auto& kv : providers) {
        ProviderConfig pc;
        pc.name = kv.first.as<std::string>();
        const auto path = "providers." + pc.name;
        const auto& n = kv.second;
        unknown_keys(n, {"kind", "base_url", "chat_path", "embed_path", "credential_ref"},
                     path + ".", bad);
        const auto kind = n["kind"] ? scalar(n["kind"], path + ".kind") : std::string("scripted");
        if (kind == "scripted") {
          pc.kind = ProviderKind::scripted;
        } else if (kind == "http") {
          pc.kind = ProviderKind::http;
          if (!n["base_url"]) bad.push_back(path + ".base_url");
        } else {
          bad.push_back(path + ".kind");
        }
        if (n["base_url"]) pc.base_url = scalar(n["base_url"], path + ".base_url");
        if (n["chat_path"]) pc.chat_path = scalar(n["chat_path"], path + ".chat_path");
        if (n["embed_path"]) pc.embed_path = scalar(n["embed_path"], path + ".embed_path");
        if (n["credential_ref"])
          pc.credential_ref = scalar(n["credential_ref"], path + ".credential_ref");
        out.providers[pc.name] = std::move(pc);
      }
    }
  }

  if (const auto e = root["embedding"]) {
    unknown_keys(e, {"model"}, "embedding.", bad);
    if (!e["model"])
      bad.push_back("embedding.model");
    else
      out.embedding_model = gateway::parse_model_ref(scalar(e["model"], "embedding.model"));
  } else {
    out.embedding_model = {"scripted", "hash-256", 0.0, 0.0};
  }

  const auto agents = root["agents"];
  if (!agents || !agents.IsMap()) {
    bad.push_back("agents");
  } else {
    for (const auto& kv : agents) {
      const auto name = kv.first.as<std::string>();
      const auto path = "agents." + name;
      const auto role = parse_role(name);
      if (!role) {
        bad.push_back(path);
        continue;
      }
      const auto& n = kv.second;
      unknown_keys(n, {"model", "temperature", "max_output_tokens", "credential_ref"}, path + ".",
                   bad);
      AgentProfile p;
      p.role = *role;
      if (!n["model"]) {
        bad.push_back(path + ".model");
        continue;
      }
      p.model = gateway::parse_model_ref(scalar(n["model"], path + ".model"));
      if (n["temperature"]) p.decoding.temperature = number(n["temperature"], path + ".temperature");
      if (n["max_output_tokens"]) {
        const double v = number(n["max_output_tokens"], path + ".max_output_tokens");
        if (v < 1 || v != std::floor(v)) {
          bad.push_back(path + ".max_output_tokens");
          continue;
        }
        p.decoding.max_output_tokens = static_cast<std::uint32_t>(v);
      }
      if (n["credential_ref"]) p.credential_ref = scalar(n["credential_ref"], path + ".credential_ref");
      validate(p);
      out.agents[p.role] = std::move(p);
    }
  }
  if (!bad.empty()) schema_failure("profiles file", bad);
  return out;
}

json to_json(const AgentProfile& p) {
  return {{"role", std::string(to_string(p.role))},
          {"model", p.model.qualified()},
          {"price_in", p.model.price_in},
          {"price_out", p.model.price_out},
          {"temperature", p.decoding.temperature},
          {"max_output_tokens", p.decoding.max_output_tokens},
          {"credential_ref", p.credential_ref}};
}

AgentProfile profile_from_json(const json& j) {
  AgentProfile p;
  const auto role = parse_role(j.at("role").get<std::string>());
  if (!role) fail(Errc::invalid_argument, "unknown agent role", j.at("role").get<std::string>());
  p.role = *role;
  p.model = gateway::parse_model_ref(j.at("model").get<std::string>());
  p.model.price_in = j.at("price_in").get<double>();
  p.model.price_out = j.at("price_out").get<double>();
  p.decoding.temperature = j.at("temperature").get<double>();
  p.decoding.max_output_tokens = j.at("max_output_tokens").get<std::uint32_t>();
  p.credential_ref = j.at("credential_ref").get<std::string>();
  return p;
}

void validate(const RunOptions& o) {
  if (o.max_repair_attempts < 0)
    fail(Errc::invalid_argument, "max_repair_attempts must be >= 0", "max_repair_attempts");
  if (o.hil_enabled && o.max_feedback_rounds < 1)
    fail(Errc::invalid_argument, "max_feedback_rounds must be >= 1 with HIL enabled",
         "max_feedback_rounds");
  if (o.max_feedback_rounds < 0)
    fail(Errc::invalid_argument, "max_feedback_rounds must be >= 0", "max_feedback_rounds");
  if (o.alignment_top_k < 1)
    fail(Errc::invalid_argument, "alignment_top_k must be >= 1", "alignment_top_k");
  if (!(o.hybrid_alpha >= 0.0 && o.hybrid_alpha <= 1.0))
    fail(Errc::invalid_argument, "hybrid_alpha must lie in [0, 1]", "hybrid_alpha");
  if (o.chunk_max_units < 1)
    fail(Errc::invalid_argument, "chunk_max_units must be >= 1", "chunk_max_units");
  if (o.fan_out < 1) fail(Errc::invalid_argument, "fan_out must be >= 1", "fan_out");
}

json to_json(const RunOptions& o) {
  return {{"hil_enabled", o.hil_enabled},
          {"max_repair_attempts", o.max_repair_attempts},
          {"max_feedback_rounds", o.max_feedback_rounds},
          {"alignment_top_k", o.alignment_top_k},
          {"hybrid_alpha", o.hybrid_alpha},
          {"chunk_max_units", o.chunk_max_units},
          {"fan_out", o.fan_out},
          {"longterm_memory", o.longterm_memory}};
}

RunOptions run_options_from_json(const json& j) {
  RunOptions o;
  o.hil_enabled = j.at("hil_enabled").get<bool>();
  o.max_repair_attempts = j.at("max_repair_attempts").get<int>();
  o.max_feedback_rounds = j.at("max_feedback_rounds").get<int>();
  o.alignment_top_k = j.at("alignment_top_k").get<std::size_t>();
  o.hybrid_alpha = j.at("hybrid_alpha").get<double>();
  o.chunk_max_units = j.at("chunk_max_units").get<std::size_t>();
  o.fan_out = j.at("fan_out").get<std::size_t>();
  o.longterm_memory = j.at("longterm_memory").get<bool>();
  return o;
}

}  // namespace sie::config
