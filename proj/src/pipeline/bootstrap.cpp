#include "sie/pipeline/bootstrap.hpp"

#include <charconv>

#include "sie/common/error.hpp"
#include "sie/common/io.hpp"
#include "sie/gateway/http_provider.hpp"
#include "sie/gateway/scripted.hpp"

namespace sie::pipeline {

namespace fs = std::filesystem;

std::size_t hashing_dim(const std::string& model_name) {
  constexpr std::string_view prefix = "hash-";
  if (model_name.rfind(prefix, 0) == 0) {
    std::size_t dim = 0;
    const char* b = model_name.data() + prefix.size();
    const char* e = model_name.data() + model_name.size();
    const auto [p, ec] = std::from_chars(b, e, dim);
    if (ec == std::errc{} && p == e && dim > 0) return dim;
  }
  return 256;
}

void register_providers(gateway::Gateway& gw, const config::ProfilesFile& profiles,
                        const std::optional<FixtureDir>& fixtures) {
  std::shared_ptr<gateway::ScriptedChatProvider> chat;
  std::shared_ptr<gateway::EmbeddingProvider> embed;
  if (fixtures) {
    if (!fs::is_directory(fixtures->dir))
      fail(Errc::not_found, "fixture directory does not exist", fixtures->dir.string());
    chat = fs::exists(fixtures->chat()) ? std::make_shared<gateway::ScriptedChatProvider>(
                                              gateway::ScriptedChatProvider::parse_script(
                                                  read_file(fixtures->chat())))
                                        : std::make_shared<gateway::ScriptedChatProvider>();
    if (fs::exists(fixtures->embeddings()))
      embed = std::make_shared<gateway::ScriptedEmbeddingProvider>(
          gateway::ScriptedEmbeddingProvider::from_json(read_file(fixtures->embeddings())));
  } else {
    chat = std::make_shared<gateway::ScriptedChatProvider>();
  }
  if (!embed)
    embed = std::make_shared<gateway::HashingEmbeddingProvider>(
        hashing_dim(profiles.embedding_model.model_name));

  auto providers = profiles.providers;
  for (const auto& [_, p] : profiles.agents)
    if (!providers.count(p.model.provider)) providers[p.model.provider].name = p.model.provider;
  if (!providers.count(profiles.embedding_model.provider))
    providers[profiles.embedding_model.provider].name = profiles.embedding_model.provider;

  for (const auto& [name, cfg] : providers) {
    if (fixtures || cfg.kind == config::ProviderKind::scripted) {
      gw.register_chat(name, chat);
      gw.register_embedding(name, embed);
      continue;
    }
    gateway::HttpEndpoint ep{cfg.base_url, cfg.chat_path, cfg.embed_path,
                             gateway::resolve_credential(cfg.credential_ref)};
    gw.register_chat(name, std::make_shared<gateway::HttpChatProvider>(ep));
    gw.register_embedding(name, std::make_shared<gateway::HttpEmbeddingProvider>(ep));
  }
}

void apply_prices(config::ProfilesFile& profiles, const gateway::PriceTable& prices) {
  for (auto& [_, p] : profiles.agents) p.model = prices.priced(p.model);
  profiles.embedding_model = prices.priced(profiles.embedding_model);
}

}  // namespace sie::pipeline
