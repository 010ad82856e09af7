#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "sie/config/profiles.hpp"
#include "sie/gateway/gateway.hpp"
#include "sie/gateway/price_table.hpp"

namespace sie::pipeline {

/// Offline fixture directory. Every file is optional:
///
///   chat.json        scripted chat replies (ScriptedChatProvider::from_json)
///   embeddings.json  explicit vectors (ScriptedEmbeddingProvider::from_json)
///   prices.csv       per-model prices (PriceTable::parse)
struct FixtureDir {
  std::filesystem::path dir;

  std::filesystem::path chat() const { return dir / "chat.json"; }
  std::filesystem::path embeddings() const { return dir / "embeddings.json"; }
  std::filesystem::path prices() const { return dir / "prices.csv"; }
};

/// Registers one chat and one embedding backend per declared provider.
/// With fixtures every provider, http ones included, is served by the
/// scripted backends; without them http providers talk to their endpoint
/// and scripted providers answer from an empty script with hashing
/// embeddings of the dimension named by "hash-N" (256 otherwise).
void register_providers(gateway::Gateway& gateway, const config::ProfilesFile& profiles,
                        const std::optional<FixtureDir>& fixtures);

/// Copies prices from the table into every agent and the embedding model.
void apply_prices(config::ProfilesFile& profiles, const gateway::PriceTable& prices);

/// Hashing dimension encoded in a model name of the form "hash-N".
std::size_t hashing_dim(const std::string& model_name);

}  // namespace sie::pipeline
