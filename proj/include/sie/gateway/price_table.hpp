#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "sie/gateway/types.hpp"

namespace sie::gateway {

/// Prices per 1M tokens keyed by (provider, model_name). Loaded from a CSV
/// file with header `provider,model_name,price_in,price_out`; blank lines
/// and lines starting with '#' are skipped.
class PriceTable {
 public:
  static PriceTable parse(std::string_view csv);

  void set(const std::string& provider, const std::string& model_name, double price_in,
           double price_out);
  std::optional<std::pair<double, double>> find(const std::string& provider,
                                                const std::string& model_name) const;

  /// Copies the model's prices in when the table lists it.
  ModelRef priced(ModelRef model) const;

  std::size_t size() const noexcept { return prices_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, std::pair<double, double>> prices_;
};

}  // namespace sie::gateway
