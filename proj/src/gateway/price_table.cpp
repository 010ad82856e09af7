#include "sie/gateway/price_table.hpp"

#include <sstream>

#include "sie/common/error.hpp"
#include "sie/common/text.hpp"

namespace sie::gateway {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_price(const std::string& s, int lineno) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || v < 0.0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(Errc::format, "price table line " + std::to_string(lineno) + ": bad price '" + s + "'",
         std::to_string(lineno));
  }
}

}  // namespace

PriceTable PriceTable::parse(std::string_view csv) {
  PriceTable table;
  std::istringstream in{std::string(csv)};
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cols.push_back(trim(cell));
    if (!header_seen) {
      header_seen = true;
      if (cols.size() == 4 && cols[0] == "provider" && cols[1] == "model_name") continue;
    }
    if (cols.size() != 4)
      fail(Errc::format, "price table line " + std::to_string(lineno) + ": expected 4 columns",
           std::to_string(lineno));
    table.set(cols[0], cols[1], parse_price(cols[2], lineno), parse_price(cols[3], lineno));
  }
  return table;
}

void PriceTable::set(const std::string& provider, const std::string& model_name, double price_in,
                     double price_out) {
  if (price_in < 0.0 || price_out < 0.0)
    fail(Errc::invalid_argument, "prices must be non-negative", provider + "/" + model_name);
  prices_[{provider, model_name}] = {price_in, price_out};
}

std::optional<std::pair<double, double>> PriceTable::find(const std::string& provider,
                                                          const std::string& model_name) const {
  const auto it = prices_.find({provider, model_name});
  if (it == prices_.end()) return std::nullopt;
  return it->second;
}

ModelRef PriceTable::priced(ModelRef model) const {
  if (const auto p = find(model.provider, model.model_name)) {
    model.price_in = p->first;
    model.price_out = p->second;
  }
  return model;
}

}  // namespace sie::gateway
