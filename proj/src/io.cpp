#include "dilemma/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace dilemma {

std::string FormatDouble(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw std::runtime_error("cannot format double");
  return std::string(buf.data(), ptr);
}

double ParseDouble(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string> SplitCsvLine(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      return fields;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteTextFile(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

namespace {

std::pair<std::size_t, std::size_t> LineColumn(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

nlohmann::json ParseJsonText(std::string_view text, std::string_view source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, column] = LineColumn(text, byte);
    throw JsonSyntaxError(std::string(source) + ":" + std::to_string(line) + ":" +
                          std::to_string(column) + ": syntax error: " + e.what());
  }
}

std::string CsvField(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

nlohmann::json ToJson(const GameParams& params) {
  nlohmann::json j{{"game", ToString(params.kind)},
                   {"players", params.players},
                   {"rounds", params.rounds}};
  switch (params.kind) {
    case GameKind::kPublicGoods: j["k"] = params.k; break;
    case GameKind::kCollectiveRisk:
      j["k"] = params.k;
      j["m"] = params.threshold;
      break;
    case GameKind::kCommonPool: j["capacity"] = params.capacity; break;
  }
  return j;
}

nlohmann::json ToJson(const GameResult& result, const GameParams& params) {
  nlohmann::json rounds = nlohmann::json::array();
  for (const RoundRecord& r : result.rounds) {
    std::string actions;
    actions.reserve(r.actions.size());
    for (Action a : r.actions) actions.push_back(ToChar(a));
    nlohmann::json jr{{"actions", actions}, {"payoffs", r.payoffs}};
    if (r.stock_before) {
      jr["stock_before"] = *r.stock_before;
      jr["stock_after"] = *r.stock_after;
    }
    rounds.push_back(std::move(jr));
  }
  return {{"schema_version", 1},
          {"params", ToJson(params)},
          {"rounds", std::move(rounds)},
          {"totals", result.totals},
          {"normalized", result.normalized},
          {"mean_welfare", result.mean_welfare}};
}

std::string GameResultCsv(const GameResult& result) {
  std::string out = "round,player,action,payoff,stock_before,stock_after\n";
  for (std::size_t t = 0; t < result.rounds.size(); ++t) {
    const RoundRecord& r = result.rounds[t];
    const std::string before = r.stock_before ? FormatDouble(*r.stock_before) : "";
    const std::string after = r.stock_after ? FormatDouble(*r.stock_after) : "";
    for (std::size_t i = 0; i < r.actions.size(); ++i) {
      out += std::to_string(t) + ',' + std::to_string(i) + ',' + ToChar(r.actions[i]) + ',' +
             FormatDouble(r.payoffs[i]) + ',' + before + ',' + after + '\n';
    }
  }
  return out;
}

}  // namespace dilemma
