#ifndef DILEMMA_IO_HPP
#define DILEMMA_IO_HPP

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dilemma/game.hpp"

namespace dilemma {

// Shortest decimal text that parses back to exactly `value`.
std::string FormatDouble(double value);
double ParseDouble(std::string_view text);

// Splits one CSV line on commas. Fields never contain commas or quotes in
// the formats written by this library.
std::vector<std::string> SplitCsvLine(std::string_view line);

std::string ReadTextFile(const std::filesystem::path& path);
// Writes atomically enough for our purposes: truncate then write. Throws
// std::runtime_error on I/O failure.
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

class JsonSyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses JSON text. Syntax errors are reported as "source:line:column: ...".
nlohmann::json ParseJsonText(std::string_view text, std::string_view source);

// Quotes a CSV field when it contains a comma, quote or newline.
std::string CsvField(std::string_view text);

nlohmann::json ToJson(const GameParams& params);
nlohmann::json ToJson(const GameResult& result, const GameParams& params);

// Header: round,player,action,payoff,stock_before,stock_after. Stock columns
// are empty outside the common pool game.
std::string GameResultCsv(const GameResult& result);

}  // namespace dilemma

#endif  // DILEMMA_IO_HPP
