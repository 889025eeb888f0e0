#include "dilemma/config.hpp"

#include <cmath>
#include <limits>

#include "dilemma/io.hpp"
#include "dilemma/policy_file.hpp"
#include "dilemma/synth.hpp"

namespace dilemma {

namespace {

using nlohmann::json;

// Seed streams for pools synthesized from the master seed.
constexpr std::uint64_t kPoolSeedStream = 0x706f6f6c;  // "pool"

// Read-only view of one JSON object with its location for diagnostics.
class Node {
 public:
  Node(const json& value, std::string path, const ConfigDocument& doc)
      : value_(value), path_(std::move(path)), doc_(doc) {}

  [[noreturn]] void Fail(const std::string& where, const std::string& message) const {
    throw ConfigError(doc_.path.string() + ": " + where + ": " + message);
  }
  [[noreturn]] void Fail(const std::string& message) const { Fail(path_, message); }

  bool Has(const char* key) const { return value_.is_object() && value_.contains(key); }
  std::string PathOf(const char* key) const { return path_ + "." + key; }

  const json& Raw(const char* key) const {
    if (!Has(key)) Fail("missing required field '" + std::string(key) + "'");
    return value_.at(key);
  }

  Node Child(const char* key) const {
    const json& v = Raw(key);
    if (!v.is_object()) Fail(PathOf(key), "expected an object");
    return Node(v, PathOf(key), doc_);
  }

  int Int(const char* key, std::optional<int> fallback = std::nullopt) const {
    if (!Has(key)) {
      if (fallback) return *fallback;
      Raw(key);
    }
    const json& v = value_.at(key);
    if (!v.is_number_integer()) Fail(PathOf(key), "expected an integer");
    const auto wide = v.get<std::int64_t>();
    if (wide < std::numeric_limits<int>::min() || wide > std::numeric_limits<int>::max()) {
      Fail(PathOf(key), "integer out of range");
    }
    return static_cast<int>(wide);
  }

  std::uint64_t U64(const char* key, std::uint64_t fallback) const {
    if (!Has(key)) return fallback;
    const json& v = value_.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    Fail(PathOf(key), "expected a non-negative integer");
  }

  double Number(const char* key, std::optional<double> fallback = std::nullopt) const {
    if (!Has(key)) {
      if (fallback) return *fallback;
      Raw(key);
    }
    const json& v = value_.at(key);
    if (!v.is_number()) Fail(PathOf(key), "expected a number");
    return v.get<double>();
  }

  std::string String(const char* key, std::optional<std::string> fallback = std::nullopt) const {
    if (!Has(key)) {
      if (fallback) return *fallback;
      Raw(key);
    }
    const json& v = value_.at(key);
    if (!v.is_string()) Fail(PathOf(key), "expected a string");
    return v.get<std::string>();
  }

  const json& value() const { return value_; }
  const std::string& path() const { return path_; }
  const ConfigDocument& doc() const { return doc_; }

 private:
  const json& value_;
  std::string path_;
  const ConfigDocument& doc_;
};

Node RootNode(const ConfigDocument& doc) {
  Node root(doc.root, "$", doc);
  if (!doc.root.is_object()) root.Fail("expected a JSON object");
  const int version = root.Int("schema_version");
  if (version != kConfigSchemaVersion) {
    root.Fail("$.schema_version", "unsupported schema version " + std::to_string(version) +
                                      " (expected " + std::to_string(kConfigSchemaVersion) + ")");
  }
  return root;
}

// The "game" section. `default_players` applies when the section omits
// "players". With `group_sized`, the job sets the group size and the keys
// that follow from it are rejected.
GameParams ReadGame(const Node& root, const Overrides& overrides, int default_players,
                    int default_rounds, bool group_sized = false) {
  const Node game = root.Child("game");
  if (group_sized) {
    for (const char* key : {"players", "threshold", "capacity"}) {
      if (game.Has(key)) game.Fail(game.PathOf(key), "set by the group size in this command");
    }
  }
  GameKind kind;
  try {
    kind = ParseGameKind(game.String("kind"));
  } catch (const std::invalid_argument& e) {
    game.Fail(game.PathOf("kind"), e.what());
  }
  const int players = game.Int("players", default_players);
  GameParams params = GameParams::Defaults(kind, players, game.Int("rounds", default_rounds),
                                           overrides.k.value_or(game.Number("k", 2.0)));
  if (game.Has("threshold")) params.threshold = game.Int("threshold");
  if (game.Has("capacity")) params.capacity = game.Number("capacity");
  try {
    params.Validate();
  } catch (const std::invalid_argument& e) {
    game.Fail(e.what());
  }
  return params;
}

std::size_t PositiveSize(const Node& node, const char* key) {
  const int size = node.Int(key);
  if (size < 1) node.Fail(node.PathOf(key), "must be >= 1");
  return static_cast<std::size_t>(size);
}

void ApplyIdentity(const Node& node, StrategyPool& pool) {
  if (node.Has("gene_tag")) pool.gene_tag = node.String("gene_tag");
  if (node.Has("attitude")) {
    try {
      pool.attitude = ParseAttitude(node.String("attitude"));
    } catch (const std::invalid_argument& e) {
      node.Fail(node.PathOf("attitude"), e.what());
    }
  }
  if (pool.gene_tag.empty()) node.Fail("pool needs a non-empty gene_tag");
}

}  // namespace

ConfigDocument ParseConfig(std::string_view text, const std::filesystem::path& path) {
  ConfigDocument doc;
  try {
    doc.root = ParseJsonText(text, path.string());
  } catch (const JsonSyntaxError& e) {
    throw ConfigError(e.what());
  }
  doc.path = path;
  doc.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return doc;
}

ConfigDocument LoadConfig(const std::filesystem::path& path) {
  std::string text;
  try {
    text = ReadTextFile(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return ParseConfig(text, path);
}

std::uint64_t MasterSeed(const ConfigDocument& doc, const Overrides& overrides) {
  if (overrides.seed) return *overrides.seed;
  if (!doc.root.is_object()) return 0;
  return Node(doc.root, "$", doc).U64("seed", 0);
}

std::string EffectiveConfigText(const ConfigDocument& doc, const Overrides& overrides,
                                std::uint64_t seed) {
  json effective = doc.root;
  if (effective.is_object()) {
    effective["seed"] = seed;
    if (overrides.k && effective.contains("game") && effective["game"].is_object()) {
      effective["game"]["k"] = *overrides.k;
    }
  }
  return effective.dump();
}

StrategyPool ResolvePool(const json& source, const ConfigDocument& doc,
                         const std::string& json_path, std::uint64_t master_seed,
                         std::uint64_t stream) {
  const Node node(source, json_path, doc);
  if (!source.is_object()) node.Fail("expected a pool object");
  const int kinds = node.Has("file") + node.Has("synth") + node.Has("reference");
  if (kinds != 1) node.Fail("pool needs exactly one of 'file', 'synth' or 'reference'");

  StrategyPool pool;
  if (node.Has("file")) {
    const std::filesystem::path file = doc.base_dir / node.String("file");
    try {
      pool = LoadPool(file);
    } catch (const PolicyFileError& e) {
      throw ConfigError(e.what());
    }
  } else if (node.Has("synth")) {
    const json& families = node.Raw("synth");
    if (!families.is_array() || families.empty()) {
      node.Fail(node.PathOf("synth"), "expected a non-empty array of families");
    }
    std::vector<FamilySpec> specs;
    for (std::size_t i = 0; i < families.size(); ++i) {
      try {
        specs.push_back(FamilySpec::FromJson(families[i]));
      } catch (const std::exception& e) {
        node.Fail(node.PathOf("synth") + "[" + std::to_string(i) + "]", e.what());
      }
    }
    const std::uint64_t seed = node.U64("seed", DeriveSeed(master_seed, {kPoolSeedStream, stream}));
    pool = SynthPool(specs, PositiveSize(node, "size"), seed, "synthetic");
  } else {
    ReferenceSpec spec;
    try {
      spec = ReferenceSpec::Parse(node.String("reference"));
    } catch (const std::invalid_argument& e) {
      node.Fail(node.PathOf("reference"), e.what());
    }
    const Strategy strategy = MakeReference(spec);
    pool.gene_tag = spec.Name();
    pool.members.assign(PositiveSize(node, "size"), strategy);
  }
  ApplyIdentity(node, pool);
  return pool;
}

FingerprintJob ReadFingerprintJob(const ConfigDocument& doc, const Overrides& overrides) {
  const Node root = RootNode(doc);
  FingerprintJob job;
  job.seed = MasterSeed(doc, overrides);
  job.params = ReadGame(root, overrides, 4, 5);
  job.rollouts = root.Int("rollouts", 50);
  if (job.rollouts < 1) root.Fail(root.PathOf("rollouts"), "must be >= 1");
  job.pca_components = root.Int("pca_components", 10);
  if (job.pca_components < 0) root.Fail(root.PathOf("pca_components"), "must be >= 0");

  const json& pools = root.Raw("pools");
  if (!pools.is_array() || pools.empty()) root.Fail("$.pools", "expected a non-empty array");
  for (std::size_t i = 0; i < pools.size(); ++i) {
    job.pools.push_back(
        ResolvePool(pools[i], doc, "$.pools[" + std::to_string(i) + "]", job.seed, i));
  }

  const json references = root.Has("references") ? root.Raw("references") : json("default");
  if (references.is_string() && references.get<std::string>() == "default") {
    job.references = DefaultReferenceSet(job.params.players);
  } else if (references.is_array()) {
    for (std::size_t i = 0; i < references.size(); ++i) {
      const std::string where = "$.references[" + std::to_string(i) + "]";
      if (!references[i].is_string()) root.Fail(where, "expected a string");
      try {
        const ReferenceSpec spec = ReferenceSpec::Parse(references[i].get<std::string>());
        MakeReference(spec, job.params.players);
        job.references.push_back(spec);
      } catch (const std::invalid_argument& e) {
        root.Fail(where, e.what());
      }
    }
  } else {
    root.Fail("$.references", "expected \"default\" or an array of reference names");
  }
  return job;
}

MixGridConfig ReadSelfplayJob(const ConfigDocument& doc, const Overrides& overrides) {
  const Node root = RootNode(doc);
  MixGridConfig config;
  config.master_seed = MasterSeed(doc, overrides);
  config.threads = overrides.threads;

  if (root.Has("group_sizes")) {
    const json& sizes = root.Raw("group_sizes");
    if (!sizes.is_array() || sizes.empty()) root.Fail("$.group_sizes", "expected a non-empty array");
    config.group_sizes.clear();
    for (const json& s : sizes) {
      if (!s.is_number_integer() || s.get<int>() < 2) {
        root.Fail("$.group_sizes", "group sizes must be integers >= 2");
      }
      config.group_sizes.push_back(s.get<int>());
    }
  }
  // Validate the game once per group size so PGG's k < n is checked.
  for (int n : config.group_sizes) {
    GameParams params = ReadGame(root, overrides, n, 20, true);
    config.kind = params.kind;
    config.rounds = params.rounds;
    config.k = params.k;
  }
  config.samples_per_cell = root.Int("samples_per_cell", 200);
  if (config.samples_per_cell < 1) root.Fail("$.samples_per_cell", "must be >= 1");
  config.step_budget = root.U64("step_budget", kDefaultStepBudget);
  config.exploitative = ResolvePool(root.Raw("exploitative"), doc, "$.exploitative",
                                    config.master_seed, 0);
  config.collective =
      ResolvePool(root.Raw("collective"), doc, "$.collective", config.master_seed, 1);
  const std::size_t smallest =
      std::min(config.exploitative.members.size(), config.collective.members.size());
  for (int n : config.group_sizes) {
    if (static_cast<std::size_t>(n) > smallest) {
      root.Fail("$.group_sizes", "group size " + std::to_string(n) + " exceeds the smaller pool (" +
                                     std::to_string(smallest) + " members)");
    }
  }
  return config;
}

EvolveJob ReadEvolveJob(const ConfigDocument& doc, const Overrides& overrides) {
  const Node root = RootNode(doc);
  EvolveJob job;
  EvolutionConfig& c = job.config;
  c.master_seed = MasterSeed(doc, overrides);
  c.threads = overrides.threads;
  c.population = root.Int("population", c.population);
  c.group_size = root.Int("group_size", c.group_size);
  c.games_per_agent = root.Int("games_per_agent", c.games_per_agent);
  c.elites = root.Int("elites", c.elites);
  c.mutation_rate = root.Number("mutation_rate", c.mutation_rate);
  c.dominance_threshold = root.Number("dominance_threshold", c.dominance_threshold);
  c.max_generations = root.Int("max_generations", c.max_generations);
  c.step_budget = root.U64("step_budget", kDefaultStepBudget);
  job.runs = root.Int("runs", 1);
  if (job.runs < 1) root.Fail("$.runs", "must be >= 1");

  const GameParams params = ReadGame(root, overrides, c.group_size, 20, true);
  c.kind = params.kind;
  c.rounds = params.rounds;
  c.k = params.k;

  const json& genes = root.Raw("genes");
  if (!genes.is_array() || genes.empty()) root.Fail("$.genes", "expected a non-empty array");
  for (std::size_t i = 0; i < genes.size(); ++i) {
    c.pools.push_back(
        ResolvePool(genes[i], doc, "$.genes[" + std::to_string(i) + "]", c.master_seed, i));
  }
  try {
    c.Validate();
  } catch (const std::invalid_argument& e) {
    root.Fail(e.what());
  }
  return job;
}

ValidateJob ReadValidateJob(const ConfigDocument& doc, const Overrides& overrides) {
  ValidateJob job;
  job.seed = MasterSeed(doc, overrides);
  if (doc.root.is_object() && doc.root.contains("members")) {
    try {
      job.pool = MakePool(ParsePolicyFile(doc.root.dump(), doc.path.string()));
    } catch (const PolicyFileError& e) {
      throw ConfigError(e.what());
    }
    job.params = GameParams::Defaults(GameKind::kPublicGoods, 4, 20, overrides.k.value_or(2.0));
    try {
      job.params.Validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(doc.path.string() + ": " + e.what());
    }
    return job;
  }
  const Node root = RootNode(doc);
  job.params = ReadGame(root, overrides, 4, 20);
  job.trials = root.Int("trials", 50);
  if (job.trials < 1) root.Fail("$.trials", "must be >= 1");
  job.step_budget = root.U64("step_budget", kDefaultStepBudget);
  job.pool = ResolvePool(root.Raw("pool"), doc, "$.pool", job.seed, 0);
  return job;
}

}  // namespace dilemma
