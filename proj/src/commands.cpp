#include "dilemma/commands.hpp"

#include <cmath>
#include <ostream>

#include "dilemma/evolution.hpp"
#include "dilemma/fingerprint.hpp"
#include "dilemma/io.hpp"
#include "dilemma/manifest.hpp"
#include "dilemma/metrics.hpp"
#include "dilemma/parallel.hpp"
#include "dilemma/selfplay.hpp"
#include "dilemma/validate.hpp"

namespace dilemma {

namespace {

constexpr std::uint64_t kFingerprintStream = 1;
constexpr std::uint64_t kValidateStream = 2;

struct Session {
  ConfigDocument doc;
  std::uint64_t seed = 0;
  RunManifest manifest;
};

Session Begin(const char* command, const CommandOptions& options) {
  Session s;
  s.manifest.started_at = UtcTimestamp();
  s.doc = LoadConfig(options.config);
  s.seed = MasterSeed(s.doc, options.overrides);
  s.manifest.command = command;
  s.manifest.config_path = options.config.string();
  s.manifest.config_digest = Sha256Hex(EffectiveConfigText(s.doc, options.overrides, s.seed));
  s.manifest.master_seed = s.seed;
  s.manifest.threads = ResolveThreads(options.overrides.threads);
  return s;
}

std::string SetName(const StrategyPool& pool) {
  return pool.gene_tag + "/" + std::string(ToString(pool.attitude));
}

// FormatDouble, but integral values keep a ".0".
std::string Decimal(double value) {
  std::string text = FormatDouble(value);
  if (std::isfinite(value) && text.find_first_of(".e") == std::string::npos) text += ".0";
  return text;
}

std::string OrUndefined(const std::function<double()>& metric) {
  try {
    return FormatDouble(metric());
  } catch (const std::domain_error&) {
    return "undefined";
  } catch (const std::invalid_argument&) {
    return "undefined";
  }
}

}  // namespace

int CmdFingerprint(const CommandOptions& options, std::ostream& log) {
  Session session = Begin("fingerprint", options);
  const FingerprintJob job = ReadFingerprintJob(session.doc, options.overrides);
  const std::vector<DecisionNode> nodes = EnumerateNodes(job.params.players, job.params.rounds);

  struct Row {
    std::string set;
    int pool = -1;  // -1 for references
    Strategy strategy;
  };
  std::vector<Row> rows;
  for (std::size_t p = 0; p < job.pools.size(); ++p) {
    for (const Strategy& s : job.pools[p].members) {
      rows.push_back({SetName(job.pools[p]), static_cast<int>(p), s});
    }
  }
  for (const ReferenceSpec& spec : job.references) {
    rows.push_back({"reference", -1, MakeReference(spec, job.params.players)});
  }
  log << "fingerprinting " << rows.size() << " strategies over " << nodes.size() << " nodes\n";

  std::vector<FeatureVector> features(rows.size());
  ParallelFor(rows.size(), options.overrides.threads, [&](std::size_t i) {
    FingerprintOptions fp;
    fp.rollouts = job.rollouts;
    fp.seed = DeriveSeed(job.seed, {kFingerprintStream, i});
    features[i] = Fingerprint(rows[i].strategy, job.params, nodes, fp);
  });

  OutputDir out(options.out);
  std::string csv = "set,label";
  for (const DecisionNode& node : nodes) csv += "," + node.Name();
  csv += '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv += CsvField(rows[i].set) + ',' + CsvField(rows[i].strategy.label());
    for (double v : features[i]) csv += ',' + FormatDouble(v);
    csv += '\n';
  }
  out.Write("fingerprints.csv", csv);

  // PCA is fit on pool members only; references are projected onto it.
  std::vector<Sample> members;
  std::vector<std::vector<Sample>> per_pool(job.pools.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].pool < 0) continue;
    members.push_back(features[i]);
    per_pool[static_cast<std::size_t>(rows[i].pool)].push_back(features[i]);
  }
  if (members.size() < 2) {
    throw ConfigError(options.config.string() + ": PCA needs at least 2 pool members");
  }
  const PcaResult pca = Pca(members);
  const auto kept = static_cast<Eigen::Index>(
      std::min<std::size_t>(static_cast<std::size_t>(job.pca_components), pca.eigenvalues.size()));
  nlohmann::json pca_json{{"samples", members.size()},
                          {"dimension", nodes.size()},
                          {"eigenvalues", pca.eigenvalues},
                          {"explained_ratios", pca.explained_ratios}};
  nlohmann::json node_names = nlohmann::json::array();
  for (const DecisionNode& node : nodes) node_names.push_back(node.Name());
  pca_json["nodes"] = std::move(node_names);
  pca_json["mean"] = std::vector<double>(pca.mean.data(), pca.mean.data() + pca.mean.size());
  nlohmann::json components = nlohmann::json::array();
  for (Eigen::Index c = 0; c < kept; ++c) {
    const Eigen::VectorXd col = pca.components.col(c);
    components.push_back(std::vector<double>(col.data(), col.data() + col.size()));
  }
  pca_json["components"] = std::move(components);
  out.Write("pca.json", pca_json.dump(2) + "\n");

  const Eigen::Index plotted = std::min<Eigen::Index>(2, pca.components.cols());
  std::string proj = "set,label";
  for (Eigen::Index c = 0; c < plotted; ++c) proj += ",pc" + std::to_string(c + 1);
  proj += '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Eigen::VectorXd y = pca.Project(features[i]);
    proj += CsvField(rows[i].set) + ',' + CsvField(rows[i].strategy.label());
    for (Eigen::Index c = 0; c < plotted; ++c) proj += ',' + FormatDouble(y[c]);
    proj += '\n';
  }
  out.Write("projections.csv", proj);

  // One row per pool; d pairs the two attitudes of a gene tag.
  const std::string game(ToString(job.params.kind));
  std::string metrics = "game,gene_tag,attitude,members,mpd,cohens_d,pr\n";
  for (std::size_t p = 0; p < job.pools.size(); ++p) {
    const auto& set = per_pool[p];
    std::string d;
    for (std::size_t q = 0; q < job.pools.size(); ++q) {
      if (q != p && job.pools[q].gene_tag == job.pools[p].gene_tag &&
          job.pools[q].attitude != job.pools[p].attitude) {
        d = OrUndefined([&] { return CohensD(set, per_pool[q]); });
        break;
      }
    }
    const std::string mpd = OrUndefined([&] { return MeanPairwiseDistance(set); });
    const std::string pr = OrUndefined([&] {
      if (set.size() < 2) throw std::invalid_argument("single member");
      return ParticipationRatio(Pca(set).eigenvalues);
    });
    metrics += game + ',' + CsvField(job.pools[p].gene_tag) + ',' +
               std::string(ToString(job.pools[p].attitude)) + ',' + std::to_string(set.size()) +
               ',' + mpd + ',' + d + ',' + pr + '\n';
  }
  out.Write("metrics.csv", metrics);

  std::string pairs = "game,set_a,set_b,cohens_d\n";
  for (std::size_t p = 0; p < job.pools.size(); ++p) {
    for (std::size_t q = p + 1; q < job.pools.size(); ++q) {
      pairs += game + ',' + CsvField(SetName(job.pools[p])) + ',' +
               CsvField(SetName(job.pools[q])) + ',' +
               OrUndefined([&] { return CohensD(per_pool[p], per_pool[q]); }) + '\n';
    }
  }
  out.Write("pairs.csv", pairs);
  out.Finish(std::move(session.manifest));
  log << "wrote " << out.dir().string() << "\n";
  return kExitOk;
}

int CmdSelfplay(const CommandOptions& options, std::ostream& log) {
  Session session = Begin("selfplay", options);
  const MixGridConfig config = ReadSelfplayJob(session.doc, options.overrides);
  const std::vector<MixGridRow> rows = RunMixGrid(config);
  OutputDir out(options.out);
  out.Write("grid.csv", GridCsv(rows));
  out.Finish(std::move(session.manifest));
  log << "wrote " << rows.size() << " grid rows to " << out.dir().string() << "\n";
  return kExitOk;
}

int CmdEvolve(const CommandOptions& options, std::ostream& log) {
  Session session = Begin("evolve", options);
  const EvolveJob job = ReadEvolveJob(session.doc, options.overrides);
  std::vector<EvolutionResult> results;
  if (job.runs == 1) {
    // Same seed as run 0 of a batch, but with games spread over the workers.
    EvolutionConfig single = job.config;
    single.master_seed = DeriveSeed(job.config.master_seed, {0});
    results.push_back(RunEvolution(single));
  } else {
    results = RunBatch(job.config, job.runs);
  }
  const BatchSummary summary = Summarize(job.config, results);

  OutputDir out(options.out);
  out.Write("generations.csv", GenerationCsv(job.config, results));
  std::string runs = "run,winner,terminated_by,generations_run,final_welfare_efficiency\n";
  for (std::size_t r = 0; r < results.size(); ++r) {
    const EvolutionResult& res = results[r];
    runs += std::to_string(r) + ',' + job.config.GeneAt(res.winner).Name() + ',' +
            std::string(ToString(res.terminated_by)) + ',' + std::to_string(res.generations_run) +
            ',' +
            (std::isnan(res.final_efficiency) ? std::string("undefined")
                                              : FormatDouble(res.final_efficiency)) +
            '\n';
  }
  out.Write("runs.csv", runs);
  out.Write("summary.csv", BatchSummaryCsv(summary));
  out.Write("summary.json", ToJson(summary).dump(2) + "\n");
  out.Finish(std::move(session.manifest));
  for (std::size_t g = 0; g < summary.genes.size(); ++g) {
    log << summary.genes[g].Name() << ": " << summary.wins[g] << "/" << summary.runs
        << " wins\n";
  }
  return kExitOk;
}

int CmdValidate(const CommandOptions& options, std::ostream& log) {
  Session session = Begin("validate", options);
  const ValidateJob job = ReadValidateJob(session.doc, options.overrides);
  const auto& members = job.pool.members;
  std::vector<ValidationReport> reports(members.size());
  ParallelFor(members.size(), options.overrides.threads, [&](std::size_t i) {
    reports[i] = ValidateStrategy(members[i], job.params, job.trials,
                                  DeriveSeed(job.seed, {kValidateStream, i}), job.step_budget);
  });

  std::string csv =
      "member,label,passed,valid_actions,within_budget,no_traps,deterministic,"
      "cooperation_rate,faults,first_fault\n";
  int failed = 0;
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const ValidationReport& r = reports[i];
    std::string first;
    if (!r.faults.empty()) {
      const ValidationFault& f = r.faults.front();
      first = "trial " + std::to_string(f.trial) + " round " + std::to_string(f.round) + " " +
              f.check + ": " + f.message;
    }
    csv += std::to_string(i) + ',' + CsvField(r.label) + ',' + flag(r.passed()) + ',' +
           flag(r.valid_actions) + ',' + flag(r.within_budget) + ',' + flag(r.no_traps) + ',' +
           flag(r.deterministic) + ',' + FormatDouble(r.cooperation_rate) + ',' +
           std::to_string(r.faults.size()) + ',' + CsvField(first) + '\n';
    if (!r.passed()) {
      ++failed;
      log << "rejected member " << i << " '" << r.label << "': " << first << "\n";
    }
  }
  OutputDir out(options.out);
  out.Write("validation.csv", csv);
  out.Finish(std::move(session.manifest));
  log << (members.size() - failed) << "/" << members.size() << " members admitted\n";
  return failed > 0 ? kExitStrategyFault : kExitOk;
}

int CmdBounds(const GameParams& params, const std::optional<std::filesystem::path>& out_dir,
              std::ostream& log) {
  RunManifest manifest;
  manifest.started_at = UtcTimestamp();
  try {
    params.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const WelfareBounds bounds = ComputeWelfareBounds(params);
  log << "min_mean " << Decimal(bounds.min_mean) << "\n";
  log << "max_mean " << Decimal(bounds.max_mean) << "\n";
  log << "approximate " << (bounds.approximate ? "true" : "false") << "\n";
  if (out_dir) {
    nlohmann::json j{{"params", ToJson(params)},
                     {"min_mean", bounds.min_mean},
                     {"max_mean", bounds.max_mean},
                     {"approximate", bounds.approximate}};
    const std::string params_text = ToJson(params).dump();
    manifest.command = "bounds";
    manifest.config_digest = Sha256Hex(params_text);
    OutputDir out(*out_dir);
    out.Write("bounds.json", j.dump(2) + "\n");
    out.Finish(std::move(manifest));
  }
  return kExitOk;
}

int RunGuarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const StrategyFault& e) {
    err << "strategy fault: " << e.what() << "\n";
    return kExitStrategyFault;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace dilemma
