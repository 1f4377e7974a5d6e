#pragma once

// Pipeline orchestration behind the CLI subcommands. Each command reads
// its inputs from RunConfig, writes under <output_dir>/<dao>/ and is
// idempotent for identical inputs and seeds.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "partisan/friction.hpp"
#include "partisan/ingest.hpp"
#include "partisan/report.hpp"
#include "partisan/rpc.hpp"
#include "partisan/synth.hpp"
#include "partisan/validate.hpp"

namespace partisan {

struct RunConfig {
  std::string dao = "planted";
  std::string fixture;
  std::string rpc_url;
  std::string rpc_trace;  // recorded eth_getLogs results, replayed instead of a live endpoint
  std::string registry;
  std::string ground_truth;
  std::size_t window_size = 10;
  double participation_threshold = 0.40;
  int k_min = 2;
  int k_max = 5;
  int kmeans_restarts = 10;
  int mds_max_iterations = 300;
  double mds_tolerance = 1e-6;
  std::size_t iterations = 100;
  std::uint64_t root_seed = 0;
  std::vector<ProposalRange> ranges;
  std::string output_dir = "out";
  unsigned workers = 1;
  std::size_t min_fork_present = 1;
  std::size_t rolling_window = 10;
  RollingTest flag_rolling = RollingTest::kMax;
  std::optional<std::uint64_t> split_at;
  std::optional<std::uint64_t> from_block;
  std::optional<std::uint64_t> to_block;
  std::uint64_t chunk_size = 2000;

  std::filesystem::path dao_dir() const { return std::filesystem::path(output_dir) / dao; }
};

/// Parses "1-362,257-362" (a bare "7" means 7-7).
inline std::vector<ProposalRange> parse_ranges(const std::string& text) {
  std::vector<ProposalRange> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    ProposalRange r;
    try {
      auto dash = item.find('-');
      r.first = std::stoull(item.substr(0, dash));
      r.last = dash == std::string::npos ? r.first : std::stoull(item.substr(dash + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad proposal range '" + item + "'");
    }
    if (r.first > r.last) throw ConfigError("empty proposal range '" + item + "'");
    out.push_back(r);
  }
  return out;
}

/// Overlays the keys present in `j` onto `base`. Unknown keys are errors.
inline RunConfig config_from_json(const json& j, RunConfig base = {}) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "dao", "fixture", "rpc_url", "rpc_trace", "registry", "ground_truth", "window_size",
      "participation_threshold", "k_min", "k_max", "kmeans_restarts", "mds_max_iterations", "mds_tolerance",
      "iterations", "root_seed", "ranges", "output_dir", "workers", "min_fork_present", "rolling_window",
      "flag_rolling", "split_at", "from_block", "to_block", "chunk_size"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  try {
    auto set = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    auto set_opt = [&j](const char* key, std::optional<std::uint64_t>& field) {
      if (j.contains(key)) field = j.at(key).get<std::uint64_t>();
    };
    set("dao", base.dao);
    set("fixture", base.fixture);
    set("rpc_url", base.rpc_url);
    set("rpc_trace", base.rpc_trace);
    set("registry", base.registry);
    set("ground_truth", base.ground_truth);
    set("window_size", base.window_size);
    set("participation_threshold", base.participation_threshold);
    set("k_min", base.k_min);
    set("k_max", base.k_max);
    set("kmeans_restarts", base.kmeans_restarts);
    set("mds_max_iterations", base.mds_max_iterations);
    set("mds_tolerance", base.mds_tolerance);
    set("iterations", base.iterations);
    set("root_seed", base.root_seed);
    set("output_dir", base.output_dir);
    set("workers", base.workers);
    set("min_fork_present", base.min_fork_present);
    set("rolling_window", base.rolling_window);
    set("chunk_size", base.chunk_size);
    set_opt("split_at", base.split_at);
    set_opt("from_block", base.from_block);
    set_opt("to_block", base.to_block);
    if (j.contains("flag_rolling")) {
      auto v = j["flag_rolling"].get<std::string>();
      if (v != "max" && v != "mean") throw ConfigError("flag_rolling must be 'max' or 'mean'");
      base.flag_rolling = v == "max" ? RollingTest::kMax : RollingTest::kMean;
    }
    if (j.contains("ranges")) {
      base.ranges.clear();
      for (const auto& r : j["ranges"]) {
        if (r.is_string()) {
          auto parsed = parse_ranges(r.get<std::string>());
          base.ranges.insert(base.ranges.end(), parsed.begin(), parsed.end());
        } else {
          base.ranges.push_back({r.at(0).get<std::uint64_t>(), r.at(1).get<std::uint64_t>()});
        }
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return base;
}

inline void validate_config(const RunConfig& c) {
  if (c.window_size < 1) throw ConfigError("window must be >= 1");
  if (!(c.participation_threshold >= 0.0 && c.participation_threshold <= 1.0))
    throw ConfigError("threshold must lie in [0, 1]");
  if (c.k_min < 2 || c.k_max < c.k_min) throw ConfigError("need 2 <= k_min <= k_max");
  if (c.mds_max_iterations < 1 || !(c.mds_tolerance > 0.0)) throw ConfigError("invalid MDS settings");
  if (c.kmeans_restarts < 1) throw ConfigError("kmeans_restarts must be >= 1");
  if (c.rolling_window < 1) throw ConfigError("rolling window must be >= 1");
  if (c.min_fork_present < 1) throw ConfigError("min_fork_present must be >= 1");
  for (const auto& r : c.ranges)
    if (r.first > r.last) throw ConfigError("empty proposal range");
}

inline std::vector<DaoRegistryEntry> load_registry(const RunConfig& c) {
  if (c.registry.empty()) return bundled_registry();
  std::ifstream in(c.registry);
  if (!in) throw MissingArtifact("registry '" + c.registry + "' not found");
  try {
    return parse_registry(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("registry: ") + e.what());
  }
}

inline std::string default_fixture_path(const RunConfig& c) { return (c.dao_dir() / "events.jsonl").string(); }

inline std::string fixture_path(const RunConfig& c) { return c.fixture.empty() ? default_fixture_path(c) : c.fixture; }

inline std::vector<VoteEvent> load_events(const RunConfig& c) {
  auto path = fixture_path(c);
  if (!std::filesystem::exists(path)) throw MissingArtifact("fixture '" + path + "' not found (run ingest first)");
  return load_fixture(path);
}

inline std::optional<ForkGroundTruth> load_optional_ground_truth(const RunConfig& c) {
  if (c.ground_truth.empty()) return std::nullopt;
  if (!std::filesystem::exists(c.ground_truth)) throw MissingArtifact("ground truth '" + c.ground_truth + "' not found");
  return load_ground_truth(c.ground_truth);
}

inline PipelineConfig pipeline_config(const RunConfig& c) {
  PipelineConfig p;
  p.window = {c.window_size, c.participation_threshold};
  p.mds.max_iterations = c.mds_max_iterations;
  p.mds.tolerance = c.mds_tolerance;
  p.k_min = c.k_min;
  p.k_max = c.k_max;
  p.kmeans.restarts = c.kmeans_restarts;
  p.root_seed = c.root_seed;
  return p;
}

namespace detail {

inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

template <typename Fn>
void write_with(const std::filesystem::path& path, Fn&& fn) {
  std::ostringstream o;
  fn(o);
  write_text_file(path, o.str());
}

inline std::vector<ProposalRange> effective_ranges(const RunConfig& c, const VoterMatrix& m) {
  if (!c.ranges.empty()) return c.ranges;
  return {{m.proposal_ids().front(), m.proposal_ids().back()}};
}

/// Per-proposal fork alignment CSV plus the stacked-area chart of how the
/// active fork addresses split across clusters (largest cluster first).
inline void write_fork_outputs(const RunConfig& c, const AnalysisRun& run, const ForkGroundTruth& fork) {
  const auto dir = c.dao_dir();
  ChartSpec area;
  area.kind = ChartKind::kStackedArea;
  area.title = "Fork addresses by cluster";
  area.x_label = "Proposal";
  area.y_label = "Active fork addresses";
  std::vector<double> xs;
  std::vector<std::vector<double>> bands;
  std::ostringstream csv;
  csv << "proposal_id,k_star,fork_active,largest_cluster,fork_cluster_share\n";
  for (const auto& p : run.proposals) {
    if (!p.clustering) continue;
    const auto& cr = *p.clustering;
    std::vector<double> per(static_cast<std::size_t>(cr.k_star), 0.0);
    std::size_t active = 0;
    for (std::size_t i = 0; i < cr.addresses.size(); ++i) {
      if (!fork.contains(cr.addresses[i])) continue;
      ++active;
      per[static_cast<std::size_t>(cr.assignments[i])] += 1.0;
    }
    std::sort(per.begin(), per.end(), std::greater<>());
    auto share = fork_cluster_share(cr, fork, c.min_fork_present);
    csv << cr.proposal_id << ',' << cr.k_star << ',' << active << ',' << (per.empty() ? 0 : per.front()) << ','
        << (share ? fmt6(*share) : std::string()) << '\n';
    xs.push_back(static_cast<double>(cr.proposal_id));
    per.resize(static_cast<std::size_t>(std::max(c.k_max, 1)), 0.0);
    bands.push_back(per);
  }
  write_text_file(dir / "fork_share.csv", csv.str());
  const std::size_t n_bands = static_cast<std::size_t>(std::max(c.k_max, 1));
  for (std::size_t b = 0; b < n_bands; ++b) {
    Series s;
    s.name = b == 0 ? "largest cluster" : "cluster rank " + std::to_string(b + 1);
    s.x = xs;
    for (const auto& row : bands) s.y.push_back(row[b]);
    area.series.push_back(std::move(s));
  }
  render_chart(area, dir / "charts" / "fork_clusters.svg");
}

}  // namespace detail

/// Fetches vote logs over RPC (or a replayed trace) and writes the fixture.
inline std::string cmd_ingest(const RunConfig& c, Transport& transport) {
  validate_config(c);
  auto registry = load_registry(c);
  const auto* entry = find_registry_entry(registry, c.dao);
  if (!entry) throw ConfigError("DAO '" + c.dao + "' not in registry");
  BlockRange range{c.from_block.value_or(entry->deploy_block), c.to_block.value_or(entry->end_block)};
  FetchOptions opt;
  opt.chunk_size = c.chunk_size;
  auto events = fetch_logs(transport, *entry, range, opt);
  auto path = fixture_path(c);
  detail::write_with(path, [&](std::ostream& o) { write_fixture(o, events); });
  return path;
}

inline FrictionReport cmd_friction(const RunConfig& c) {
  validate_config(c);
  auto matrix = build_voter_matrix(load_events(c));
  FlagRule rule;
  rule.test = c.flag_rolling;
  auto rep = friction_report(matrix, c.dao, c.rolling_window, {}, rule);
  const auto dir = c.dao_dir();

  detail::write_with(dir / "matrix.csv", [&](std::ostream& o) { write_matrix_csv(o, matrix); });
  detail::write_with(dir / "friction.csv", [&](std::ostream& o) {
    o << "proposal_id,yes,no,disagreement,category,rolling_mean\n";
    for (std::size_t i = 0; i < rep.records.size(); ++i) {
      auto votes = column_votes(matrix, rep.records[i].proposal_id);
      o << rep.records[i].proposal_id << ',' << votes.yes_count << ',' << votes.no_count << ','
        << detail::fmt6(rep.records[i].disagreement) << ',' << category_name(rep.records[i].category) << ','
        << detail::fmt6(rep.rolling[i].mean) << '\n';
    }
  });
  json summary{{"dao", rep.dao_name}, {"proposals", rep.records.size()}, {"flagged", rep.flagged}};
  for (int cat = 0; cat < 4; ++cat)
    summary["category_shares"][category_name(static_cast<DisagreementCategory>(cat))] = rep.category_shares[cat];
  write_text_file(dir / "friction.json", summary.dump(2) + "\n");

  ChartSpec bars;
  bars.kind = ChartKind::kStackedBar;
  bars.title = "Disagreement categories";
  bars.x_label = "DAO";
  bars.y_label = "Share of proposals";
  bars.categories = {rep.dao_name};
  for (int cat = 0; cat < 4; ++cat)
    bars.series.push_back({category_name(static_cast<DisagreementCategory>(cat)), {}, {rep.category_shares[cat]}});
  render_chart(bars, dir / "charts" / "friction_categories.svg");

  ChartSpec line;
  line.kind = ChartKind::kLine;
  line.title = "Rolling disagreement (" + std::to_string(c.rolling_window) + "-proposal window)";
  line.x_label = "Proposal";
  line.y_label = "Disagreement";
  Series s{rep.dao_name, {}, {}};
  for (const auto& p : rep.rolling) {
    s.x.push_back(static_cast<double>(p.proposal_id));
    s.y.push_back(p.mean);
  }
  line.series.push_back(std::move(s));
  render_chart(line, dir / "charts" / "friction_rolling.svg");
  return rep;
}

inline AnalysisRun cmd_analyze(const RunConfig& c) {
  validate_config(c);
  auto matrix = build_voter_matrix(load_events(c));
  auto fork = load_optional_ground_truth(c);
  auto cfg = pipeline_config(c);
  cfg.keep_dissimilarity = true;
  auto run = run_analysis(matrix, cfg);
  const auto dir = c.dao_dir();
  std::filesystem::remove_all(dir / "mds");
  std::filesystem::remove_all(dir / "dissim");
  std::filesystem::remove_all(dir / "silhouette");

  detail::write_with(dir / "matrix.csv", [&](std::ostream& o) { write_matrix_csv(o, matrix); });
  std::ostringstream emb_csv, clu_csv;
  emb_csv << "proposal_id,address,x,y\n";
  clu_csv << "proposal_id,address,cluster,k_star,silhouette_mean\n";
  json summary = json::array();
  for (const auto& p : run.proposals) {
    json entry{{"proposal_id", p.proposal_id}};
    if (p.active) {
      entry["active"] = p.active->addresses.size();
      entry["window"] = p.active->window;
    }
    if (!p.analysed()) {
      entry["skipped"] = p.skipped;
      summary.push_back(entry);
      continue;
    }
    const auto& e = *p.embedding;
    const auto& cr = *p.clustering;
    const auto pid = std::to_string(p.proposal_id);
    entry["stress"] = e.stress;
    entry["mds_iterations"] = e.iterations_used;
    entry["k_star"] = cr.k_star;
    for (const auto& [k, s] : cr.silhouette_by_k) entry["silhouette_by_k"][std::to_string(k)] = s;
    summary.push_back(entry);

    detail::write_with(dir / "dissim" / (pid + ".csv"), [&](std::ostream& o) { write_dissimilarity_csv(o, *p.dissimilarity); });
    for (std::size_t i = 0; i < e.addresses.size(); ++i) {
      emb_csv << pid << ',' << e.addresses[i].hex() << ',' << detail::fmt6(e.coords[i].x) << ','
              << detail::fmt6(e.coords[i].y) << '\n';
      clu_csv << pid << ',' << e.addresses[i].hex() << ',' << cr.assignments[i] << ',' << cr.k_star << ','
              << detail::fmt6(cr.silhouette_by_k.at(cr.k_star)) << '\n';
    }

    std::vector<std::string> cluster_labels;
    for (int a : cr.assignments) cluster_labels.push_back("cluster " + std::to_string(a));
    if (fork) {
      std::vector<std::string> truth;
      for (const auto& a : e.addresses) truth.push_back(fork->contains(a) ? "fork" : "stay");
      render_mds_scatter(e, truth, dir / "mds" / (pid + ".svg"), "Proposal " + pid + " (ground truth)");
    } else {
      render_mds_scatter(e, cluster_labels, dir / "mds" / (pid + ".svg"), "Proposal " + pid);
    }
    render_mds_scatter(e, cluster_labels, dir / "mds" / (pid + "_clusters.svg"), "Proposal " + pid + " (k-means)");

    ChartSpec sil;
    sil.kind = ChartKind::kBar;
    sil.title = "Silhouette by k, proposal " + pid;
    sil.x_label = "k";
    sil.y_label = "Mean silhouette";
    Series s{"silhouette", {}, {}};
    for (const auto& [k, v] : cr.silhouette_by_k) {
      sil.categories.push_back(std::to_string(k));
      s.y.push_back(v);
    }
    sil.series.push_back(std::move(s));
    render_chart(sil, dir / "silhouette" / (pid + ".svg"));
  }
  write_text_file(dir / "embeddings.csv", emb_csv.str());
  write_text_file(dir / "clusters.csv", clu_csv.str());
  write_text_file(dir / "analysis.json", summary.dump(2) + "\n");

  ChartSpec ks;
  ks.kind = ChartKind::kLine;
  ks.title = "Selected cluster count";
  ks.x_label = "Proposal";
  ks.y_label = "k*";
  Series s{"k*", {}, {}};
  for (const auto& p : run.proposals) {
    if (!p.clustering) continue;
    s.x.push_back(static_cast<double>(p.proposal_id));
    s.y.push_back(p.clustering->k_star);
  }
  ks.series.push_back(std::move(s));
  render_chart(ks, dir / "charts" / "k_star.svg");

  if (fork) detail::write_fork_outputs(c, run, *fork);
  return run;
}

inline ValidationReport cmd_validate(const RunConfig& c) {
  validate_config(c);
  auto fork = load_optional_ground_truth(c);
  if (!fork) throw ConfigError("validate requires --ground-truth");
  auto matrix = build_voter_matrix(load_events(c));
  ValidationOptions opt;
  opt.k_min = c.k_min;
  opt.k_max = c.k_max;
  opt.kmeans.restarts = c.kmeans_restarts;
  opt.min_fork_present = c.min_fork_present;
  opt.workers = c.workers;
  MdsConfig mds;
  mds.max_iterations = c.mds_max_iterations;
  mds.tolerance = c.mds_tolerance;
  auto ranges = detail::effective_ranges(c, matrix);
  auto rep = run_validation(matrix, *fork, {c.window_size, c.participation_threshold}, mds, ranges, c.iterations,
                            c.root_seed, opt);

  const auto dir = c.dao_dir();
  auto doc = validation_report_to_json(rep);
  doc["dao"] = c.dao;
  doc["root_seed"] = c.root_seed;
  if (c.split_at) {
    auto ps = participation_stats(matrix, *fork, *c.split_at);
    doc["participation"] = json{{"split_at", *c.split_at},
                                {"early_fork_avg", ps.early_fork},
                                {"late_fork_avg", ps.late_fork},
                                {"early_nonfork_avg", ps.early_nonfork},
                                {"late_nonfork_avg", ps.late_nonfork}};
  }
  write_text_file(dir / "validation.json", doc.dump(2) + "\n");
  detail::write_fork_outputs(c, rep.genuine_run, *fork);

  ChartSpec cmp;
  cmp.kind = ChartKind::kBar;
  cmp.title = "Fork share: genuine vs shuffled mean";
  cmp.x_label = "Proposal range";
  cmp.y_label = "Fork addresses in one cluster";
  Series genuine{"genuine", {}, {}}, shuffled{"shuffled mean", {}, {}};
  for (std::size_t r = 0; r < ranges.size(); ++r) {
    cmp.categories.push_back(std::to_string(ranges[r].first) + "-" + std::to_string(ranges[r].last));
    genuine.y.push_back(rep.genuine[r].fork_share.value_or(0.0));
    shuffled.y.push_back(rep.randomized[r].fork_share.samples ? rep.randomized[r].fork_share.mean : 0.0);
  }
  cmp.series = {genuine, shuffled};
  render_chart(cmp, dir / "charts" / "validation_fork_share.svg");
  return rep;
}

/// friction + analyze, then validate when ground truth is configured.
inline void cmd_all(const RunConfig& c) {
  cmd_friction(c);
  cmd_analyze(c);
  if (!c.ground_truth.empty()) cmd_validate(c);
}

/// Writes the planted two-bloc fixture and its minority-bloc ground truth.
inline PlantedDao cmd_synth(const PlantedSpec& spec, const std::string& fixture, const std::string& ground_truth) {
  auto dao = generate_planted_dao(spec);
  detail::write_with(fixture, [&](std::ostream& o) { write_fixture(o, dao.events); });
  detail::write_with(ground_truth, [&](std::ostream& o) {
    o << "# planted minority bloc (" << dao.minority.size() << " addresses)\n";
    auto gt = dao.minority_truth();
    for (const auto& a : gt.addresses) o << a.hex() << '\n';
  });
  return dao;
}

}  // namespace partisan
