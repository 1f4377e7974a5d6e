// dao-partisan: command-line front end for the partisan community pipeline.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <CLI11.hpp>
#include <iostream>
#include <memory>

#include "partisan/commands.hpp"

namespace {

using partisan::json;

/// JSON-RPC over HTTP(S).
class HttpTransport : public partisan::Transport {
 public:
  explicit HttpTransport(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw partisan::ConfigError("RPC URL must include a scheme");
    auto path_start = url.find('/', scheme_end + 3);
    base_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  }

  json call(const std::string& method, const json& params) override {
    httplib::Client client(base_);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
    json body{{"jsonrpc", "2.0"}, {"id", ++id_}, {"method", method}, {"params", params}};
    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res) throw partisan::TransportError("request failed: " + httplib::to_string(res.error()));
    if (res->status == 413) throw partisan::RangeTooLarge("HTTP 413");
    if (res->status >= 500 || res->status == 429)
      throw partisan::TransportError("HTTP " + std::to_string(res->status));
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception& e) {
      throw partisan::TransportError(std::string("invalid JSON-RPC reply: ") + e.what());
    }
    if (reply.contains("error")) partisan::throw_rpc_error(reply["error"]);
    return reply.at("result");
  }

 private:
  std::string base_, path_;
  int id_ = 0;
};

struct Flags {
  std::string config;
  partisan::RunConfig run;
  std::string ranges;
  std::string flag_rolling;
  std::uint64_t split_at = 0, from_block = 0, to_block = 0;
};

void report_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detect partisan voting communities in DAO governance"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  auto& r = f.run;
  std::vector<CLI::Option*> set_by_flag;
  auto flag = [&](CLI::Option* o) {
    set_by_flag.push_back(o);
    return o;
  };
  app.add_option("--config", f.config, "JSON run configuration");
  flag(app.add_option("--dao", r.dao, "Registry name of the DAO"));
  flag(app.add_option("--fixture", r.fixture, "Vote fixture (JSON lines)"));
  flag(app.add_option("--rpc-url", r.rpc_url, "EVM JSON-RPC endpoint")->envname("PARTISAN_RPC_URL"));
  flag(app.add_option("--rpc-trace", r.rpc_trace, "Replay recorded eth_getLogs results instead of a live endpoint"));
  flag(app.add_option("--registry", r.registry, "Registry document (defaults to the bundled one)"));
  flag(app.add_option("--ground-truth", r.ground_truth, "Fork addresses, one per line"));
  flag(app.add_option("--window", r.window_size, "Proposal window size"));
  flag(app.add_option("--threshold", r.participation_threshold, "Participation threshold"));
  flag(app.add_option("--k-min", r.k_min));
  flag(app.add_option("--k-max", r.k_max));
  flag(app.add_option("--kmeans-restarts", r.kmeans_restarts));
  flag(app.add_option("--mds-max-iter", r.mds_max_iterations));
  flag(app.add_option("--mds-tol", r.mds_tolerance));
  flag(app.add_option("--iterations", r.iterations, "Shuffle iterations"));
  flag(app.add_option("--seed", r.root_seed, "Root seed"));
  auto* ranges_opt = app.add_option("--ranges", f.ranges, "Proposal ranges, e.g. 1-362,257-362");
  flag(app.add_option("--out", r.output_dir, "Output directory"));
  flag(app.add_option("--workers", r.workers, "Parallel workers for shuffle iterations"));
  flag(app.add_option("--min-fork-present", r.min_fork_present));
  flag(app.add_option("--rolling-window", r.rolling_window));
  auto* rolling_opt = app.add_option("--flag-rolling", f.flag_rolling, "max or mean")->check(CLI::IsMember({"max", "mean"}));
  auto* split_opt = app.add_option("--split-at", f.split_at, "Proposal id splitting early/late participation");
  auto* from_opt = app.add_option("--from-block", f.from_block);
  auto* to_opt = app.add_option("--to-block", f.to_block);
  flag(app.add_option("--chunk-size", r.chunk_size, "Blocks per eth_getLogs request"));

  app.add_subcommand("ingest", "Fetch vote events into a fixture");
  app.add_subcommand("friction", "Disagreement statistics and charts");
  app.add_subcommand("analyze", "Dissimilarity, MDS and clustering per proposal");
  app.add_subcommand("validate", "Compare against shuffled-vote baselines");
  app.add_subcommand("all", "friction + analyze + validate");
  auto* synth = app.add_subcommand("synth", "Write the planted two-bloc fixture");
  partisan::PlantedSpec planted;
  std::string synth_fixture = "planted.jsonl", synth_truth = "planted_bloc.txt";
  synth->add_option("--synth-seed", planted.seed);
  synth->add_option("--fixture-out", synth_fixture);
  synth->add_option("--truth-out", synth_truth);
  synth->add_option("--proposals", planted.proposals);

  CLI11_PARSE(app, argc, argv);

  try {
    // Precedence: flags > config file > defaults.
    partisan::RunConfig cfg;
    if (!f.config.empty()) {
      std::ifstream in(f.config);
      if (!in) throw partisan::MissingArtifact("config '" + f.config + "' not found");
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw partisan::ConfigError(std::string("config: ") + e.what());
      }
      cfg = partisan::config_from_json(doc);
    }
    auto take = [&](auto member) {
      cfg.*member = r.*member;
    };
    for (auto* o : set_by_flag) {
      if (o->count() == 0) continue;
      const auto& name = o->get_name();
      if (name == "--dao") take(&partisan::RunConfig::dao);
      else if (name == "--fixture") take(&partisan::RunConfig::fixture);
      else if (name == "--rpc-url") take(&partisan::RunConfig::rpc_url);
      else if (name == "--rpc-trace") take(&partisan::RunConfig::rpc_trace);
      else if (name == "--registry") take(&partisan::RunConfig::registry);
      else if (name == "--ground-truth") take(&partisan::RunConfig::ground_truth);
      else if (name == "--window") take(&partisan::RunConfig::window_size);
      else if (name == "--threshold") take(&partisan::RunConfig::participation_threshold);
      else if (name == "--k-min") take(&partisan::RunConfig::k_min);
      else if (name == "--k-max") take(&partisan::RunConfig::k_max);
      else if (name == "--kmeans-restarts") take(&partisan::RunConfig::kmeans_restarts);
      else if (name == "--mds-max-iter") take(&partisan::RunConfig::mds_max_iterations);
      else if (name == "--mds-tol") take(&partisan::RunConfig::mds_tolerance);
      else if (name == "--iterations") take(&partisan::RunConfig::iterations);
      else if (name == "--seed") take(&partisan::RunConfig::root_seed);
      else if (name == "--out") take(&partisan::RunConfig::output_dir);
      else if (name == "--workers") take(&partisan::RunConfig::workers);
      else if (name == "--min-fork-present") take(&partisan::RunConfig::min_fork_present);
      else if (name == "--rolling-window") take(&partisan::RunConfig::rolling_window);
      else if (name == "--chunk-size") take(&partisan::RunConfig::chunk_size);
    }
    if (ranges_opt->count()) cfg.ranges = partisan::parse_ranges(f.ranges);
    if (rolling_opt->count()) cfg.flag_rolling = f.flag_rolling == "max" ? partisan::RollingTest::kMax : partisan::RollingTest::kMean;
    if (split_opt->count()) cfg.split_at = f.split_at;
    if (from_opt->count()) cfg.from_block = f.from_block;
    if (to_opt->count()) cfg.to_block = f.to_block;

    const auto* sub = app.get_subcommands().front();
    const auto& cmd = sub->get_name();
    if (cmd == "synth") {
      auto dao = partisan::cmd_synth(planted, synth_fixture, synth_truth);
      std::cout << "wrote " << dao.events.size() << " events to " << synth_fixture << " and "
                << dao.minority.size() << " bloc addresses to " << synth_truth << '\n';
    } else if (cmd == "ingest") {
      std::unique_ptr<partisan::Transport> transport;
      if (!cfg.rpc_trace.empty()) {
        std::ifstream in(cfg.rpc_trace);
        if (!in) throw partisan::MissingArtifact("trace '" + cfg.rpc_trace + "' not found");
        transport = std::make_unique<partisan::ReplayTransport>(json::parse(in));
      } else if (!cfg.rpc_url.empty()) {
        transport = std::make_unique<HttpTransport>(cfg.rpc_url);
      } else {
        throw partisan::ConfigError("ingest needs --rpc-url, PARTISAN_RPC_URL or --rpc-trace");
      }
      std::cout << "wrote " << partisan::cmd_ingest(cfg, *transport) << '\n';
    } else if (cmd == "friction") {
      auto rep = partisan::cmd_friction(cfg);
      std::cout << rep.dao_name << ": " << rep.records.size() << " proposals, flagged=" << std::boolalpha
                << rep.flagged << '\n';
    } else if (cmd == "analyze") {
      auto run = partisan::cmd_analyze(cfg);
      std::size_t analysed = 0;
      for (const auto& p : run.proposals) analysed += p.analysed();
      std::cout << analysed << " of " << run.proposals.size() << " proposals analysed\n";
    } else if (cmd == "validate") {
      auto rep = partisan::cmd_validate(cfg);
      std::cout << rep.seeds.size() << " shuffle iterations completed, " << rep.failed.size() << " failed\n";
    } else if (cmd == "all") {
      partisan::cmd_all(cfg);
      std::cout << "outputs in " << cfg.dao_dir().string() << '\n';
    }
  } catch (const partisan::Error& e) {
    report_error(e.kind(), e.what());
    return 2;
  } catch (const std::exception& e) {
    report_error("InternalError", e.what());
    return 3;
  }
  return 0;
}
