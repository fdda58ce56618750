#include "cli.hpp"

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "termweave/error.hpp"
#include "termweave/pipeline.hpp"
#include "termweave/service.hpp"

namespace termweave::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string project;
  std::string config;
  unsigned threads = 0;
  std::string format;

  std::string source;
  std::string corpus_format = "jsonl";
  bool preannotated = false;

  std::optional<double> alpha, beta, reduction, gamma, min_size_frac, tau, threshold;
  std::optional<std::size_t> window, n_rep, n_con;
  std::optional<std::uint64_t> seed;
  std::string vectors;
  std::string run;
  std::string run_b;
  std::vector<double> gammas;

  std::string host;
  std::optional<int> port;
  std::string static_dir;
};

void add_detect_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--gamma", o.gamma, "resolution parameter gamma");
  cmd->add_option("--reduction", o.reduction, "percentage p of ranked terms kept per document");
  cmd->add_option("--n-rep", o.n_rep, "independent Leiden runs");
  cmd->add_option("--n-con", o.n_con, "runs a term pair must share a community in");
  cmd->add_option("--min-size-frac", o.min_size_frac, "minimum topic size as a fraction of |V|/k");
  cmd->add_option("--seed", o.seed, "base random seed");
}

void add_format(CLI::App* cmd, Options& o) {
  cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "csv"}));
}

Config make_config(const Options& o) {
  Config c = o.config.empty() ? project_config(o.project) : load_config(o.config);
  if (o.threads) c.threads = o.threads;
  if (o.alpha) c.ranking.alpha = *o.alpha;
  if (o.beta) c.ranking.beta = *o.beta;
  if (o.window) c.ranking.window = *o.window;
  if (o.reduction) c.graph.reduction = *o.reduction;
  if (o.gamma) c.detect.gamma = *o.gamma;
  if (o.n_rep) c.detect.n_rep = *o.n_rep;
  if (o.n_con) c.detect.n_con = *o.n_con;
  if (o.min_size_frac) c.detect.min_size_fraction = *o.min_size_frac;
  if (o.seed) c.detect.seed = *o.seed;
  if (o.tau) c.presentation.tau = *o.tau;
  if (o.threshold) c.presentation.threshold = *o.threshold;
  if (!o.vectors.empty()) c.presentation.vectors = fs::path(o.vectors);
  if (!o.host.empty()) c.serve.host = o.host;
  if (o.port) c.serve.port = *o.port;
  if (!o.static_dir.empty()) c.serve.static_dir = fs::path(o.static_dir);
  c.validate();
  return c;
}

std::string latest_run(Workspace& ws, const std::string& requested) {
  if (!requested.empty()) return requested;
  const auto runs = ws.project().manifest().at("runs");
  if (runs.empty()) throw PrerequisiteError("project has no runs; run detect first");
  return runs.back().get<std::string>();
}

void print_flow(std::ostream& out, const TopicFlowMatrix& flow, const std::string& format) {
  if (format == "csv") {
    write_flow_csv(out, flow);
  } else {
    out << to_json(flow).dump() << '\n';
  }
}

int serve(Workspace& ws, std::ostream& out) {
  // SIGINT/SIGTERM are handled by a dedicated thread so the server can shut down cleanly
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(ws, ws.config().serve);
  const int port = service.bind();
  out << "serve: listening on http://" << ws.config().serve.host << ':' << port << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  service.run();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  if (const char* env = std::getenv("TERMWEAVE_PROJECT")) o.project = env;

  CLI::App app{"Term co-occurrence topic discovery", "termweave"};
  app.require_subcommand(1);
  app.add_option("-p,--project", o.project, "project directory (default: $TERMWEAVE_PROJECT)");
  app.add_option("-c,--config", o.config, "JSON config file (default: <project>/config.json)");
  app.add_option("--threads", o.threads, "worker threads (0: all cores)");

  auto* init = app.add_subcommand("init", "create an empty project");
  auto* ingest = app.add_subcommand("ingest", "annotate and index a corpus");
  ingest->add_option("source", o.source, "JSONL file, directory of .txt files, or pre-annotated JSONL")->required();
  ingest->add_option("--corpus-format", o.corpus_format, "jsonl or txt-dir")->check(CLI::IsMember({"jsonl", "txt-dir"}));
  ingest->add_flag("--preannotated", o.preannotated, "source already carries lemma/POS tokens");

  auto* rank = app.add_subcommand("rank", "rank terms per document and over the corpus");
  rank->add_option("--alpha", o.alpha, "walk weight alpha");
  rank->add_option("--beta", o.beta, "position exponent beta");
  rank->add_option("--window", o.window, "co-occurrence window w");
  add_format(rank, o);

  auto* graph = app.add_subcommand("graph", "build the rank-reduced term co-occurrence graph");
  graph->add_option("--reduction", o.reduction, "percentage p of ranked terms kept per document");

  auto* detect = app.add_subcommand("detect", "find consensus topics");
  add_detect_flags(detect, o);
  add_format(detect, o);

  auto* sheets = app.add_subcommand("sheets", "stratified topic sheets and coherence");
  sheets->add_option("run", o.run, "run id (default: latest)");
  sheets->add_option("--tau", o.tau, "threshold on r(t) for informative terms");
  sheets->add_option("--threshold", o.threshold, "merge distance cut for stratification");
  sheets->add_option("--vectors", o.vectors, "word vector file");
  add_format(sheets, o);

  auto* eval = app.add_subcommand("eval", "crosstable and classification stats against class labels");
  eval->add_option("run", o.run, "run id (default: latest)");
  add_format(eval, o);

  auto* compare = app.add_subcommand("compare", "term flow between the topics of two runs");
  compare->add_option("a", o.run, "first run")->required();
  compare->add_option("b", o.run_b, "second run")->required();
  add_format(compare, o);

  auto* sweep = app.add_subcommand("sweep", "detect over several resolutions and compare neighbours");
  sweep->add_option("--gamma", o.gammas, "comma separated gamma values")->delimiter(',')->required();
  sweep->add_option("--reduction", o.reduction, "percentage p of ranked terms kept per document");
  sweep->add_option("--n-rep", o.n_rep, "independent Leiden runs");
  sweep->add_option("--n-con", o.n_con, "runs a term pair must share a community in");
  sweep->add_option("--min-size-frac", o.min_size_frac, "minimum topic size as a fraction of |V|/k");
  sweep->add_option("--seed", o.seed, "base random seed");
  add_format(sweep, o);

  auto* serve_cmd = app.add_subcommand("serve", "start the HTTP API");
  serve_cmd->add_option("--host", o.host, "bind address");
  serve_cmd->add_option("--port", o.port, "port (0 picks a free one)");
  serve_cmd->add_option("--static", o.static_dir, "directory served under /");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  if (o.project.empty()) {
    err << "error: no project given (use --project or TERMWEAVE_PROJECT)\n";
    return 1;
  }

  // with --format the data goes to stdout, so the summary moves to stderr
  std::ostream& summary = o.format.empty() ? out : err;
  try {
    if (init->parsed()) {
      Project::init(o.project);
      summary << "init: project created at " << o.project << '\n';
      return 0;
    }
    const bool read_only = compare->parsed();
    Project project = Project::open(o.project, read_only ? Project::Mode::Read : Project::Mode::Write);
    Workspace ws(project, make_config(o));

    if (ingest->parsed()) {
      const auto r = ws.ingest(o.source, parse_corpus_format(o.corpus_format), o.preannotated);
      summary << r.summary << '\n';
    } else if (rank->parsed()) {
      const auto r = ws.rank();
      summary << r.summary << '\n';
      if (!o.format.empty()) {
        auto c = ws.corpus();
        auto set = ws.rankings();
        if (o.format == "csv") {
          write_corpus_ranking_csv(out, *set, c->vocabulary);
        } else {
          Json list = Json::array();
          for (TermId t = 0; t < set->corpus.r.size(); ++t) {
            list.push_back({{"term", c->vocabulary.term(t)},
                            {"r", set->corpus.r[t]},
                            {"Df", c->vocabulary.df(t)},
                            {"sum_q", set->corpus.q_sum[t]}});
          }
          out << list.dump() << '\n';
        }
      }
    } else if (graph->parsed()) {
      summary << ws.graph(o.reduction).summary << '\n';
    } else if (detect->parsed()) {
      const auto r = ws.detect(ws.config().detect, ws.config().graph.reduction);
      summary << r.summary << '\n';
      if (o.format == "json") {
        out << to_json(*ws.topics(r.artifact), ws.corpus()->vocabulary).dump(2) << '\n';
      } else if (o.format == "csv") {
        write_topics_csv(out, *ws.topics(r.artifact), ws.corpus()->vocabulary);
      }
    } else if (sheets->parsed()) {
      const auto run = latest_run(ws, o.run);
      const auto r = ws.sheets(run);
      summary << r.summary << '\n';
      if (o.format == "json") {
        out << project.load_artifact(r.artifact);
      } else if (o.format == "csv") {
        write_sheets_csv(out, ws.sheet_bundle(run)->sheets, ws.corpus()->vocabulary);
      }
    } else if (eval->parsed()) {
      const auto run = latest_run(ws, o.run);
      const auto r = ws.eval(run);
      summary << r.summary << '\n';
      if (o.format == "json") {
        out << project.load_artifact(r.artifact);
      } else if (o.format == "csv") {
        const auto e = ws.evaluate(run);
        write_crosstable_csv(out, e.table);
        out << '\n';
        write_stats_csv(out, e.stats);
      }
    } else if (compare->parsed()) {
      const auto flow = ws.compare(o.run, o.run_b);
      summary << "compare: " << flow.rows << " x " << flow.cols << " flow matrix, " << flow.total()
              << " shared terms\n";
      print_flow(out, flow, o.format);
    } else if (sweep->parsed()) {
      const auto steps = ws.sweep(o.gammas, ws.config().detect, ws.config().graph.reduction);
      Json report = Json::array();
      for (const auto& s : steps) {
        summary << "sweep: gamma=" << Json(s.gamma).dump() << ", " << s.run.topic_count << " topics, coverage "
                << std::fixed << std::setprecision(1) << s.run.coverage() << "% -> run " << s.run.id << '\n';
        Json step = {{"gamma", s.gamma}, {"run", s.run.id}, {"topics", s.run.topic_count}};
        if (s.from_previous) {
          step["flow"] = to_json(*s.from_previous);
          if (o.format.empty()) print_flow(out, *s.from_previous, "csv");
        }
        report.push_back(std::move(step));
      }
      if (o.format == "json") out << report.dump(2) << '\n';
      if (o.format == "csv") {
        out << "gamma,run,topics\n";
        for (const auto& s : steps) out << Json(s.gamma).dump() << ',' << s.run.id << ',' << s.run.topic_count << '\n';
      }
    } else if (serve_cmd->parsed()) {
      return serve(ws, summary);
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace termweave::cli
