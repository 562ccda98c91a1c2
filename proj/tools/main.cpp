// lsc: check structured event logs against temporal pattern specs,
// visualize compiled automata, and learn/diff endorseable trace models.

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsc/compiler.hpp"
#include "lsc/errors.hpp"
#include "lsc/learner.hpp"
#include "lsc/logmaker.hpp"
#include "lsc/monitor.hpp"
#include "lsc/oracle.hpp"
#include "lsc/spec.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitPass = 0;
constexpr int kExitViolations = 1;
constexpr int kExitError = 2;

struct IngestFlags {
  std::string kind_field = "kind";
  std::string time_field = "time";
  std::string time_unit = "us";
  std::vector<std::string> aliases;  // NAME=KIND
  std::string anchors_path;

  lsc::IngestConfig to_config() const {
    lsc::IngestConfig cfg;
    cfg.kind_field = kind_field;
    cfg.time_field = time_field;
    if (time_unit == "s") cfg.time_unit = lsc::TimeUnit::Seconds;
    else if (time_unit == "ms") cfg.time_unit = lsc::TimeUnit::Milliseconds;
    else if (time_unit == "us") cfg.time_unit = lsc::TimeUnit::Microseconds;
    else throw lsc::Error("unknown time unit '" + time_unit + "' (use s, ms, us)");
    for (const auto& a : aliases) {
      auto eq = a.find('=');
      if (eq == std::string::npos || eq == 0)
        throw lsc::Error("bad --alias '" + a + "' (expected NAME=KIND)");
      auto kind = lsc::kind_from_name(a.substr(eq + 1));
      if (!kind || *kind == lsc::EventKind::Meta)
        throw lsc::Error("bad --alias '" + a + "': unknown kind");
      cfg.kind_aliases[a.substr(0, eq)] = *kind;
    }
    return cfg;
  }
};

void add_ingest_flags(CLI::App* cmd, IngestFlags& flags) {
  cmd->add_option("--kind-field", flags.kind_field,
                  "Record key holding the event kind (default: kind)");
  cmd->add_option("--time-field", flags.time_field,
                  "Record key holding the timestamp (default: time)");
  cmd->add_option("--time-unit", flags.time_unit,
                  "Timestamp unit: s, ms or us (default: us)");
  cmd->add_option("--alias", flags.aliases,
                  "Extra kind alias NAME=KIND (repeatable)");
  cmd->add_option("--time-anchors", flags.anchors_path,
                  "JSON file of ground/canonical clock anchor pairs");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw lsc::Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<lsc::ClockAnchor> load_anchors(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& ex) {
    throw lsc::Error("bad anchors file '" + path + "': " + ex.what());
  }
  if (!doc.is_array()) throw lsc::Error("anchors file must be a JSON array");
  std::vector<lsc::ClockAnchor> anchors;
  for (const auto& a : doc) {
    if (!a.is_object() || !a.contains("ground") || !a.contains("canonical"))
      throw lsc::Error("each anchor needs ground and canonical times");
    anchors.push_back(lsc::ClockAnchor{a["ground"].get<std::int64_t>(),
                                       a["canonical"].get<std::int64_t>()});
  }
  return anchors;
}

lsc::Log load_log(const std::string& path, const IngestFlags& flags) {
  auto cfg = flags.to_config();
  std::string text = read_file(path);
  std::vector<lsc::Event> events;
  if (fs::path(path).extension() == ".csv") events = lsc::ingest_csv(text, cfg);
  else events = lsc::ingest(text, cfg);
  if (!flags.anchors_path.empty())
    events = lsc::time_align(std::move(events), load_anchors(flags.anchors_path));
  lsc::FinalizeStats stats;
  lsc::Log log = lsc::finalize(std::move(events), path, &stats);
  if (stats.tie_groups > 0) {
    std::cerr << "note: " << path << ": " << stats.tie_groups
              << " timestamp tie group(s) kept in input order\n";
  }
  return log;
}

lsc::Spec load_spec(const std::string& path) { return lsc::parse_spec(read_file(path)); }

int write_dot_files(const std::vector<lsc::Automaton>& automata,
                    const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  for (const auto& a : automata) {
    fs::path out_path = fs::path(dir) / (a.pattern_name + ".dot");
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw lsc::Error("cannot write '" + out_path.string() + "'");
    out << lsc::to_dot(a);
    if (!out.good()) throw lsc::Error("failed writing '" + out_path.string() + "'");
  }
  return static_cast<int>(automata.size());
}

int cmd_check(const std::string& spec_path, const std::vector<std::string>& log_paths,
              const IngestFlags& flags, const std::string& format,
              const std::string& dot_dir, std::size_t max_violations) {
  auto spec = load_spec(spec_path);
  auto automata = std::make_shared<const std::vector<lsc::Automaton>>(
      lsc::compile(spec));
  if (!dot_dir.empty()) write_dot_files(*automata, dot_dir);

  // Logs are checked concurrently; reports print in input order.
  std::vector<std::future<lsc::Report>> futures;
  futures.reserve(log_paths.size());
  for (const auto& path : log_paths) {
    futures.push_back(std::async(std::launch::async, [&, path] {
      lsc::Log log = load_log(path, flags);
      lsc::Session session(automata);
      for (const auto& e : log.events) session.step(e);
      return session.finish(log.source_id);
    }));
  }

  bool any_violation = false;
  bool any_error = false;
  for (std::size_t i = 0; i < futures.size(); ++i) {
    try {
      lsc::Report report = futures[i].get();
      any_violation = any_violation || !report.pass();
      if (format == "json") std::cout << lsc::report_to_json(report, max_violations);
      else std::cout << lsc::report_to_text(report, max_violations);
    } catch (const lsc::Error& ex) {
      std::cerr << "error: " << log_paths[i] << ": " << ex.what() << "\n";
      any_error = true;
    }
  }
  if (any_error) return kExitError;
  return any_violation ? kExitViolations : kExitPass;
}

int cmd_parse(const std::string& spec_path) {
  auto spec = load_spec(spec_path);
  std::cout << lsc::pretty_print(spec);
  return kExitPass;
}

int cmd_viz(const std::string& spec_path, const std::string& out_dir) {
  auto spec = load_spec(spec_path);
  auto automata = lsc::compile(spec);
  int n = write_dot_files(automata, out_dir);
  std::cerr << "wrote " << n << " dot file(s) to " << out_dir << "\n";
  return kExitPass;
}

int cmd_learn(const std::vector<std::string>& log_paths,
              const std::string& equality_path, const std::string& out_path,
              const IngestFlags& flags, bool endorse_now) {
  lsc::EqualityConfig cfg = equality_path.empty()
                                ? lsc::EqualityConfig::all_kinds()
                                : lsc::parse_equality_config(read_file(equality_path));
  std::vector<lsc::Log> logs;
  logs.reserve(log_paths.size());
  for (const auto& path : log_paths) logs.push_back(load_log(path, flags));
  lsc::LearnedModel model = lsc::learn(logs, cfg);
  if (endorse_now) model = lsc::endorse(std::move(model));
  std::string serialized = lsc::serialize_model(model);
  if (out_path.empty() || out_path == "-") {
    std::cout << serialized;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw lsc::Error("cannot write '" + out_path + "'");
    out << serialized;
  }
  return kExitPass;
}

int cmd_diff(const std::string& model_path, const std::string& log_path,
             const IngestFlags& flags) {
  lsc::LearnedModel model = lsc::parse_model(read_file(model_path));
  lsc::Log log = load_log(log_path, flags);
  lsc::DiffReport report = lsc::diff(model, log);
  if (report.matched) {
    std::cout << "MATCH (model " << (report.model_endorsed ? "endorsed" : "not endorsed")
              << ")\n";
    return kExitPass;
  }
  std::cout << "MISMATCH (model "
            << (report.model_endorsed ? "endorsed" : "not endorsed") << ")\n";
  std::cout << "divergence at abstract index " << report.divergence_index << "\n";
  std::cout << "expected: "
            << (report.expected ? report.expected->to_display() : "END") << "\n";
  std::cout << "observed: "
            << (report.observed ? report.observed->to_display() : "END") << "\n";
  if (report.observed_log_index)
    std::cout << "observed log index: " << *report.observed_log_index << "\n";
  return kExitViolations;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline checking of structured event logs against temporal "
               "pattern specifications"};
  app.require_subcommand(1);

  // check
  auto* check = app.add_subcommand("check", "Check logs against a spec");
  std::string spec_path, format = "text", dot_dir;
  std::vector<std::string> log_paths;
  std::size_t max_violations = 0;
  IngestFlags check_flags;
  check->add_option("spec", spec_path, "Pattern spec (.lsc)")->required();
  check->add_option("logs", log_paths, "Event logs (JSON lines or .csv)")->required();
  check->add_option("--format", format, "Report format: text or json")
      ->check(CLI::IsMember({"text", "json"}));
  check->add_option("--dot", dot_dir, "Also write automaton DOT files here");
  check->add_option("--max-violations", max_violations,
                    "Cap reported violations (0 = unlimited)");
  add_ingest_flags(check, check_flags);

  // parse
  auto* parse = app.add_subcommand("parse", "Parse a spec and print its canonical form");
  std::string parse_spec_path;
  parse->add_option("spec", parse_spec_path, "Pattern spec (.lsc)")->required();

  // viz
  auto* viz = app.add_subcommand("viz", "Write one Graphviz file per pattern");
  std::string viz_spec_path, viz_out_dir;
  viz->add_option("spec", viz_spec_path, "Pattern spec (.lsc)")->required();
  viz->add_option("outdir", viz_out_dir, "Output directory")->required();

  // learn
  auto* learn = app.add_subcommand("learn", "Learn a trace model from good runs");
  std::vector<std::string> learn_logs;
  std::string equality_path, model_out;
  bool endorse_now = false;
  IngestFlags learn_flags;
  learn->add_option("logs", learn_logs, "Event logs")->required();
  learn->add_option("--equality", equality_path, "Equality config JSON");
  learn->add_option("-o,--out", model_out, "Model output path (default: stdout)");
  learn->add_flag("--endorse", endorse_now, "Mark the model endorsed");
  add_ingest_flags(learn, learn_flags);

  // diff
  auto* diff = app.add_subcommand("diff", "Diff a log against a learned model");
  std::string model_path, diff_log;
  IngestFlags diff_flags;
  diff->add_option("model", model_path, "Learned model JSON")->required();
  diff->add_option("log", diff_log, "Event log")->required();
  add_ingest_flags(diff, diff_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitPass : kExitError;
  }

  try {
    if (check->parsed())
      return cmd_check(spec_path, log_paths, check_flags, format, dot_dir,
                       max_violations);
    if (parse->parsed()) return cmd_parse(parse_spec_path);
    if (viz->parsed()) return cmd_viz(viz_spec_path, viz_out_dir);
    if (learn->parsed())
      return cmd_learn(learn_logs, equality_path, model_out, learn_flags,
                       endorse_now);
    if (diff->parsed()) return cmd_diff(model_path, diff_log, diff_flags);
  } catch (const lsc::Error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitError;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
