// tme — command line front end for the task memory engine.
//
//   tme run <script> [--mode both|tet|baseline] [--tokenizer ref|approx-bpe]
//                    [--overhead N] [--client scripted|live] [--config FILE]
//                    [--out DIR]
//   tme compare <script> [--tokenizer ...] [--overhead N] [--format text|csv]
//   tme tree <tree-file> [--ascii]
//   tme export <tree-file> --format json
//
// Exit codes: 0 success, 1 usage error, 2 script or schema error.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tme/config.hpp"
#include "tme/live_client.hpp"
#include "tme/tme.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) tme::fail(tme::ErrorCode::schema_error, path + ": cannot read file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) tme::fail(tme::ErrorCode::schema_error, path.string() + ": cannot write file");
  out << content;
  if (!content.empty() && content.back() != '\n') out << '\n';
}

void render_node(const tme::TaskTree& tree, tme::NodeId id, const std::string& indent,
                 bool ascii, std::ostream& os) {
  const tme::TaskNode& n = tree.node(id);
  os << n.action << " [" << to_string(n.status) << "]";
  if (id == tree.current()) os << " *";
  if (!n.dependencies.empty()) {
    os << "  (";
    for (std::size_t i = 0; i < n.dependencies.size(); ++i) {
      if (i) os << ", ";
      os << to_string(n.dependencies[i].kind) << " " << to_string(n.dependencies[i].to);
    }
    os << ")";
  }
  os << "\n";
  const char* branch = ascii ? "|------ " : "├── ";
  const char* pipe = ascii ? "|   " : "│   ";
  std::string child_indent = indent + pipe;
  for (const tme::RevisionEntry& r : n.revisions) {
    os << indent << branch;
    os << (r.kind == tme::RevisionKind::initial ? "Initial: " : "Correction: ") << r.text
       << "\n";
  }
  for (tme::NodeId c : n.children) {
    os << indent << branch;
    render_node(tree, c, child_indent, ascii, os);
  }
}

std::string render_tree(const tme::TaskTree& tree, bool ascii) {
  std::ostringstream os;
  render_node(tree, tree.root(), "", ascii, os);
  return os.str();
}

struct RunArgs {
  std::string script_path;
  std::string mode = "both";
  std::string tokenizer = "ref";
  long overhead = 0;
  std::string client = "scripted";
  std::string config_path;
  std::string out_dir;
};

tme::SessionOptions build_options(const RunArgs& args) {
  tme::SessionOptions options;
  if (!args.config_path.empty()) {
    tme::EngineConfig config = tme::parse_config(read_file(args.config_path));
    options.trim = config.trim;
    options.cost = config.cost;
  }
  auto mode = tme::session_mode_from_string(args.mode);
  if (!mode) tme::fail(tme::ErrorCode::invalid_argument, "unknown mode '" + args.mode + "'");
  options.mode = *mode;
  options.client = args.client;
  options.cost.tokenizer = args.tokenizer;
  options.cost.per_turn_overhead = args.overhead;
  tme::find_tokenizer(options.cost.tokenizer);
  return options;
}

void print_single_policy(const tme::TokenReport& report, bool tet) {
  std::cout << std::left << std::setw(8) << "round" << std::right << std::setw(10)
            << "prompt" << std::setw(12) << "completion" << std::setw(10) << "total"
            << "\n";
  long total = 0;
  for (const tme::TokenRow& r : report.rows) {
    long prompt = tet ? r.prompt_tet : r.prompt_baseline;
    long completion = tet ? r.completion_tet : r.completion_baseline;
    std::cout << std::left << std::setw(8) << r.round << std::right << std::setw(10)
              << prompt << std::setw(12) << completion << std::setw(10)
              << prompt + completion << "\n";
    total += prompt + completion;
  }
  std::cout << "total " << total << " tokens across " << report.rows.size()
            << " rounds\n";
}

int cmd_run(const RunArgs& args) {
  tme::SessionScript script = tme::parse_script(read_file(args.script_path));
  tme::SessionOptions options = build_options(args);
  tme::SessionResult result = tme::run_session(script, options);

  for (const std::string& warning : result.warnings) std::cerr << "warning: " << warning << "\n";
  if (options.mode == tme::SessionMode::both)
    std::cout << tme::render_table(result.report, tme::TableFormat::text);
  else
    print_single_policy(result.report, options.mode == tme::SessionMode::tet);

  if (!args.out_dir.empty()) {
    fs::create_directories(args.out_dir);
    fs::path dir(args.out_dir);
    for (const tme::RoundRecord& round : result.rounds) {
      std::string stem = "round" + std::to_string(round.round);
      if (options.mode != tme::SessionMode::baseline)
        write_file(dir / (stem + ".tet.txt"), tme::render(round.prompt_tet));
      if (options.mode != tme::SessionMode::tet)
        write_file(dir / (stem + ".baseline.txt"), tme::render(round.prompt_baseline));
    }
    write_file(dir / "tree.json", tme::serialize(result.final_tree()));
    write_file(dir / "report.csv", tme::render_table(result.report, tme::TableFormat::csv));
    std::cout << "wrote " << dir.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  tme::register_live_client();  // only registers when TME_LIVE_ENDPOINT is set

  CLI::App app{"task memory engine"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "replay a session script");
  run->add_option("script", run_args.script_path, "session script file")->required();
  run->add_option("--mode", run_args.mode, "tet, baseline or both");
  run->add_option("--tokenizer", run_args.tokenizer, "tokenizer name");
  run->add_option("--overhead", run_args.overhead, "per-turn token overhead");
  run->add_option("--client", run_args.client, "model client name");
  run->add_option("--config", run_args.config_path, "engine config file");
  run->add_option("--out", run_args.out_dir, "output directory");

  RunArgs compare_args;
  std::string compare_format = "text";
  auto* compare = app.add_subcommand("compare", "token comparison for a script");
  compare->add_option("script", compare_args.script_path, "session script file")->required();
  compare->add_option("--tokenizer", compare_args.tokenizer, "tokenizer name");
  compare->add_option("--overhead", compare_args.overhead, "per-turn token overhead");
  compare->add_option("--config", compare_args.config_path, "engine config file");
  compare->add_option("--format", compare_format, "text or csv");

  std::string tree_path;
  bool tree_ascii = false;
  auto* tree_cmd = app.add_subcommand("tree", "render a tree file");
  tree_cmd->add_option("tree-file", tree_path, "tree schema document")->required();
  tree_cmd->add_flag("--ascii", tree_ascii, "plain ASCII connectors");

  std::string export_path;
  std::string export_format;
  auto* export_cmd = app.add_subcommand("export", "re-emit a tree schema document");
  export_cmd->add_option("tree-file", export_path, "tree schema document")->required();
  export_cmd->add_option("--format", export_format, "output format (json)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (compare->parsed()) {
      tme::SessionScript script = tme::parse_script(read_file(compare_args.script_path));
      tme::SessionOptions options = build_options(compare_args);
      tme::TableFormat format = tme::table_format_from_string(compare_format);
      std::cout << tme::render_table(tme::compare_session(script, options.cost), format);
      return 0;
    }
    if (tree_cmd->parsed()) {
      tme::TaskTree tree = tme::deserialize(read_file(tree_path));
      std::cout << render_tree(tree, tree_ascii);
      return 0;
    }
    if (export_cmd->parsed()) {
      if (export_format != "json")
        tme::fail(tme::ErrorCode::invalid_argument,
                  "unknown export format '" + export_format + "'");
      tme::TaskTree tree = tme::deserialize(read_file(export_path));
      std::cout << tme::serialize(tree) << "\n";
      return 0;
    }
  } catch (const tme::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == tme::ErrorCode::schema_error ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
