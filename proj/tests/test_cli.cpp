// Drives the built binary end to end: exit codes, table output, tree
// rendering, schema export.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "tme/serialize.hpp"

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult run_cli(const std::string& args) {
  std::string command = std::string(TME_CLI_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CommandResult result;
  std::array<char, 4096> buffer;
  while (std::size_t n = fread(buffer.data(), 1, buffer.size(), pipe))
    result.output.append(buffer.data(), n);
  int status = pclose(pipe);
  result.exit_code = WEXITSTATUS(status);
  return result;
}

std::string fixture_path(const std::string& name) {
  return std::string(TME_FIXTURE_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("compare prints the totals row with savings") {
  CommandResult result = run_cli("compare " + fixture_path("formfill.script.json"));
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("total") != std::string::npos);
  CHECK(result.output.find("saved 168 tokens") != std::string::npos);
}

TEST_CASE("compare emits csv when asked") {
  CommandResult result =
      run_cli("compare --format csv " + fixture_path("formfill.script.json"));
  CHECK(result.exit_code == 0);
  CHECK(result.output.rfind("round,prompt_baseline,prompt_tet,", 0) == 0);
}

TEST_CASE("tree renders the rollback scenario with inline revisions") {
  CommandResult result = run_cli("tree --ascii " + fixture_path("fig2.tree.json"));
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("Fill Form") != std::string::npos);
  CHECK(result.output.find("Initial: John Doe") != std::string::npos);
  CHECK(result.output.find("Correction: John Smith") != std::string::npos);
  CHECK(result.output.find("|------ ") != std::string::npos);
}

TEST_CASE("tree on a one-node file prints a single root line") {
  auto path = std::filesystem::temp_directory_path() / "tme_one_node.json";
  {
    std::ofstream out(path);
    out << tme::serialize(tme::new_tree("Fill form"));
  }
  CommandResult result = run_cli("tree " + path.string());
  CHECK(result.exit_code == 0);
  CHECK(result.output == "Fill form [active] *\n");
  std::filesystem::remove(path);
}

TEST_CASE("export round-trips the schema document") {
  CommandResult result = run_cli("export --format json " + fixture_path("fig2.tree.json"));
  CHECK(result.exit_code == 0);
  tme::TaskTree tree = tme::deserialize(result.output);
  CHECK(tree.size() == 4);
}

TEST_CASE("run writes transcripts, tree and report under --out") {
  auto dir = std::filesystem::temp_directory_path() / "tme_run_out";
  std::filesystem::remove_all(dir);
  CommandResult result = run_cli("run " + fixture_path("formfill.script.json") + " --out " +
                                 dir.string());
  CHECK(result.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "round1.tet.txt"));
  CHECK(std::filesystem::exists(dir / "round6.baseline.txt"));
  CHECK(std::filesystem::exists(dir / "tree.json"));
  CHECK(std::filesystem::exists(dir / "report.csv"));
  std::ifstream tree_file(dir / "tree.json");
  std::stringstream buffer;
  buffer << tree_file.rdbuf();
  CHECK(tme::deserialize(buffer.str()).invariant_violations().empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("single-mode runs print a single-policy table") {
  CommandResult result =
      run_cli("run --mode tet " + fixture_path("formfill.script.json"));
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("total 584 tokens") != std::string::npos);
  CommandResult baseline =
      run_cli("run --mode baseline " + fixture_path("formfill.script.json"));
  CHECK(baseline.exit_code == 0);
  CHECK(baseline.output.find("total 752 tokens") != std::string::npos);
}

TEST_CASE("compare accepts an engine config file") {
  CommandResult result = run_cli("compare --config " + fixture_path("engine.config.json") +
                                 " " + fixture_path("formfill.script.json"));
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("saved 168 tokens") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("frobnicate").exit_code == 1);
  CHECK(run_cli("compare").exit_code == 1);  // missing script
  CHECK(run_cli("export --format yaml " + fixture_path("fig2.tree.json")).exit_code == 1);
  CHECK(run_cli("compare --tokenizer nope " + fixture_path("formfill.script.json"))
            .exit_code == 1);
}

TEST_CASE("script and schema errors exit 2") {
  CHECK(run_cli("compare /no/such/file.json").exit_code == 2);
  auto bad = std::filesystem::temp_directory_path() / "tme_bad.json";
  {
    std::ofstream out(bad);
    out << "{\"schema_version\": \"1\"";
  }
  CHECK(run_cli("tree " + bad.string()).exit_code == 2);
  {
    std::ofstream out(bad);
    out << "{\"rounds\": []}";
  }
  CHECK(run_cli("run " + bad.string()).exit_code == 2);
  std::filesystem::remove(bad);
}
