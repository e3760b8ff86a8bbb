#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

std::string binary_path() {
    const char* env = std::getenv("PPARAB_BIN");
    REQUIRE_MESSAGE(env != nullptr, "PPARAB_BIN must point at the pparab binary");
    return env;
}

struct CommandResult {
    int exit_code;
    std::string output;
};

CommandResult run_command(const std::string& args) {
    const fs::path tmp =
        fs::temp_directory_path() / ("pparab_cli_out_" + std::to_string(::getpid()));
    const std::string cmd = binary_path() + " " + args + " > " + tmp.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    CommandResult r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(tmp);
    std::ostringstream buf;
    buf << in.rdbuf();
    r.output = buf.str();
    fs::remove(tmp);
    return r;
}

} // namespace

TEST_CASE("constants table") {
    const CommandResult r = run_command("constants --p 4");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("p,k,q,hat_t,t2_0,ratio") != std::string::npos);
    CHECK(r.output.find("0.020833333333333336") != std::string::npos);
    CHECK(r.output.find("0.03125") != std::string::npos);
    CHECK(r.output.find("1.4999999999999998") != std::string::npos);
}

TEST_CASE("usage and configuration errors exit with code 2") {
    CHECK(run_command("run /nonexistent/missing.toml").exit_code == 2);
    CHECK(run_command("--definitely-not-a-flag").exit_code == 2);
    CHECK(run_command("constants --p 1.5").exit_code == 2); // p <= 2 rejected
}

TEST_CASE("help exits zero and documents subcommands") {
    const CommandResult r = run_command("--help");
    CHECK(r.exit_code == 0);
    for (const char* sub :
         {"constants", "solve", "waiting-time", "level-sets", "profile", "convergence",
          "verify", "run"})
        CHECK(r.output.find(sub) != std::string::npos);
    const CommandResult sub_help = run_command("waiting-time --help");
    CHECK(sub_help.exit_code == 0);
    CHECK(sub_help.output.find("--threshold") != std::string::npos);
    CHECK(sub_help.output.find("scenario-config.md") != std::string::npos);
}

TEST_CASE("run executes a scenario file end to end") {
    const fs::path dir = fs::temp_directory_path() / "pparab_cli_run";
    fs::remove_all(dir);
    const fs::path cfg_path = fs::temp_directory_path() / "pparab_cli_smoke.toml";
    {
        std::ofstream cfg(cfg_path);
        cfg << "schema_version = 1\n"
            << "[scenario]\nname = \"clismoke\"\n"
            << "[problem]\np = 4.0\nn_cells = 64\nbc_right = 1.0\nt_end = 1e-3\n"
            << "[snapshots]\ncount = 4\n"
            << "[analyses]\nwaterfall = true\n";
    }
    const CommandResult r =
        run_command("run " + cfg_path.string() + " -o " + dir.string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "manifest.txt"));
    CHECK(fs::exists(dir / "clismoke_waterfall.csv"));
    CHECK(r.output.find("clismoke") != std::string::npos);

    // overrides change the problem; a bad config exits 2
    const CommandResult r2 = run_command("run " + cfg_path.string() + " -o " +
                                         dir.string() + " --set problem.n_cells=7");
    CHECK(r2.exit_code == 2);
    fs::remove_all(dir);
    fs::remove(cfg_path);
}

TEST_CASE("solve subcommand writes a waterfall") {
    const fs::path dir = fs::temp_directory_path() / "pparab_cli_solve";
    fs::remove_all(dir);
    const CommandResult r = run_command(
        "solve --n-cells 64 --t-end 0.0005 --snapshots 3 -o " + dir.string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "solve_waterfall.csv"));
    std::ifstream csv(dir / "solve_waterfall.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "t,x,u");
    fs::remove_all(dir);
}
