// End-to-end checks of the command-line surface. Takes the CLI binary path
// as argv[1] and works in a scratch directory under the system temp root.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "voxrec/io.hpp"
#include "voxrec/metrics.hpp"

namespace fs = std::filesystem;
using namespace voxrec;

namespace {

int g_failures = 0;

#define REQUIRE_CLI(cond, msg)                                                        \
    do {                                                                              \
        if (!(cond)) {                                                                \
            std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << (msg)     \
                      << "\n";                                                        \
            ++g_failures;                                                             \
        }                                                                             \
    } while (0)

std::string g_cli;
fs::path g_dir;

struct RunResult {
    int exit_code;
    std::string output;  // stdout only
};

RunResult run_cli(const std::string& args) {
    const fs::path out_file = g_dir / "cmd_output.txt";
    const std::string cmd = g_cli + " " + args + " > " + out_file.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    std::ifstream f(out_file);
    std::string output((std::istreambuf_iterator<char>(f)), {});
    return {status == 0 ? 0 : 1, output};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_tests <path-to-cli>\n";
        return 2;
    }
    g_cli = argv[1];
    g_dir = fs::temp_directory_path() / "voxrec_cli_tests";
    fs::remove_all(g_dir);
    fs::create_directories(g_dir);
    const std::string dir = g_dir.string();

    // gen-data writes the full bundle.
    {
        const RunResult r =
            run_cli("gen-data --shape cup --n 16 --views 3 --seed 7 --out " + dir + "/data");
        REQUIRE_CLI(r.exit_code == 0, "gen-data failed");
        REQUIRE_CLI(fs::exists(g_dir / "data/gt.vox"), "missing ground truth");
        REQUIRE_CLI(fs::exists(g_dir / "data/cam_002.json"), "missing camera");
        REQUIRE_CLI(fs::exists(g_dir / "data/mask_002.pgm"), "missing mask");
        REQUIRE_CLI(fs::exists(g_dir / "data/manifest.json"), "missing manifest");
    }

    // project reproduces a stored mask byte-exactly.
    {
        const RunResult r = run_cli("project --voxels " + dir + "/data/gt.vox --camera " + dir +
                                    "/data/cam_001.json --method rp --out " + dir + "/re.pgm");
        REQUIRE_CLI(r.exit_code == 0, "project failed");
        REQUIRE_CLI(slurp(g_dir / "re.pgm") == slurp(g_dir / "data/mask_001.pgm"),
                    "rp projection does not reproduce the stored mask");
    }

    // project with the sampling method also writes a mask.
    {
        const RunResult r =
            run_cli("project --voxels " + dir + "/data/gt.vox --camera " + dir +
                    "/data/cam_001.json --method gs --depth-samples 32 --out " + dir + "/gs.pgm");
        REQUIRE_CLI(r.exit_code == 0, "gs project failed");
        REQUIRE_CLI(fs::exists(g_dir / "gs.pgm"), "missing gs mask");
    }

    // eval of the ground truth against itself.
    {
        const RunResult r =
            run_cli("eval --pred " + dir + "/data/gt.vox --gt " + dir + "/data/gt.vox --tau 0.4");
        REQUIRE_CLI(r.exit_code == 0, "eval failed");
        REQUIRE_CLI(r.output.find("iou=1.000000 ap=1.000000") != std::string::npos,
                    "eval output mismatch: " + r.output);
    }

    // carve from the generated views contains the shape.
    {
        const std::string views = dir + "/data/cam_000.json:" + dir + "/data/mask_000.pgm," +
                                  dir + "/data/cam_001.json:" + dir + "/data/mask_001.pgm," +
                                  dir + "/data/cam_002.json:" + dir + "/data/mask_002.pgm";
        const RunResult r =
            run_cli("carve --out " + dir + "/hull.vox --n 16 --views \"" + views + "\"");
        REQUIRE_CLI(r.exit_code == 0, "carve failed");
        const VoxelGrid hull = read_voxf(g_dir / "hull.vox");
        const VoxelGrid shape = read_voxf(g_dir / "data/gt.vox");
        int violations = 0;
        for (std::size_t i = 0; i < shape.size(); ++i)
            violations += shape[i] == 1.0 && hull[i] == 0.0;
        REQUIRE_CLI(violations == 0, "carve is not a superset of the shape");
    }

    // compare-projectors writes a report with one line per sampling rate.
    {
        const RunResult r = run_cli("compare-projectors --voxels " + dir +
                                    "/data/gt.vox --camera " + dir +
                                    "/data/cam_000.json --samples 8,16 --report " + dir +
                                    "/report.txt");
        REQUIRE_CLI(r.exit_code == 0, "compare-projectors failed");
        const std::string report = slurp(g_dir / "report.txt");
        REQUIRE_CLI(report.find("gs samples=8 ") != std::string::npos, "report missing D=8");
        REQUIRE_CLI(report.find("gs samples=16 ") != std::string::npos, "report missing D=16");
    }

    // theory-check reports zero violations on the default problem.
    {
        const RunResult r = run_cli("theory-check --categories 3 --outcomes 8 --trials 50 --seed 1");
        REQUIRE_CLI(r.exit_code == 0, "theory-check failed");
        REQUIRE_CLI(r.output.find("violations=0") != std::string::npos,
                    "theory-check did not report zero violations");
        REQUIRE_CLI(r.output.find("PASS") != std::string::npos, "theory-check did not pass");
    }

    // estimate-viewpoint prints a pose.
    {
        const RunResult r = run_cli("estimate-viewpoint --mask " + dir +
                                    "/data/mask_000.pgm --reference " + dir +
                                    "/data/gt.vox --bins 4");
        REQUIRE_CLI(r.exit_code == 0, "estimate-viewpoint failed");
        REQUIRE_CLI(r.output.find("az_bin=") != std::string::npos,
                    "estimate-viewpoint output mismatch: " + r.output);
    }

    // reconstruct (with and without barrier) writes outputs; identical
    // invocations are byte-identical.
    {
        fs::create_directories(g_dir / "pool");
        const auto pool = shape_pool(42, 6, 16, {ShapeKind::cup});
        for (std::size_t k = 0; k < pool.size(); ++k)
            write_voxf(g_dir / "pool" / ("p" + std::to_string(k) + ".vox"), pool[k]);
        const std::string views = dir + "/data/cam_000.json:" + dir + "/data/mask_000.pgm";
        const std::string base = "reconstruct --views \"" + views + "\" --pool " + dir +
                                 "/pool --iters 30 --t 100 --seed 9";
        const RunResult r1 =
            run_cli(base + " --out " + dir + "/rec1.vox --log " + dir + "/rec1.csv");
        const RunResult r2 =
            run_cli(base + " --out " + dir + "/rec2.vox --log " + dir + "/rec2.csv");
        REQUIRE_CLI(r1.exit_code == 0 && r2.exit_code == 0, "reconstruct failed");
        REQUIRE_CLI(slurp(g_dir / "rec1.vox") == slurp(g_dir / "rec2.vox"),
                    "reconstruct outputs differ between identical runs");
        REQUIRE_CLI(slurp(g_dir / "rec1.csv") == slurp(g_dir / "rec2.csv"),
                    "reconstruct logs differ between identical runs");

        const RunResult r3 = run_cli("reconstruct --views \"" + views +
                                     "\" --iters 5 --seed 9 --no-barrier --n 16 --out " + dir +
                                     "/rec3.vox");
        REQUIRE_CLI(r3.exit_code == 0, "mask-only reconstruct failed");
    }

    // Errors: malformed inputs exit nonzero.
    {
        REQUIRE_CLI(run_cli("eval --pred /nonexistent.vox --gt " + dir + "/data/gt.vox")
                            .exit_code != 0,
                    "missing file should fail");
        REQUIRE_CLI(run_cli("project --voxels " + dir + "/data/gt.vox --camera " + dir +
                            "/data/gt.vox --method rp --out " + dir + "/x.pgm")
                            .exit_code != 0,
                    "bad camera file should fail");
        REQUIRE_CLI(run_cli("project --voxels " + dir + "/data/gt.vox --camera " + dir +
                            "/data/cam_000.json --method bogus --out " + dir + "/x.pgm")
                            .exit_code != 0,
                    "unknown method should fail");
        REQUIRE_CLI(run_cli("carve --out " + dir + "/x.vox --n 16 --views \"nope\"").exit_code !=
                        0,
                    "malformed view pair should fail");
    }

    if (g_failures == 0) {
        std::printf("cli_tests: all checks passed\n");
        return 0;
    }
    std::printf("cli_tests: %d failures\n", g_failures);
    return 1;
}
