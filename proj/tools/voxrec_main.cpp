// Command-line driver: dataset generation, projection, carving,
// barrier-constrained reconstruction, projector comparison, metric
// evaluation, viewpoint estimation, and the adversarial-optimality check.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "voxrec/voxrec.hpp"

namespace {

using namespace voxrec;

/// Parses "cam1.json:mask1.pgm,cam2.json:mask2.pgm,...".
ViewSet parse_views(const std::string& spec) {
    ViewSet views;
    std::size_t start = 0;
    while (start < spec.size()) {
        std::size_t comma = spec.find(',', start);
        if (comma == std::string::npos) comma = spec.size();
        const std::string pair = spec.substr(start, comma - start);
        const std::size_t colon = pair.find(':');
        if (colon == std::string::npos)
            throw std::runtime_error("malformed view pair (expected cam.json:mask.pgm): " + pair);
        Camera cam = read_camera_json(pair.substr(0, colon));
        MaskImage mask = read_pgm(pair.substr(colon + 1));
        views.push_back({std::move(cam), std::move(mask)});
        start = comma + 1;
    }
    validate_views(views);
    return views;
}

std::vector<int> parse_int_list(const std::string& spec) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start < spec.size()) {
        std::size_t comma = spec.find(',', start);
        if (comma == std::string::npos) comma = spec.size();
        out.push_back(std::stoi(spec.substr(start, comma - start)));
        start = comma + 1;
    }
    if (out.empty()) throw std::runtime_error("empty sample list");
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"voxel reconstruction from silhouettes"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a shape, camera ring, and masks");
    std::string gen_shape_name = "cup", gen_out;
    DatasetParams gen_params;
    gen->add_option("--shape", gen_shape_name, "box|cup|thin_plate|chair_l");
    gen->add_option("--n", gen_params.n, "grid resolution");
    gen->add_option("--views", gen_params.views, "number of ring cameras");
    gen->add_option("--seed", gen_params.seed, "shape parameter seed");
    gen->add_option("--out", gen_out, "output directory")->required();

    // project
    auto* project = app.add_subcommand("project", "render a voxel file to a mask");
    std::string prj_voxels, prj_camera, prj_method = "rp", prj_out;
    int prj_samples = 16;
    project->add_option("--voxels", prj_voxels)->required();
    project->add_option("--camera", prj_camera)->required();
    project->add_option("--method", prj_method, "rp|gs");
    project->add_option("--depth-samples", prj_samples, "gs depth samples");
    project->add_option("--out", prj_out, "output PGM")->required();

    // carve
    auto* carve_cmd = app.add_subcommand("carve", "visual hull from view pairs");
    std::string carve_out, carve_views;
    int carve_n = 32;
    carve_cmd->add_option("--out", carve_out)->required();
    carve_cmd->add_option("--n", carve_n, "grid resolution");
    carve_cmd->add_option("--views", carve_views, "cam1.json:mask1.pgm,...")->required();

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct", "optimize voxel logits against masks");
    std::string rec_views, rec_pool, rec_out, rec_log;
    SolverConfig rec_cfg;
    BarrierConfig rec_bcfg;
    int rec_n = 0;
    bool rec_no_barrier = false;
    rec_cfg.iterations = 2000;
    rec->add_option("--views", rec_views, "cam1.json:mask1.pgm,...")->required();
    rec->add_option("--pool", rec_pool, "directory of .vox shapes");
    rec->add_option("--iters", rec_cfg.iterations);
    rec->add_option("--t", rec_bcfg.t, "barrier sharpness");
    rec->add_option("--seed", rec_cfg.seed);
    rec->add_option("--out", rec_out)->required();
    rec->add_option("--log", rec_log, "training log CSV");
    rec->add_option("--n", rec_n, "grid resolution (default: from pool, else 32)");
    rec->add_flag("--no-barrier", rec_no_barrier, "silhouette loss only");

    // compare-projectors
    auto* cmp = app.add_subcommand("compare-projectors", "raytraced vs sampled projection");
    std::string cmp_voxels, cmp_camera, cmp_samples = "8,16,32,64,128", cmp_report;
    cmp->add_option("--voxels", cmp_voxels)->required();
    cmp->add_option("--camera", cmp_camera)->required();
    cmp->add_option("--samples", cmp_samples, "comma-separated depth sample counts");
    cmp->add_option("--report", cmp_report, "output report path")->required();

    // theory-check
    auto* theory_cmd = app.add_subcommand("theory-check", "adversarial optimality oracle");
    int th_categories = 3, th_outcomes = 8, th_trials = 1000;
    std::uint64_t th_seed = 0;
    theory_cmd->add_option("--categories", th_categories);
    theory_cmd->add_option("--outcomes", th_outcomes);
    theory_cmd->add_option("--trials", th_trials);
    theory_cmd->add_option("--seed", th_seed);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "IOU and AP of a prediction");
    std::string eval_pred, eval_gt;
    double eval_tau = 0.4;
    eval_cmd->add_option("--pred", eval_pred)->required();
    eval_cmd->add_option("--gt", eval_gt)->required();
    eval_cmd->add_option("--tau", eval_tau);

    // estimate-viewpoint
    auto* vp = app.add_subcommand("estimate-viewpoint", "discretized pose search");
    std::string vp_mask, vp_reference;
    int vp_bins = 10;
    vp->add_option("--mask", vp_mask)->required();
    vp->add_option("--reference", vp_reference)->required();
    vp->add_option("--bins", vp_bins);

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        gen_params.kind = shape_kind_from_string(gen_shape_name);
        gen_data(gen_params, gen_out);
        std::printf("wrote dataset to %s\n", gen_out.c_str());
        return 0;
    }

    if (project->parsed()) {
        const VoxelGrid grid = read_voxf(prj_voxels);
        const Camera cam = read_camera_json(prj_camera);
        MaskImage mask;
        if (prj_method == "rp") {
            mask = rp_forward(grid, cam);
        } else if (prj_method == "gs") {
            mask = gs_forward(grid, cam, prj_samples);
        } else {
            throw std::runtime_error("unknown projection method: " + prj_method);
        }
        write_pgm(prj_out, mask);
        std::printf("wrote %s\n", prj_out.c_str());
        return 0;
    }

    if (carve_cmd->parsed()) {
        const ViewSet views = parse_views(carve_views);
        const VoxelGrid hull = carve(GridGeometry{carve_n, -0.5, 0.5}, views);
        write_voxf(carve_out, hull);
        std::printf("wrote %s\n", carve_out.c_str());
        return 0;
    }

    if (rec->parsed()) {
        const ViewSet views = parse_views(rec_views);
        std::vector<VoxelGrid> pool;
        if (!rec_pool.empty()) pool = read_pool(rec_pool);
        if (!rec_no_barrier && pool.empty())
            throw std::runtime_error("reconstruct: --pool is required unless --no-barrier is set");
        int n = rec_n;
        if (n == 0) n = pool.empty() ? 32 : pool.front().n();
        if (!pool.empty() && n != pool.front().n())
            throw std::runtime_error("reconstruct: --n conflicts with pool resolution");
        const GridGeometry geom = pool.empty() ? GridGeometry{n, -0.5, 0.5}
                                               : pool.front().geometry();
        const ReconResult result =
            rec_no_barrier ? reconstruct_unconstrained(views, rec_cfg, geom)
                           : reconstruct(views, pool, rec_cfg, rec_bcfg, geom);
        write_voxf(rec_out, result.grid);
        if (!rec_log.empty()) write_training_log(rec_log, result.log);
        std::printf("wrote %s\n", rec_out.c_str());
        return 0;
    }

    if (cmp->parsed()) {
        const VoxelGrid grid = read_voxf(cmp_voxels);
        const Camera cam = read_camera_json(cmp_camera);
        const MaskImage reference = rp_forward(grid, cam);
        std::size_t ref_fg = 0;
        for (double v : reference.values()) ref_fg += v >= 0.5;
        auto out = std::ofstream(cmp_report);
        if (!out) throw std::runtime_error("cannot open for writing: " + cmp_report);
        out << "reference=rp foreground_pixels=" << ref_fg << "\n";
        for (int d : parse_int_list(cmp_samples)) {
            const MaskImage gs = gs_forward(grid, cam, d);
            const double ap = average_precision(gs.values(), reference.values());
            std::size_t detected = 0;
            for (std::size_t k = 0; k < gs.size(); ++k)
                detected += gs[k] > 0.0 && reference[k] >= 0.5;
            const double recall =
                ref_fg == 0 ? 1.0 : static_cast<double>(detected) / static_cast<double>(ref_fg);
            char line[128];
            std::snprintf(line, sizeof(line), "gs samples=%d ap=%.6f nonzero_recall=%.6f\n", d,
                          ap, recall);
            out << line;
        }
        std::printf("wrote %s\n", cmp_report.c_str());
        return 0;
    }

    if (theory_cmd->parsed()) {
        using namespace voxrec::theory;
        Rng rng(th_seed);
        const JointDist p = JointDist::random(th_categories, th_outcomes, rng);
        const DiscreteDist q_c = DiscreteDist::random(th_categories, rng);
        const GlobalMinReport report = verify_global_min(p, q_c, th_trials, rng);
        for (std::size_t k = 0; k < report.trials.size(); ++k)
            std::printf("trial=%zu gap=%.12g cond_l1=%.3g\n", k, report.trials[k].gap,
                        report.trials[k].max_cond_l1);
        std::printf("bound=%.12g\n", report.bound);
        std::printf("min_gap=%.12g\n", report.min_gap);
        std::printf("violations=%d\n", report.bound_violations + report.equality_mismatches);
        std::printf("%s\n", report.pass() ? "PASS" : "FAIL");
        return report.pass() ? 0 : 2;
    }

    if (eval_cmd->parsed()) {
        const VoxelGrid pred = read_voxf(eval_pred);
        const VoxelGrid gt = read_voxf(eval_gt);
        std::printf("iou=%.6f ap=%.6f\n", iou(pred, gt, eval_tau), average_precision(pred, gt));
        return 0;
    }

    if (vp->parsed()) {
        const MaskImage mask = read_pgm(vp_mask);
        const VoxelGrid reference = read_voxf(vp_reference);
        ViewpointSearch search;
        search.bins = vp_bins;
        search.intrinsics.width = mask.width();
        search.intrinsics.height = mask.height();
        search.intrinsics.cx = mask.width() / 2.0;
        search.intrinsics.cy = mask.height() / 2.0;
        const ViewpointEstimate est = estimate_viewpoint(mask, reference, search);
        std::printf("az_bin=%d el_bin=%d depth_bin=%d azimuth=%.6f elevation=%.6f depth=%.6f score=%.6f\n",
                    est.az_bin, est.el_bin, est.depth_bin, est.azimuth, est.elevation, est.depth,
                    est.score);
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
