// nigmix: generate synthetic NIG mixtures, fit them, score fits and run the
// benchmark grid.
//
// Exit codes: 0 success, 2 validation error, 3 numerical breakdown, 4 I/O.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cli_io.hpp"
#include "nigmix/nigmix.hpp"

namespace fs = std::filesystem;
using namespace nigmix;
using namespace nigmix::cli;

namespace {

enum ExitCode { ok = 0, validation = 2, numerical = 3, io = 4 };

std::size_t default_threads() {
    if (const char* env = std::getenv("NIGMIX_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<std::size_t>(v);
        } catch (...) {
        }
    }
    return 1;
}

void add_prior_flags(CLI::App* cmd, PriorConfig& p, std::optional<double>& nu_tau) {
    cmd->add_option("--eta-mu", p.eta_mu, "centre spread relative to the data spread")->capture_default_str();
    cmd->add_option("--eta-tau", p.eta_tau, "cluster size relative to the data spread")->capture_default_str();
    cmd->add_option("--eta-beta", p.eta_beta, "bias size relative to the cluster size")->capture_default_str();
    cmd->add_option("--xi", p.xi, "centre/bias correlation")->capture_default_str();
    cmd->add_option("--lambda0", p.lambda0, "prior mean of lambda")->capture_default_str();
    cmd->add_option("--nu-lambda", p.nu_lambda, "prior confidence in lambda0")->capture_default_str();
    cmd->add_option("--nu-tau", nu_tau, "Wishart prior dof (default D + 1)");
    cmd->add_option("--l0", p.l0, "weight prior l0")->capture_default_str();
    cmd->add_option("--r0", p.r0, "stick prior r0 (dpm)")->capture_default_str();
}

void add_fit_flags(CLI::App* cmd, FitConfig& f, std::string& variant, std::string& concentration) {
    cmd->add_option("--variant", variant, "gam, invg, trun or gmm")->capture_default_str();
    cmd->add_option("--concentration", concentration, "dd or dpm")->capture_default_str();
    cmd->add_option("--m0", f.m0, "initial cluster count")->capture_default_str();
    cmd->add_option("--eps-z", f.eps_z, "prune clusters whose expected size falls below this")->capture_default_str();
    cmd->add_option("--eps-dl", f.eps_dl_coeff, "stop when |dL| < eps-dl * N ...")->capture_default_str();
    cmd->add_option("--patience", f.patience, "... this many times in a row")->capture_default_str();
    cmd->add_option("--max-iter", f.max_iter, "iteration cap")->capture_default_str();
    cmd->add_flag("--literal-lambda-update", f.literal_lambda_update,
                  "use the alternative lambda update (for comparison only)");
}

void add_gen_flags(CLI::App* cmd, GenConfig& g, std::string& population) {
    cmd->add_option("--clusters", g.clusters, "number of clusters M")->capture_default_str();
    cmd->add_option("--dim", g.dim, "dimension D")->capture_default_str();
    cmd->add_option("--points", g.points, "number of points N")->capture_default_str();
    cmd->add_option("--sigma", g.sigma, "cluster scale")->capture_default_str();
    cmd->add_option("--population", population, "uniform or nonuniform")->capture_default_str();
}

json summary_json(const FitResult& r) {
    json clusters = json::array();
    for (const ClusterSummary& c : r.clusters) {
        json j;
        j["weight"] = c.weight;
        j["center"] = to_json(c.center);
        j["bias"] = to_json(c.bias);
        j["mean"] = to_json(c.mean);
        j["precision"] = to_json(c.precision);
        j["lambda"] = number_or_string(c.lambda);
        clusters.push_back(std::move(j));
    }
    return clusters;
}

int cmd_generate(const GenConfig& gen, const fs::path& out) {
    const LabeledDataset ds = generate(gen);
    RunManifest m;
    m.command = "generate";
    m.gen = gen;
    m.seeds = {gen.seed};
    m.outputs = {"data.csv", "labels.csv", "truth.json", "manifest.json"};
    write_text(out / "data.csv", matrix_csv(ds.data));
    write_text(out / "labels.csv", labels_csv(ds.labels));
    json truth;
    truth["manifest"] = manifest_to_json(m);
    truth["counts"] = ds.counts;
    json params = json::array();
    for (const NigParams& p : ds.true_params) params.push_back(nig_params_to_json(p));
    truth["params"] = params;
    truth["labels"] = ds.labels;
    write_json(out / "truth.json", truth);
    write_json(out / "manifest.json", manifest_to_json(m));
    std::cout << "wrote " << ds.data.rows() << " points in " << gen.clusters << " clusters to " << out.string()
              << "\n";
    return ok;
}

int cmd_fit(const fs::path& data_path, const PriorConfig& prior, const FitConfig& fc, std::size_t restarts,
            const std::optional<fs::path>& truth_path, std::size_t threads, bool timing, const fs::path& out) {
    if (restarts < 1) throw ValidationError("--restarts must be at least 1");
    const ObservationSet data = ObservationSet::from_matrix(read_matrix_csv(data_path));
    std::optional<std::vector<int>> truth;
    if (truth_path) {
        truth = read_labels_csv(*truth_path);
        if (truth->size() != data.size()) throw ValidationError("truth labels and data differ in length");
    }
    const std::string dataset = data_path.stem().string();
    const auto runs = fit_restarts(data, prior, fc, restarts, truth ? &*truth : nullptr, dataset, threads, timing);
    const std::size_t best = best_restart(runs);
    if (!runs[best].result) throw NumericalBreakdown("every restart failed; first error: " + runs[0].error);
    const FitResult& r = *runs[best].result;

    RunManifest m;
    m.command = "fit";
    m.prior = prior;
    m.fit = fc;
    for (const auto& run : runs) m.seeds.push_back(run.record.seed);
    m.inputs = {data_path.filename().string()};
    if (truth_path) m.inputs.push_back(truth_path->filename().string());
    m.outputs = {"result.json", "runs.csv", "manifest.json"};
    m.extra["restarts"] = restarts;

    json res;
    res["manifest"] = manifest_to_json(m);
    res["best_restart"] = best;
    res["seed"] = runs[best].record.seed;
    res["n_clusters"] = r.n_clusters;
    res["converged"] = r.converged;
    res["iterations"] = r.iterations;
    res["elbo"] = r.final_elbo();
    res["elbo_trace"] = r.elbo_trace;
    res["prune_iterations"] = r.prune_iterations;
    if (truth) res["ari"] = runs[best].record.ari;
    res["clusters"] = summary_json(r);
    res["labels"] = r.labels;
    write_json(out / "result.json", res);
    write_text(out / "runs.csv", runs_csv(runs, best));
    write_json(out / "manifest.json", manifest_to_json(m));
    std::cout << "best restart " << best << " (seed " << runs[best].record.seed << "): " << r.n_clusters
              << " clusters, ELBO " << format_double(r.final_elbo()) << "\n";
    return ok;
}

std::vector<int> labels_from(const json& j, const std::string& what) {
    if (!j.contains("labels")) throw ValidationError(what + " has no labels");
    return j.at("labels").get<std::vector<int>>();
}

int cmd_eval(const fs::path& result_path, const fs::path& truth_path, const fs::path& out) {
    const json result = read_json(result_path);
    const json truth = read_json(truth_path);
    const std::vector<int> fitted = labels_from(result, result_path.string());
    const std::vector<int> expected = labels_from(truth, truth_path.string());
    if (fitted.size() != expected.size()) throw ValidationError("result and truth label counts differ");
    int true_clusters = 0;
    for (int l : expected) true_clusters = std::max(true_clusters, l + 1);

    RunManifest m;
    m.command = "eval";
    m.inputs = {result_path.filename().string(), truth_path.filename().string()};
    m.outputs = {"eval.json"};
    json e;
    e["manifest"] = manifest_to_json(m);
    e["ari"] = adjusted_rand_index(fitted, expected);
    e["n_clusters"] = result.at("n_clusters");
    e["true_clusters"] = true_clusters;
    e["cluster_error"] = result.at("n_clusters").get<long>() - true_clusters;
    write_json(out / "eval.json", e);
    std::cout << "ARI " << format_double(e["ari"].get<double>()) << ", clusters " << e["n_clusters"].dump() << " vs "
              << true_clusters << "\n";
    return ok;
}

int cmd_bench(BenchGrid grid, const std::vector<std::string>& variants, const std::vector<std::string>& concs,
              std::size_t threads, bool timing, const fs::path& out) {
    grid.variants.clear();
    for (const auto& v : variants) grid.variants.push_back(parse_variant(v));
    grid.concentrations.clear();
    for (const auto& c : concs) grid.concentrations.push_back(parse_concentration(c));
    if (grid.variants.empty() || grid.concentrations.empty() || grid.lambda_stars.empty() ||
        grid.sigma_betas.empty() || grid.datasets < 1 || grid.restarts < 1) {
        throw ValidationError("bench grid is empty");
    }
    const auto rows = run_bench(grid, threads, timing);

    RunManifest m;
    m.command = "bench";
    m.prior = grid.prior;
    m.fit = grid.fit;
    m.gen = grid.gen;
    m.seeds = {grid.gen.seed, grid.fit.seed};
    m.outputs = {"bench.csv", "manifest.json"};
    m.extra["lambda_stars"] = grid.lambda_stars;
    m.extra["sigma_betas"] = grid.sigma_betas;
    m.extra["variants"] = variants;
    m.extra["concentrations"] = concs;
    m.extra["datasets"] = grid.datasets;
    m.extra["restarts"] = grid.restarts;
    write_text(out / "bench.csv", bench_csv(rows));
    write_json(out / "manifest.json", manifest_to_json(m));
    std::cout << "wrote " << rows.size() << " runs to " << (out / "bench.csv").string() << "\n";
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variational clustering with mixtures of normal inverse Gaussian distributions"};
    app.set_config("--config", "", "TOML/INI file with the same keys as the flags; flags take precedence");
    app.set_version_flag("--version", tool_version);
    app.require_subcommand(1);

    std::size_t threads = default_threads();
    bool timing = false;
    fs::path out = ".";

    const auto common = [&](CLI::App* cmd) {
        cmd->add_option("--threads", threads, "worker threads (default $NIGMIX_THREADS or 1)");
        cmd->add_flag("--timing", timing, "record wall-clock time per run (outputs then differ between runs)");
        cmd->add_option("--out", out, "output directory")->capture_default_str();
    };

    GenConfig gen;
    std::string population = "uniform";
    auto* generate_cmd = app.add_subcommand("generate", "draw a synthetic NIG mixture");
    add_gen_flags(generate_cmd, gen, population);
    generate_cmd->add_option("--sigma-beta", gen.sigma_beta, "bias scale")->capture_default_str();
    generate_cmd->add_option("--lambda-star", gen.lambda_star, "normality level")->capture_default_str();
    generate_cmd->add_option("--seed", gen.seed, "random seed")->capture_default_str();
    common(generate_cmd);

    PriorConfig prior;
    std::optional<double> nu_tau;
    FitConfig fc;
    std::string variant = "invg";
    std::string concentration = "dd";
    std::size_t restarts = 10;
    fs::path data_path;
    std::optional<fs::path> truth_path;
    auto* fit_cmd = app.add_subcommand("fit", "fit a mixture to a CSV data file");
    fit_cmd->add_option("data", data_path, "data CSV with a header row")->required();
    add_fit_flags(fit_cmd, fc, variant, concentration);
    add_prior_flags(fit_cmd, prior, nu_tau);
    fit_cmd->add_option("--restarts", restarts, "number of restarts with seeds seed, seed + 1, ...")
        ->capture_default_str();
    fit_cmd->add_option("--seed", fc.seed, "first restart seed")->capture_default_str();
    fit_cmd->add_option("--truth", truth_path, "labels CSV; adds ARI to the run table");
    common(fit_cmd);

    fs::path result_path;
    fs::path eval_truth;
    auto* eval_cmd = app.add_subcommand("eval", "score a fit against the generating labels");
    eval_cmd->add_option("result", result_path, "result.json from fit")->required();
    eval_cmd->add_option("truth", eval_truth, "truth.json from generate")->required();
    common(eval_cmd);

    BenchGrid grid;
    std::string bench_population = "uniform";
    std::optional<double> bench_nu_tau;
    std::vector<std::string> bench_variants{"gmm", "trun", "gam", "invg"};
    std::vector<std::string> bench_concs{"dd", "dpm"};
    auto* bench_cmd = app.add_subcommand("bench", "run the synthetic benchmark grid");
    add_gen_flags(bench_cmd, grid.gen, bench_population);
    add_prior_flags(bench_cmd, grid.prior, bench_nu_tau);
    bench_cmd->add_option("--lambda-stars", grid.lambda_stars, "normality levels")->capture_default_str();
    bench_cmd->add_option("--sigma-betas", grid.sigma_betas, "bias scales")->capture_default_str();
    bench_cmd->add_option("--variants", bench_variants, "variants to run")->capture_default_str();
    bench_cmd->add_option("--concentrations", bench_concs, "weight models to run")->capture_default_str();
    bench_cmd->add_option("--datasets", grid.datasets, "datasets per grid cell")->capture_default_str();
    bench_cmd->add_option("--restarts", grid.restarts, "restarts per dataset and method")->capture_default_str();
    bench_cmd->add_option("--seed", grid.gen.seed, "first dataset seed")->capture_default_str();
    bench_cmd->add_option("--fit-seed", grid.fit.seed, "first restart seed")->capture_default_str();
    bench_cmd->add_option("--m0", grid.fit.m0, "initial cluster count")->capture_default_str();
    bench_cmd->add_option("--eps-z", grid.fit.eps_z, "prune threshold")->capture_default_str();
    bench_cmd->add_option("--eps-dl", grid.fit.eps_dl_coeff, "convergence coefficient")->capture_default_str();
    bench_cmd->add_option("--patience", grid.fit.patience, "consecutive small changes")->capture_default_str();
    bench_cmd->add_option("--max-iter", grid.fit.max_iter, "iteration cap")->capture_default_str();
    common(bench_cmd);

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? ok : validation;
        }
        if (threads < 1) throw ValidationError("--threads must be at least 1");
        if (generate_cmd->parsed()) {
            gen.population = parse_population(population);
            return cmd_generate(gen, out);
        }
        if (fit_cmd->parsed()) {
            prior.nu_tau = nu_tau;
            fc.variant = parse_variant(variant);
            fc.concentration = parse_concentration(concentration);
            return cmd_fit(data_path, prior, fc, restarts, truth_path, threads, timing, out);
        }
        if (eval_cmd->parsed()) return cmd_eval(result_path, eval_truth, out);
        if (bench_cmd->parsed()) {
            grid.gen.population = parse_population(bench_population);
            grid.prior.nu_tau = bench_nu_tau;
            return cmd_bench(grid, bench_variants, bench_concs, threads, timing, out);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return validation;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return validation;
    } catch (const NumericalBreakdown& e) {
        std::cerr << "numerical breakdown: " << e.what() << "\n";
        return numerical;
    } catch (const DegenerateFit& e) {
        std::cerr << "numerical breakdown: " << e.what() << "\n";
        return numerical;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return io;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed JSON input: " << e.what() << "\n";
        return validation;
    }
    return ok;
}
