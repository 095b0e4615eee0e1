// Command-line driver: dataset generation, penalized fits, oracle
// evaluation, and the simulation studies, all reproducible by seed.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mcmargin/mcmargin.hpp"

namespace {

using namespace mcmargin;

// ---- option bundles --------------------------------------------------------

struct ExArgs {
    std::string example;
    double theta1 = 0.75;
    double theta2 = 0.125;
    double gamma = 0.0;
    double theta = 0.85;
    int m = 1;
    double tau = 0.8;
    int p = 1;
};

void add_example_opts(CLI::App* cmd, ExArgs& ex) {
    cmd->add_option("--example", ex.example, "world: ex51, ex52, ex53, ex54")->required();
    cmd->add_option("--theta1", ex.theta1, "ex51: P(Y=1 | x > 0)")->capture_default_str();
    cmd->add_option("--theta2", ex.theta2, "ex51: P(Y=1 | x <= 0)")->capture_default_str();
    cmd->add_option("--gamma", ex.gamma, "ex51/ex52: density exponent")->capture_default_str();
    cmd->add_option("--theta", ex.theta, "ex52: majority-class probability")->capture_default_str();
    cmd->add_option("--m", ex.m, "ex53: spline smoothness order")->capture_default_str();
    cmd->add_option("--tau", ex.tau, "ex54: P(Y=1 | x1 > 0)")->capture_default_str();
    cmd->add_option("--p", ex.p, "ex54: feature dimension")->capture_default_str();
}

ExampleSpec build_spec(const ExArgs& ex) {
    ExampleSpec spec;
    if (ex.example == "ex51") spec = Ex51{ex.theta1, ex.theta2, ex.gamma};
    else if (ex.example == "ex52") spec = Ex52{ex.theta, ex.gamma};
    else if (ex.example == "ex53") spec = Ex53{ex.m};
    else if (ex.example == "ex54") spec = Ex54{ex.tau, ex.p};
    else throw usage_error("unknown example: " + ex.example);
    validate_spec(spec);
    return spec;
}

struct FitArgs {
    std::string loss = "logit";
    std::string penalty = "sql2";
    std::string kernel;  // empty: linear for ex51/ex52/ex54, spline for ex53
    std::string config_path;
    double theta = 0.5;
    double lambda = 1e-3;
    int max_iters = 20000;
    int stages = 14;
    int dc_max_outer = 20;
    double rel_tol = 1e-6;
    double step0 = 1.0;
    bool no_intercept = false;
};

void add_fit_opts(CLI::App* cmd, FitArgs& fa) {
    cmd->add_option("--loss", fa.loss,
                    "loss: logit svm1 svm2 svm3 psi l2min exp blogit hinge bpsi")
        ->capture_default_str();
    cmd->add_option("--penalty", fa.penalty, "penalty: sql2 l1 elasticnet rkhs")
        ->capture_default_str();
    cmd->add_option("--en-theta", fa.theta, "elastic-net l1 weight")->capture_default_str();
    cmd->add_option("--lambda", fa.lambda, "penalty weight")->capture_default_str();
    cmd->add_option("--kernel", fa.kernel,
                    "kernel: linear, spline_w1, spline_w2 (default: spline_w<m> for ex53, "
                    "linear otherwise)");
    cmd->add_option("--config", fa.config_path, "key/value fit-config file; flags override");
    cmd->add_option("--max-iters", fa.max_iters, "descent iteration budget")->capture_default_str();
    cmd->add_option("--stages", fa.stages, "step-halving stages")->capture_default_str();
    cmd->add_option("--dc-max-outer", fa.dc_max_outer, "outer rounds for psi losses")
        ->capture_default_str();
    cmd->add_option("--rel-tol", fa.rel_tol, "relative stopping tolerance")->capture_default_str();
    cmd->add_option("--step0", fa.step0, "initial step size")->capture_default_str();
    cmd->add_flag("--no-intercept", fa.no_intercept, "fit without intercepts");
}

// Kernel choice: explicit flag wins; ex53 defaults to its own spline order.
std::optional<KernelId> resolve_kernel(const FitArgs& fa, const ExampleSpec& spec) {
    if (!fa.kernel.empty()) {
        KernelId id = parse_kernel(fa.kernel);
        return id == KernelId::Linear ? std::nullopt : std::optional<KernelId>(id);
    }
    if (const auto* e = std::get_if<Ex53>(&spec)) {
        if (e->m > 2) throw usage_error("no spline kernel implemented for m > 2");
        return e->m == 1 ? KernelId::SplineW1 : KernelId::SplineW2;
    }
    return std::nullopt;
}

FitConfig resolve_fit_config(const CLI::App* cmd, const FitArgs& fa, bool kernel_fit) {
    FitConfig cfg;
    if (!fa.config_path.empty()) {
        std::ifstream in(fa.config_path);
        if (!in) throw usage_error("cannot open config file: " + fa.config_path);
        cfg = parse_fit_config(in);
    }
    auto given = [&](const char* name) { return cmd->count(name) > 0; };
    if (fa.config_path.empty() || given("--loss")) cfg.loss = parse_loss(fa.loss);
    if (fa.config_path.empty() || given("--penalty")) cfg.penalty.id = parse_penalty(fa.penalty);
    if (given("--en-theta")) cfg.penalty.theta = fa.theta;
    if (fa.config_path.empty() || given("--lambda")) cfg.lambda = fa.lambda;
    if (fa.config_path.empty() || given("--max-iters")) cfg.max_iters = fa.max_iters;
    if (fa.config_path.empty() || given("--stages")) cfg.stages = fa.stages;
    if (fa.config_path.empty() || given("--dc-max-outer")) cfg.dc_max_outer = fa.dc_max_outer;
    if (fa.config_path.empty() || given("--rel-tol")) cfg.rel_tol = fa.rel_tol;
    if (fa.config_path.empty() || given("--step0")) cfg.step0 = fa.step0;
    if (given("--no-intercept")) cfg.intercept = !fa.no_intercept;
    if (kernel_fit && cmd->count("--penalty") == 0) cfg.penalty.id = PenaltyId::RkhsSeminorm;
    return cfg;
}

// ---- grids ------------------------------------------------------------------

// start:stop:step, inclusive of both ends within half a step; or a comma list.
std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        double a = 0, b = 0, c = 0;
        char c1 = 0, c2 = 0;
        std::istringstream ss(s);
        if (!(ss >> a >> c1 >> b >> c2 >> c) || c1 != ':' || c2 != ':' || (ss >> c1))
            throw usage_error("bad grid (want start:stop:step): " + s);
        if (c == 0.0) throw usage_error("grid step must be nonzero: " + s);
        double steps = (b - a) / c;
        if (steps < -0.5) throw usage_error("grid step points away from stop: " + s);
        int m = static_cast<int>(std::floor(steps + 0.5 + 1e-12));
        if (m > 1000000) throw usage_error("grid too large: " + s);
        for (int i = 0; i <= m; ++i) out.push_back(a + i * c);
        return out;
    }
    std::istringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell.empty()) throw usage_error("bad grid list: " + s);
        out.push_back(std::stod(cell));
    }
    if (out.empty()) throw usage_error("empty grid: " + s);
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::istringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell.empty()) throw usage_error("bad integer list: " + s);
        out.push_back(std::stoi(cell));
    }
    if (out.empty()) throw usage_error("empty integer list: " + s);
    return out;
}

// ---- output helpers ---------------------------------------------------------

std::string meta_line(std::uint64_t seed, const std::string& generator, const std::string& spec) {
    return "seed=" + std::to_string(seed) + " generator=" + generator + " spec=" + spec +
           " defaults=v1";
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    return os;
}

std::string generator_family(const ExampleSpec& spec) {
    if (std::holds_alternative<Ex51>(spec)) return "ex51";
    if (std::holds_alternative<Ex52>(spec)) return "ex52";
    if (std::holds_alternative<Ex53>(spec)) return "ex53";
    return "ex54";
}

// ---- verbs ------------------------------------------------------------------

int run_gen(const ExArgs& ex, int n, std::uint64_t seed, const std::string& out) {
    ExampleSpec spec = build_spec(ex);
    if (n < 1) throw usage_error("gen: need --n >= 1");
    GeneratorHandle gen = make_generator(spec, seed);
    Dataset ds = sample(gen, n);
    auto os = open_out(out);
    write_dataset_csv(os, ds, meta_line(seed, generator_family(spec), spec_string(spec)));
    return 0;
}

int run_fit(const CLI::App* cmd, const ExArgs& ex, const FitArgs& fa, int n, std::uint64_t seed,
            long long mc_draws, const std::string& out) {
    ExampleSpec spec = build_spec(ex);
    if (n < 1) throw usage_error("fit: need --n >= 1");
    std::optional<KernelId> kid = resolve_kernel(fa, spec);
    FitConfig cfg = resolve_fit_config(cmd, fa, kid.has_value());
    GeneratorHandle gen = make_generator(spec, seed);
    Dataset ds = sample(gen, n);
    FitReport fr = kid ? fit_kernel(ds, cfg, *kid) : fit_linear(ds, cfg);

    auto os = open_out(out);
    write_model(os, fr.decision, meta_line(seed, generator_family(spec), spec_string(spec)));

    OracleOpts oo;
    oo.mc_draws = mc_draws;
    GeValue ge = generalization_error(spec, fr.decision, oo);
    std::cout << "objective " << fmt17(fr.objective) << '\n';
    std::cout << "oracle_ge " << fmt17(ge.value) << " se " << fmt17(ge.se) << '\n';
    return 0;
}

int run_eval(const ExArgs& ex, const std::string& model_path, long long mc_draws) {
    ExampleSpec spec = build_spec(ex);
    std::ifstream in(model_path);
    if (!in) throw usage_error("cannot open model file: " + model_path);
    ModelDoc doc = read_model(in);
    OracleOpts oo;
    oo.mc_draws = mc_draws;
    GeValue ge = generalization_error(spec, doc.decision, oo);
    std::cout << "# " << meta_line(oo.mc_seed, "oracle", spec_string(spec)) << '\n';
    std::cout << "oracle_ge " << fmt17(ge.value) << " se " << fmt17(ge.se) << '\n';
    return 0;
}

int run_fig1(double theta1, double gamma, const std::string& grid, const std::string& out) {
    std::vector<double> t2 = parse_grid(grid);
    auto rows = fig1_study(theta1, gamma, t2);
    auto os = open_out(out);
    os << "# "
       << meta_line(0, "oracle",
                    "ex51(theta1=" + fmt17(theta1) + ",gamma=" + fmt17(gamma) + ")")
       << '\n';
    os << "theta2,e_v1,e_v2,e_v3,e_v4\n";
    for (const Fig1Row& r : rows)
        os << fmt17(r.theta2) << ',' << fmt17(r.e_v1) << ',' << fmt17(r.e_v2) << ','
           << fmt17(r.e_v3) << ',' << fmt17(r.e_v4) << '\n';
    return 0;
}

int run_rate(const CLI::App* cmd, const ExArgs& ex, const FitArgs& fa, const std::string& ngrid,
             int reps, std::uint64_t seed, double lambda0, long long mc_draws, int jobs,
             const std::string& out) {
    if (jobs < 1) throw usage_error("rate: need --jobs >= 1");
    ExampleSpec spec = build_spec(ex);
    RateOptions ro;
    ro.kernel = resolve_kernel(fa, spec);
    ro.fit = resolve_fit_config(cmd, fa, ro.kernel.has_value());
    ro.n_grid = parse_int_list(ngrid);
    ro.reps = reps;
    ro.seed = seed;
    ro.lambda0 = lambda0;
    ro.oracle.mc_draws = mc_draws;
    RateStudyResult rs = rate_study(spec, ro);

    auto os = open_out(out);
    os << "# " << meta_line(seed, generator_family(spec), spec_string(spec)) << '\n';
    os << "n,mean_regret,stderr_regret,reps_used,dropped\n";
    for (const RateRow& r : rs.rows)
        os << r.n << ',' << fmt17(r.mean_regret) << ',' << fmt17(r.stderr_regret) << ','
           << r.reps_used << ',' << (r.dropped ? 1 : 0) << '\n';
    os << "# slope=" << fmt17(rs.slope.slope) << " slope_se=" << fmt17(rs.slope.se)
       << " intercept=" << fmt17(rs.slope.intercept) << '\n';
    std::cout << "slope " << fmt17(rs.slope.slope) << " se " << fmt17(rs.slope.se) << '\n';
    return 0;
}

int run_feature(const ExArgs& ex, const FitArgs& fa, int n, const std::string& lgrid,
                std::uint64_t seed, long long mc_draws, int jobs, const std::string& out) {
    if (jobs < 1) throw usage_error("feature: need --jobs >= 1");
    FeatureOptions fo;
    fo.tau = ex.tau;
    fo.p = ex.p;
    fo.n = n;
    fo.theta = fa.theta;
    fo.lambda_grid = parse_grid(lgrid);
    fo.seed = seed;
    fo.fit.max_iters = fa.max_iters;  // loss/penalty/lambda are set by the study
    fo.fit.stages = fa.stages;
    fo.oracle.mc_draws = mc_draws;
    FeatureStudyResult res = feature_study(fo);

    auto os = open_out(out);
    os << "# "
       << meta_line(seed, "ex54",
                    "ex54(tau=" + fmt17(fo.tau) + ",p=" + std::to_string(fo.p) + ")")
       << '\n';
    os << "# lambda=" << fmt17(res.lambda_chosen) << " val_error=" << fmt17(res.val_error)
       << " test_ge=" << fmt17(res.test_ge) << " test_ge_se=" << fmt17(res.test_ge_se)
       << " degenerate=" << (res.degenerate ? 1 : 0) << '\n';
    os << "rank,index,weight\n";
    for (size_t i = 0; i < res.ranked.size(); ++i)
        os << (i + 1) << ',' << res.ranked[i].index << ',' << fmt17(res.ranked[i].weight) << '\n';
    std::cout << "lambda " << fmt17(res.lambda_chosen) << " test_ge " << fmt17(res.test_ge)
              << " top_index " << (res.ranked.empty() ? 0 : res.ranked[0].index) << '\n';
    return 0;
}

int run_root(double theta, const std::string& out) {
    double r = quartic_root(theta);
    auto q = [&](double x) {
        return 9.0 * (theta - 1.0) - 16.0 * (theta - 1.0) * x + 12.0 * (theta - 1.0) * x * x +
               (64.0 * theta - 4.0) * x * x * x * x;
    };
    std::cout << "# " << meta_line(0, "oracle", "quartic(theta=" + fmt17(theta) + ")") << '\n';
    std::cout << "root " << fmt17(r) << " residual " << fmt17(q(r)) << '\n';
    if (!out.empty()) {
        auto os = open_out(out);
        os << "# " << meta_line(0, "oracle", "quartic(theta=" + fmt17(theta) + ")") << '\n';
        os << "theta,root,residual\n";
        os << fmt17(theta) << ',' << fmt17(r) << ',' << fmt17(q(r)) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mcmargin: multi-class margin classification toolkit"};
    app.require_subcommand(1);

    ExArgs ex;
    FitArgs fa;
    int n = 200;
    int reps = 50;
    int jobs = 1;
    std::uint64_t seed = 1;
    double lambda0 = 1.0;
    long long mc_draws = 1'000'000;
    double theta1 = 0.75, gamma = 0.0, root_theta = 0.7;
    std::string out, model_path, theta2_grid, n_grid, lambda_grid;

    CLI::App* gen = app.add_subcommand("gen", "sample a dataset to CSV");
    add_example_opts(gen, ex);
    gen->add_option("--n", n, "sample size")->capture_default_str();
    gen->add_option("--seed", seed, "RNG seed")->capture_default_str();
    gen->add_option("--out", out, "output CSV path")->required();

    CLI::App* fit = app.add_subcommand("fit", "sample a training set, fit, write the model");
    add_example_opts(fit, ex);
    add_fit_opts(fit, fa);
    fit->add_option("--n", n, "sample size")->capture_default_str();
    fit->add_option("--seed", seed, "RNG seed")->capture_default_str();
    fit->add_option("--mc-draws", mc_draws, "oracle Monte Carlo draws")->capture_default_str();
    fit->add_option("--out", out, "output model path")->required();

    CLI::App* eval = app.add_subcommand("eval", "oracle generalization error of a saved model");
    add_example_opts(eval, ex);
    eval->add_option("--model", model_path, "model file from fit")->required();
    eval->add_option("--mc-draws", mc_draws, "oracle Monte Carlo draws")->capture_default_str();

    CLI::App* fig1 = app.add_subcommand("fig1", "ideal-performance regret curves");
    fig1->add_option("--theta1", theta1, "P(Y=1 | x > 0)")->capture_default_str();
    fig1->add_option("--gamma", gamma, "density exponent")->capture_default_str();
    fig1->add_option("--theta2", theta2_grid, "theta2 grid (start:stop:step or list)")
        ->required();
    fig1->add_option("--out", out, "output CSV path")->required();

    CLI::App* rate = app.add_subcommand("rate", "empirical convergence-rate study");
    add_example_opts(rate, ex);
    add_fit_opts(rate, fa);
    rate->add_option("--n-grid", n_grid, "sample sizes, comma separated")->required();
    rate->add_option("--reps", reps, "replications per sample size")->capture_default_str();
    rate->add_option("--seed", seed, "study seed")->capture_default_str();
    rate->add_option("--lambda0", lambda0, "penalty schedule lambda = lambda0/n")
        ->capture_default_str();
    rate->add_option("--mc-draws", mc_draws, "oracle Monte Carlo draws")->capture_default_str();
    rate->add_option("--jobs", jobs, "upper bound on parallel replications")
        ->capture_default_str();
    rate->add_option("--out", out, "output CSV path")->required();

    CLI::App* feat = app.add_subcommand("feature", "high-dimension feature-selection study");
    feat->add_option("--tau", ex.tau, "P(Y=1 | x1 > 0)")->capture_default_str();
    feat->add_option("--p", ex.p, "feature dimension")->capture_default_str();
    feat->add_option("--n", n, "train/validation sample size")->capture_default_str();
    feat->add_option("--en-theta", fa.theta, "elastic-net l1 weight")->capture_default_str();
    feat->add_option("--lambda-grid", lambda_grid, "penalty grid (start:stop:step or list)")
        ->required();
    feat->add_option("--seed", seed, "study seed")->capture_default_str();
    feat->add_option("--mc-draws", mc_draws, "oracle Monte Carlo draws")->capture_default_str();
    feat->add_option("--max-iters", fa.max_iters, "descent iteration budget")
        ->capture_default_str();
    feat->add_option("--stages", fa.stages, "step-halving stages")->capture_default_str();
    feat->add_option("--jobs", jobs, "upper bound on parallel replications")
        ->capture_default_str();
    feat->add_option("--out", out, "output CSV path")->required();

    CLI::App* root = app.add_subcommand("root", "negative stationarity-quartic root");
    root->add_option("--theta", root_theta, "majority-class probability")->capture_default_str();
    root->add_option("--out", out, "optional output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (gen->parsed()) return run_gen(ex, n, seed, out);
        if (fit->parsed()) return run_fit(fit, ex, fa, n, seed, mc_draws, out);
        if (eval->parsed()) return run_eval(ex, model_path, mc_draws);
        if (fig1->parsed()) return run_fig1(theta1, gamma, theta2_grid, out);
        if (rate->parsed()) return run_rate(rate, ex, fa, n_grid, reps, seed, lambda0, mc_draws,
                                            jobs, out);
        if (feat->parsed())
            return run_feature(ex, fa, n, lambda_grid, seed, mc_draws, jobs, out);
        if (root->parsed()) return run_root(root_theta, out);
        std::cerr << "usage error: no subcommand\n";
        return 2;
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
