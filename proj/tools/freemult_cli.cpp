// freemult: multiplicative free/Boolean convolutions, Brownian-motion
// marginals, density recovery, entropy, and limit-theorem experiments.
//
// Exit codes: 0 ok, 2 validation error, 3 numerical error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "freemult/brownian.hpp"
#include "freemult/config.hpp"
#include "freemult/convolution.hpp"
#include "freemult/entropy.hpp"
#include "freemult/errors.hpp"
#include "freemult/experiments.hpp"
#include "freemult/levy_hinchin.hpp"
#include "freemult/recovery.hpp"
#include "freemult/subordination.hpp"

using namespace freemult;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw ValidationError("cannot write file: " + out_path);
    out << text;
}

DensityProfile measure_profile(const Measure& mu, const std::string& law,
                               const std::map<std::string, double>& params) {
    DensityProfile p;
    p.space = mu.space;
    if (mu.has_density()) {
        p.nodes = mu.density->nodes;
        p.values = mu.density->values;
    }
    p.meta.law = law;
    p.meta.params = params;
    return p;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    if (out.empty()) throw ValidationError("empty integer list");
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw ValidationError("empty list");
    return out;
}

struct CommonArgs {
    std::string config_path;
    std::string out;
    int grid = 0;  // 0 = config default

    Config load() const {
        Config cfg = config_path.empty() ? Config::from_environment()
                                         : Config::from_json(slurp(config_path));
        if (grid > 0) {
            cfg.circle_grid = grid;
            cfg.halfline_grid = grid;
        }
        cfg.validate();
        return cfg;
    }
};

int cmd_density(const CommonArgs& common, const std::string& law, double t,
                const std::string& params_path, const std::string& input_path,
                const std::string& diagnostics_path) {
    Config cfg = common.load();
    DensityProfile prof;
    std::string diag;
    if (law == "haar") {
        Measure mu = Measure::haar(cfg.circle_grid);
        prof = measure_profile(mu, "haar", {});
    } else if (law == "lambda") {
        Measure mu = lambda_measure(t, cfg.circle_grid);
        prof = measure_profile(mu, "lambda", {{"t", t}});
    } else if (law == "chi") {
        Measure mu = chi_measure(t, cfg.halfline_grid);
        prof = measure_profile(mu, "chi", {{"t", t}});
    } else if (law == "infdiv") {
        if (params_path.empty())
            throw ValidationError("--law infdiv needs --params");
        LevyHinchinParams p = parse_params(slurp(params_path));
        int grid = (p.space == Space::circle) ? cfg.circle_grid : cfg.halfline_grid;
        RecoveryOptions ropts;
        ropts.j_min = cfg.recovery_j_min;
        ropts.j_max = cfg.recovery_j_max;
        InfdivLaw l = make_infdiv_law(p, grid, ropts);
        prof = measure_profile(l.measure, "infdiv", {});
        prof.sup_error_estimate = l.subordination_residual_sup;
        diag = l.diagnostics;
    } else if (law == "file") {
        if (input_path.empty()) throw ValidationError("--law file needs --input");
        Measure mu = parse_measure(slurp(input_path));
        // round trip through the transform and recovery machinery
        EtaEvaluator ev = eta_evaluator(mu);
        int grid = (mu.space == Space::circle) ? cfg.circle_grid : cfg.halfline_grid;
        RecoveryOptions ropts;
        ropts.j_min = cfg.recovery_j_min;
        ropts.j_max = cfg.recovery_j_max;
        Measure back = (mu.space == Space::circle)
                           ? measure_from_recovery(ev, uniform_circle_grid(grid), ropts)
                           : measure_from_recovery(
                                 ev,
                                 geometric_grid(estimate_halfline_support(ev).first,
                                                estimate_halfline_support(ev).second,
                                                grid),
                                 ropts);
        prof = measure_profile(back, "file", {});
    } else {
        throw ValidationError("unknown law: " + law);
    }
    if (!diagnostics_path.empty()) emit(diag.empty() ? "{}\n" : diag, diagnostics_path);
    emit(prof.to_csv(), common.out);
    return 0;
}

int cmd_convolve(const CommonArgs& common, bool boolean_kind,
                 const std::string& a_path, const std::string& b_path,
                 const std::string& csv_out) {
    Config cfg = common.load();
    Measure a = parse_measure(slurp(a_path));
    Measure b = parse_measure(slurp(b_path));
    if (a.space != b.space)
        throw ValidationError("convolve: factors on different spaces");
    int grid = (a.space == Space::circle) ? cfg.circle_grid : cfg.halfline_grid;
    ConvolutionResult r;
    if (boolean_kind)
        r = (a.space == Space::circle) ? boolean_convolve_circle(a, b, grid)
                                       : boolean_convolve_halfline(a, b, grid);
    else
        r = (a.space == Space::circle) ? free_convolve_circle(a, b, grid)
                                       : free_convolve_halfline(a, b, grid);
    emit(serialize_measure(r.measure) + "\n", common.out);
    if (!csv_out.empty())
        emit(measure_profile(r.measure, boolean_kind ? "boolean-convolve"
                                                     : "free-convolve",
                             {})
                 .to_csv(),
             csv_out);
    return 0;
}

int cmd_power(const CommonArgs& common, bool boolean_kind, int k,
              const std::string& in_path, const std::string& csv_out,
              const std::string& diagnostics_path) {
    Config cfg = common.load();
    Measure mu = parse_measure(slurp(in_path));
    int grid = (mu.space == Space::circle) ? cfg.circle_grid : cfg.halfline_grid;
    ConvolutionResult r =
        boolean_kind ? boolean_power(mu, k, grid) : free_power(mu, k, grid);
    if (!diagnostics_path.empty())
        emit(r.diagnostics.empty() ? "{}\n" : r.diagnostics + "\n",
             diagnostics_path);
    emit(serialize_measure(r.measure) + "\n", common.out);
    if (!csv_out.empty())
        emit(measure_profile(r.measure, boolean_kind ? "boolean-power" : "free-power",
                             {{"k", double(k)}})
                 .to_csv(),
             csv_out);
    return 0;
}

int cmd_entropy(const CommonArgs& common, const std::string& in_path,
                const std::string& flow, const std::string& times_text) {
    Config cfg = common.load();
    if (!flow.empty()) {
        auto times = parse_double_list(times_text);
        FlowEntropy fe;
        if (flow == "lambda") {
            fe = entropy_of_flow(
                [&](double t) { return lambda_measure(t, cfg.circle_grid); }, times);
        } else if (flow == "haar") {
            fe = entropy_of_flow([&](double) { return Measure::haar(cfg.circle_grid); },
                                 times);
        } else {
            throw ValidationError("unknown flow: " + flow);
        }
        std::ostringstream os;
        os << "t,entropy\n";
        for (auto& [t, v] : fe.values)
            os << format_double(t) << "," << format_double(v) << "\n";
        emit(os.str(), common.out);
        return 0;
    }
    if (in_path.empty()) throw ValidationError("entropy needs a measure or --flow");
    Measure mu = parse_measure(slurp(in_path));
    auto r = free_entropy(mu);
    emit(format_double(r.value) + "\n", common.out);
    return 0;
}

int cmd_experiment(const CommonArgs& common, const std::string& which, double t,
                   double mean, double eps, double gamma, int nmax,
                   const std::string& nlist_text, const std::string& family,
                   const std::string& params_path) {
    Config cfg = common.load();
    std::vector<int> ns;
    if (!nlist_text.empty())
        ns = parse_int_list(nlist_text);
    else
        for (int n = 8; n <= nmax; n *= 2) ns.push_back(n);
    if (ns.empty()) throw ValidationError("experiment: empty n list");

    ExperimentReport rep;
    if (which == "haar") {
        Measure mu;
        mu.space = Space::circle;
        if (mean != 0.0) {
            mu.atoms = {Atom{0.0, 0.5 * (1.0 + mean)}, Atom{kPi, 0.5 * (1.0 - mean)}};
        } else {
            mu.atoms = {Atom{0.0, 0.5}, Atom{kPi, 0.5}};
        }
        mu.label = "two-atom";
        mu.validate();
        rep = run_haar_superconvergence(mu, ns, cfg);
    } else if (which == "lambda") {
        LambdaFamily fam =
            (family == "exact") ? LambdaFamily::exact : LambdaFamily::two_atom;
        rep = run_lambda_superconvergence(t, ns, fam, cfg);
    } else if (which == "chi") {
        rep = run_chi_superconvergence(t, ns, eps, cfg);
    } else if (which == "bp") {
        SigmaMeasure sigma;
        if (!params_path.empty()) {
            LevyHinchinParams p = parse_params(slurp(params_path));
            sigma = p.sigma;
            gamma = p.gamma;
        } else {
            sigma = SigmaMeasure::point(1.0, 0.5 * t);
        }
        rep = run_bercovici_pata(gamma, sigma, ns, cfg);
    } else if (which == "entropy") {
        std::vector<std::pair<int, Measure>> laws;
        for (int n : ns) {
            auto r = run_lambda_superconvergence(t, std::vector<int>{n},
                                                 LambdaFamily::two_atom, cfg);
            laws.emplace_back(n, r.profiles.front().to_measure(true));
        }
        rep = run_entropy_convergence(laws, lambda_measure(t, cfg.circle_grid));
    } else {
        throw ValidationError("unknown experiment: " + which);
    }
    std::string dir = common.out.empty() ? (cfg.output_dir + "/" + rep.name) : common.out;
    rep.write(dir);
    std::cout << "report: " << dir << "/report.json verdict: " << rep.verdict << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiplicative free/Boolean convolution toolkit"};
    app.require_subcommand(1);

    CommonArgs common;
    app.add_option("--config", common.config_path, "config JSON path");

    // density
    auto* density = app.add_subcommand("density", "evaluate a law's density");
    std::string law = "lambda", params_path, input_path, diagnostics_path;
    double t = 1.0;
    density->add_option("--law", law, "chi|lambda|haar|infdiv|file");
    density->add_option("--t", t, "time parameter");
    density->add_option("--params", params_path, "parameter JSON");
    density->add_option("--input", input_path, "measure JSON");
    density->add_option("--grid", common.grid, "grid size");
    density->add_option("--out", common.out, "output CSV path");
    density->add_option("--diagnostics", diagnostics_path, "diagnostics JSON path");

    // convolve
    auto* convolve = app.add_subcommand("convolve", "convolve two measures");
    bool conv_free = false, conv_boolean = false;
    std::string a_path, b_path, csv_out;
    convolve->add_flag("--free", conv_free, "free convolution");
    convolve->add_flag("--boolean", conv_boolean, "Boolean convolution");
    convolve->add_option("a", a_path, "first measure JSON")->required();
    convolve->add_option("b", b_path, "second measure JSON")->required();
    convolve->add_option("--grid", common.grid, "grid size");
    convolve->add_option("--out", common.out, "output measure JSON path");
    convolve->add_option("--csv", csv_out, "also write the density CSV here");

    // power
    auto* power = app.add_subcommand("power", "k-fold convolution power");
    bool pow_free = false, pow_boolean = false;
    int k = 2;
    std::string pow_in;
    power->add_flag("--free", pow_free, "free power");
    power->add_flag("--boolean", pow_boolean, "Boolean power");
    power->add_option("--k", k, "number of factors")->required();
    power->add_option("input", pow_in, "measure JSON")->required();
    power->add_option("--grid", common.grid, "grid size");
    power->add_option("--out", common.out, "output measure JSON path");
    power->add_option("--csv", csv_out, "also write the density CSV here");
    power->add_option("--diagnostics", diagnostics_path,
                      "subordination diagnostics JSON path");

    // entropy
    auto* entropy = app.add_subcommand("entropy", "free entropy");
    std::string ent_in, flow, times_text = "1";
    entropy->add_option("input", ent_in, "measure JSON");
    entropy->add_option("--flow", flow, "lambda|haar family flow");
    entropy->add_option("--times", times_text, "comma-separated times");
    entropy->add_option("--grid", common.grid, "grid size");
    entropy->add_option("--out", common.out, "output path");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "limit-theorem experiments");
    std::string which, nlist_text, family = "two_atom";
    double mean = 0.9, eps = 0.05, gamma = 0.0;
    int nmax = 64;
    experiment->add_option("name", which, "haar|lambda|chi|bp|entropy")->required();
    experiment->add_option("--t", t, "time parameter");
    experiment->add_option("--mean", mean, "two-atom mean for the haar experiment");
    experiment->add_option("--eps", eps, "interior window margin");
    experiment->add_option("--gamma", gamma, "halfline centering parameter");
    experiment->add_option("--nmax", nmax, "largest n (powers of two from 8)");
    experiment->add_option("--nlist", nlist_text, "explicit comma-separated n list");
    experiment->add_option("--family", family, "two_atom|exact (lambda)");
    experiment->add_option("--params", params_path, "parameter JSON (bp)");
    experiment->add_option("--grid", common.grid, "grid size");
    experiment->add_option("--out", common.out, "report directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(density))
            return cmd_density(common, law, t, params_path, input_path,
                               diagnostics_path);
        if (app.got_subcommand(convolve)) {
            if (conv_free == conv_boolean)
                throw ValidationError("choose exactly one of --free/--boolean");
            return cmd_convolve(common, conv_boolean, a_path, b_path, csv_out);
        }
        if (app.got_subcommand(power)) {
            if (pow_free == pow_boolean)
                throw ValidationError("choose exactly one of --free/--boolean");
            return cmd_power(common, pow_boolean, k, pow_in, csv_out,
                             diagnostics_path);
        }
        if (app.got_subcommand(entropy))
            return cmd_entropy(common, ent_in, flow, times_text);
        if (app.got_subcommand(experiment))
            return cmd_experiment(common, which, t, mean, eps, gamma, nmax,
                                  nlist_text, family, params_path);
        throw ValidationError("no subcommand");
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
