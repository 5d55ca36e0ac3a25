#include "qfi/cli.hpp"

#include "qfi/ensemble.hpp"
#include "qfi/error.hpp"
#include "qfi/json_io.hpp"
#include "qfi/matrix_repr.hpp"
#include "qfi/mzi.hpp"
#include "qfi/qfi_engine.hpp"
#include "qfi/state_family.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

namespace qfi::cli {

namespace {

using io::OrderedJson;

struct RunConfig {
    std::string command;
    std::string input_path;
    std::string method = "support";
    double theta = 0.0;
    std::optional<double> step;
    double threshold = kDefaultThreshold;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    Index members = 0;
    int photons = 0;
    int truncation = 0;
    bool full_space = false;
    bool timing = false;
    std::string output;
};

double threshold_from_env() {
    const char* env = std::getenv("QFI_THRESHOLD");
    if (env == nullptr || *env == '\0') return kDefaultThreshold;
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0') {
        throw Error(ErrorKind::InvalidArgument, std::string("QFI_THRESHOLD is not a number: ") + env);
    }
    return v;
}

void check_threshold(double thr) {
    if (!(thr > 0.0 && thr < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "threshold must lie in (0, 1)");
    }
}

DerivativeSpec spec_for(const StateFamily& family, const RunConfig& cfg) {
    if (cfg.step) return DerivativeSpec::central(*cfg.step);
    if (std::holds_alternative<StateFamily::Sampled>(family.kind())) return DerivativeSpec::central();
    if (const auto* s = std::get_if<StateFamily::Spectral>(&family.kind()); s && !s->dprobabilities) {
        return DerivativeSpec::central();
    }
    return DerivativeSpec::exact();
}

StateFamily blocked_family(const BlockedState& state) {
    return StateFamily::unitary(state.assembled_generator(), state.assembled_state());
}

QfiReport matrix_report(const DerivativeBundle& bundle) {
    QfiReport r = qfi_matrix_form(coefficient_matrices(bundle.rho), transfer_matrix(bundle),
                                  sqrt_eigenvalue_derivatives(bundle.rho.eigenvalues, bundle.dp));
    r.diagnostics.insert(r.diagnostics.begin(), bundle.rho.diagnostics.begin(),
                         bundle.rho.diagnostics.end());
    return r;
}

QfiReport family_report(const StateFamily& family, const std::string& method, const RunConfig& cfg) {
    const DerivativeSpec spec = spec_for(family, cfg);
    if (method == "sld") {
        const HermitianMatrix drho = evaluate_derivative(family, cfg.theta, spec);
        const DensityMatrix rho = family.evaluate(cfg.theta);
        return qfi_sld(spectral_decompose(rho, drho, cfg.threshold), drho);
    }
    const DerivativeBundle bundle =
        derivative_bundle(family, cfg.theta, spec, cfg.threshold, Eigensolver::support);
    return method == "support" ? qfi_support(bundle) : matrix_report(bundle);
}

QfiReport pair_report(const io::RhoDrhoPair& pair, const std::string& method, double thr) {
    if (method == "sld") return qfi_sld(spectral_decompose(pair.rho, pair.drho, thr), pair.drho);
    const DerivativeBundle bundle =
        bundle_from_perturbation(spectral_decompose_support(pair.rho, pair.drho, thr), pair.drho);
    return method == "support" ? qfi_support(bundle) : matrix_report(bundle);
}

QfiReport run_method(const io::Problem& problem, const std::string& method, const RunConfig& cfg) {
    if (method == "block") {
        const auto* blocked = std::get_if<BlockedState>(&problem);
        if (blocked == nullptr) {
            throw Error(ErrorKind::InvalidArgument, "method block needs a blocked-state input");
        }
        return block_qfi(*blocked, cfg.threshold);
    }
    if (const auto* fam = std::get_if<StateFamily>(&problem)) return family_report(*fam, method, cfg);
    if (const auto* pair = std::get_if<io::RhoDrhoPair>(&problem)) {
        return pair_report(*pair, method, cfg.threshold);
    }
    return family_report(blocked_family(std::get<BlockedState>(problem)), method, cfg);
}

std::string canonical_method(const std::string& m) {
    if (m == "sld" || m == "support" || m == "block") return m;
    if (m == "matrix" || m == "matrix_repr") return "matrix";
    throw Error(ErrorKind::InvalidArgument, "unknown method \"" + m + "\"");
}

OrderedJson cmd_compute(const RunConfig& cfg) {
    const std::string method = canonical_method(cfg.method);
    const io::Problem problem = io::parse_problem(io::read_json_file(cfg.input_path));
    return io::report_json(run_method(problem, method, cfg));
}

OrderedJson cmd_compare(const RunConfig& cfg, int& code) {
    const io::Problem problem = io::parse_problem(io::read_json_file(cfg.input_path));
    std::vector<std::string> methods{"sld", "support", "matrix"};
    if (std::holds_alternative<BlockedState>(problem)) methods.push_back("block");

    std::vector<QfiReport> reports;
    std::vector<double> seconds;
    for (const std::string& m : methods) {
        const auto t0 = std::chrono::steady_clock::now();
        reports.push_back(run_method(problem, m, cfg));
        seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }

    double max_diff = 0.0;
    double scale = 1.0;
    for (std::size_t a = 0; a < reports.size(); ++a) {
        scale = std::max(scale, std::abs(reports[a].F));
        for (std::size_t b = a + 1; b < reports.size(); ++b) {
            max_diff = std::max(max_diff, std::abs(reports[a].F - reports[b].F));
        }
    }
    const double tol = 1e-8 * scale;

    OrderedJson j;
    OrderedJson rep;
    for (std::size_t k = 0; k < reports.size(); ++k) {
        rep[std::string(to_string(reports[k].method))] = io::report_json(reports[k]);
    }
    j["reports"] = std::move(rep);
    j["max_discrepancy"] = max_diff;
    j["tolerance"] = tol;
    j["agree"] = max_diff <= tol;
    if (cfg.timing) {
        OrderedJson t;
        for (std::size_t k = 0; k < reports.size(); ++k) {
            t[std::string(to_string(reports[k].method))] = seconds[k];
        }
        j["timing_seconds"] = std::move(t);
    }
    if (!(max_diff <= tol)) code = kDiscrepancy;
    return j;
}

OrderedJson verdict_json(const OptimalityVerdict& v, Index support_dim) {
    OrderedJson j;
    j["optimal"] = v.optimal;
    if (support_dim < 2) {
        j["witness"] = nullptr;
    } else {
        OrderedJson w;
        w["i"] = v.witness.i + 1;
        w["j"] = v.witness.j + 1;
        w["magnitude"] = v.witness.magnitude;
        j["witness"] = std::move(w);
    }
    return j;
}

OrderedJson cmd_ensemble(const RunConfig& cfg) {
    const io::Problem problem = io::parse_problem(io::read_json_file(cfg.input_path));
    std::optional<StateFamily> family;
    if (const auto* f = std::get_if<StateFamily>(&problem)) family = *f;
    if (const auto* b = std::get_if<BlockedState>(&problem)) family = blocked_family(*b);
    if (!family) {
        throw Error(ErrorKind::UnsupportedParametrization,
                    "convex-roof analysis applies to unitary parametrization only");
    }
    const StateFamily::Unitary& u = require_unitary(*family);
    const DensityMatrix rho = family->evaluate(cfg.theta);
    const SpectralDecomposition decomp = spectral_decompose(rho, cfg.threshold);
    const QfiReport report = qfi_unitary(decomp, u.generator);

    const OptimalityVerdict verdict = eigen_ensemble_is_optimal(decomp, u.generator);
    const YObservable y = y_observable(decomp, u.generator);
    const EnsembleResult best = optimal_ensemble(decomp, u.generator);

    OrderedJson j;
    j["F"] = report.F;
    j["support_dim"] = decomp.support_dim();
    j["verdict"] = verdict_json(verdict, decomp.support_dim());
    j["Y_spectrum"] = io::real_vector_json(y.eigenvalues);
    j["optimal_ensemble"] = io::ensemble_json(best.ensemble);
    j["optimal_ensemble_variance"] = ensemble_average_variance(best.ensemble, u.generator);

    if (cfg.samples > 0) {
        const Index size = cfg.members > 0 ? cfg.members : decomp.support_dim();
        const std::vector<PureEnsemble> sampled =
            random_ensembles(decomp, cfg.seed, cfg.samples, size);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        double sum = 0.0;
        for (const PureEnsemble& e : sampled) {
            const double v = ensemble_average_variance(e, u.generator);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        OrderedJson s;
        s["count"] = cfg.samples;
        s["seed"] = cfg.seed;
        s["members"] = size;
        s["min"] = lo;
        s["mean"] = sum / double(cfg.samples);
        s["max"] = hi;
        j["sampled"] = std::move(s);
    } else {
        j["sampled"] = nullptr;
    }
    std::vector<std::string> diagnostics = report.diagnostics;
    diagnostics.insert(diagnostics.end(), best.diagnostics.begin(), best.diagnostics.end());
    j["diagnostics"] = diagnostics;
    return j;
}

OrderedJson cmd_demo_mzi(const RunConfig& cfg) {
    const int truncation = cfg.truncation > 0 ? cfg.truncation : cfg.photons + 1;
    const mzi::DemoResult r = mzi::run_demo(cfg.photons, truncation, cfg.full_space, cfg.threshold);
    OrderedJson j;
    j["photons"] = r.photons;
    j["truncation"] = r.truncation;
    j["space"] = r.full_space ? "full" : "sector";
    j["dim"] = r.dim;
    j["F_pure"] = r.F_pure;
    j["report"] = io::report_json(r.report);
    j["verdict"] = verdict_json(r.verdict, r.report.support_dim);
    j["escape_amplitude"] = r.escape;
    std::ostringstream narrative;
    narrative.precision(12);
    narrative << "Fock input |" << r.photons << ",0> under H = (a^dag b - a b^dag)/(2i): F = "
              << r.report.F << " for n = " << r.photons
              << " photons; a single pure state is its own optimal ensemble.";
    j["narrative"] = narrative.str();
    return j;
}

void emit(const OrderedJson& j, const RunConfig& cfg, std::ostream& out) {
    const std::string text = io::dump(j);
    if (cfg.output.empty()) {
        out << text;
        return;
    }
    std::ofstream f(cfg.output);
    if (!f) throw Error(ErrorKind::InvalidArgument, cfg.output + ": cannot open for writing");
    f << text;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Quantum Fisher information toolkit"};
    app.require_subcommand(1);

    std::optional<double> threshold_flag;
    auto add_common = [&](CLI::App* sub, bool needs_input) {
        auto* in = sub->add_option("--input", cfg.input_path, "problem JSON file");
        if (needs_input) in->required();
        sub->add_option("--threshold", threshold_flag, "support threshold (overrides QFI_THRESHOLD)");
        sub->add_option("--output", cfg.output, "write JSON here instead of standard output");
    };

    CLI::App* compute = app.add_subcommand("compute", "run one pathway");
    add_common(compute, true);
    compute->add_option("--method", cfg.method, "sld | support | matrix | block");
    compute->add_option("--theta", cfg.theta, "parameter value");
    compute->add_option("--step", cfg.step, "central-difference step");

    CLI::App* compare = app.add_subcommand("compare", "run all pathways and compare");
    add_common(compare, true);
    compare->add_option("--theta", cfg.theta, "parameter value");
    compare->add_option("--step", cfg.step, "central-difference step");
    compare->add_flag("--timing", cfg.timing, "report wall-clock time per pathway");

    CLI::App* ensemble = app.add_subcommand("ensemble", "convex-roof ensemble analysis");
    add_common(ensemble, true);
    ensemble->add_option("--theta", cfg.theta, "parameter value");
    ensemble->add_option("--samples", cfg.samples, "number of random ensembles");
    ensemble->add_option("--seed", cfg.seed, "random seed");
    ensemble->add_option("--members", cfg.members, "members per random ensemble (default: rank)");

    CLI::App* demo = app.add_subcommand("demo-mzi", "Mach-Zehnder Fock-state demo");
    add_common(demo, false);
    demo->add_option("--photons", cfg.photons, "photon number n")->required();
    demo->add_option("--truncation", cfg.truncation, "per-mode cutoff (default n + 1)");
    demo->add_flag("--full-space", cfg.full_space, "use the full truncated two-mode space");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidationError;
    }

    try {
        cfg.command = app.get_subcommands().front()->get_name();
        cfg.threshold = threshold_flag ? *threshold_flag : threshold_from_env();
        check_threshold(cfg.threshold);
        if (cfg.photons < 0) throw Error(ErrorKind::InvalidArgument, "photon number must be non-negative");

        int code = kOk;
        OrderedJson result;
        if (cfg.command == "compute") {
            result = cmd_compute(cfg);
        } else if (cfg.command == "compare") {
            result = cmd_compare(cfg, code);
        } else if (cfg.command == "ensemble") {
            result = cmd_ensemble(cfg);
        } else {
            result = cmd_demo_mzi(cfg);
        }
        emit(result, cfg, out);
        if (code == kDiscrepancy) err << "error: pathways disagree beyond tolerance\n";
        return code;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return is_numerical(e.kind()) ? kNumericalError : kValidationError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumericalError;
    }
}

}  // namespace qfi::cli
