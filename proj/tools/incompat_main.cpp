// Command-line front end for the qubit triplet incompatibility library.
//
// Exit codes: 0 on success (and for a positive compatibility verdict),
// 2 for a negative verdict, 1 on any error.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "incompat/incompat.hpp"

namespace {

using namespace incompat;

void print_triplet(const Triplet& t, const std::string& label) {
    std::cout << label << "\n";
    for (int j = 0; j < 3; ++j) {
        std::cout << "  n" << (j + 1) << " bias " << format_double(t[j].bias) << " bloch "
                  << format_vector(t[j].bloch) << "\n";
    }
}

void print_implementation(const RandomizedImplementation& impl) {
    std::cout << "randomized implementation (P_k, direction g_k):\n";
    for (int k = 0; k < 4; ++k) {
        std::cout << "  k=" << k << "  P " << format_double(impl.probabilities[static_cast<std::size_t>(k)])
                  << "  g " << format_vector(impl.directions[static_cast<std::size_t>(k)]) << "\n";
    }
    std::cout << "post-processing: outcome for observable j is gamma_jk * mu_k\n";
}

int cmd_jm(const std::string& input, bool do_unbias, double tol) {
    Triplet t = load_triplet(input);
    if (do_unbias) t = unbias(t);
    JMVerdict v;
    if (t.unbiased(0.0)) {
        v = jm_margin(t, tol);
    } else {
        std::cout << "biased input: using the general feasibility oracle\n";
        v = jm_feasible_general(t, tol);
    }
    std::cout << "margin " << format_double(v.margin) << "\n";
    std::cout << "jointly_measurable " << (v.jointly_measurable ? "true" : "false")
              << (v.boundary ? " (boundary)" : "") << "\n";
    std::cout << "ft_point " << format_vector(v.ft.point) << "\n";
    return v.jointly_measurable ? 0 : 2;
}

int cmd_bound(const std::string& input, bool do_unbias) {
    Triplet t = load_triplet(input);
    if (do_unbias) t = unbias(t);
    if (!t.unbiased(0.0)) {
        throw BiasedInput("the bound is defined for unbiased targets; rerun with --unbias");
    }
    const MURReport r = mur_lower_bound(t);
    std::cout << "delta " << format_double(r.delta) << "\n";
    std::cout << "bound_2delta " << format_double(2.0 * r.delta) << "\n";
    std::cout << "min_anchor_dist " << format_double(r.min_anchor_dist) << "\n";
    std::cout << "saturable " << (r.saturable ? "true" : "false") << "\n";
    if (r.delta <= kTol) {
        std::cout << "note: targets are jointly measurable; the bound is trivial\n";
        return 0;
    }
    if (!r.saturable) {
        std::cout << "note: not saturable; the bound cannot be attained\n";
        return 0;
    }
    if (r.optimal) print_triplet(*r.optimal, "optimal triplet:");
    print_implementation(implement_optimal(t));
    return 0;
}

int cmd_delta(const std::string& input, bool do_unbias, std::uint64_t seed, int restarts) {
    Triplet t = load_triplet(input);
    if (do_unbias) t = unbias(t);
    OptimizerOptions opts;
    opts.seed = seed;
    if (restarts > 0) opts.restarts = restarts;
    const IncompatibilityResult r = incompatibility(t, opts);
    std::cout << "delta_num " << format_double(r.delta_num) << "\n";
    std::cout << "method " << to_string(r.method) << "\n";
    std::cout << "lower_bound " << format_double(r.lower_bound) << "\n";
    std::cout << "gap " << format_double(r.gap) << "\n";
    std::cout << "saturated " << (r.saturated ? "true" : "false") << "\n";
    print_triplet(r.optimal, "optimal triplet:");
    return 0;
}

int cmd_sweep(const std::string& family, double start, double stop, int steps,
              const std::string& out, std::uint64_t seed, int restarts) {
    OptimizerOptions opts;
    opts.seed = seed;
    if (restarts > 0) opts.restarts = restarts;
    const auto rows = run_sweep(parse_family(family), start, stop, steps, opts);
    save_sweep_csv(rows, out);
    std::cout << "wrote " << rows.size() << " rows to " << out << "\n";
    return 0;
}

int cmd_verify(const std::string& input, const std::string& candidate_path, double tol) {
    const Triplet targets = load_triplet(input);
    const Triplet candidate = load_triplet(candidate_path);
    const CandidateReport r = verify_candidate(targets, candidate);
    std::cout << "candidate_jm_margin " << format_double(r.jm_margin) << "\n";
    std::cout << "worst_case " << format_double(r.worst_case) << "\n";
    std::cout << "bound_2delta " << format_double(r.lower_bound) << "\n";
    std::cout << "meets_bound " << (r.meets_bound ? "true" : "false") << "\n";
    const bool ok = r.jm_margin >= -tol && r.meets_bound;
    return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"joint measurability and measurement uncertainty for qubit observable triplets"};
    app.require_subcommand(1);

    std::string input;
    std::string candidate;
    std::string family = "perp";
    std::string out = "sweep.csv";
    double start = 0.0;
    double stop = 90.0;
    int steps = 91;
    std::uint64_t seed = 0;
    int restarts = 0;
    bool do_unbias = false;
    double tol = incompat::kTol;

    auto* jm = app.add_subcommand("jm", "decide joint measurability of a triplet");
    jm->add_option("--input", input, "triplet file")->required();
    jm->add_flag("--unbias", do_unbias, "zero all biases before testing");
    jm->add_option("--tol", tol, "boundary tolerance");

    auto* bound = app.add_subcommand("bound", "uncertainty lower bound and optimal implementation");
    bound->add_option("--input", input, "triplet file")->required();
    bound->add_flag("--unbias", do_unbias, "zero all biases first");

    auto* delta = app.add_subcommand("delta", "exact incompatibility of a triplet");
    delta->add_option("--input", input, "triplet file")->required();
    delta->add_flag("--unbias", do_unbias, "zero all biases first");
    delta->add_option("--seed", seed, "optimizer seed");
    delta->add_option("--restarts", restarts, "optimizer restarts");

    auto* sweep = app.add_subcommand("sweep", "incompatibility curve of a symmetric family as CSV");
    sweep->add_option("--family", family, "perp or y")->required();
    sweep->add_option("--start", start, "first angle in degrees")->required();
    sweep->add_option("--stop", stop, "last angle in degrees")->required();
    sweep->add_option("--steps", steps, "number of samples")->required();
    sweep->add_option("--out", out, "output CSV path")->required();
    sweep->add_option("--seed", seed, "optimizer seed");
    sweep->add_option("--restarts", restarts, "optimizer restarts");

    auto* verify = app.add_subcommand("verify", "check a candidate approximation against targets");
    verify->add_option("--input", input, "target triplet file")->required();
    verify->add_option("--candidate", candidate, "candidate triplet file")->required();
    verify->add_option("--tol", tol, "margin tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (jm->parsed()) return cmd_jm(input, do_unbias, tol);
        if (bound->parsed()) return cmd_bound(input, do_unbias);
        if (delta->parsed()) return cmd_delta(input, do_unbias, seed, restarts);
        if (sweep->parsed()) return cmd_sweep(family, start, stop, steps, out, seed, restarts);
        if (verify->parsed()) return cmd_verify(input, candidate, tol);
    } catch (const incompat::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
