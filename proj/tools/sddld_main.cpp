// Command-line front end: estimate | bounds | verify | gen | bench.
// Exit codes: 0 ok, 2 verification failed, 3 invalid input, 4 degraded estimate.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sddld/sddld.hpp"

namespace {

using nlohmann::json;

json report_to_json(const sddld::EstimateReport& rep) {
    json j;
    j["estimate"] = rep.estimate;
    j["raw_logdet"] = rep.raw_logdet;
    if (rep.lower) j["lower"] = *rep.lower;
    if (rep.upper) j["upper"] = *rep.upper;
    j["eps"] = rep.eps;
    j["eta"] = rep.eta;
    j["seed"] = rep.seed;
    j["method"] = rep.method;
    j["n"] = rep.n;
    j["m"] = rep.m;
    j["degraded"] = rep.degraded;
    j["plan_capped"] = rep.plan_capped;
    json levels = json::array();
    for (const auto& d : rep.levels) {
        json l;
        l["side"] = d.side;
        l["component"] = d.component;
        l["level"] = d.level;
        l["n"] = d.n;
        l["m_a"] = d.m_a;
        l["m_b"] = d.m_b;
        l["kappa_hat"] = d.kappa_hat;
        l["cond_b"] = d.cond_b;
        l["stretch"] = d.stretch;
        l["p"] = d.p;
        l["l"] = d.l;
        l["nu"] = d.nu;
        l["plan_capped"] = d.plan_capped;
        l["solver_converged"] = d.solver_converged;
        l["remainder"] = d.remainder;
        l["sum_log_pivots"] = d.sum_log_pivots;
        levels.push_back(l);
    }
    j["levels"] = levels;
    j["time_ms"] = rep.time_ms;
    return j;
}

void emit(const json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        out << j.dump(2) << "\n";
    }
}

struct CommonOpts {
    std::string input;
    std::string method = "ultra";
    double eps = 0.1;
    double eta = 0.1;
    std::uint64_t seed = 42;
    std::string out;
    unsigned threads = 1;
    sddld::Index dense_cap = 2000;
    std::size_t mc_cap = 1'000'000;
};

sddld::McControls controls_from(const CommonOpts& o) {
    sddld::McControls c;
    c.threads = o.threads;
    c.max_plan_cost = o.mc_cap;
    return c;
}

sddld::EstimateReport run_method(const std::string& method, const sddld::SymmetricSparse& a,
                                 const CommonOpts& o) {
    const sddld::McControls ctl = controls_from(o);
    if (method == "tree") return sddld::tree_logdet(a, o.eps, o.eta, o.seed, ctl);
    if (method == "ultra") return sddld::ultra_logdet(a, o.eps, o.eta, o.seed, ctl);
    if (method == "fast") return sddld::fast_inexact_logdet(a, o.seed, ctl);
    if (method == "bounds") return sddld::logdet_bounds(a, o.seed, ctl);
    sddld::fail(sddld::ErrorCode::InvalidParameter, "unknown method " + method);
}

void add_common(CLI::App* cmd, CommonOpts& o, bool with_method = true) {
    cmd->add_option("--input", o.input, "Matrix Market input path")->required();
    if (with_method) cmd->add_option("--method", o.method, "tree | ultra | fast | bounds");
    cmd->add_option("--eps", o.eps, "target precision (per vertex)");
    cmd->add_option("--eta", o.eta, "failure probability");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--out", o.out, "output JSON path (default: stdout)");
    cmd->add_option("--threads", o.threads, "sampling threads");
    cmd->add_option("--dense-cap", o.dense_cap, "largest n the dense oracle accepts");
    cmd->add_option("--mc-cap", o.mc_cap, "compute cap on p*l per remainder (0 = uncapped)");
}

int cmd_estimate(const CommonOpts& o) {
    const auto a = sddld::read_matrix_market_file(o.input);
    const auto rep = run_method(o.method, a, o);
    emit(report_to_json(rep), o.out);
    return rep.degraded ? 4 : 0;
}

int cmd_bounds(const CommonOpts& o) {
    const auto a = sddld::read_matrix_market_file(o.input);
    const auto rep = sddld::logdet_bounds(a, o.seed, controls_from(o));
    emit(report_to_json(rep), o.out);
    return 0;
}

int cmd_verify(const CommonOpts& o) {
    const auto a = sddld::read_matrix_market_file(o.input);
    if (a.dim() > o.dense_cap)
        sddld::fail(sddld::ErrorCode::OracleTooLarge,
                    "n=" + std::to_string(a.dim()) + " exceeds the dense cap " + std::to_string(o.dense_cap));
    const auto rep = run_method(o.method, a, o);
    const double dense = sddld::dense_logdet(a) / static_cast<double>(a.dim());

    json j = report_to_json(rep);
    j["dense"] = dense;
    bool pass = false;
    if (o.method == "bounds") {
        pass = rep.lower && rep.upper && *rep.lower <= dense && dense <= *rep.upper;
        j["abs_err"] = std::abs(rep.estimate - dense);
    } else {
        const double err = std::abs(rep.estimate - dense);
        j["abs_err"] = err;
        const double tol = (o.method == "fast") ? 0.5 : o.eps;
        pass = err <= tol;
    }
    j["pass"] = pass;
    emit(j, o.out);
    if (!pass) return 2;
    return rep.degraded ? 4 : 0;
}

struct GenOpts {
    std::string kind = "grid";
    std::string dims; // WxH for grid/torus
    sddld::Index n = 0;
    sddld::Index degree = 0;
    std::string weights = "unit";
    double wlo = 0.5, whi = 2.0;
    double shift = 0.0;
    std::uint64_t seed = 42;
    std::string out;
};

int cmd_gen(const GenOpts& g) {
    sddld::GenSpec spec;
    if (g.kind == "grid") spec.kind = sddld::GraphKind::grid;
    else if (g.kind == "torus") spec.kind = sddld::GraphKind::torus;
    else if (g.kind == "random-regular") spec.kind = sddld::GraphKind::random_regular;
    else if (g.kind == "tree") spec.kind = sddld::GraphKind::tree;
    else sddld::fail(sddld::ErrorCode::InvalidParameter, "unknown kind " + g.kind);

    if (spec.kind == sddld::GraphKind::grid || spec.kind == sddld::GraphKind::torus) {
        const auto x = g.dims.find('x');
        if (x == std::string::npos) sddld::fail(sddld::ErrorCode::InvalidParameter, "--dims expects WxH");
        spec.width = static_cast<sddld::Index>(std::stol(g.dims.substr(0, x)));
        spec.height = static_cast<sddld::Index>(std::stol(g.dims.substr(x + 1)));
    } else {
        spec.n = g.n;
        spec.degree = g.degree;
    }
    if (g.weights == "unit") {
        spec.weights.unit = true;
    } else if (g.weights == "uniform") {
        spec.weights.unit = false;
        spec.weights.lo = g.wlo;
        spec.weights.hi = g.whi;
    } else {
        sddld::fail(sddld::ErrorCode::InvalidParameter, "weights must be unit or uniform");
    }
    spec.shift = g.shift;

    const auto a = sddld::generate(spec, g.seed);
    if (g.out.empty()) {
        sddld::write_matrix_market(std::cout, a);
    } else {
        sddld::write_matrix_market_file(g.out, a);
    }
    return 0;
}

int cmd_bench(const CommonOpts& o) {
    const auto a = sddld::read_matrix_market_file(o.input);
    json j = json::array();
    for (const std::string m : {"bounds", "tree", "ultra", "fast"}) {
        const auto rep = run_method(m, a, o);
        json e;
        e["method"] = m;
        e["estimate"] = rep.estimate;
        e["time_ms"] = rep.time_ms;
        j.push_back(e);
    }
    emit(j, o.out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"log-determinant estimation for SDD matrices"};
    app.require_subcommand(1);

    CommonOpts est, bnd, ver, ben;
    GenOpts gen;

    auto* c_est = app.add_subcommand("estimate", "estimate n^{-1} ln|A|");
    add_common(c_est, est);
    auto* c_bnd = app.add_subcommand("bounds", "deterministic per-vertex bounds");
    add_common(c_bnd, bnd, false);
    auto* c_ver = app.add_subcommand("verify", "compare a method against the dense factorization");
    add_common(c_ver, ver);
    auto* c_ben = app.add_subcommand("bench", "time all methods on one input");
    add_common(c_ben, ben, false);

    auto* c_gen = app.add_subcommand("gen", "generate a test matrix (laplacian + shift*I)");
    c_gen->add_option("--kind", gen.kind, "grid | torus | random-regular | tree")->required();
    c_gen->add_option("--dims", gen.dims, "WxH (grid, torus)");
    c_gen->add_option("--n", gen.n, "vertex count (random-regular, tree)");
    c_gen->add_option("--degree", gen.degree, "degree (random-regular)");
    c_gen->add_option("--weights", gen.weights, "unit | uniform");
    c_gen->add_option("--wlo", gen.wlo, "uniform weight lower bound");
    c_gen->add_option("--whi", gen.whi, "uniform weight upper bound");
    c_gen->add_option("--shift", gen.shift, "diagonal shift");
    c_gen->add_option("--seed", gen.seed, "random seed");
    c_gen->add_option("--out", gen.out, "output path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(c_est)) return cmd_estimate(est);
        if (app.got_subcommand(c_bnd)) return cmd_bounds(bnd);
        if (app.got_subcommand(c_ver)) return cmd_verify(ver);
        if (app.got_subcommand(c_ben)) return cmd_bench(ben);
        if (app.got_subcommand(c_gen)) return cmd_gen(gen);
    } catch (const sddld::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
