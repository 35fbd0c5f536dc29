#pragma once

// Command-line front end: flag parsing, config overrides, the verification
// suites, and JSON artifacts. Artifacts go to the output stream (or --out);
// diagnostics go to the log stream only.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "gluing.hpp"
#include "json_io.hpp"
#include "phitau_modules.hpp"
#include "random.hpp"
#include "tate_sen.hpp"

namespace phitau {

enum ExitCode : int { exit_ok = 0, exit_residual = 1, exit_usage = 64, exit_precision = 65, exit_convergence = 66 };

inline int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::InsufficientPrecision:
        case ErrorCode::WindowTooNarrow:
        case ErrorCode::ZeroAtPrecision: return exit_precision;
        case ErrorCode::NoConvergence: return exit_convergence;
        default: return exit_usage;
    }
}

struct RunConfig {
    long p = 3;
    long N = 12;
    int x_lo = -12;
    int x_hi = 32;
    int y_hi = 8;
    std::string convention = "kisin";
    std::uint64_t seed = 1;
    std::string out;

    Truncation truncation() const {
        Truncation t;
        t.p = p;
        t.N = N;
        t.x_lo = x_lo;
        t.x_hi = x_hi;
        t.y_hi = y_hi;
        t.validate();
        return t;
    }

    void validate() const {
        (void)truncation();
        (void)parse_convention(convention);
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline Json to_json(const RunConfig& c) {
    return Json{{"p", c.p},         {"N", c.N},       {"x_lo", c.x_lo}, {"x_hi", c.x_hi},
                {"y_hi", c.y_hi},   {"convention", c.convention}, {"seed", c.seed}, {"out", c.out}};
}

// Keys present in j override base; unknown keys are rejected.
inline RunConfig config_from_json(const Json& j, RunConfig base = {}) {
    if (!j.is_object()) throw Error(ErrorCode::Precondition, "config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        const char* k = key.c_str();
        if (key == "p") base.p = detail::get<long>(j, k);
        else if (key == "N") base.N = detail::get<long>(j, k);
        else if (key == "x_lo") base.x_lo = detail::get<int>(j, k);
        else if (key == "x_hi") base.x_hi = detail::get<int>(j, k);
        else if (key == "y_hi") base.y_hi = detail::get<int>(j, k);
        else if (key == "convention") base.convention = detail::get<std::string>(j, k);
        else if (key == "seed") base.seed = detail::get<std::uint64_t>(j, k);
        else if (key == "out") base.out = detail::get<std::string>(j, k);
        else throw Error(ErrorCode::Precondition, "unknown config key '" + key + "'");
    }
    base.validate();
    return base;
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Precondition, "cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Precondition, "'" + path + "' is not valid JSON: " + e.what());
    }
}

// "a" or "a/b" as a p-adic scalar of the window.
inline PadicNumber parse_scalar(const Truncation& t, const std::string& s) {
    auto slash = s.find('/');
    mpz_class num, den = 1;
    bool ok = num.set_str(s.substr(0, slash), 10) == 0;
    if (slash != std::string::npos) ok = ok && den.set_str(s.substr(slash + 1), 10) == 0;
    if (!ok) throw Error(ErrorCode::Precondition, "bad number '" + s + "'");
    return PadicNumber::from_rational(t.p, num, den, t.digits());
}

// ---------------------------------------------------------------------------
// Verification suites. A check is asserted unless marked informational; the
// suite passes iff every asserted check passes.

struct Check {
    std::string name;
    bool pass = false;
    bool asserted = true;
    Json detail = Json::object();
};

inline Json to_json(const Check& c) {
    Json j{{"name", c.name}, {"pass", c.pass}, {"asserted", c.asserted}};
    for (const auto& [k, v] : c.detail.items()) j[k] = v;
    return j;
}

// Residual valuation, null for an exactly vanishing residual.
inline Json valuation_json(long v) { return v == LONG_MAX ? Json(nullptr) : Json(v); }

inline Check certificate_check(std::string name, const ZeroCertificate& z, bool asserted = true) {
    return {std::move(name), z.zero, asserted, Json{{"valuation", valuation_json(z.valuation)}, {"target", z.target}}};
}

inline std::vector<Check> commutation_suite(const PeriodBundle& pb) {
    const Truncation& t = pb.trunc;
    std::vector<Check> out;
    out.push_back(certificate_check("trivial", *trivial_module(t).commutation));
    out.push_back(certificate_check("qp_minus_one", *qp_minus_one_module(pb).commutation));
    struct Case {
        long beta, r, s;
    };
    for (auto c : {Case{1, 0, 0}, Case{2, 1, 0}, Case{1, 2, -1}, Case{1, 1, -2}}) {
        auto m = rank1_module(Character::make(t, c.beta, c.r, c.s), pb);
        out.push_back(certificate_check("rank1(" + std::to_string(c.beta) + "," + std::to_string(c.r) + "," +
                                            std::to_string(c.s) + ")",
                                        *m.commutation));
    }
    out.push_back(certificate_check("false_tate", *false_tate_module(pb).commutation));
    // omega = rank1(1, 1, 0): only the commuting exponent is asserted.
    for (auto rule : {TauRule::commuting, TauRule::statement, TauRule::proof}) {
        auto m = rank1_module(Character::make(t, 1, 1, 0), pb, rule);
        out.push_back(certificate_check(std::string("omega/") + tau_rule_name(rule), *m.commutation,
                                        rule == TauRule::commuting));
    }
    return out;
}

inline std::vector<Check> congruence_suite(const PeriodBundle& pb) {
    const Truncation& t = pb.trunc;
    std::vector<Check> out;
    auto zero = ModelElement::scalar(t, 0);
    for (long k = 1; k <= 3; ++k)
        for (long u : {1L, 2L}) {
            long s2 = u;
            for (long i = 0; i < k; ++i) s2 *= t.p;
            auto rep = congruence_report(zero, ModelElement::scalar(t, s2), k, pb);
            out.push_back({"congruence(0," + std::to_string(s2) + ",k=" + std::to_string(k) + ")", rep.member, true,
                           Json{{"hypothesis", rep.hypothesis}}});
        }
    auto neg = congruence_report(zero, ModelElement::scalar(t, 1), 1, pb);
    out.push_back({"congruence_control(0,1,k=1)", !neg.member, true,
                   Json{{"hypothesis", neg.hypothesis}, {"member", neg.member}}});
    return out;
}

inline std::vector<Check> nnabla_suite(const PeriodBundle& pb, std::uint64_t seed, int count = 50) {
    const Truncation& t = pb.trunc;
    std::vector<Check> out;
    Rng rng(seed);
    RandomShape shape{0, 10, 0, 5, 0, 3};
    bool leibniz = true, kisin = true;
    for (int k = 0; k < count; ++k) {
        auto f = random_element(t, rng, shape), g = random_element(t, rng, shape);
        leibniz = leibniz && certify_zero(nnabla_on_ring(f * g, pb) - nnabla_on_ring(f, pb) * g -
                                          f * nnabla_on_ring(g, pb))
                                 .zero;
        kisin = kisin && certify_zero(nnabla_relation_residual(f, pb)).zero;
    }
    out.push_back({"leibniz", leibniz, true, Json{{"samples", count}}});
    out.push_back({"kisin_relation", kisin, true, Json{{"samples", count}}});
    auto ft = false_tate_module(pb);
    auto expect = -(ModelElement::X(t) * d_dX(pb.lambda));
    out.push_back({"false_tate_nnabla_00", certify_zero((*ft.mat_nnabla)(0, 0) - expect).zero});
    for (long m : {1L, 2L, 3L})
        out.push_back(certificate_check("weight_rule(b^" + std::to_string(m) + ")",
                                        certify_zero(weight_rule_residual(m, pb))));
    return out;
}

// ---------------------------------------------------------------------------

namespace detail {

struct Emitter {
    std::ostream& out;
    void line(const Json& j) { out << dump(j) << '\n'; }
};

inline bool all_pass(const std::vector<Check>& cs) {
    return std::all_of(cs.begin(), cs.end(), [](const Check& c) { return c.pass || !c.asserted; });
}

inline Json checks_json(const std::vector<Check>& cs) {
    Json a = Json::array();
    for (const auto& c : cs) a.push_back(to_json(c));
    return a;
}

inline Json module_json(const PhiTauModule& m) {
    Json j{{"label", m.label}, {"rank", m.rank}, {"mat_phi", to_json(m.mat_phi)}};
    if (m.mat_tau) j["mat_tau"] = to_json(*m.mat_tau);
    if (m.mat_nnabla) j["mat_nnabla"] = to_json(*m.mat_nnabla);
    if (m.commutation)
        j["commutation"] = Json{{"zero", m.commutation->zero}, {"valuation", valuation_json(m.commutation->valuation)}};
    return j;
}

inline int log2_ceil(long n) {
    int k = 0;
    while ((1L << k) < n) ++k;
    return k;
}

}  // namespace detail

struct CommandOptions {
    // rank1 / family
    std::string beta = "1", s = "0", s0 = "0", at;
    long r = 0;
    std::string rule = "commuting";
    int order = 3;
    // falsetate
    bool literal = false;
    // trianguline
    long k1 = 0, k2 = 0;
    std::string d1p = "1", d2p = "1", alpha_file, beta_file;
    // verify
    std::string suite = "all";
    int count = 50;
    // descend / factor
    std::string instance = "bivariate";
    int d = 2, trials = 50;
    long c = 0;  // 0: 1 + p
    int half_width = 24;
    // glue
    std::string spec_file;
    // shared
    std::string config_file;
};

inline TauRule parse_rule(const std::string& s) {
    if (s == "commuting") return TauRule::commuting;
    if (s == "statement") return TauRule::statement;
    if (s == "proof") return TauRule::proof;
    throw Error(ErrorCode::Precondition, "unknown tau rule '" + s + "'");
}

// Each command writes its artifacts and returns 0 or exit_residual.
inline int cmd_periods(const RunConfig& cfg, std::ostream& out) {
    auto t = cfg.truncation();
    auto pb = make_bundle(t, parse_convention(cfg.convention));
    auto ratio = -PadicNumber::from_rational(t.p, 1, t.p, t.digits()) * eisenstein(t);
    std::vector<Check> checks;
    checks.push_back(certificate_check("functional_equation", certify_zero(pb.lambda - ratio * apply_phi(pb.lambda))));
    for (long c : {t.p + 1, 2L}) {
        auto cc = ModelElement::scalar(t, c);
        checks.push_back(certificate_check("gamma_" + std::to_string(c) + "(b)",
                                           certify_zero(apply_gamma(pb.b, cc) - cc * pb.b)));
    }
    detail::Emitter{out}.line(Json{{"command", "periods"},
                                   {"config", to_json(cfg)},
                                   {"bundle", to_json(pb)},
                                   {"checks", detail::checks_json(checks)}});
    return detail::all_pass(checks) ? exit_ok : exit_residual;
}

inline int cmd_rank1(const RunConfig& cfg, const CommandOptions& o, std::ostream& out) {
    auto t = cfg.truncation();
    auto pb = make_bundle(t, parse_convention(cfg.convention));
    Character delta{parse_scalar(t, o.beta), o.r, parse_scalar(t, o.s)};
    auto m = rank1_module(delta, pb, parse_rule(o.rule));
    detail::Emitter{out}.line(Json{{"command", "rank1"},
                                   {"config", to_json(cfg)},
                                   {"character", Json{{"beta", to_json(delta.beta)}, {"r", delta.r}, {"s", to_json(delta.s)}}},
                                   {"rule", o.rule},
                                   {"module", detail::module_json(m)}});
    return m.commutation->zero ? exit_ok : exit_residual;
}

inline int cmd_falsetate(const RunConfig& cfg, const CommandOptions& o, std::ostream& out) {
    auto t = cfg.truncation();
    auto pb = make_bundle(t, parse_convention(cfg.convention));
    auto m = false_tate_module(pb, o.literal);
    detail::Emitter{out}.line(
        Json{{"command", "falsetate"}, {"config", to_json(cfg)}, {"literal", o.literal}, {"module", detail::module_json(m)}});
    return m.commutation->zero ? exit_ok : exit_residual;
}

inline int cmd_trianguline(const RunConfig& cfg, const CommandOptions& o, std::ostream& out) {
    auto t = cfg.truncation();
    auto pb = make_bundle(t, parse_convention(cfg.convention));
    auto load = [&](const std::string& path) {
        if (path.empty()) return ModelElement(t);
        auto e = element_from_json(read_json_file(path));
        if (!(e.truncation() == t)) throw Error(ErrorCode::TruncationMismatch, "'" + path + "' is in a different window");
        return e;
    };
    TriangulineData d{o.k1, o.k2, parse_scalar(t, o.d1p), parse_scalar(t, o.d2p), load(o.alpha_file), load(o.beta_file)};
    auto m = trianguline_module(d, pb);
    bool diag = trianguline_diagonal_consistent(d, pb);
    detail::Emitter{out}.line(Json{{"command", "trianguline"},
                                   {"config", to_json(cfg)},
                                   {"crystalline", is_crystalline(d.beta_v)},
                                   {"diagonal_consistent", diag},
                                   {"module", detail::module_json(m)}});
    return diag ? exit_ok : exit_residual;
}

inline int cmd_family(const RunConfig& cfg, const CommandOptions& o, std::ostream& out) {
    auto t = cfg.truncation();
    auto pb = make_bundle(t, parse_convention(cfg.convention));
    auto beta = parse_scalar(t, o.beta), s0 = parse_scalar(t, o.s0);
    auto at = o.at.empty() ? s0 : parse_scalar(t, o.at);
    auto f = rank1_family(beta, o.r, s0, o.order, pb);
    auto base = specialize(f, s0);
    auto direct0 = rank1_module({beta, o.r, s0}, pb);
    bool exact = certify_zero(base.mat_phi - direct0.mat_phi).zero && certify_zero(*base.mat_tau - *direct0.mat_tau).zero;
    auto sp = specialize(f, at);
    auto direct = rank1_module({beta, o.r, at}, pb);
    long gauge = std::min(family_gauge(sp.mat_phi - direct.mat_phi), family_gauge(*sp.mat_tau - *direct.mat_tau));
    auto sigma = at - s0;
    // Taylor remainder: sigma^order times an integral coefficient.
    long bound = sigma.is_zero() ? t.N : std::min<long>(t.N, o.order * sigma.valuation());
    bool remainder_ok = gauge >= bound;
    detail::Emitter{out}.line(Json{{"command", "family"},
                                   {"config", to_json(cfg)},
                                   {"order", o.order},
                                   {"s0", to_json(s0)},
                                   {"at", to_json(at)},
                                   {"exact_at_s0", exact},
                                   {"gauge_vs_rank1", gauge},
                                   {"remainder_bound", bound},
                                   {"remainder_ok", remainder_ok},
                                   {"module", detail::module_json(sp)}});
    return exact && remainder_ok ? exit_ok : exit_residual;
}

inline int cmd_verify(const RunConfig& cfg, const CommandOptions& o, std::ostream& out, std::ostream& log) {
    auto t = cfg.truncation();
    auto pb = make_bundle(t, parse_convention(cfg.convention));
    std::vector<Check> checks;
    auto run = [&](const std::string& name, const std::function<std::vector<Check>()>& f) {
        if (o.suite != "all" && o.suite != name) return;
        log << "phitau: running " << name << " suite\n";
        auto cs = f();
        for (auto& c : cs) c.name = name + "/" + c.name;
        checks.insert(checks.end(), cs.begin(), cs.end());
    };
    if (o.suite != "all" && o.suite != "commutation" && o.suite != "congruence" && o.suite != "nnabla")
        throw Error(ErrorCode::Precondition, "unknown suite '" + o.suite + "'");
    run("commutation", [&] { return commutation_suite(pb); });
    run("congruence", [&] { return congruence_suite(pb); });
    run("nnabla", [&] { return nnabla_suite(pb, cfg.seed, o.count); });
    bool pass = detail::all_pass(checks);
    detail::Emitter{out}.line(Json{{"command", "verify"},
                                   {"config", to_json(cfg)},
                                   {"suite", o.suite},
                                   {"checks", detail::checks_json(checks)},
                                   {"pass", pass}});
    return pass ? exit_ok : exit_residual;
}

inline int cmd_descend(const RunConfig& cfg, const CommandOptions& o, std::ostream& out) {
    if (o.instance != "bivariate") throw Error(ErrorCode::Precondition, "unknown instance '" + o.instance + "'");
    if (o.d < 1 || o.trials < 0) throw Error(ErrorCode::Precondition, "need d >= 1 and trials >= 0");
    auto t = bivariate_window(cfg.p);
    t.N = cfg.N;
    long c = o.c ? o.c : cfg.p + 1;
    auto D = bivariate_datum(t, c);
    Rng rng(cfg.seed);
    detail::Emitter em{out};
    bool all = true;
    for (int k = 0; k < o.trials; ++k) {
        auto in = random_descent_input(D, t, rng, static_cast<size_t>(o.d));
        auto r = decompletion_descend(in.U, D);
        bool relation = certify_zero(r.M * r.W - in.U * r.M.map(D.gamma)).zero;
        bool descended = std::all_of(r.W.entries().begin(), r.W.entries().end(),
                                     [](const ModelElement& e) { return certify_zero(e - y_free_part(e)).zero; });
        bool translate = translate_uniqueness_check(inverse(in.C) * r.M, inverse(in.W0), r.W, D);
        bool capped = r.iterations <= 4 * t.N;
        bool ok = relation && descended && translate && capped;
        all = all && ok;
        em.line(Json{{"trial", k},
                     {"iterations", r.iterations},
                     {"gauges", r.gauges},
                     {"relation", relation},
                     {"descended", descended},
                     {"translate", translate},
                     {"W", to_json(r.W)}});
    }
    em.line(Json{{"command", "descend"}, {"config", to_json(cfg)}, {"instance", o.instance}, {"c", c}, {"pass", all}});
    return all ? exit_ok : exit_residual;
}

inline int cmd_factor(const RunConfig& cfg, const CommandOptions& o, std::ostream& out) {
    if (o.d < 1 || o.trials < 0) throw Error(ErrorCode::Precondition, "need d >= 1 and trials >= 0");
    auto t = laurent_window(cfg.p, o.half_width, cfg.N);
    Rng rng(cfg.seed);
    detail::Emitter em{out};
    bool all = true;
    int bound = detail::log2_ceil(t.N) + 1;
    for (int k = 0; k < o.trials; ++k) {
        auto U = random_laurent_near_one(t, rng, static_cast<size_t>(o.d));
        auto f = factor_near_identity(U);
        bool rec = negligible(f.U1 * f.U2 - U);
        bool sep = supported_on(f.U1, Side::r1) && supported_on(f.U2, Side::r2);
        bool fast = f.iterations <= bound;
        all = all && rec && sep && fast;
        em.line(Json{{"trial", k},
                     {"iterations", f.iterations},
                     {"reconstruction", rec},
                     {"separated", sep},
                     {"U", to_json(U)},
                     {"U1", to_json(f.U1)},
                     {"U2", to_json(f.U2)}});
    }
    em.line(Json{{"command", "factor"}, {"config", to_json(cfg)}, {"iteration_bound", bound}, {"pass", all}});
    return all ? exit_ok : exit_residual;
}

// Spec file: {"psi1": matrix, "psi2": matrix} for a gluing datum, or
// {"transitions": [matrix, ...]} for a chain of windows.
inline int cmd_glue(const RunConfig& cfg, const CommandOptions& o, std::ostream& out) {
    if (o.spec_file.empty()) throw Error(ErrorCode::Precondition, "glue needs --spec");
    auto spec = read_json_file(o.spec_file);
    if (spec.contains("transitions")) {
        std::vector<ElementMatrix> T;
        for (const auto& m : spec["transitions"]) T.push_back(matrix_from_json(m));
        auto r = bundle_splice(T);
        Json gs = Json::array();
        for (const auto& g : r.G) gs.push_back(to_json(g));
        detail::Emitter{out}.line(Json{{"command", "glue"},
                                       {"config", to_json(cfg)},
                                       {"windows", r.G.size()},
                                       {"units", r.units},
                                       {"relations", r.relations},
                                       {"G", gs}});
        return r.units && r.relations ? exit_ok : exit_residual;
    }
    auto psi1 = matrix_from_json(detail::require(spec, "psi1"));
    auto psi2 = matrix_from_json(detail::require(spec, "psi2"));
    auto m = resolve_gluing_datum({psi1.rows(), psi2.rows(), psi1, psi2});
    detail::Emitter{out}.line(Json{{"command", "glue"},
                                   {"config", to_json(cfg)},
                                   {"rank", m.rank},
                                   {"iterations", m.iterations},
                                   {"base_change_units", m.base_change_units},
                                   {"kernel_relation", m.kernel_relation},
                                   {"G1", to_json(m.G1)},
                                   {"G2", to_json(m.G2)}});
    return m.base_change_units && m.kernel_relation ? exit_ok : exit_residual;
}

// ---------------------------------------------------------------------------

inline int run_command(std::vector<std::string> args, std::ostream& out, std::ostream& log) {
    CLI::App app{"phitau: capped-precision (phi, tau)-module toolkit"};
    app.require_subcommand(1);
    RunConfig cfg;
    CommandOptions o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--p", cfg.p, "odd prime");
        sub->add_option("--N", cfg.N, "certification precision");
        sub->add_option("--xlo", cfg.x_lo, "lowest X exponent");
        sub->add_option("--xhi", cfg.x_hi, "X exponents below this are kept");
        sub->add_option("--yhi", cfg.y_hi, "Y exponents below this are kept");
        sub->add_option("--convention", cfg.convention, "lambda convention: kisin | negated");
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--out", cfg.out, "write artifacts to this file instead of stdout");
        sub->add_option("--config", o.config_file, "JSON file whose keys override the flags");
        return sub;
    };

    auto* periods = common(app.add_subcommand("periods", "period elements lambda, t, b, alpha as JSON"));
    auto* rank1 = common(app.add_subcommand("rank1", "rank-1 module of a character"));
    rank1->add_option("--beta", o.beta, "unit beta (a or a/b)");
    rank1->add_option("--r", o.r, "integer r");
    rank1->add_option("--s", o.s, "p-integral s (a or a/b)");
    rank1->add_option("--rule", o.rule, "tau exponent rule: commuting | statement | proof");
    auto* falsetate = common(app.add_subcommand("falsetate", "false Tate curve module"));
    falsetate->add_flag("--literal", o.literal, "use E(0)/E in Mat(phi)[0][0]");
    auto* triang = common(app.add_subcommand("trianguline", "rank-2 trianguline module"));
    triang->add_option("--k1", o.k1, "first weight (<= 0)");
    triang->add_option("--k2", o.k2, "second weight (<= 0)");
    triang->add_option("--d1p", o.d1p, "delta_1(p)");
    triang->add_option("--d2p", o.d2p, "delta_2(p)");
    triang->add_option("--alpha-file", o.alpha_file, "element JSON for alpha_V");
    triang->add_option("--beta-file", o.beta_file, "element JSON for beta_V");
    auto* family = common(app.add_subcommand("family", "weight family around s0, specialized at s"));
    family->add_option("--beta", o.beta, "unit beta");
    family->add_option("--r", o.r, "integer r");
    family->add_option("--s0", o.s0, "centre of the family");
    family->add_option("--order", o.order, "Taylor order m");
    family->add_option("--at", o.at, "specialization point (default s0)");
    auto* verify = common(app.add_subcommand("verify", "run verification suites"));
    verify->add_option("--suite", o.suite, "all | commutation | congruence | nnabla");
    verify->add_option("--count", o.count, "random samples per property");
    auto* descend = common(app.add_subcommand("descend", "Tate-Sen decompletion round trips"));
    descend->add_option("--instance", o.instance, "bivariate");
    descend->add_option("--d", o.d, "matrix size");
    descend->add_option("--trials", o.trials, "number of trials");
    descend->add_option("--c", o.c, "gamma_c parameter (default 1 + p)");
    auto* factor = common(app.add_subcommand("factor", "near-identity factorization U = U1 U2"));
    factor->add_option("--d", o.d, "matrix size");
    factor->add_option("--trials", o.trials, "number of trials");
    factor->add_option("--half-width", o.half_width, "Laurent window half width");
    auto* glue = common(app.add_subcommand("glue", "resolve a gluing datum or splice a chain of windows"));
    glue->add_option("--spec", o.spec_file, "JSON spec file");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, log);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, log);
    } catch (const CLI::ParseError& e) {
        log << "phitau: " << e.what() << "\n";
        return exit_usage;
    }

    try {
        if (!o.config_file.empty()) cfg = config_from_json(read_json_file(o.config_file), cfg);
        cfg.validate();
        std::ofstream file;
        if (!cfg.out.empty()) {
            file.open(cfg.out);
            if (!file) throw Error(ErrorCode::Precondition, "cannot write '" + cfg.out + "'");
        }
        std::ostream& sink = cfg.out.empty() ? out : file;
        int code = exit_ok;
        if (periods->parsed()) code = cmd_periods(cfg, sink);
        else if (rank1->parsed()) code = cmd_rank1(cfg, o, sink);
        else if (falsetate->parsed()) code = cmd_falsetate(cfg, o, sink);
        else if (triang->parsed()) code = cmd_trianguline(cfg, o, sink);
        else if (family->parsed()) code = cmd_family(cfg, o, sink);
        else if (verify->parsed()) code = cmd_verify(cfg, o, sink, log);
        else if (descend->parsed()) code = cmd_descend(cfg, o, sink);
        else if (factor->parsed()) code = cmd_factor(cfg, o, sink);
        else if (glue->parsed()) code = cmd_glue(cfg, o, sink);
        if (code != exit_ok) log << "phitau: asserted residuals did not vanish\n";
        return code;
    } catch (const Error& e) {
        log << "phitau: " << e.what() << "\n";
        return exit_code_for(e.code());
    }
}

}  // namespace phitau
