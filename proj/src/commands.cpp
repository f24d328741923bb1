#include "cocycle/commands.hpp"

#include <algorithm>
#include <set>

#include "cocycle/parallel.hpp"
#include "cocycle/report.hpp"

namespace cocycle {

using nlohmann::json;

namespace {

OutputContext context(const RunConfig& cfg) {
    return {cfg.output, cfg.hash, cfg.precision_bits, backend_name(cfg.backend)};
}

const char* yes(bool b) { return b ? "true" : "false"; }

CocycleSpec base_spec(const RunConfig& cfg, const RotationNumber& omega) {
    if (!cfg.phases) throw ConfigError(cfg.source + ": this command needs a 'phases' block");
    CocycleSpec s;
    s.omega = omega;
    s.phases = *cfg.phases;
    s.eps0 = cfg.eps0;
    s.epsilon = cfg.eps_grid.empty() ? cfg.eps0 / 2 : cfg.eps_grid.front();
    return s;
}

ConditionAReport recurrence_report(const RunConfig& cfg, const RotationNumber& omega) {
    const auto c = cfg.condition_constants();
    if (!c) throw ConfigError(cfg.source + ": non-constant phases need 'condition_A' constants or an omega builder");
    if (omega.conv.q.size() < 4) throw DepthExhausted("expansion too short for the recurrence check");
    const BrjunoReport b = brjuno_sum(omega, omega.conv.q.size() - 2);
    return check_condition_A(omega, *c, b.C_B);
}

void require_recurrence(const ConditionAReport& rep) {
    if (rep.pass) return;
    std::string msg = "omega fails the recurrence condition:";
    if (!rep.tail_holds) msg += " the growth subsequence has no recurrent tail (condition on q_{n+1} > C_omega q_n^(1+gamma));";
    if (!rep.spacing_holds) msg += " no admissible spacing chain;";
    for (const auto& v : rep.violations) msg += " [" + v.which + " at n=" + std::to_string(v.index) + "]";
    throw HypothesisError(msg);
}

json trig_json(const TrigPoly& f) {
    json j;
    j["a0"] = fmt(f.a0);
    j["cos"] = json::array();
    j["sin"] = json::array();
    for (double c : f.cos_coef) j["cos"].push_back(fmt(c));
    for (double s : f.sin_coef) j["sin"].push_back(fmt(s));
    return j;
}

json condition_json(const ConditionAReport& r, const RotationNumber& omega) {
    json j;
    j["constants"] = {{"gamma", r.constants.gamma}, {"C_omega", r.constants.C_omega},
                      {"C_eps", r.constants.C_eps}, {"C_delta", r.constants.C_delta}};
    j["C_B"] = r.C_B;
    j["subsequence"] = r.subsequence;
    json chain = json::array();
    for (std::size_t k = 0; k < r.chain.size(); ++k)
        chain.push_back({{"position", r.chain[k]}, {"q", r.chain_q(omega, k)}});
    j["chain"] = chain;
    j["recurrent_tail"] = r.tail_holds;
    j["spacing"] = r.spacing_holds;
    j["pass"] = r.pass;
    json v = json::array();
    for (const auto& x : r.violations) v.push_back({{"index", x.index}, {"which", x.which}});
    j["violations"] = v;
    return j;
}

json pipeline_json(const PipelineResult& r) {
    json j;
    j["epsilon"] = r.epsilon;
    j["p"] = r.p;
    j["excluded_by"] = r.excluded_by;
    j["detail"] = r.detail;
    j["kappa0"] = r.kappa0;
    j["converged"] = r.converged;
    json levels = json::array();
    for (const LevelReport& l : r.levels) {
        json lj;
        lj["level"] = l.layer.level;
        lj["kappa"] = l.layer.kappa;
        lj["delta"] = l.layer.delta;
        lj["tau"] = l.layer.tau;
        lj["cf_index"] = l.layer.cf_index;
        lj["first_secondary"] = l.first_secondary;
        lj["primary_time"] = l.log.primary_time(l.set.N());
        lj["slope_ok"] = l.slope_ok;
        json pts = json::array();
        for (const CriticalPoint& c : l.set.points)
            pts.push_back({{"x", c.x}, {"k", c.k + 1}, {"piece", c.piece}, {"branch", c.branch}});
        lj["points"] = pts;
        json ev = json::array();
        for (const CollisionEvent& e : l.log.events)
            ev.push_back({{"j", e.j}, {"j2", e.j2}, {"time", e.time}, {"kind", e.primary ? "primary" : "secondary"}});
        lj["collisions"] = ev;
        json ref = json::array();
        for (const PointLevelReport& p : l.points)
            ref.push_back({{"x_old", p.refine.x_old},
                           {"x_new", p.refine.x_new},
                           {"drift", p.refine.drift},
                           {"drift_scale", p.drift_scale},
                           {"A", static_cast<double>(p.refine.A)},
                           {"B", static_cast<double>(p.refine.B)},
                           {"C", static_cast<double>(p.refine.C)},
                           {"quadratic_conditions", {p.refine.quad_small, p.refine.quad_curvature, p.refine.quad_offset}},
                           {"newton_iterations", p.refine.newton_iterations},
                           {"sign_change", p.refine.sign_change},
                           {"unique", p.refine.unique},
                           {"chi", static_cast<double>(p.chi.chi_c)},
                           {"chi_d1", static_cast<double>(p.chi.d1)},
                           {"chi_d2", static_cast<double>(p.chi.d2)},
                           {"chi_ratio", p.chi_ratio},
                           {"d1_ratio", p.d1_ratio},
                           {"d2_ratio", p.d2_ratio},
                           {"mu_floor", static_cast<double>(p.chi.mu_floor)},
                           {"slope", p.slope},
                           {"slope_floor", p.slope_floor}});
        lj["refinement"] = ref;
        levels.push_back(lj);
    }
    j["levels"] = levels;
    return j;
}

json exclusion_json(const EpsilonExclusion& e) {
    json j;
    j["window"] = {e.window_lo, e.window_hi};
    j["p"] = e.p;
    json iv = json::array();
    for (const ExcludedInterval& i : e.intervals) iv.push_back({{"lo", i.lo}, {"hi", i.hi}, {"label", i.label}});
    j["intervals"] = iv;
    j["measure"] = e.measure;
    j["total"] = e.total();
    j["C_rho"] = e.C_rho;
    j["rho_span"] = e.rho_span;
    j["bound_sum"] = e.bound_sum;
    json b = json::array();
    for (const LevelBounds& l : e.bounds)
        b.push_back({{"level", l.level}, {"delta", l.delta}, {"tau", l.tau}, {"asymptotic", l.asymptotic},
                     {"literal", l.literal}, {"rigorous", l.rigorous}});
    j["bounds"] = b;
    return j;
}

std::int64_t default_steps(const RunConfig& cfg, const RotationNumber& omega) {
    if (!cfg.schedule.empty()) return *std::max_element(cfg.schedule.begin(), cfg.schedule.end());
    const auto& q = omega.conv.q;
    return q.size() > 8 ? q[8] : q.back();
}

int scan_theorem3(const RunConfig& cfg, const RotationNumber& omega, std::ostream& log) {
    const OutputContext ctx = context(cfg);
    const CocycleSpec base = base_spec(cfg, omega);
    if (!base.phases.all_phases_constant())
        throw HypothesisError("theorem3 mode needs a constant phase family");
    Theorem3Options o;
    o.n = default_steps(cfg, omega);
    o.grid_size = cfg.grid_size;
    o.slack = cfg.slack;
    o.thresholds = cfg.thresholds;
    o.backend = cfg.backend;
    const Theorem3Report rep = theorem3_scan(base, cfg.eps_grid, o);

    CsvTable verdict({"epsilon", "excluded", "uh", "inconclusive", "Lambda_min", "threshold", "meets_threshold", "Lambda0"});
    CsvTable table({"epsilon", "Lambda0", "excluded", "uh"});
    json witnesses = json::array();
    bool fail = false, unsure = false;
    for (const Theorem3Row& r : rep.rows) {
        verdict.row({fmt(r.epsilon), yes(r.excluded), yes(r.uh), yes(r.inconclusive), fmt(r.Lambda_min),
                     fmt(r.threshold), yes(r.meets_threshold), fmt(r.Lambda0)});
        table.row({fmt(r.epsilon), fmt(r.Lambda0), yes(r.excluded), yes(r.uh)});
        if (r.excluded) continue;
        if (!(r.uh && r.meets_threshold)) {
            fail = true;
            witnesses.push_back({{"epsilon", r.epsilon}, {"Lambda_min", r.Lambda_min}, {"threshold", r.threshold}});
        }
        unsure = unsure || r.inconclusive;
    }
    verdict.write(ctx, "verdict.csv");
    table.write(ctx, "table.csv");
    json summary;
    summary["mode"] = "theorem3";
    summary["steps"] = o.n;
    summary["surviving"] = rep.surviving;
    summary["all_surviving_uh"] = rep.all_surviving_uh;
    if (!rep.rows.empty()) summary["exclusion"] = exclusion_json(rep.exclusion);
    write_json(ctx, "witnesses.json", {{"witnesses", witnesses}, {"summary", summary}});
    log << "theorem3: " << rep.surviving << " surviving of " << rep.rows.size() << ", all uh: " << yes(rep.all_surviving_uh)
        << '\n';
    return fail ? kFail : (unsure ? kInconclusive : kPass);
}

int scan_theorem4(const RunConfig& cfg, const RotationNumber& omega, std::ostream& log) {
    const OutputContext ctx = context(cfg);
    const CocycleSpec base = base_spec(cfg, omega);
    base.phases.require_nondegenerate();
    const ConditionAReport cond = recurrence_report(cfg, omega);
    require_recurrence(cond);
    Theorem4Options o;
    o.samples = cfg.samples;
    o.seed = cfg.seed;
    o.witness_ratio = cfg.witness_ratio;
    o.backend = cfg.backend;
    o.pipeline.max_level = cfg.max_level;
    const Theorem4Report rep = theorem4_scan(base, cond, cfg.eps_grid, o);

    CsvTable verdict({"epsilon", "p", "excluded_by", "kappa0", "C_A", "C_B", "n", "samples", "in_Xh", "Xh_floor",
                      "Lambda0", "Lambda0_spread", "bound", "bound_ok", "median_tau0", "witness_ok", "C_Lambda_fit",
                      "max_drift"});
    CsvTable table({"epsilon", "Lambda0", "excluded", "non_ed_witness"});
    json witnesses = json::array();
    for (const Theorem4Row& r : rep.rows) {
        verdict.row({fmt(r.epsilon), std::to_string(r.p), r.excluded_by, fmt(r.kappa0), fmt(r.C_A), fmt(r.C_B),
                     std::to_string(r.n), std::to_string(r.samples), std::to_string(r.in_Xh), fmt(r.Xh_floor),
                     fmt(r.Lambda0), fmt(r.Lambda0_spread), fmt(r.bound), yes(r.bound_ok), fmt(r.median_tau0),
                     yes(r.witness_ok), fmt(r.C_Lambda_fit), fmt(r.max_drift)});
        table.row({fmt(r.epsilon), fmt(r.Lambda0), yes(!r.survives()), yes(r.survives() && r.witness_ok)});
        if (!r.survives() || r.p == 0) continue;
        json w = json::array();
        for (const WitnessRow& x : r.witnesses) w.push_back({{"x", x.x}, {"rate", x.rate}, {"ratio", x.ratio}});
        witnesses.push_back({{"epsilon", r.epsilon}, {"median_tau0", r.median_tau0}, {"points", w}});
    }
    verdict.write(ctx, "verdict.csv");
    table.write(ctx, "table.csv");
    json summary;
    summary["mode"] = "theorem4";
    summary["surviving"] = rep.surviving;
    summary["bound_violations"] = rep.bound_violations;
    summary["witness_failures"] = rep.witness_failures;
    summary["condition_A"] = condition_json(cond, omega);
    write_json(ctx, "witnesses.json", {{"witnesses", witnesses}, {"summary", summary}});
    log << "theorem4: " << rep.surviving << " surviving of " << rep.rows.size() << ", bound violations "
        << rep.bound_violations << ", witness failures " << rep.witness_failures << '\n';
    return rep.bound_violations + rep.witness_failures > 0 ? kFail : kPass;
}

}  // namespace

int cmd_cf(const RunConfig& cfg, std::ostream& log) {
    const OutputContext ctx = context(cfg);
    const RotationNumber omega = cfg.build_omega();
    CsvTable conv({"n", "a_n", "p_n", "q_n"});
    for (std::size_t n = 0; n < omega.conv.q.size(); ++n)
        conv.row({std::to_string(n), n == 0 ? "" : std::to_string(omega.quotients[n - 1]),
                  std::to_string(omega.conv.p[n]), std::to_string(omega.conv.q[n])});
    conv.write(ctx, "convergents.csv");

    json om;
    om["quotients"] = omega.quotients;
    om["value"] = omega.value.str(static_cast<std::streamsize>(digits10_for_bits(omega.precision_bits)));
    om["resolution"] = omega.resolution();
    om["rational"] = omega.rational;
    write_json(ctx, "omega.json", om);

    if (omega.conv.q.size() >= 3) {
        const BrjunoReport b = brjuno_sum(omega, omega.conv.q.size() - 2);
        write_json(ctx, "brjuno.json",
                   {{"partial_sums", b.partial_sums}, {"C_B", b.C_B}, {"depth", b.depth}, {"tail_bound", b.tail_bound}});
        if (const auto c = cfg.condition_constants()) {
            const ConditionAReport rep = check_condition_A(omega, *c, b.C_B);
            write_json(ctx, "condition_A.json", condition_json(rep, omega));
            log << "recurrence condition: " << (rep.pass ? "pass" : "fail") << '\n';
        }
    } else {
        log << "expansion too short for the Brjuno sum\n";
    }
    log << "cf: " << omega.quotients.size() << " quotients\n";
    return kPass;
}

int cmd_critical_set(const RunConfig& cfg, std::ostream& log) {
    const OutputContext ctx = context(cfg);
    const RotationNumber omega = cfg.build_omega();
    const CocycleSpec base = base_spec(cfg, omega);
    CsvTable sweep({"epsilon", "N", "excluded_by"});
    if (base.phases.all_phases_constant()) {
        log << "constant phase family: no critical points, computing the resonance exclusion only\n";
        CsvTable ledger({"lo", "hi", "label", "length"});
        json ex = json::object();
        if (!cfg.eps_grid.empty()) {
            const auto [lo, hi] = std::minmax_element(cfg.eps_grid.begin(), cfg.eps_grid.end());
            if (*hi > *lo) {
                const EpsilonExclusion e = constant_phase_exclusion(base.phases, *lo, *hi);
                for (const ExcludedInterval& i : e.intervals)
                    ledger.row({fmt(i.lo), fmt(i.hi), i.label, fmt(i.hi - i.lo)});
                ex = exclusion_json(e);
                for (double eps : cfg.eps_grid) sweep.row({fmt(eps), "0", e.excluded(eps) ? kLabelResonance : ""});
            }
        }
        ledger.write(ctx, "exclusion.csv");
        sweep.write(ctx, "sweep.csv");
        write_json(ctx, "critical_set.json", {{"mode", "resonance"}, {"exclusion", ex}});
        return kPass;
    }
    base.phases.require_nondegenerate();
    const ConditionAReport cond = recurrence_report(cfg, omega);
    require_recurrence(cond);
    PipelineOptions po;
    po.max_level = cfg.max_level;

    std::vector<PipelineResult> runs(cfg.eps_grid.size());
    parallel_for(cfg.eps_grid.size(), [&](std::size_t i) {
        CocycleSpec s = base;
        s.epsilon = cfg.eps_grid[i];
        try {
            runs[i] = run_pipeline(s, cond, po);
        } catch (const Error& e) {
            throw Error("eps = " + fmt(s.epsilon) + ": " + e.what());
        }
    });
    CsvTable points({"epsilon", "level", "j", "k", "branch", "x", "drift"});
    json dump = json::array();
    for (const PipelineResult& r : runs) {
        sweep.row({fmt(r.epsilon), std::to_string(r.p), r.excluded_by});
        dump.push_back(pipeline_json(r));
        for (const LevelReport& l : r.levels)
            for (std::size_t j = 0; j < l.set.points.size(); ++j) {
                const CriticalPoint& c = l.set.points[j];
                const double drift = j < l.points.size() ? l.points[j].refine.drift : 0;
                points.row({fmt(r.epsilon), std::to_string(l.layer.level), std::to_string(j), std::to_string(c.k + 1),
                            std::to_string(c.branch), fmt(c.x), fmt(drift)});
            }
    }
    sweep.write(ctx, "sweep.csv");
    points.write(ctx, "points.csv");
    write_json(ctx, "critical_set.json", {{"mode", "pipeline"}, {"condition_A", condition_json(cond, omega)}, {"runs", dump}});

    CsvTable ledger({"window_lo", "window_hi", "p", "lo", "hi", "label", "length"});
    json windows = json::array();
    if (cfg.eps_grid.size() >= 2) {
        const auto [lo, hi] = std::minmax_element(cfg.eps_grid.begin(), cfg.eps_grid.end());
        if (*hi > *lo) {
            ScanOptions so;
            so.grid = cfg.exclusion_grid;
            so.pipeline = po;
            for (const EpsilonWindow& w : epsilon_windows(base.phases, *lo, *hi, cfg.exclusion_grid)) {
                if (w.p == 0) continue;
                const EpsilonExclusion e = exclusion_scan(base, cond, w, so);
                for (const ExcludedInterval& i : e.intervals)
                    ledger.row({fmt(w.lo), fmt(w.hi), std::to_string(w.p), fmt(i.lo), fmt(i.hi), i.label, fmt(i.hi - i.lo)});
                windows.push_back(exclusion_json(e));
            }
        }
    }
    ledger.write(ctx, "exclusion.csv");
    write_json(ctx, "exclusion.json", {{"windows", windows}});
    log << "critical-set: " << runs.size() << " epsilon values\n";
    return kPass;
}

int cmd_scan(const RunConfig& cfg, std::ostream& log) {
    const RotationNumber omega = cfg.build_omega();
    if (cfg.mode == "theorem3") return scan_theorem3(cfg, omega, log);
    return scan_theorem4(cfg, omega, log);
}

int cmd_schrodinger(const RunConfig& cfg, std::ostream& log) {
    if (!cfg.potential) throw ConfigError(cfg.source + ": schrodinger needs a 'potential' block");
    const OutputContext ctx = context(cfg);
    const PotentialConfig& pc = *cfg.potential;
    TorusPotential pot{pc.terms, cfg.build_omega()};
    const std::size_t G = pc.x_grid;
    std::vector<SegmentDecomposition> dec(G);
    std::vector<std::vector<LineSample>> samples(G);
    parallel_for(G, [&](std::size_t i) {
        const double x = static_cast<double>(i) / static_cast<double>(G);
        dec[i] = decompose_segment(pot, x);
        if (dec[i].degenerate)
            throw DegenerateInput("potential keeps one sign along the line through x = " + fmt(x) +
                                  "; there are no oscillatory components to ingest");
        samples[i] = line_integrals(dec[i], pot);
    });
    const std::size_t K = dec.front().K;
    for (std::size_t i = 0; i < G; ++i)
        if (dec[i].K != K)
            throw DegenerateInput("component count changes from " + std::to_string(K) + " to " +
                                  std::to_string(dec[i].K) + " at x = " + fmt(dec[i].x));
    CsvTable table({"x", "K", "k", "phi_hat", "lambda_hat", "phi_error", "lambda_error"});
    for (std::size_t i = 0; i < G; ++i)
        for (std::size_t k = 0; k < K; ++k) {
            const LineSample& s = samples[i][k];
            table.row({fmt(dec[i].x), std::to_string(K), std::to_string(k + 1), fmt(s.phi_hat), fmt(s.lambda_hat),
                       fmt(s.phi_error), fmt(s.lambda_error)});
        }
    table.write(ctx, "phases.csv");

    std::vector<PhaseEntry> entries;
    json fam = json::array();
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<double> phi, lam;
        for (std::size_t i = 0; i < G; ++i) {
            phi.push_back(samples[i][k].phi_hat);
            lam.push_back(samples[i][k].lambda_hat);
        }
        PhaseEntry e{fit_trig_poly(phi, pc.max_degree), fit_trig_poly(lam, pc.max_degree)};
        // coefficients at quadrature-noise level are dropped
        for (TrigPoly* f : {&e.phi_hat, &e.lambda_hat}) {
            const double tol = 1e-9 * std::max(1.0, std::abs(f->a0));
            for (double& c : f->cos_coef)
                if (std::abs(c) < tol) c = 0;
            for (double& c : f->sin_coef)
                if (std::abs(c) < tol) c = 0;
        }
        fam.push_back({{"phi", trig_json(e.phi_hat)}, {"lambda", trig_json(e.lambda_hat)}});
        entries.push_back(std::move(e));
    }
    write_json(ctx, "phase_family.json", {{"K", K}, {"phases", fam}});
    log << "schrodinger: K = " << K << " on " << G << " fibres\n";
    if (!pc.chain || cfg.eps_grid.empty()) return kPass;

    RunConfig chained = cfg;
    chained.potential.reset();
    chained.phases = PhaseFamily(std::move(entries));
    chained.mode = chained.phases->all_phases_constant() ? "theorem3" : "theorem4";
    log << "chaining into scan, mode " << chained.mode << '\n';
    return cmd_scan(chained, log);
}

}  // namespace cocycle
