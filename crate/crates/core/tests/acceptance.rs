//! One PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.

use std::time::{Duration, Instant};

use dutyroster_core::check::{recount_soft, validate_hard};
use dutyroster_core::derive::DerivedSets;
use dutyroster_core::mip::{model_statistics, CanonicalModel};
use dutyroster_core::model::RosterInstance;
use dutyroster_core::par::ExecMode;
use dutyroster_core::pipeline::{prepare, run_pipeline};
use dutyroster_core::scenarios::{self, random_tiny};
use dutyroster_core::solver::cbc::solver_available;
use dutyroster_core::solver::*;

const RANDOM_INSTANCES: u64 = 100;
const ORACLE_TOL: f64 = 1e-6;
const ORACLE_SUITE_LIMIT: Duration = Duration::from_secs(600);
const SCALE_GAP: f64 = 0.03;
const SCALE_LIMIT_SECONDS: f64 = 600.0;
/// Time limit for the other demo scenarios, which are solved only to audit their rosters.
const AUDIT_LIMIT_SECONDS: f64 = 120.0;
const TARGET_TOL: f64 = 1e-9;
const PAPER_VARIABLES: f64 = 4e5;
const PAPER_CONSTRAINTS: f64 = 1e6;

#[derive(Default)]
struct Criterion {
    failures: Vec<String>,
    checked: usize,
}

impl Criterion {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn fail(&mut self, what: String) {
        self.checked += 1;
        self.failures.push(what);
    }
}

fn report(name: &str, c: &Criterion, detail: &str) -> bool {
    let ok = c.failures.is_empty() && c.checked > 0;
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("{verdict}  {name:<24} {detail}");
    for f in c.failures.iter().take(5) {
        println!("        {f}");
    }
    if c.failures.len() > 5 {
        println!("        ... {} more", c.failures.len() - 5);
    }
    ok
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn request(gap: f64, limit: f64, backend: Backend) -> SolveRequest {
    SolveRequest { gap, time_limit_seconds: limit, backend }
}

struct Context {
    double_entry: Criterion,
    reconcile: Criterion,
    targets: Criterion,
}

impl Context {
    /// Runs both checking routes over a solved roster.
    fn audit(&mut self, label: &str, raw: &RawSolution, model: &CanonicalModel, inst: &RosterInstance, der: &DerivedSets) {
        let roster = match extract_roster(raw, model, inst, der) {
            Ok(r) => r,
            Err(e) => return self.double_entry.fail(format!("{label}: {e}")),
        };
        match validate_hard(&roster, inst, der) {
            Ok(f) => self.double_entry.check(f.is_empty(), || format!("{label}: {} hard findings, first {:?}", f.len(), f[0])),
            Err(e) => self.double_entry.fail(format!("{label}: {e}")),
        }
        let Ok(t) = recount_soft(&roster, inst, der, &inst.weights) else { return };
        let obj = raw.objective.unwrap_or(f64::NAN);
        let scale = obj.abs().max(1.0);
        if raw.status == SolveStatus::OptimalWithinGap && raw.gap == Some(0.0) {
            self.reconcile.check(rel_close(t.objective, obj, ORACLE_TOL), || format!("{label}: recount {} vs solver {obj}", t.objective));
        } else {
            // an incumbent may leave violation variables slack, which only understates its value
            self.reconcile.check(t.objective >= obj - ORACLE_TOL * scale, || {
                format!("{label}: recount {} below solver {obj}", t.objective)
            });
        }
        match raw.bound {
            Some(bound) => self.reconcile.check(t.objective <= bound + ORACLE_TOL * scale, || {
                format!("{label}: recount {} above bound {bound}", t.objective)
            }),
            None => self.reconcile.fail(format!("{label}: solver reported no bound")),
        }
    }

    fn conserve(&mut self, label: &str, der: &DerivedSets) {
        for pl in &der.pools {
            if let Some(t) = &pl.targets {
                let sum: f64 = t.iter().sum();
                let n = pl.duties.len() as f64;
                self.targets.check((sum - n).abs() <= TARGET_TOL, || format!("{label}/{}: sum {sum} vs {n}", pl.id));
            }
        }
    }
}

fn main() {
    let cfg = SolverConfig::default();
    let external = solver_available(&cfg);
    let mut all = true;
    let mut ctx = Context { double_entry: Criterion::default(), reconcile: Criterion::default(), targets: Criterion::default() };

    // oracle equivalence over the random suite
    let mut equiv = Criterion::default();
    let mut infeasible = 0;
    let t0 = Instant::now();
    if !external {
        equiv.fail("external solver not found".into());
    }
    for seed in 0..RANDOM_INSTANCES {
        let inst = random_tiny(seed);
        let label = format!("random seed {seed}");
        let (der, model) = match prepare(&inst, ExecMode::Parallel) {
            Ok(x) => x,
            Err(e) => {
                equiv.fail(format!("{label}: {e}"));
                continue;
            }
        };
        ctx.conserve(&label, &der);
        let a = match solve(&model, &request(0.0, 60.0, Backend::Oracle), &cfg, ExecMode::Parallel) {
            Ok(a) => a,
            Err(e) => {
                equiv.fail(format!("{label}: oracle {e}"));
                continue;
            }
        };
        if a.status.has_solution() {
            ctx.audit(&format!("{label} oracle"), &a, &model, &inst, &der);
        } else {
            infeasible += 1;
        }
        if !external {
            continue;
        }
        match solve(&model, &request(0.0, 60.0, Backend::External), &cfg, ExecMode::Sequential) {
            Ok(b) => {
                equiv.check(a.status.has_solution() == b.status.has_solution(), || {
                    format!("{label}: oracle {:?}, external {:?}", a.status, b.status)
                });
                if let (Some(x), Some(y)) = (a.objective, b.objective) {
                    equiv.check((x - y).abs() <= ORACLE_TOL, || format!("{label}: oracle {x}, external {y}"));
                }
                if b.status.has_solution() {
                    ctx.audit(&format!("{label} external"), &b, &model, &inst, &der);
                }
            }
            Err(e) => equiv.fail(format!("{label}: external {e}")),
        }
    }
    let elapsed = t0.elapsed();
    equiv.check(elapsed <= ORACLE_SUITE_LIMIT, || format!("suite took {elapsed:?}"));
    let agree = RANDOM_INSTANCES as usize - equiv.failures.len().min(RANDOM_INSTANCES as usize);
    all &= report(
        "oracle-equivalence",
        &equiv,
        &format!("{agree}/{RANDOM_INSTANCES} agree, {infeasible} infeasible, {:.1} s", elapsed.as_secs_f64()),
    );

    // demo scenarios through the full pipeline
    let mut scale = Criterion::default();
    let mut scale_detail = String::from("not run");
    for name in scenarios::SCENARIOS {
        let inst = scenarios::by_name(name).unwrap();
        if let Ok((der, _)) = prepare(&inst, ExecMode::Parallel) {
            ctx.conserve(name, &der);
        }
        if !external {
            continue;
        }
        let limit = if name == "internal-medicine" { SCALE_LIMIT_SECONDS } else { AUDIT_LIMIT_SECONDS };
        let req = request(SCALE_GAP, limit, Backend::External);
        let t = Instant::now();
        match run_pipeline(&inst, &req, &cfg, ExecMode::Parallel) {
            Ok(out) => {
                let total = t.elapsed().as_secs_f64();
                ctx.audit(name, &out.raw, &out.model, &inst, &out.derived);
                if name == "internal-medicine" {
                    let gap = out.raw.gap.unwrap_or(f64::INFINITY);
                    scale.check(out.raw.status == SolveStatus::OptimalWithinGap, || format!("status {:?}", out.raw.status));
                    scale.check(gap <= SCALE_GAP + 1e-9, || format!("gap {gap}"));
                    scale.check(total <= SCALE_LIMIT_SECONDS, || format!("total {total:.1} s"));
                    scale_detail = format!(
                        "{} physicians, {} variables, gap {:.4}, solver {:.1} s, total {total:.1} s",
                        inst.physicians.len(),
                        out.model.variables.len(),
                        gap,
                        out.raw.solver_seconds
                    );
                }
            }
            Err(e) => {
                ctx.double_entry.fail(format!("{name}: {e}"));
                if name == "internal-medicine" {
                    scale.fail(format!("{e}"));
                }
            }
        }
    }
    if !external {
        scale.fail("external solver not found".into());
    }

    all &= report(
        "double-entry",
        &ctx.double_entry,
        &format!("{} rosters checked, {} with hard findings", ctx.double_entry.checked, ctx.double_entry.failures.len()),
    );
    all &= report(
        "objective-reconciliation",
        &ctx.reconcile,
        &format!("{} comparisons, {} mismatches", ctx.reconcile.checked, ctx.reconcile.failures.len()),
    );
    all &= report("im-scale", &scale, &scale_detail);

    // model size at department scale
    let mut size = Criterion::default();
    let full = scenarios::cardiology_full();
    let detail = match prepare(&full, ExecMode::Parallel) {
        Ok((der, model)) => {
            ctx.conserve("cardiology-full", &der);
            let s = model_statistics(&model);
            let (v, c) = (s.variables as f64, s.constraints as f64);
            size.check((PAPER_VARIABLES / 10.0..=PAPER_VARIABLES * 10.0).contains(&v), || format!("{v} variables"));
            size.check((PAPER_CONSTRAINTS / 10.0..=PAPER_CONSTRAINTS * 10.0).contains(&c), || format!("{c} constraints"));
            format!("{} physicians: {} variables, {} constraints", full.physicians.len(), s.variables, s.constraints)
        }
        Err(e) => {
            size.fail(e.to_string());
            "build failed".into()
        }
    };
    all &= report("model-size", &size, &detail);

    all &= report(
        "target-conservation",
        &ctx.targets,
        &format!("{} fair pools, tolerance {TARGET_TOL:e}", ctx.targets.checked),
    );

    // emit, parse, emit on every demo model
    let mut fix = Criterion::default();
    for name in scenarios::SCENARIOS.iter().copied().chain(["cardiology-full"]) {
        let Ok((_, model)) = prepare(&scenarios::by_name(name).unwrap(), ExecMode::Parallel) else {
            fix.fail(format!("{name}: build failed"));
            continue;
        };
        let ok = emit_mps(&model, name)
            .ok()
            .and_then(|a| parse_mps(&a.text, &a.names).ok().map(|m| (a, m)))
            .and_then(|(a, m)| emit_mps(&m, name).ok().map(|b| a == b))
            .unwrap_or(false);
        fix.check(ok, || format!("{name}: second emission differs"));
    }
    all &= report("mps-fixpoint", &fix, &format!("{} demo models byte-identical", fix.checked - fix.failures.len()));

    // structural family omission
    let mut omit = Criterion::default();
    let block_classes = ["xBlk", "yBlk", "yBlkCons", "vioMaxConsB"];
    let pool_classes = ["vioMaxD", "vioMinD", "vioMaxPhy", "vioDown", "vioUp"];
    let mut cases: Vec<(String, RosterInstance)> =
        scenarios::SCENARIOS.iter().map(|n| (n.to_string(), scenarios::by_name(n).unwrap())).collect();
    cases.extend((0..RANDOM_INSTANCES).map(|s| (format!("random seed {s}"), random_tiny(s))));
    for (label, inst) in &cases {
        let mut no_blocks = inst.clone();
        no_blocks.blocks.clear();
        no_blocks.carryover.blocks.clear();
        let mut no_pools = inst.clone();
        no_pools.pools.clear();
        for (variant, probe, classes, families) in [
            ("block-free", no_blocks, &block_classes[..], 21..=26u8),
            ("pool-free", no_pools, &pool_classes[..], 28..=36u8),
        ] {
            match prepare(&probe, ExecMode::Parallel) {
                Ok((_, model)) => {
                    let s = model_statistics(&model);
                    let vars: usize = classes.iter().filter_map(|c| s.per_class.get(*c)).sum();
                    let cons: usize = families.map(|f| s.family_total(f)).sum();
                    omit.check(vars == 0 && cons == 0, || format!("{label} {variant}: {vars} variables, {cons} constraints"));
                }
                // dropping a structure may expose an infeasible pre-assignment; nothing to assert then
                Err(_) => {}
            }
        }
    }
    all &= report("family-omission", &omit, &format!("{} configurations, exact zero counts", omit.checked));

    if !all {
        std::process::exit(1);
    }
}
