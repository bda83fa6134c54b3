use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use supercon_core::certifier::{
    cell_slacks_csv, certify_expansion_lemma, certify_pair_lemma, default_expansion_intervals,
    CertReport, ExpansionParams, GridOptions, PairParams,
};
use supercon_core::entropy::{stirling_envelope, stirling_gap};
use supercon_core::probability::{
    exact_plr, expansion_fail_bound, montecarlo_plr, pair_fail_bound, plr_with, BoundValue,
    PkConvention,
};
use supercon_core::profiles::{
    check_conditions, make_e_profile, make_o_profile, parse_decimal, ProfileConstants,
};
use supercon_core::randgraph::{
    check_expander_profile, check_pair_profile, sample_g, sample_g_simple, CheckOptions,
};
use supercon_core::superconcentrator::{
    build_gamma, verify_superconcentrator, Acceptance, BuildConfig, ExpanderSource, VerifyMode,
};
use supercon_core::{BipartiteGraph, Error, SuperDag};

use crate::args::*;

struct Run<'a> {
    cli: &'a Cli,
    name: &'static str,
    outputs: Vec<String>,
}

impl<'a> Run<'a> {
    fn write(&mut self, file: &str, contents: &str) -> Result<()> {
        let path = self.cli.out_dir.join(file);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(file.to_string());
        Ok(())
    }

    fn write_json(&mut self, file: &str, value: &impl Serialize) -> Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.write(file, &text)
    }

    /// Echoes the resolved configuration next to the outputs.
    fn finish(mut self, pass: bool, summary: String, extra: Value) -> Result<bool> {
        println!("{summary}");
        let manifest = json!({
            "command": self.name,
            "config": self.cli,
            "outputs": self.outputs,
            "pass": pass,
            "summary": summary,
            "details": extra,
        });
        let file = format!("{}.manifest.json", self.name);
        self.write_json(&file, &manifest)?;
        Ok(pass)
    }
}

pub fn run(cli: &Cli) -> Result<bool> {
    fs::create_dir_all(&cli.out_dir)
        .with_context(|| format!("creating {}", cli.out_dir.display()))?;
    match &cli.command {
        Command::CertifyPair(a) => certify_pair(cli, a),
        Command::CertifyExpansion(a) => certify_expansion(cli, a),
        Command::CheckConditions(a) => conditions(cli, a),
        Command::SampleExpander(a) => sample_expander(cli, a),
        Command::CheckExpansion(a) => check_expansion(cli, a),
        Command::BuildSc(a) => build_sc(cli, a),
        Command::VerifySc(a) => verify_sc(cli, a),
        Command::ProbBound(a) => prob_bound(cli, a),
        Command::ExactPlr(a) => exact(cli, a),
        Command::McPlr(a) => mc(cli, a),
        Command::StirlingScan(a) => stirling(cli, a),
    }
}

fn start<'a>(cli: &'a Cli, name: &'static str) -> Run<'a> {
    Run {
        cli,
        name,
        outputs: Vec::new(),
    }
}

fn grid_options(g: &GridArgs) -> GridOptions {
    GridOptions {
        grid_n: g.grid,
        margin: g.margin,
        keep_cells: g.cells_csv,
    }
}

fn cert_summary(r: &CertReport) -> String {
    let cell = r
        .argmin_cell
        .map(|c| format!(" at cell ({}, {}, {})", c.interval, c.i, c.j))
        .unwrap_or_default();
    format!(
        "{} lemma: {} min slack {:.7}{cell} (margin {}), {} corners, {} failing cells, {} refined, {:.2}s",
        r.lemma,
        if r.pass { "PASS" } else { "FAIL" },
        r.min_slack,
        r.margin,
        r.corners_evaluated,
        r.failing_count,
        r.refined_cells,
        r.runtime.as_secs_f64()
    )
}

fn certify_pair(cli: &Cli, a: &CertifyPair) -> Result<bool> {
    let mut run = start(cli, "certify-pair");
    let params = PairParams {
        delta: a.delta,
        gamma: a.gamma,
        p: a.p,
    };
    let (r, cells) = certify_pair_lemma(params, (a.x_min, a.x_max), &grid_options(&a.grid))?;
    run.write("certify-pair.json", &(r.to_json()? + "\n"))?;
    if a.grid.cells_csv {
        run.write("certify-pair.cells.csv", &cell_slacks_csv(&cells))?;
    }
    let s = cert_summary(&r);
    run.finish(r.pass, s, json!({ "min_slack": r.min_slack }))
}

fn constants(c1: &str, c3: &str) -> Result<ProfileConstants> {
    Ok(ProfileConstants::from_c1_c3(parse_decimal(c1)?, parse_decimal(c3)?))
}

fn certify_expansion(cli: &Cli, a: &CertifyExpansion) -> Result<bool> {
    let mut run = start(cli, "certify-expansion");
    let c = constants(&a.c1, &a.c3)?;
    let intervals = if a.intervals.is_empty() {
        default_expansion_intervals(&c)
    } else {
        a.intervals.clone()
    };
    let params = ExpansionParams {
        delta: a.delta,
        big_delta: a.big_delta,
    };
    let (r, cells) = certify_expansion_lemma(params, &c, &intervals, &grid_options(&a.grid))?;
    run.write("certify-expansion.json", &(r.to_json()? + "\n"))?;
    if a.grid.cells_csv {
        run.write("certify-expansion.cells.csv", &cell_slacks_csv(&cells))?;
    }
    for s in &r.intervals {
        println!(
            "  [{}, {}]: {} min slack {:.7}",
            s.x_range.0,
            s.x_range.1,
            if s.pass { "PASS" } else { "FAIL" },
            s.min_slack
        );
    }
    let s = cert_summary(&r);
    run.finish(r.pass, s, json!({ "min_slack": r.min_slack }))
}

fn conditions(cli: &Cli, a: &ConstantsArgs) -> Result<bool> {
    let mut run = start(cli, "check-conditions");
    let mut c = constants(&a.c1, &a.c3)?;
    c.degree = a.degree;
    c.delta = a.frac_delta;
    c.gamma = a.gamma;
    c.pair_eps1 = a.eps1;
    let report = check_conditions(&c);
    for row in &report.conditions {
        println!(
            "  {} {:<45} slack {:.6}",
            if row.holds { "PASS" } else { "FAIL" },
            row.name,
            row.slack
        );
    }
    run.write_json("check-conditions.json", &report)?;
    if let Ok(e) = make_e_profile(&c) {
        run.write("e_profile.txt", &e.to_text())?;
    }
    if let Ok(o) = make_o_profile(&c) {
        run.write("o_profile.txt", &o.to_text())?;
    }
    let failed = report.conditions.iter().filter(|r| !r.holds).count();
    let s = format!(
        "conditions: {} ({} of {} hold)",
        if report.pass { "PASS" } else { "FAIL" },
        report.conditions.len() - failed,
        report.conditions.len()
    );
    run.finish(report.pass, s, Value::Null)
}

fn sample(spec: &GraphSpec, simple: bool) -> Result<BipartiteGraph> {
    Ok(if simple {
        sample_g_simple(spec.n, spec.d, spec.delta, spec.seed, 10_000)?
    } else {
        sample_g(spec.n, spec.d, spec.delta, spec.seed)?
    })
}

fn sample_expander(cli: &Cli, a: &SampleExpander) -> Result<bool> {
    let mut run = start(cli, "sample-expander");
    let g = sample(&a.graph, a.simple)?;
    let (file, text) = match a.format {
        Format::Text => ("graph.txt", g.to_text()),
        Format::Dot => ("graph.dot", g.to_dot()),
        Format::Json => ("graph.json", serde_json::to_string_pretty(&g)? + "\n"),
        Format::Csv => bail!("csv is not a graph format; use text, dot or json"),
    };
    run.write(file, &text)?;
    let s = format!(
        "G({}, {}, {}) seed {}: {} edges written to {file}",
        a.graph.n,
        a.graph.d,
        a.graph.delta,
        a.graph.seed,
        g.edge_count()
    );
    run.finish(true, s, json!({ "edges": g.edge_count() }))
}

fn load_graph(path: &Path) -> Result<BipartiteGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(BipartiteGraph::from_text(&text)?)
}

fn check_expansion(cli: &Cli, a: &CheckExpansion) -> Result<bool> {
    let mut run = start(cli, "check-expansion");
    let g = match &a.graph {
        Some(p) => load_graph(p)?,
        None => sample(&a.sample, false)?,
    };
    let c = constants(&a.c1, &a.c3)?;
    let e = make_e_profile(&c)?;
    let opts = CheckOptions {
        budget: a.budget,
        heuristic_trials: a.trials,
        seed: a.sample.seed,
    };
    let k_max = a.k_max.unwrap_or(g.n());
    let exp = check_expander_profile(&g, &e, k_max, &opts)?;
    let pair = if a.pair {
        Some(check_pair_profile(&g, a.pair_gamma, c.c_f64()[2], &opts)?)
    } else {
        None
    };
    let pass = exp.pass && pair.as_ref().is_none_or(|p| p.pass);
    run.write_json(
        "check-expansion.json",
        &json!({ "expansion": exp, "pair": pair }),
    )?;
    let mut s = format!(
        "expansion: {} (exhaustive through k = {}, complete = {})",
        if exp.pass { "PASS" } else { "FAIL" },
        exp.exhaustive_through(),
        exp.complete
    );
    if let Some((k, w)) = &exp.first_failure {
        s += &format!(", fails at k = {k} with witness {w:?}");
    }
    if let Some(p) = &pair {
        s += &format!(
            "; pair: {} (exhaustive through k = {})",
            if p.pass { "PASS" } else { "FAIL" },
            p.exhaustive_through()
        );
        if let Some((k, w)) = &p.first_failure {
            s += &format!(", fails at k = {k} with witness {w:?}");
        }
    }
    run.finish(pass, s, Value::Null)
}

fn build_sc(cli: &Cli, a: &BuildSc) -> Result<bool> {
    let mut run = start(cli, "build-sc");
    let source = if a.complete {
        ExpanderSource::CompleteBipartite
    } else {
        ExpanderSource::SeededRandom {
            d: a.d,
            delta: a.delta,
            seed: a.seed,
            retry_limit: a.retry_limit,
        }
    };
    let acceptance = a.accept.then(|| Acceptance {
        constants: ProfileConstants::theorem3(),
        options: CheckOptions {
            budget: a.budget,
            heuristic_trials: a.trials,
            seed: a.seed,
        },
    });
    let cfg = BuildConfig {
        base_size: a.base,
        source,
        acceptance,
    };
    let g = match build_gamma(a.n, &cfg) {
        Ok(g) => g,
        Err(e @ Error::RetryExhausted { .. }) => {
            let s = format!("build: FAIL {e}");
            return run.finish(false, s, Value::Null);
        }
        Err(e) => return Err(e.into()),
    };
    run.write("gamma.json", &(g.to_json()? + "\n"))?;
    if a.dot {
        run.write("gamma.dot", &g.to_dot())?;
    }
    let per_level: Vec<usize> = g.levels().iter().map(|l| l.edges_added).collect();
    let s = format!(
        "Γ_{}: {} nodes, {} edges, density {:.4}; edges per level {:?}",
        g.n(),
        g.nodes().len(),
        g.edge_count(),
        g.density(),
        per_level
    );
    let details = json!({
        "edge_count": g.edge_count(),
        "density": g.density(),
        "levels": g.levels(),
    });
    run.finish(true, s, details)
}

fn verify_sc(cli: &Cli, a: &VerifySc) -> Result<bool> {
    let mut run = start(cli, "verify-sc");
    let path: PathBuf = a.graph.clone().unwrap_or_else(|| cli.out_dir.join("gamma.json"));
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let g = SuperDag::from_json(&text)?;
    let mode = match a.mode {
        Mode::Exhaustive => VerifyMode::Exhaustive { budget: a.budget },
        Mode::Sampled => VerifyMode::Sampled {
            trials: a.trials,
            seed: a.seed,
        },
    };
    let rep = verify_superconcentrator(&g, mode)?;
    run.write_json("verify-sc.json", &rep)?;
    let mut s = format!(
        "verify Γ_{}: {} after {} (S, T) pairs",
        g.n(),
        if rep.pass { "PASS" } else { "FAIL" },
        rep.pairs_checked
    );
    if let Some(c) = &rep.counterexample {
        s += &format!(
            "; S = {:?}, T = {:?} has only {} disjoint paths",
            c.s, c.t, c.paths
        );
    }
    run.finish(rep.pass, s, Value::Null)
}

fn bound_json(b: &BoundValue) -> Value {
    json!({
        "log_value": b.log_value,
        "value": b.value(),
        "exact": b.exact.as_ref().map(|q| format!("{}/{}", q.numer(), q.denom())),
        "regime": b.regime,
    })
}

fn prob_bound(cli: &Cli, a: &ProbBound) -> Result<bool> {
    let mut run = start(cli, "prob-bound");
    let b = match a.kind {
        BoundKind::Pair => pair_fail_bound(a.n, a.d, a.delta, a.k, a.m)?,
        BoundKind::Expansion => expansion_fail_bound(a.n, a.d, a.delta, a.k, a.m)?,
    };
    let v = bound_json(&b);
    run.write_json("prob-bound.json", &v)?;
    let shown = match &b.exact {
        Some(q) => format!("{}/{} ≈ {:.6e}", q.numer(), q.denom(), b.value()),
        None => format!("exp({:.6}) ≈ {:.6e}", b.log_value, b.value()),
    };
    run.finish(true, shown, v)
}

fn exact(cli: &Cli, a: &Plr) -> Result<bool> {
    let mut run = start(cli, "exact-plr");
    let text = if a.complement {
        let q = plr_with(a.n, a.ell, a.r, a.d, PkConvention::Complement)?;
        format!("{}/{}", q.numer(), q.denom())
    } else {
        exact_plr(a.n, a.ell, a.r, a.d)?.to_string()
    };
    run.write_json("exact-plr.json", &json!({ "value": text }))?;
    run.finish(true, text, Value::Null)
}

fn mc(cli: &Cli, a: &McPlr) -> Result<bool> {
    let mut run = start(cli, "mc-plr");
    let m = montecarlo_plr(a.n, a.ell, a.r, a.d, a.trials, a.seed)?;
    run.write_json("mc-plr.json", &m)?;
    let s = format!("{} ± {} ({} of {} trials)", m.estimate, m.stderr, m.hits, m.trials);
    run.finish(true, s, Value::Null)
}

fn stirling(cli: &Cli, a: &StirlingScan) -> Result<bool> {
    let mut run = start(cli, "stirling-scan");
    let mut csv = String::from("n,argmax_k,max_gap,envelope,pass\n");
    let mut all = true;
    for &n in &a.ns {
        let (k, gap) = (0..=n)
            .map(|k| stirling_gap(n, k).map(|g| (k, g)))
            .collect::<std::result::Result<Vec<_>, _>>()?
            .into_iter()
            .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        let env = stirling_envelope(n);
        let pass = gap < env;
        all &= pass;
        println!("  n = {n}: max gap {gap:.6e} at k = {k}, envelope {env:.6e}");
        csv += &format!("{n},{k},{gap},{env},{pass}\n");
    }
    run.write("stirling-scan.csv", &csv)?;
    let s = format!("stirling scan: {}", if all { "PASS" } else { "FAIL" });
    run.finish(all, s, Value::Null)
}
