//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use singlab::constructor::{
    mult_bound, mult_net, multi_mult_budget, multi_mult_net, piece_indicator_net, piecewise_smooth_net, sawtooth_closed_form, sawtooth_net,
    smooth_net, square_bound, square_net, step_l2_error, step_net, sup_error_grid, teeth_net, ApproxReport, ErrorNorm, Region,
};
use singlab::estimators::{fit, CurveletConfig, DnnConfig, EstimatorKind, FitConfig, KernelConfig};
use singlab::funcgen::{
    gen_dataset, make_pieces, named_target_with, sample_holder, HolderFn, PiecewiseSmoothFn, Target, TARGET_NAMES,
};
use singlab::harness::{
    approx_sweep, default_points, fit_slope, l2_error, rate_sweep, theoretical_rates, with_workers, RateTable, SweepBuilder, SweepSpec,
    Tuning, RATE_CSV_HEADER,
};
use singlab::rng::derive_seed;
use singlab::Network;

use crate::config::RunConfig;
use crate::CliError;

/// Outcome of a command: lines for stdout, and whether a checked bound failed.
pub struct Outcome {
    pub lines: Vec<String>,
    pub violation: Option<String>,
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    std::fs::write(dir.join(name), contents).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", dir.join(name).display())))
}

pub fn write_manifest(cfg: &RunConfig) -> Result<(), CliError> {
    write(&cfg.out_dir(), "manifest.txt", &cfg.manifest())
}

/// The piecewise smooth target named by `target`.
pub fn piecewise_target(cfg: &RunConfig) -> Result<PiecewiseSmoothFn, CliError> {
    let name = cfg.raw("target");
    let dim: usize = cfg.get("D")?;
    let alpha = cfg.opt::<f64>("alpha")?.unwrap_or(if name == "graph-indicator-rough" { 1.0 } else { 2.0 });
    let beta = cfg.opt::<f64>("beta")?.unwrap_or(2.0);
    if name == "random" {
        let seed = cfg.seed()?;
        let radius: f64 = cfg.get("radius")?;
        let m: usize = cfg.get("M")?;
        let pieces = make_pieces(seed, alpha, radius, cfg.get("J")?, m, dim)?;
        let fs = (0..pieces.num_pieces()).map(|i| sample_holder(derive_seed(seed, &[i as u64]), beta, radius, dim)).collect();
        return Ok(PiecewiseSmoothFn::new("random", pieces, fs, alpha, beta, singlab::funcgen::Domain::UnitCube)?);
    }
    if !TARGET_NAMES.contains(&name) {
        return Err(CliError::Usage(format!("unknown target '{name}' (known: {}, random)", TARGET_NAMES.join(", "))));
    }
    Ok(named_target_with(name, alpha, beta, dim)?)
}

fn points(cfg: &RunConfig, discontinuous: bool) -> Result<usize, CliError> {
    Ok(cfg.opt("points")?.unwrap_or(default_points(discontinuous)))
}

fn exact_report(name: &str, net: Network, target: &str, measured: f64, grid: usize, params: BTreeMap<String, f64>, bound: f64) -> ApproxReport {
    ApproxReport { name: name.into(), network: net, target: target.into(), claimed_bound: bound, measured_error: measured, norm: ErrorNorm::Sup, grid_size: grid, params }
}

fn holder_target(cfg: &RunConfig) -> Result<HolderFn, CliError> {
    let dim: usize = cfg.get("D")?;
    let beta = cfg.opt::<f64>("beta")?.unwrap_or(2.0);
    match cfg.raw("target") {
        "holder" | "random" => Ok(sample_holder(cfg.seed()?, beta, cfg.get("radius")?, dim)),
        "sine" => Ok(HolderFn::sine(dim, beta, 0.0, 1.0, 0.5, 0)),
        t => Err(CliError::Usage(format!("the smooth builder needs target 'holder' or 'sine', got '{t}'"))),
    }
}

pub fn construct(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let act = cfg.activation()?;
    let builder = cfg.raw("builder");
    let per_axis = |d: usize| match d {
        1 => 4097,
        2 => 129,
        _ => 17,
    };
    let mut params = BTreeMap::new();
    let report = match builder {
        "teeth" => {
            let net = teeth_net(act)?;
            let e = sup_error_grid(&net, |x| sawtooth_closed_form(1, x[0]), 1, 0.0, 1.0, 4097);
            exact_report("teeth", net, "tooth", e, 4097, params, 0.0)
        }
        "sawtooth" => {
            let t: usize = cfg.get("t")?;
            params.insert("t".into(), t as f64);
            let net = sawtooth_net(t, act)?;
            let e = sup_error_grid(&net, |x| sawtooth_closed_form(t, x[0]), 1, 0.0, 1.0, 4097);
            exact_report("sawtooth", net, "saw-tooth", e, 4097, params, 0.0)
        }
        "square" => {
            let m: usize = cfg.get("m")?;
            params.insert("m".into(), m as f64);
            let net = square_net(m, act)?;
            let e = sup_error_grid(&net, |x| x[0] * x[0], 1, 0.0, 1.0, 4097);
            exact_report("square", net, "x^2 on [0;1]", e, 4097, params, square_bound(m))
        }
        "mult" => {
            let m: usize = cfg.get("m")?;
            let t: f64 = cfg.get("T")?;
            params.insert("m".into(), m as f64);
            params.insert("T".into(), t);
            let net = mult_net(m, t, act)?;
            let e = sup_error_grid(&net, |x| x[0] * x[1], 2, -t, t, per_axis(2));
            exact_report("mult", net, "x*y", e, per_axis(2).pow(2), params, mult_bound(m, t))
        }
        "multi-mult" => {
            let m: usize = cfg.get("m")?;
            let t: f64 = cfg.get("T")?;
            let d: usize = cfg.get("Dp")?;
            params.insert("m".into(), m as f64);
            params.insert("T".into(), t);
            params.insert("Dp".into(), d as f64);
            let net = multi_mult_net(m, t, d, act)?;
            let e = sup_error_grid(&net, |x| x.iter().product(), d, -t, t, per_axis(d));
            exact_report("multi-mult", net, "product", e, per_axis(d).pow(d as u32), params, multi_mult_budget(m, t, d))
        }
        "monomial" => {
            let gamma: usize = cfg.get("gamma")?;
            let eps: f64 = cfg.get("eps")?;
            let t: f64 = cfg.get("T")?;
            params.insert("gamma".into(), gamma as f64);
            params.insert("eps".into(), eps);
            params.insert("T".into(), t);
            let b = singlab::constructor::monomial_built(gamma, eps, t, act)?;
            let e = sup_error_grid(&b.net, |x| x[0].powi(gamma as i32), 1, -t, t, 4097);
            exact_report("monomial", b.net, "x^gamma", e, 4097, params, eps)
        }
        "step" => {
            let eps: f64 = cfg.get("eps")?;
            let t: f64 = cfg.get("T")?;
            params.insert("eps".into(), eps);
            params.insert("T".into(), t);
            let net = step_net(eps, t, act)?;
            let e = step_l2_error(&net, t, 400_000);
            let mut r = exact_report("step", net, "heaviside", e, 400_001, params, eps);
            r.norm = ErrorNorm::L2;
            r
        }
        "smooth" => {
            let f = holder_target(cfg)?;
            let dim = f.dim;
            smooth_net(&f, f.beta, cfg.get("eps")?, &Region::unit(dim), act, points(cfg, false)?)?
        }
        "indicator" => {
            let f = piecewise_target(cfg)?;
            if f.domain != singlab::funcgen::Domain::UnitCube {
                return Err(CliError::Usage("the indicator builder works on the unit cube".into()));
            }
            piece_indicator_net(&f.pieces, cfg.get("piece")?, cfg.get("eps")?, act, points(cfg, true)?)?
        }
        "piecewise-smooth" => {
            let f = piecewise_target(cfg)?;
            piecewise_smooth_net(&f, cfg.get("eps1")?, cfg.get("eps2")?, act, points(cfg, true)?)?
        }
        "" => return Err(CliError::Usage("construct needs --builder".into())),
        b => return Err(CliError::Usage(format!("unknown builder '{b}'"))),
    };
    let out = cfg.out_dir();
    write(&out, "construct.csv", &format!("{}\n{}\n", ApproxReport::CSV_HEADER, report.csv_row()))?;
    if cfg.flag("save-network")? {
        report.network.save(&out.join("network.json"))?;
    }
    let tol = cfg.opt::<f64>("tol")?.unwrap_or(report.claimed_bound.max(1e-12));
    let m = report.network.metrics();
    let line = format!(
        "{}: measured {} error {:.6e}, bound {:.6e}, tolerance {:.6e} (L={}, S={}, B={:.3e})",
        report.name,
        report.norm.name(),
        report.measured_error,
        report.claimed_bound,
        tol,
        m.depth,
        m.sparsity,
        m.magnitude
    );
    let violation = (!(report.measured_error <= tol)).then(|| format!("{}: measured error {:.6e} exceeds {:.6e}", report.name, report.measured_error, tol));
    Ok(Outcome { lines: vec![line], violation })
}

pub fn approx(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let act = cfg.activation()?;
    let grid: Vec<f64> = cfg.list("eps-grid")?;
    let builder = match cfg.raw("builder") {
        "smooth" => {
            let f = holder_target(cfg)?;
            let dim = f.dim;
            SweepBuilder::Smooth { beta: f.beta, f, region: Region::unit(dim) }
        }
        "indicator" => {
            let f = piecewise_target(cfg)?;
            SweepBuilder::Indicator { spec: f.pieces.clone(), piece: cfg.get("piece")?, alpha: f.alpha }
        }
        b => return Err(CliError::Usage(format!("approx-sweep builder must be smooth or indicator, got '{b}'"))),
    };
    let discontinuous = matches!(builder, SweepBuilder::Indicator { .. });
    let pts = points(cfg, discontinuous)?;
    let sweep = with_workers(cfg.get("workers")?, || approx_sweep(&builder, &grid, act, pts))??;
    let out = cfg.out_dir();
    write(&out, "approx_sweep.csv", &sweep.to_csv())?;
    write(&out, "approx_sweep.json", &sweep.summary_json()?)?;
    if cfg.flag("svg")? {
        write(&out, "approx_sweep.svg", &sweep.to_svg())?;
    }
    let mut lines: Vec<String> = sweep.rows.iter().map(|r| format!("eps={} S={} L2={:.6e}", r.eps, r.sparsity, r.l2_error)).collect();
    lines.push(match &sweep.slope {
        Some(s) => format!("slope {:.4} ± {:.4} (reference {:.4})", s.slope, s.stderr, sweep.reference_exponent),
        None => "slope undefined (degenerate sweep)".into(),
    });
    Ok(Outcome { lines, violation: None })
}

fn fit_config(cfg: &RunConfig) -> Result<FitConfig, CliError> {
    let clip: f64 = cfg.get("clip")?;
    Ok(FitConfig {
        dnn: DnnConfig {
            hidden: cfg.list("hidden")?,
            act: cfg.activation()?,
            clip: (clip > 0.0).then_some(clip),
            lr: cfg.get("lr")?,
            momentum: cfg.get("momentum")?,
            iters: cfg.get("iters")?,
            restarts: cfg.get("restarts")?,
            pilot_iters: cfg.get("pilot-iters")?,
            ..DnnConfig::default()
        },
        kernel: KernelConfig { bandwidth: cfg.get("bandwidth")?, lambda: cfg.get("lambda")? },
        wavelet_tau: cfg.get("tau")?,
        curvelet: CurveletConfig { tau: cfg.get("tau")?, grid: cfg.get("curvelet-grid")?, delta1: cfg.get("delta1")?, delta2: cfg.get("delta2")? },
    })
}

fn estimators(cfg: &RunConfig) -> Result<Vec<EstimatorKind>, CliError> {
    let kinds: Vec<String> = cfg.list("estimator")?;
    if kinds.is_empty() {
        return Err(CliError::Usage("no estimator given".into()));
    }
    kinds.iter().map(|k| EstimatorKind::parse(k).map_err(|e| CliError::Usage(e.to_string()))).collect()
}

pub fn regress(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let f = piecewise_target(cfg)?;
    let fit_cfg = fit_config(cfg)?;
    let n: usize = cfg.get("n")?;
    let sigma: f64 = cfg.get("sigma")?;
    let seed = cfg.seed()?;
    let pts = points(cfg, f.num_pieces() > 1)?;
    let data = gen_dataset(&f, n, sigma, seed, f.domain)?;
    let out = cfg.out_dir();
    let mut csv = String::from("estimator,target,n,sigma,seed,sq_err,train_loss\n");
    let mut lines = Vec::new();
    for kind in estimators(cfg)? {
        let p = with_workers(cfg.get("workers")?, || fit(kind, &data, &fit_cfg, derive_seed(seed, &[1])))??;
        let err = with_workers(cfg.get("workers")?, || l2_error(&p, &f, f.domain, pts))??;
        writeln!(csv, "{},{},{n},{sigma},{seed},{err:e},{:e}", kind.name(), f.name, p.meta.loss).unwrap();
        p.save(&out.join(format!("predictor_{}", kind.name())))?;
        lines.push(format!("{}: squared L2 error {:.6e}, training loss {:.6e}", kind.name(), err, p.meta.loss));
    }
    write(&out, "regress.csv", &csv)?;
    Ok(Outcome { lines, violation: None })
}

fn tuning(cfg: &RunConfig, kind: EstimatorKind) -> Result<Tuning, CliError> {
    Ok(match kind {
        EstimatorKind::Wavelet if !cfg.raw("tau-grid").is_empty() => Tuning::WaveletTau(cfg.list("tau-grid")?),
        EstimatorKind::KernelRidge if !cfg.raw("bandwidths").is_empty() || !cfg.raw("lambdas").is_empty() => {
            Tuning::KernelGrid { bandwidths: cfg.list("bandwidths")?, lambdas: cfg.list("lambdas")? }
        }
        EstimatorKind::Dnn if !cfg.raw("dnn-scale").is_empty() => Tuning::DnnBudget { scale: cfg.get("dnn-scale")?, layers: cfg.get("dnn-layers")? },
        _ => Tuning::Fixed,
    })
}

pub fn rates(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let f = piecewise_target(cfg)?;
    let fit_cfg = fit_config(cfg)?;
    let kinds = estimators(cfg)?;
    let pts = points(cfg, f.num_pieces() > 1)?;
    let out = cfg.out_dir();
    let mut tables: Vec<RateTable> = Vec::new();
    let mut lines = Vec::new();
    for kind in kinds {
        let spec = SweepSpec {
            estimator: kind,
            config: fit_cfg.clone(),
            tuning: tuning(cfg, kind)?,
            target: &f as &dyn Target,
            target_name: f.name.clone(),
            alpha: f.alpha,
            beta: f.beta,
            n_grid: cfg.list("n-grid")?,
            reps: cfg.get("reps")?,
            sigma: cfg.get("sigma")?,
            master_seed: cfg.seed()?,
            points: pts,
        };
        spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let table = with_workers(cfg.get("workers")?, || rate_sweep(&spec))??;
        let stem = format!("rate_{}", kind.name());
        write(&out, &format!("{stem}.csv"), &table.to_csv())?;
        write(&out, &format!("{stem}_cells.csv"), &table.cells_csv())?;
        write(&out, &format!("{stem}.json"), &table.summary_json()?)?;
        if cfg.flag("svg")? {
            write(&out, &format!("{stem}.svg"), &table.to_svg())?;
        }
        lines.push(match &table.slope {
            Some(s) => format!(
                "{}: slope {:.4} ± {:.4} (theory -{:.4}, {}){}",
                kind.name(),
                s.slope,
                s.stderr,
                table.theoretical_exponent.unwrap_or(f64::NAN),
                table.exponent_source,
                if table.flags.is_empty() { String::new() } else { format!(" [{}]", table.flags.join(", ")) }
            ),
            None => format!("{}: slope undefined [{}]", kind.name(), table.flags.join(", ")),
        });
        tables.push(table);
    }
    if tables.len() > 1 {
        let mut csv = String::from("estimator,target,slope,slope_stderr,theoretical_exponent,largest_n,mean_sq_err_at_largest_n\n");
        for t in &tables {
            let last = t.rows.last().unwrap();
            writeln!(
                csv,
                "{},{},{},{},{},{},{:e}",
                t.estimator,
                t.target,
                t.slope.as_ref().map(|s| s.slope.to_string()).unwrap_or_default(),
                t.slope.as_ref().map(|s| s.stderr.to_string()).unwrap_or_default(),
                t.theoretical_exponent.map(|e| e.to_string()).unwrap_or_default(),
                last.n,
                last.mean_sq_err
            )
            .unwrap();
        }
        write(&out, "comparison.csv", &csv)?;
        let flags = theoretical_rates(f.alpha, f.beta, f.dim()).ok().map(|r| r.flags());
        let best = tables.iter().min_by(|a, b| a.rows.last().unwrap().mean_sq_err.total_cmp(&b.rows.last().unwrap().mean_sq_err)).unwrap();
        let summary = serde_json::json!({
            "target": f.name,
            "alpha": f.alpha,
            "beta": f.beta,
            "D": f.dim(),
            "regime_flags": flags,
            "lowest_error_at_largest_n": best.estimator,
        });
        write(&out, "comparison.json", &serde_json::to_string_pretty(&summary).unwrap())?;
        lines.push(format!("lowest mean error at the largest n: {}", best.estimator));
    }
    Ok(Outcome { lines, violation: None })
}

struct ParsedTable {
    estimator: String,
    target: String,
    alpha: f64,
    beta: f64,
    dim: usize,
    rows: Vec<(f64, f64)>,
}

fn parse_rate_csv(path: &Path) -> Result<ParsedTable, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    if lines.next() != Some(RATE_CSV_HEADER) {
        return Err(CliError::Usage(format!("{}:1: not a rate table (expected header '{RATE_CSV_HEADER}')", path.display())));
    }
    let mut t = ParsedTable { estimator: String::new(), target: String::new(), alpha: 0.0, beta: 0.0, dim: 0, rows: Vec::new() };
    for (i, line) in lines.enumerate() {
        let no = i + 2;
        let bad = |what: &str| CliError::Usage(format!("parse error: {}:{no}: {what}", path.display()));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(bad(&format!("expected 9 fields, got {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("'{s}' is not a number")));
        t.estimator = f[0].to_string();
        t.target = f[1].to_string();
        t.alpha = num(f[2])?;
        t.beta = num(f[3])?;
        t.dim = f[4].parse().map_err(|_| bad(&format!("'{}' is not a dimension", f[4])))?;
        t.rows.push((num(f[5])?, num(f[7])?));
    }
    Ok(t)
}

pub fn report(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let dir = cfg.out_dir();
    let window: f64 = cfg.get("window")?;
    let entries = std::fs::read_dir(&dir).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", dir.display())))?;
    let mut files: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.starts_with("rate_") && name.ends_with(".csv") && !name.ends_with("_cells.csv")
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage(format!("no rate tables (rate_*.csv) in {}", dir.display())));
    }
    let mut rows = Vec::new();
    for path in &files {
        let t = parse_rate_csv(path)?;
        let slope = fit_slope(&t.rows).ok();
        let exponent = theoretical_rates(t.alpha, t.beta, t.dim).ok().and_then(|r| match EstimatorKind::parse(&t.estimator).ok()? {
            EstimatorKind::Dnn => Some(r.dnn),
            EstimatorKind::KernelRidge => Some(r.linear),
            EstimatorKind::Wavelet => Some(r.wavelet),
            EstimatorKind::Curvelet => Some(r.curvelet),
        });
        let pass = match (&slope, exponent) {
            (Some(s), Some(e)) => (s.slope + e).abs() <= window,
            _ => false,
        };
        rows.push((t, slope.map(|s| s.slope), exponent, pass));
    }
    rows.sort_by(|a, b| (&a.0.target, &a.0.estimator).cmp(&(&b.0.target, &b.0.estimator)));
    let mut csv = String::from("target,estimator,alpha,beta,D,slope,reference_slope,window,pass\n");
    let mut lines = Vec::new();
    let mut current = String::new();
    for (t, slope, exp, pass) in &rows {
        if t.target != current {
            current = t.target.clone();
            lines.push(format!("== {current} =="));
        }
        let s = slope.map(|v| v.to_string()).unwrap_or_default();
        let r = exp.map(|e| (-e).to_string()).unwrap_or_default();
        writeln!(csv, "{},{},{},{},{},{s},{r},{window},{}", t.target, t.estimator, t.alpha, t.beta, t.dim, if *pass { "pass" } else { "fail" }).unwrap();
        lines.push(format!(
            "{:<14} slope {:>9} reference {:>9} window ±{window}: {}",
            t.estimator,
            slope.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into()),
            exp.map(|e| format!("{:.4}", -e)).unwrap_or_else(|| "n/a".into()),
            if *pass { "pass" } else { "fail" }
        ));
    }
    write(&dir, "report.csv", &csv)?;
    Ok(Outcome { lines, violation: None })
}
