use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Value};

use cayley_entropy::bifurcation::{self, DiagramFormat, SweepConfig};
use cayley_entropy::ctnn::{self, BasicSet, ChildCouplings, LabeledTree, Template};
use cayley_entropy::entropy::{self, DEFAULT_SPECTRUM_CAP};
use cayley_entropy::error::cap_from_env;
use cayley_entropy::separation;
use cayley_entropy::snre::DEFAULT_REDUCED_CAP;
use cayley_entropy::treeshift::{self, MarkovTreeShift, DEFAULT_DIGIT_BUDGET, DEFAULT_ENUMERATION_CAP};
use cayley_entropy::Error;

use crate::{BlockMode, CapArg, Command, CtnnCommand, Format, TsftCommand};

/// Levels above this use the log-space recursion unless `--exact` is given.
const EXACT_LEVEL_LIMIT: usize = 12;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Tsft(c) => tsft(c),
        Command::Ctnn(c) => ctnn(c),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(e.to_string()))
        .with_context(|| format!("reading {}", path.display()))
}

fn load<T>(path: &Path, parse: impl Fn(&str) -> cayley_entropy::Result<T>) -> Result<T> {
    let text = read(path)?;
    parse(&text).with_context(|| format!("in {}", path.display()))
}

fn cap(arg: CapArg, default: u128) -> u128 {
    arg.cap.unwrap_or_else(|| cap_from_env(default))
}

fn record(v: Value) {
    println!("record: {v}");
}

fn matrix(m: &[Vec<u32>]) -> String {
    let rows: Vec<String> = m
        .iter()
        .map(|r| format!("[{}]", r.iter().map(u32::to_string).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", rows.join(", "))
}

fn list(names: &[String]) -> String {
    if names.is_empty() {
        "(none)".into()
    } else {
        names.join(" ")
    }
}

fn tsft(command: TsftCommand) -> Result<()> {
    match command {
        TsftCommand::Entropy { file, cap: c } => {
            let x = load(&file, MarkovTreeShift::from_json)?;
            let report = entropy::entropy_tsft_with_cap(&x, cap(c, DEFAULT_REDUCED_CAP))?;
            println!("entropy = {:.9} (= ln {:.9})", report.entropy, report.rho.max(1.0));
            println!("symbols: {}", list(&report.symbols));
            println!("argmax selection: {:?}", report.argmax_selection);
            println!("M_E = {}", matrix(&report.matrix));
            println!("M_E' = {}", matrix(&report.reduced_matrix));
            println!("essential: {}", list(&report.essential));
            println!("pruned: {}", list(&report.pruned_symbols));
            let criterion = entropy::check_ln_d_criterion(&x);
            println!("ln d criterion: {}", criterion.holds);
            record(json!({ "command": "tsft entropy", "report": report, "ln_d_criterion": criterion.holds }));
        }
        TsftCommand::Blocks {
            file,
            n,
            mode,
            exact,
            log,
            enumerate,
            cap: c,
        } => {
            let x = load(&file, MarkovTreeShift::from_json)?;
            let n = n as usize;
            let mode = mode.unwrap_or(if exact {
                BlockMode::Exact
            } else if log {
                BlockMode::Log
            } else if enumerate {
                BlockMode::Enumerate
            } else if n > EXACT_LEVEL_LIMIT {
                BlockMode::Log
            } else {
                BlockMode::Exact
            });
            blocks(&x, n, mode, cap(c, DEFAULT_ENUMERATION_CAP))?;
        }
        TsftCommand::Spectrum { d, k, cap: c } => {
            let values = entropy::entropy_spectrum(d as usize, k as usize, cap(c, DEFAULT_SPECTRUM_CAP))?;
            println!("{} entropy values for d = {d}, k = {k}", values.len());
            for v in &values {
                println!("ln {:.9} = {:.9}  witness {}", v.rho.max(1.0), v.entropy, matrix(&v.witness));
            }
            record(json!({ "command": "tsft spectrum", "d": d, "k": k, "values": values }));
        }
    }
    Ok(())
}

fn blocks(x: &MarkovTreeShift, n: usize, mode: BlockMode, cap: u128) -> Result<()> {
    let symbols = x.alphabet().symbols();
    match mode {
        BlockMode::Exact => {
            let series = treeshift::count_blocks(x, n, DEFAULT_DIGIT_BUDGET)?;
            let level: Vec<String> = series.level(n).iter().map(ToString::to_string).collect();
            for (s, c) in symbols.iter().zip(&level) {
                println!("gamma[{s}; {n}] = {c}");
            }
            let total = series.total(n).to_string();
            println!("|B_{n}| = {total}");
            record(json!({ "command": "tsft blocks", "mode": "exact", "n": n, "symbols": symbols, "counts": level, "total": total }));
        }
        BlockMode::Log => {
            let series = treeshift::count_blocks_log(x, n)?;
            for (s, c) in symbols.iter().zip(series.level(n)) {
                println!("ln gamma[{s}; {n}] = {c:.12}");
            }
            let total = series.ln_total(n);
            println!("ln |B_{n}| = {total:.12}");
            let estimate = treeshift::entropy_estimate(x, n)?;
            println!("ln ln |B_{n}| / {n} = {:.9}{}", estimate.value, if estimate.degenerate { " (degenerate)" } else { "" });
            let finite = |v: f64| if v.is_finite() { json!(v) } else { Value::Null };
            record(json!({
                "command": "tsft blocks",
                "mode": "log",
                "n": n,
                "symbols": symbols,
                "ln_counts": series.level(n).iter().map(|&v| finite(v)).collect::<Vec<_>>(),
                "ln_total": finite(total),
                "estimate": estimate.value,
                "degenerate": estimate.degenerate,
            }));
        }
        BlockMode::Enumerate => {
            let patterns = treeshift::enumerate_blocks(x, n, cap)?;
            let rendered: Vec<String> = patterns
                .iter()
                .map(|p| p.iter().map(|&i| symbols[i].as_str()).collect::<Vec<_>>().join(" "))
                .collect();
            for r in &rendered {
                println!("{r}");
            }
            println!("|B_{n}| = {}", rendered.len());
            record(json!({ "command": "tsft blocks", "mode": "enumerate", "n": n, "total": rendered.len(), "patterns": rendered }));
        }
    }
    Ok(())
}

fn ctnn(command: CtnnCommand) -> Result<()> {
    match command {
        CtnnCommand::Patterns { template } => {
            let t = load(&template, Template::from_json)?;
            let b = ctnn::admissible_patterns(&t)?;
            let code = b.code();
            println!("region {code}");
            for block in b.blocks() {
                println!("{block}");
            }
            record(json!({ "command": "ctnn patterns", "p": code.p, "q": code.q, "basic_set": b.to_doc(), "blocks": b.blocks() }));
        }
        CtnnCommand::Entropy { template } => {
            let t = load(&template, Template::from_json)?;
            let e = ctnn::ctnn_entropy(&t)?;
            println!("region {}", e.code);
            println!("entropy = {:.9}", e.entropy);
            record(json!({ "command": "ctnn entropy", "p": e.code.p, "q": e.code.q, "entropy": e.entropy }));
        }
        CtnnCommand::Critical {
            template,
            tol,
            radius,
            samples,
            seed,
        } => {
            let t = load(&template, Template::from_json)?;
            let cc = ChildCouplings::new(t.alpha.clone())?;
            let curve = ctnn::critical_a(&cc, t.z);
            let on_curve = ctnn::is_critical(&t, tol)?;
            let probe = ctnn::verify_critical_by_definition(&cc, (t.a, t.z), radius, samples, seed)?;
            println!("seed = {seed}");
            println!("critical a at z = {}: {curve:.12}", t.z);
            println!("|a - critical a| = {:.3e} (tol {tol:e}): {}", (t.a - curve).abs(), on_curve);
            println!(
                "sampled disc r = {radius}, {samples} samples: zero entropy {}, ln d {}, skipped {}",
                probe.saw_zero, probe.saw_ln_d, probe.boundary_skipped
            );
            if cc.degenerate {
                println!("note: degenerate couplings");
            }
            record(json!({
                "command": "ctnn critical",
                "seed": seed,
                "critical_a": curve,
                "is_critical": on_curve,
                "probe": probe,
                "degenerate": cc.degenerate,
            }));
        }
        CtnnCommand::Realize { basic_set } => {
            let b = load(&basic_set, BasicSet::from_json)?;
            let report = separation::realization_report(&b)?;
            println!("condition: {}", report.condition);
            match &report.template {
                Some(t) => println!(
                    "realizable: a = {}, alpha = {:?}, z = {}, margin = {}",
                    t.a, t.alpha, t.z, report.margin
                ),
                None => println!("not realizable"),
            }
            record(json!({ "command": "ctnn realize", "report": report }));
        }
        CtnnCommand::Sweep {
            config,
            format,
            output,
            tol,
            workers,
        } => {
            let mut cfg = load(&config, SweepConfig::from_json)?;
            if tol.is_some() {
                cfg.tol = tol;
            }
            let grid = bifurcation::sweep_with_workers(&cfg, workers)?;
            let summary = grid.summary();
            let rec = json!({ "command": "ctnn sweep", "summary": summary, "tol": grid.tol });
            match (format, output) {
                (Format::Text, out) => {
                    let text = format!(
                        "{} points: {} zero, {} ln d, {} boundary, {} critical\n",
                        summary.points, summary.zero, summary.ln_d, summary.boundary, summary.critical
                    );
                    match out {
                        Some(path) => fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
                        None => print!("{text}"),
                    }
                    record(rec);
                }
                (f, Some(path)) => {
                    let f = if f == Format::Svg { DiagramFormat::Svg } else { DiagramFormat::Csv };
                    bifurcation::emit_diagram(&grid, f, &path)?;
                    println!("wrote {}", path.display());
                    record(rec);
                }
                (f, None) => {
                    let stdout = std::io::stdout();
                    let mut lock = stdout.lock();
                    if f == Format::Svg {
                        bifurcation::write_svg(&grid, &mut lock)?;
                    } else {
                        bifurcation::write_csv(&grid, &mut lock)?;
                    }
                    lock.flush()?;
                    eprintln!("record: {rec}");
                }
            }
        }
        CtnnCommand::VerifyMosaic { template, tree } => {
            let t = load(&template, Template::from_json)?;
            let y = load(&tree, LabeledTree::from_json)?;
            let check = ctnn::verify_mosaic(&t, &y)?;
            println!("mosaic: {}", check.valid);
            record(json!({ "command": "ctnn verify-mosaic", "valid": check.valid, "states": check.states }));
        }
    }
    Ok(())
}
