use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use arnold_chain::chain::{poisson_bracket, torus_image, SegmentKind};
use arnold_chain::crest::build_crest_n;
use arnold_chain::flow::{measure_scattering_jump, JumpOptions};
use arnold_chain::inner::{classify_resonance, torus_level_set, Region, Side, TorusKind};
use arnold_chain::numerics::wrap_angle;
use arnold_chain::{build_chain, emit_pseudo_orbit, validate_spec, ChainOptions, CrestKind, MelnikovSeries, ReducedPoincare, SystemSpec};
use rayon::prelude::*;
use serde_json::json;

use crate::output::{csv_row, write_csv, write_gnuplot, write_json, Run};
use crate::{Cli, Command, ConfigArg};

fn load(cfg: &ConfigArg) -> Result<SystemSpec> {
    let text = fs::read_to_string(&cfg.config).with_context(|| format!("reading {}", cfg.config.display()))?;
    Ok(SystemSpec::from_json_str(&text)?)
}

/// Loads a config and refuses it unless every hypothesis holds.
fn load_valid(cfg: &ConfigArg) -> Result<SystemSpec> {
    let spec = load(cfg)?;
    let report = validate_spec(&spec);
    if !report.passed {
        let rules: Vec<&str> = report.violations.iter().map(|v| v.rule.as_str()).collect();
        bail!("{} fails validation ({}); run `validate` for details", cfg.config.display(), rules.join(", "));
    }
    Ok(spec)
}

fn in_window(spec: &SystemSpec, actions: &[f64]) -> Result<()> {
    for &i in actions {
        if !(i >= spec.i_minus_star && i <= spec.i_plus_star) {
            bail!("I = {i} is outside the action window [{}, {}]", spec.i_minus_star, spec.i_plus_star);
        }
    }
    Ok(())
}

fn resolve_eps(eps: Option<f64>, spec: &SystemSpec) -> Result<f64> {
    let e = eps.unwrap_or(spec.epsilon);
    if !(e >= 0.0 && e.is_finite()) {
        bail!("epsilon must be a non-negative number, got {e}");
    }
    Ok(e)
}

fn resonance(res: &[u32], eps: f64, spec: &SystemSpec) -> Result<Region> {
    match res {
        [k0, l0] => Ok(Region::Resonance(classify_resonance(*k0, *l0, eps, spec)?)),
        _ => bail!("--res takes two integers"),
    }
}

fn kind_name(k: TorusKind) -> &'static str {
    match k {
        TorusKind::Flat => "flat",
        TorusKind::PrimaryUpper => "primary_upper",
        TorusKind::PrimaryLower => "primary_lower",
        TorusKind::Secondary => "secondary",
        TorusKind::Separatrix => "separatrix",
    }
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn grid(n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |j| TAU * j as f64 / n as f64)
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Validate(cfg) => {
            let spec = load(cfg)?;
            let report = validate_spec(&spec);
            if report.passed {
                println!("{}: all hypotheses hold", cfg.config.display());
            }
            for v in &report.violations {
                match v.harmonic {
                    Some((k, l)) => println!("{} [{k},{l}]: {}", v.rule, v.message),
                    None => println!("{}: {}", v.rule, v.message),
                }
            }
            Ok(ExitCode::from(if report.passed { 0 } else { 1 }))
        }

        Command::Melnikov { cfg, action, grid: g, first_order, out } => {
            let spec = load_valid(cfg)?;
            let run = Run::new("melnikov", Some(&cfg.config), json!({"I": action, "grid": [g.0, g.1], "first_order": first_order}));
            let ms = if *first_order {
                MelnikovSeries::first_order(&spec)
            } else {
                MelnikovSeries::new(&spec)
            };
            let slice = ms.slice(*action);
            let rows: Vec<String> = (0..g.0)
                .into_par_iter()
                .map(|j| {
                    let phi = TAU * j as f64 / g.0 as f64;
                    grid(g.1)
                        .map(|s| csv_row(&[phi.into(), s.into(), slice.potential(phi, s).into()]))
                        .collect::<String>()
                })
                .collect();
            write_csv(out, &["phi", "s", "L"], rows)?;
            finish(cli, &run, out, "Melnikov potential", 1, 2, "phi", "s")?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Crests { cfg, action, samples, out } => {
            let spec = load_valid(cfg)?;
            in_window(&spec, &[*action])?;
            let run = Run::new("crests", Some(&cfg.config), json!({"I": action, "samples": samples}));
            let ms = MelnikovSeries::new(&spec);
            let cm = build_crest_n(*action, CrestKind::Max, &ms, &spec, *samples)?;
            let cn = build_crest_n(*action, CrestKind::Min, &ms, &spec, *samples)?;
            let rows = (0..cm.len()).map(|j| csv_row(&[cm.phis[j].into(), cm.values[j].into(), cn.values[j].into()]));
            write_csv(out, &["phi", "xi_max", "xi_min"], rows)?;
            finish(cli, &run, out, "crest C_M", 1, 2, "phi", "s")?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Tau { cfg, action, phi, s } => {
            let spec = load_valid(cfg)?;
            in_window(&spec, &[*action])?;
            let rp = ReducedPoincare::new(&spec);
            print_json(&rp.tau_star(*action, *phi, *s)?)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Rpf { cfg, action, samples, out } => {
            let spec = load_valid(cfg)?;
            in_window(&spec, &[*action])?;
            let run = Run::new("rpf", Some(&cfg.config), json!({"I": action, "samples": samples}));
            let rp = ReducedPoincare::new(&spec);
            rp.crests(*action)?;
            let rows = grid(*samples)
                .collect::<Vec<_>>()
                .par_iter()
                .map(|&t| {
                    let v = rp.evaluate(*action, t)?;
                    Ok(csv_row(&[t.into(), v.value.into(), v.d_theta.into(), v.d_action.into(), v.tau.into()]))
                })
                .collect::<arnold_chain::Result<Vec<String>>>()?;
            write_csv(out, &["theta", "L_star", "dL_star_dtheta", "dL_star_dI", "tau_star"], rows)?;
            finish(cli, &run, out, "reduced Poincaré function", 1, 2, "theta", "L*")?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Scatter { cfg, action, theta, eps, iters, out } => {
            let spec = load_valid(cfg)?;
            in_window(&spec, &[*action])?;
            let eps = resolve_eps(*eps, &spec)?;
            let run = Run::new("scatter", Some(&cfg.config), json!({"I": action, "theta": theta, "eps": eps, "iters": iters}));
            let rp = ReducedPoincare::new(&spec);
            let (mut i, mut t) = (*action, wrap_angle(*theta));
            let mut rows = vec![csv_row(&[0usize.into(), i.into(), t.into()])];
            for n in 1..=*iters {
                let (i2, t2) = rp.reduced_map(i, t, eps)?;
                (i, t) = (i2, wrap_angle(t2));
                rows.push(csv_row(&[n.into(), i.into(), t.into()]));
            }
            match out {
                Some(path) => {
                    write_csv(path, &["iter", "I", "theta"], rows)?;
                    finish(cli, &run, path, "scattering map orbit", 3, 2, "theta", "I")?;
                }
                None => {
                    print!("iter,I,theta\n{}", rows.concat());
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Tori { cfg, res, eps, levels, samples, out } => {
            let spec = load_valid(cfg)?;
            let eps = resolve_eps(*eps, &spec)?;
            let run = Run::new("tori", Some(&cfg.config), json!({"res": res, "eps": eps, "levels": levels, "samples": samples}));
            let region = resonance(res, eps, &spec)?;
            let rp = ReducedPoincare::new(&spec);
            let mut tori = Vec::new();
            for &e in levels {
                if e > 0.0 {
                    tori.push(torus_level_set(e, &region, Side::Upper)?);
                    tori.push(torus_level_set(e, &region, Side::Lower)?);
                } else {
                    tori.push(torus_level_set(e, &region, Side::Upper)?);
                }
            }
            let blocks = tori
                .par_iter()
                .map(|ts| {
                    let img = torus_image(ts, &rp, eps, *samples)?;
                    Ok(img
                        .iter()
                        .map(|p| {
                            csv_row(&[
                                ts.energy.into(),
                                kind_name(ts.kind).into(),
                                p.theta.into(),
                                p.action.into(),
                                wrap_angle(p.image_theta).into(),
                                p.image_action.into(),
                                p.image_level.into(),
                            ])
                        })
                        .collect::<String>())
                })
                .collect::<arnold_chain::Result<Vec<String>>>()?;
            write_csv(out, &["level", "kind", "theta", "I", "image_theta", "image_I", "image_level"], blocks)?;
            finish(cli, &run, out, "tori and their images", 3, 4, "theta", "I")?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Bracket { cfg, res, eps, action, theta } => {
            let spec = load_valid(cfg)?;
            in_window(&spec, &[*action])?;
            let eps = resolve_eps(*eps, &spec)?;
            let region = match res {
                Some(r) => resonance(r, eps, &spec)?,
                None => Region::Flat,
            };
            let rp = ReducedPoincare::new(&spec);
            print_json(&poisson_bracket(*action, *theta, &region, &rp)?)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Chain { cfg, eps, from, to, out, pseudo_orbit, samples, gamma } => {
            let spec = load_valid(cfg)?;
            in_window(&spec, &[*from, *to])?;
            let eps = resolve_eps(*eps, &spec)?;
            let run = Run::new(
                "chain",
                Some(&cfg.config),
                json!({"eps": eps, "from": from, "to": to, "samples": samples, "gamma": gamma}),
            );
            let rp = ReducedPoincare::new(&spec);
            let opts = ChainOptions {
                gamma: *gamma,
                ..ChainOptions::default()
            };
            let chain = build_chain(*from, *to, eps, &rp, opts)?;
            write_json(out, &chain)?;
            let mut outputs = vec![out.as_path()];
            if let Some(po) = pseudo_orbit {
                let rows = emit_pseudo_orbit(&chain, *samples).into_iter().map(|p| {
                    let seg = match p.segment {
                        SegmentKind::InnerFlow => "inner-flow",
                        SegmentKind::ScatteringJump => "scattering-jump",
                    };
                    csv_row(&[p.link.into(), seg.into(), p.action.into(), p.phi.into(), p.s.into()])
                });
                write_csv(po, &["link", "segment", "I", "phi", "s"], rows)?;
                if cli.gnuplot {
                    write_gnuplot(po, "pseudo-orbit", 4, 3, "phi", "I")?;
                }
                outputs.push(po.as_path());
            }
            run.finish(&outputs)?;
            println!(
                "{} links ({} secondary), I: {} -> {}",
                chain.links.len(),
                chain.secondary_count(),
                chain.i_start,
                chain.i_end
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Verify { cfg, eps, action, theta, out } => {
            let spec = load_valid(cfg)?;
            in_window(&spec, &[*action])?;
            let eps = resolve_eps(*eps, &spec)?;
            if eps == 0.0 {
                bail!("verify needs epsilon > 0");
            }
            let run = Run::new("verify", Some(&cfg.config), json!({"eps": eps, "I": action, "theta": theta}));
            let rp = ReducedPoincare::new(&spec);
            let opts = JumpOptions::default();
            let epss = [eps, 2.0 * eps, 4.0 * eps];
            let ms = epss
                .par_iter()
                .map(|&e| measure_scattering_jump(*action, *theta, 0.0, e, &rp, &opts))
                .collect::<arnold_chain::Result<Vec<_>>>()?;
            let xs: Vec<f64> = epss.iter().map(|e| e.ln()).collect();
            let ys: Vec<f64> = ms.iter().map(|m| (m.measured - m.predicted).abs().ln()).collect();
            let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
            let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
                / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
            let report = json!({
                "I": action,
                "theta": theta,
                "measurements": epss.iter().zip(&ms).map(|(e, m)| json!({
                    "eps": e,
                    "measured": m.measured,
                    "predicted": m.predicted,
                    "error": m.measured - m.predicted,
                    "relative_error": ((m.measured - m.predicted) / m.predicted).abs(),
                    "horizon": m.horizon,
                })).collect::<Vec<_>>(),
                "loglog_slope": slope,
            });
            match out {
                Some(path) => {
                    write_json(path, &report)?;
                    run.finish(&[path.as_path()])?;
                }
                None => print_json(&report)?,
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(cli: &Cli, run: &Run, out: &Path, title: &str, x: usize, y: usize, xl: &str, yl: &str) -> Result<()> {
    if cli.gnuplot {
        write_gnuplot(out, title, x, y, xl, yl)?;
    }
    run.finish(&[out])
}
