//! The four configurable sweeps. Each produces one table, one summary and a
//! set of plot series; [`write_outputs`] puts them on disk.

use std::path::{Path, PathBuf};

use nnichain::arealaw_analysis::{eb_bound_check, entropy_sweep, relent_check};
use nnichain::locality_filters::{
    approximate_ground_projector, filtered_ground_residual, gaussian_projector_error,
    FilterParams, GroundProjectorApprox,
};
use nnichain::nni_hamiltonian::{
    check_admissible, diagonalize, interaction_constants, lbr_split, EigenSystem, ModelSpec,
};
use nnichain::par;
use nnichain::spectra_entropy::gibbs_entropy_bound;
use nnichain::tensor_core::DenseState;

use crate::config::{ExperimentConfig, SweepKind};
use crate::fit::{fit_decay, DecayFit};
use crate::report::{num, opt_num, slug, write_series, RowKey, Summary, Table};
use crate::CliError;

/// Gaussian widths, in units of `1/ΔE²`, used when no q grid is configured.
pub const DEFAULT_Q_FACTORS: [f64; 5] = [0.5, 1.0, 2.0, 4.0, 8.0];
/// Bond lengths used when no l grid is configured.
pub const DEFAULT_L_GRID: [usize; 3] = [0, 1, 2];
/// Number of levels of the reference linear spectrum `0, 1, …`.
pub const REFERENCE_LEVELS: usize = 64;
pub const DEFAULT_ENERGY_FRACTIONS: [f64; 3] = [0.1, 0.25, 0.5];

#[derive(Debug, Clone)]
pub struct Series {
    pub stem: String,
    pub labels: (&'static str, &'static str),
    pub points: Vec<(f64, f64)>,
    pub fit: Option<DecayFit>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub kind: SweepKind,
    pub table: Table,
    pub summary: Summary,
    pub series: Vec<Series>,
}

pub fn run(cfg: &ExperimentConfig) -> Result<SweepOutput, CliError> {
    let (table, mut summary, series) = match cfg.sweep {
        SweepKind::EntropySweep => entropy(cfg)?,
        SweepKind::ObolorSweep => obolor(cfg)?,
        SweepKind::BoundsSuite => bounds(cfg)?,
        SweepKind::GibbsSuite => gibbs(cfg)?,
    };
    summary.put("rows", table.len());
    Ok(SweepOutput {
        kind: cfg.sweep,
        table,
        summary,
        series,
    })
}

/// Writes `<sweep>.csv`, `<sweep>_summary.txt` and `plot/<series>.csv`.
pub fn write_outputs(out: &SweepOutput, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let name = out.kind.name();
    let csv = dir.join(format!("{name}.csv"));
    out.table.write(&csv)?;
    let summary = dir.join(format!("{name}_summary.txt"));
    out.summary.write(&summary)?;
    let mut files = vec![csv, summary];
    if !out.series.is_empty() {
        let plot = dir.join("plot");
        std::fs::create_dir_all(&plot)?;
        for s in &out.series {
            write_series(&plot, &s.stem, s.labels, &s.points, s.fit.as_ref())?;
            files.push(plot.join(format!("{}.csv", s.stem)));
        }
    }
    Ok(files)
}

type Parts = (Table, Summary, Vec<Series>);

fn header(cfg: &ExperimentConfig) -> Summary {
    let mut s = Summary::default();
    s.put("sweep", cfg.sweep.name());
    s.put("seed", cfg.seed);
    s.put("model", cfg.model.label());
    s
}

fn sorted<T: Copy + PartialOrd>(mut v: Vec<T>) -> Vec<T> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("grid values are finite"));
    v.dedup();
    v
}

fn l_grid(cfg: &ExperimentConfig) -> Vec<usize> {
    sorted(cfg.grid.l.clone().unwrap_or_else(|| DEFAULT_L_GRID.to_vec()))
}

fn j_grid(cfg: &ExperimentConfig, d: usize) -> Vec<usize> {
    sorted(cfg.grid.j.clone().unwrap_or_else(|| vec![d / 2]))
}

fn diagonalized(model: &ModelSpec, d: usize) -> Result<(EigenSystem, DenseState, f64), CliError> {
    let spec = model.build(d)?;
    let eig = diagonalize(&spec)?;
    if eig.ground_degenerate() {
        return Err(CliError::Runtime(format!(
            "{} at d = {d} has a degenerate ground state",
            model.label()
        )));
    }
    let state = eig.ground_state()?;
    let j = interaction_constants(&spec).j;
    Ok((eig, state, j))
}

fn entropy(cfg: &ExperimentConfig) -> Result<Parts, CliError> {
    let models = cfg.models();
    let reports = entropy_sweep(&models, &cfg.grid.d, cfg.tolerance("saturation"))?;
    let mut table = Table::new(&["entropy_bits", "energy", "gap", "solver", "exempt"]);
    let mut summary = header(cfg);
    summary.put("tolerance.saturation", num(cfg.tolerance("saturation")));
    let mut series = Vec::new();
    for rep in &reports {
        let label = &rep.model;
        for p in &rep.points {
            let cuts: Vec<usize> = match &cfg.grid.j {
                Some(js) => sorted(js.clone()).into_iter().filter(|&j| j >= 1 && j < p.d).collect(),
                None => (1..p.d).collect(),
            };
            for j in cuts {
                table.push(
                    &RowKey::new(label.as_str()).d(p.d).j(j),
                    vec![
                        num(p.cut_entropies[j - 1]),
                        num(p.energy),
                        num(p.gap),
                        solver_name(p),
                        rep.exempt.to_string(),
                    ],
                );
            }
            summary.put(format!("{label}.d={}.mid_cut_bits", p.d), num(p.mid_cut));
            summary.put(format!("{label}.d={}.max_cut_bits", p.d), num(p.max_cut));
        }
        summary.put(format!("{label}.delta_sat"), opt_num(rep.delta_sat));
        summary.put(format!("{label}.saturated"), rep.saturated);
        summary.put(format!("{label}.plateau_ok"), rep.plateau_ok);
        summary.put(format!("{label}.exempt"), rep.exempt);
        summary.put(format!("{label}.passed"), rep.passed());
        series.push(Series {
            stem: format!("entropy_{}", slug(label)),
            labels: ("d", "mid_cut_bits"),
            points: rep.points.iter().map(|p| (p.d as f64, p.mid_cut)).collect(),
            fit: None,
        });
    }
    Ok((table, summary, series))
}

fn solver_name(p: &nnichain::arealaw_analysis::SweepPoint) -> String {
    format!("{:?}", p.solver).to_lowercase()
}

#[derive(Debug, Clone, Copy)]
struct PipelineJob {
    j: usize,
    l: usize,
    q: Option<f64>,
}

fn filter_params(cfg: &ExperimentConfig, job: &PipelineJob, gap: f64) -> nnichain::Result<FilterParams> {
    let mut p = match job.q {
        Some(q) => FilterParams::with_q(q, job.l)?,
        None => FilterParams::for_overlap(job.l, gap, cfg.filter.constant)?,
    };
    p.tau_scale = cfg.filter.tau_scale;
    p.refine_tol = cfg.tolerance("refine");
    Ok(p)
}

fn obolor(cfg: &ExperimentConfig) -> Result<Parts, CliError> {
    let mut table = Table::new(&[
        "error",
        "error_positive",
        "gaussian_error",
        "norm_left",
        "norm_bulk",
        "norm_right",
        "tau_left",
        "defect_left",
        "bound_left",
        "tau_right",
        "defect_right",
        "bound_right",
        "bulk_residual",
        "bulk_steps",
        "bulk_nodes",
        "mutual_information",
        "relent_bound",
        "relent_holds",
        "bulk_weight",
        "weight_holds",
        "e",
        "e_b",
        "eb_stated_holds",
        "eb_derived_holds",
    ]);
    let mut summary = header(cfg);
    summary.put("filter.constant", num(cfg.filter.constant));
    summary.put("filter.tau_scale", num(cfg.filter.tau_scale));
    let mut series = Vec::new();
    let slack = cfg.tolerance("slack");
    let mut window_ok = true;
    let mut relent_ok = true;
    for model in cfg.models() {
        let label = model.label();
        for d in sorted(cfg.grid.d.clone()) {
            let spec = model.build(d)?;
            let (eig, state, _) = diagonalized(&model, d)?;
            let qs: Vec<Option<f64>> = match &cfg.grid.q {
                Some(q) => sorted(q.clone()).into_iter().map(Some).collect(),
                None => vec![None],
            };
            let mut jobs = Vec::new();
            for j in j_grid(cfg, d) {
                for &q in &qs {
                    for l in l_grid(cfg) {
                        if check_admissible(d, j, l).is_ok() {
                            jobs.push(PipelineJob { j, l, q });
                        }
                    }
                }
            }
            let results = par::map(&jobs, |job| -> Result<(GroundProjectorApprox, _), CliError> {
                let params = filter_params(cfg, job, eig.gap())?;
                let approx = approximate_ground_projector(&spec, &eig, job.j, job.l, &params)?;
                let check = relent_check(&state, &approx)?;
                Ok((approx, check))
            });
            let mut curve: Vec<(usize, Option<f64>, Vec<(f64, f64)>)> = Vec::new();
            for (job, res) in jobs.iter().zip(results) {
                let (a, ch) = res?;
                let norms = a.operator_norms();
                let eb = eb_bound_check(&ch.record).ok();
                window_ok &= a.left.defect <= a.left.bound + slack && a.right.defect <= a.right.bound + slack;
                relent_ok &= ch.bound_holds && ch.weight_holds;
                table.push(
                    &RowKey::new(label.as_str()).d(d).j(job.j).l(job.l).q(a.q),
                    vec![
                        num(a.error),
                        num(a.error_positive),
                        num(a.gaussian_error),
                        num(norms[0]),
                        num(norms[1]),
                        num(norms[2]),
                        num(a.left.tau),
                        num(a.left.defect),
                        num(a.left.bound),
                        num(a.right.tau),
                        num(a.right.defect),
                        num(a.right.bound),
                        num(a.bulk_residual),
                        a.bulk_steps.to_string(),
                        a.bulk_nodes.to_string(),
                        num(ch.mutual.mutual_information),
                        opt_num(ch.bound),
                        ch.bound_holds.to_string(),
                        num(ch.ground_weight),
                        ch.weight_holds.to_string(),
                        num(ch.record.e),
                        num(ch.record.e_b),
                        eb.map(|e| e.stated.holds.to_string()).unwrap_or_else(|| "na".into()),
                        eb.map(|e| e.derived.holds.to_string()).unwrap_or_else(|| "na".into()),
                    ],
                );
                match curve.last_mut() {
                    Some((cj, cq, pts)) if *cj == job.j && *cq == job.q => pts.push((job.l as f64, a.error)),
                    _ => curve.push((job.j, job.q, vec![(job.l as f64, a.error)])),
                }
            }
            for (j, q, pts) in curve {
                let (tag, stem) = match q {
                    Some(q) => (
                        format!("{label}.d={d}.j={j}.q={}", num(q)),
                        format!("obolor_{}_d{d}_j{j}_q{}", slug(&label), num(q)),
                    ),
                    None => (format!("{label}.d={d}.j={j}"), format!("obolor_{}_d{d}_j{j}", slug(&label))),
                };
                let fit = fit_decay(&pts).ok();
                match &fit {
                    Some(f) => {
                        summary.put(format!("decay.{tag}.rate"), num(f.rate));
                        summary.put(format!("decay.{tag}.intercept"), num(f.intercept));
                        summary.put(format!("decay.{tag}.max_residual"), num(f.max_residual));
                        summary.put(format!("decay.{tag}.negative"), f.rate < 0.0);
                    }
                    None => summary.put(format!("decay.{tag}.rate"), "na"),
                }
                series.push(Series {
                    stem,
                    labels: ("l", "error"),
                    points: pts,
                    fit,
                });
            }
        }
    }
    summary.put("window_guarantee_ok", window_ok);
    summary.put("relent_ok", relent_ok);
    Ok((table, summary, series))
}

fn bounds(cfg: &ExperimentConfig) -> Result<Parts, CliError> {
    let mut table = Table::new(&["part", "measured", "bound", "slack", "holds"]);
    let mut summary = header(cfg);
    let mut series = Vec::new();
    let mut violations = 0usize;
    let mut worst_projector = 0.0f64;
    for model in cfg.models() {
        let label = model.label();
        for d in sorted(cfg.grid.d.clone()) {
            let spec = model.build(d)?;
            let (eig, _, coupling) = diagonalized(&model, d)?;
            let gap = eig.gap();
            let qs = sorted(match &cfg.grid.q {
                Some(q) => q.clone(),
                None => DEFAULT_Q_FACTORS.iter().map(|f| f / (gap * gap)).collect(),
            });
            let mut pts = Vec::new();
            for &q in &qs {
                let measured = gaussian_projector_error(&eig, q)?;
                let closed = (-0.5 * gap * gap * q).exp();
                let rel = (measured - closed).abs() / closed;
                worst_projector = worst_projector.max(rel);
                let holds = rel <= 1e-10;
                violations += usize::from(!holds);
                table.push(
                    &RowKey::new(label.as_str()).d(d).q(q),
                    vec!["projector".into(), num(measured), num(closed), num(rel), holds.to_string()],
                );
                pts.push((q, measured));
            }
            let fit = fit_decay(&pts).ok();
            if let Some(f) = &fit {
                summary.put(format!("projector.{label}.d={d}.rate"), num(f.rate));
                summary.put(format!("projector.{label}.d={d}.expected_rate"), num(-0.5 * gap * gap));
            }
            series.push(Series {
                stem: format!("projector_{}_d{d}", slug(&label)),
                labels: ("q", "projector_error"),
                points: pts,
                fit,
            });

            let mut jobs = Vec::new();
            let js: Vec<usize> = match &cfg.grid.j {
                Some(js) => sorted(js.clone()),
                None => (1..d).collect(),
            };
            for j in js {
                for l in l_grid(cfg) {
                    if check_admissible(d, j, l).is_ok() {
                        jobs.push((j, l));
                    }
                }
            }
            let rows = par::map(&jobs, |&(j, l)| -> Result<Vec<(RowKey, Vec<String>, bool)>, CliError> {
                let split = lbr_split(&spec, &eig, j, l)?;
                let mut out = Vec::new();
                for (name, part) in ["left", "bulk", "right"].into_iter().zip(split.parts()) {
                    for &q in &qs {
                        let measured = filtered_ground_residual(&eig, part, q)?;
                        let bound = 3.0 * coupling * coupling / gap * (-0.5 * gap * gap * q).exp();
                        let holds = measured <= bound;
                        out.push((
                            RowKey::new(label.as_str()).d(d).j(j).l(l).q(q),
                            vec![name.into(), num(measured), num(bound), num(bound - measured), holds.to_string()],
                            holds,
                        ));
                    }
                }
                Ok(out)
            });
            for r in rows {
                for (key, values, holds) in r? {
                    violations += usize::from(!holds);
                    table.push(&key, values);
                }
            }
        }
    }
    summary.put("projector.max_relative_deviation", num(worst_projector));
    summary.put("violations", violations);
    summary.put("passed", violations == 0);
    Ok((table, summary, series))
}

/// `β = ln(1 + 1/E)` for levels `0, 1, 2, …` without cutoff.
pub fn geometric_beta(energy: f64) -> f64 {
    (1.0 + 1.0 / energy).ln()
}

fn gibbs(cfg: &ExperimentConfig) -> Result<Parts, CliError> {
    let mut table = Table::new(&[
        "source",
        "energy",
        "beta",
        "bound_bits",
        "gibbs_entropy_bits",
        "difference",
        "reference_beta",
    ]);
    let mut summary = header(cfg);
    let mut series = Vec::new();
    let mut worst = 0.0f64;
    let levels: Vec<f64> = (0..REFERENCE_LEVELS).map(|k| k as f64).collect();
    let energies = sorted(cfg.grid.energy.clone().unwrap_or_else(|| vec![1.0]));
    let reference = format!("linear{REFERENCE_LEVELS}");
    let mut pts = Vec::new();
    for &e in &energies {
        let g = gibbs_entropy_bound(&levels, e)
            .map_err(|err| CliError::Config(format!("grid.energy: {err}")))?;
        let exact = g.state.entropy_bits();
        worst = worst.max((g.bound - exact).abs());
        table.push(
            &RowKey::new(reference.as_str()),
            vec![
                "reference".into(),
                num(e),
                num(g.beta),
                num(g.bound),
                num(exact),
                num(g.bound - exact),
                num(geometric_beta(e)),
            ],
        );
        pts.push((e, g.bound));
    }
    series.push(Series {
        stem: format!("gibbs_{reference}"),
        labels: ("energy", "bound_bits"),
        points: pts,
        fit: None,
    });
    let fractions = sorted(
        cfg.grid
            .energy_fraction
            .clone()
            .unwrap_or_else(|| DEFAULT_ENERGY_FRACTIONS.to_vec()),
    );
    for model in cfg.models() {
        let label = model.label();
        for d in sorted(cfg.grid.d.clone()) {
            let (eig, _, _) = diagonalized(&model, d)?;
            let lam = eig.eigenvalues();
            let mean = lam.iter().sum::<f64>() / lam.len() as f64;
            let mut pts = Vec::new();
            for &f in &fractions {
                let e = f * mean;
                let g = gibbs_entropy_bound(lam, e)?;
                let exact = g.state.entropy_bits();
                worst = worst.max((g.bound - exact).abs());
                table.push(
                    &RowKey::new(label.as_str()).d(d),
                    vec![
                        "model".into(),
                        num(e),
                        num(g.beta),
                        num(g.bound),
                        num(exact),
                        num(g.bound - exact),
                        "na".into(),
                    ],
                );
                pts.push((e, g.bound));
            }
            series.push(Series {
                stem: format!("gibbs_{}_d{d}", slug(&label)),
                labels: ("energy", "bound_bits"),
                points: pts,
                fit: None,
            });
        }
    }
    summary.put("max_bound_minus_entropy", num(worst));
    Ok((table, summary, series))
}
