//! One function per subcommand. Every command writes its artifacts under the
//! output directory and returns the JSON summary, which embeds the config hash.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use toruspot_core::dinfty::{default_resolution, dinfty_atomic, dinfty_to_uniform, discrepancy_1d, MeasureRef};
use toruspot_core::energy::{energy_riesz, negativity_scan, PerturbedPotential};
use toruspot_core::experiments::{conjugate, laplacian_scaling, stability_sweep, StabilityFamily};
use toruspot_core::flow::{run_flow, FlowConfig, FlowKernel, Integrator, KernelSelector};
use toruspot_core::riesz::{lp_norm, potential_field, transform_table, u_eps_field_with, RieszSpec};
use toruspot_core::stats::loglog_slope;

use crate::calibration::{calibrate, SetConstants};
use crate::config::{
    Command, DinftyParams, DiscrepancyParams, EnergyParams, ExperimentConfig, FlowParams, IntegratorName, KernelSpec,
    OracleParams, PotentialParams, ScalingParams, StabilityFamilyName, VerifyParams,
};
use crate::error::{AppError, AppResult};
use crate::formats::{DinftyReport, EnclosureReport, Instance};
use crate::oracle::permutation_fixtures;
use crate::output::{scatter_svg, write_atomic, write_csv, write_json};
use crate::verify::run_all;

/// Particle count of `--full` flow runs.
pub const FULL_PARTICLES: usize = 1000;

/// Resolved run settings shared by all commands.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub out: PathBuf,
    /// Directory relative paths in the config are resolved against.
    pub base: PathBuf,
    pub seed: u64,
    pub full: bool,
    pub config_hash: String,
}

impl RunContext {
    /// Fixes the seed into the config before hashing, so the hash identifies the run.
    pub fn new(cfg: &mut ExperimentConfig, out: PathBuf, base: PathBuf, seed: u64, full: bool) -> Self {
        cfg.seed = Some(seed);
        Self { out, base, seed, full, config_hash: cfg.hash() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Writes `{command, config_hash, seed, result}` to `<out>/<command>.json`.
    fn finish(&self, command: &str, result: Value) -> AppResult<Value> {
        let doc = json!({ "command": command, "config_hash": self.config_hash, "seed": self.seed, "result": result });
        write_json(&self.path(&format!("{command}.json")), &doc)?;
        Ok(doc)
    }

    /// CSV preceded by a `# config <hash>` comment line.
    fn csv(&self, name: &str, header: &[String], rows: &[Vec<f64>]) -> AppResult<()> {
        let path = self.path(name);
        write_csv(&path, header, rows)?;
        let body = std::fs::read(&path).map_err(|e| AppError::io(&path, e))?;
        let mut bytes = format!("# config {}\n", self.config_hash).into_bytes();
        bytes.extend(body);
        write_atomic(&path, &bytes)
    }
}

pub fn run(cfg: &ExperimentConfig, ctx: &RunContext) -> AppResult<Value> {
    match &cfg.command {
        Command::Dinfty(p) => cmd_dinfty(p, ctx),
        Command::Discrepancy(p) => cmd_discrepancy(p, ctx),
        Command::Potential(p) => cmd_potential(p, ctx),
        Command::Energy(p) => cmd_energy(p, ctx),
        Command::Scaling(p) => cmd_scaling(p, ctx),
        Command::Flow(p) => cmd_flow(p, ctx),
        Command::Verify(p) => cmd_verify(p, ctx),
        Command::Oracle(p) => cmd_oracle(p, ctx),
    }
}

/// One instance or a fixture list.
#[derive(Debug, Clone, serde::Deserialize)]
#[serde(untagged)]
enum Instances {
    One(Instance),
    Many(Vec<Instance>),
}

fn load_instances(p: &DinftyParams, base: &Path) -> AppResult<Vec<Instance>> {
    use crate::config::Source;
    match &p.instance {
        Source::Inline(i) => Ok(vec![i.clone()]),
        Source::Path(path) => {
            let path = base.join(path);
            let text = std::fs::read_to_string(&path).map_err(|e| AppError::io(&path, e))?;
            Ok(match serde_json::from_str::<Instances>(&text)? {
                Instances::One(i) => vec![i],
                Instances::Many(v) => v,
            })
        }
    }
}

/// Distances of every instance; fixtures carrying a reference value must match it exactly.
pub fn cmd_dinfty(p: &DinftyParams, ctx: &RunContext) -> AppResult<Value> {
    let instances = load_instances(p, &ctx.base)?;
    let mut reports = Vec::with_capacity(instances.len());
    let mut mismatches = 0;
    for inst in &instances {
        let a = inst.a.to_atoms(inst.d)?;
        let b = inst.b.to_atoms(inst.d)?;
        let res = dinfty_atomic(&a, &b)?;
        let matches = inst.expected_r_star.map(|e| e == res.r_star);
        mismatches += usize::from(matches == Some(false));
        reports.push(json!({ "report": DinftyReport::from(&res), "expected_r_star": inst.expected_r_star, "matches": matches }));
    }
    let result = if reports.len() == 1 {
        reports.pop().expect("one report")
    } else {
        json!({ "instances": reports.len(), "mismatches": mismatches, "reports": reports })
    };
    let doc = ctx.finish("dinfty", result)?;
    if mismatches > 0 {
        return Err(AppError::ChecksFailed(mismatches));
    }
    Ok(doc)
}

/// Discrepancy in 1D next to the transport enclosure of `d∞(ρ, 1)`.
pub fn cmd_discrepancy(p: &DiscrepancyParams, ctx: &RunContext) -> AppResult<Value> {
    let rho = p.density.build()?;
    let d = rho.grid().dim();
    let enc = dinfty_to_uniform(MeasureRef::Density(&rho), p.dinfty_n.unwrap_or_else(|| default_resolution(d)))?;
    let disc = if d == 1 { Some(discrepancy_1d(&rho)?) } else { None };
    let consistent = disc.map(|v| (0.5 * v - enc.midpoint()).abs() <= enc.half_width() + 2.0 / rho.grid().n() as f64);
    ctx.finish(
        "discrepancy",
        json!({ "discrepancy": disc, "half_discrepancy": disc.map(|v| 0.5 * v), "enclosure": EnclosureReport::from(enc), "consistent": consistent }),
    )
}

/// `W_s * ρ` on the density grid, its norms, and optionally the field as CSV.
pub fn cmd_potential(p: &PotentialParams, ctx: &RunContext) -> AppResult<Value> {
    let rho = p.density.build()?;
    let grid = rho.grid();
    let spec = RieszSpec::new(grid.dim(), p.s)?.with_cutoff(p.cutoff.unwrap_or((grid.n() - 1) / 2))?;
    let field = potential_field(&spec, &rho)?;
    let norms = p
        .norms
        .iter()
        .map(|e| Ok(json!({ "p": e, "norm": lp_norm(&field, e.0)? })))
        .collect::<AppResult<Vec<_>>>()?;
    if p.emit_field {
        let mut header: Vec<String> = (1..=grid.dim()).map(|a| format!("x{a}")).collect();
        header.push("value".into());
        let rows: Vec<Vec<f64>> = (0..grid.cells())
            .map(|c| {
                let mut row = grid.point(c).coords().to_vec();
                row.push(field.values()[c]);
                row
            })
            .collect();
        ctx.csv("potential.csv", &header, &rows)?;
    }
    ctx.finish("potential", json!({ "d": grid.dim(), "N": grid.n(), "s": p.s, "cutoff": spec.cutoff, "mean": field.mean(), "norms": norms }))
}

fn stability_family(f: StabilityFamilyName) -> StabilityFamily {
    match f {
        StabilityFamilyName::Cosine => StabilityFamily::Cosine,
        StabilityFamilyName::Bump => StabilityFamily::Bump,
        StabilityFamilyName::Laplacian => StabilityFamily::Laplacian,
    }
}

/// Energy of a density, the half-order identity, the perturbed-coefficient
/// scan, and the energy-versus-distance table, each when configured.
pub fn cmd_energy(p: &EnergyParams, ctx: &RunContext) -> AppResult<Value> {
    let mut result = serde_json::Map::new();
    if let Some(density) = &p.density {
        let rho = density.build()?;
        let (d, n) = (rho.grid().dim(), rho.grid().n());
        let k = p.cutoff.unwrap_or((n - 1) / 2);
        let spec = RieszSpec::new(d, p.s)?.with_cutoff(k)?;
        let half = RieszSpec::new(d, 0.5 * (d as f64 + p.s))?.with_cutoff(k)?;
        let e = energy_riesz(&spec, &rho)?;
        let v = lp_norm(&potential_field(&half, &rho)?, 2.0)?;
        result.insert("energy".into(), json!(e));
        result.insert("half_norm_sq".into(), json!(0.5 * v * v));
        if let Some(pert) = p.perturbation {
            let pp = PerturbedPotential::new(spec, pert.eps, pert.c0)?;
            result.insert("perturbed_energy".into(), json!(pp.energy(&rho)?));
        }
    }
    if let Some(pert) = p.perturbation {
        let d = p.density.as_ref().map_or(2, |s| s.dim());
        let pp = PerturbedPotential::new(RieszSpec::new(d, p.s)?, pert.eps, pert.c0)?;
        let k_max = p.scan_k.unwrap_or_else(|| (2.0 / pert.eps).ceil() as usize);
        let scan = negativity_scan(&pp, k_max);
        result.insert(
            "scan".into(),
            json!({
                "k_max": k_max,
                "negative_count": scan.negative_count,
                "min_coefficient": scan.min_coefficient,
                "argmin": scan.argmin,
                "band": [scan.band.0, scan.band.1],
                "c0_threshold": scan.c0_threshold,
                "sup_difference": pp.sup_difference(),
            }),
        );
    }
    if let Some(st) = &p.stability {
        let dn = st.dinfty_n.unwrap_or_else(|| default_resolution(st.d));
        let rows = stability_sweep(stability_family(st.family), st.d, p.s, st.n, dn, &st.params)?;
        let header = ["param", "energy", "dinfty_lo", "dinfty_hi", "dinfty_estimate", "ratio"].map(String::from);
        let csv_rows: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| vec![r.param, r.energy, r.enclosure.lo, r.enclosure.hi, r.enclosure.estimate, r.ratio])
            .collect();
        ctx.csv("stability.csv", &header, &csv_rows)?;
        let flags: Vec<Value> = rows
            .iter()
            .filter_map(|r| r.inconclusive.as_ref().map(|m| json!({ "param": r.param, "inconclusive": m })))
            .collect();
        result.insert(
            "stability".into(),
            json!({ "gamma": 1.0 / (2.0 * st.d as f64 - p.s), "max_ratio": rows.iter().map(|r| r.ratio).fold(0.0, f64::max), "flags": flags }),
        );
    }
    ctx.finish("energy", Value::Object(result))
}

#[derive(Debug, Serialize)]
struct SlopeFit {
    slope: Option<f64>,
    target: f64,
    /// Set when fewer than two sweep members make the slope undefined.
    flag: Option<&'static str>,
}

fn fit(eps: &[f64], values: &[f64], target: f64) -> SlopeFit {
    let slope = loglog_slope(eps, values);
    SlopeFit { slope, target, flag: slope.is_none().then_some("slope undefined: fewer than two sweep members") }
}

/// Sweep points run concurrently; the slope is fitted over all of them.
pub fn cmd_scaling(p: &ScalingParams, ctx: &RunContext) -> AppResult<Value> {
    match p {
        ScalingParams::Laplacian { d, p: pe, s, m, eps, cells_per_eps } => {
            let rows = eps
                .par_iter()
                .map(|&e| Ok(laplacian_scaling(*d, pe.0, *s, *m, &[e], *cells_per_eps)?.rows[0]))
                .collect::<AppResult<Vec<_>>>()?;
            let header = ["eps", "N", "norm", "dinfty_lower", "witness_radius", "dinfty_upper"].map(String::from);
            let csv_rows: Vec<Vec<f64>> =
                rows.iter().map(|r| vec![r.eps, r.n as f64, r.norm, r.lower, r.witness_radius, r.upper]).collect();
            ctx.csv("scaling.csv", &header, &csv_rows)?;
            let target = *d as f64 + if pe.0.is_infinite() { 0.0 } else { *d as f64 / pe.0 } - s;
            let norms: Vec<f64> = rows.iter().map(|r| r.norm).collect();
            let lowers: Vec<f64> = rows.iter().map(|r| r.lower).collect();
            let inconclusive: Vec<f64> = rows.iter().filter(|r| !(r.lower > 0.0)).map(|r| r.eps).collect();
            ctx.finish(
                "scaling",
                json!({ "kind": "laplacian", "norm_fit": fit(eps, &norms, target), "lower_fit": fit(eps, &lowers, 1.0), "inconclusive": inconclusive }),
            )
        }
        ScalingParams::UEps { d, beta, p: pe, eps, cells_per_eps } => {
            let table = transform_table(*d)?;
            let q = conjugate(pe.0);
            let rows = eps
                .par_iter()
                .map(|&e| {
                    let n = (cells_per_eps / e).round() as usize;
                    Ok(vec![e, n as f64, u_eps_field_with(&table, *beta, e, q, n)?.1])
                })
                .collect::<AppResult<Vec<_>>>()?;
            let header = ["eps", "N", "norm"].map(String::from);
            ctx.csv("scaling.csv", &header, &rows)?;
            let norms: Vec<f64> = rows.iter().map(|r| r[2]).collect();
            let target = -beta - if pe.0.is_infinite() { 0.0 } else { *d as f64 / pe.0 };
            let log_ratios: Vec<f64> = rows.iter().map(|r| r[2] / (1.0 + r[0].ln().abs()).powf(1.0 / q)).collect();
            ctx.finish("scaling", json!({ "kind": "u_eps", "q": q, "norm_fit": fit(eps, &norms, target), "log_ratios": log_ratios }))
        }
    }
}

fn flow_config(panel: &crate::config::PanelConfig, seed: u64, full: bool) -> FlowConfig {
    let kernel = match panel.kernel {
        KernelSpec::Pure => KernelSelector::Pure,
        KernelSpec::Perturbed { c0, eps } => KernelSelector::Perturbed { c0, eps },
    };
    let mut cfg = FlowConfig::standard(kernel, panel.t_end, seed);
    if let Some(n) = panel.particles {
        cfg.particles = n;
    }
    if full {
        cfg.particles = FULL_PARTICLES;
    }
    if let Some(h) = panel.h {
        cfg.h = h;
    }
    if let Some(i) = panel.integrator {
        cfg.integrator = match i {
            IntegratorName::Euler => Integrator::Euler,
            IntegratorName::Rk4 => Integrator::Rk4,
        };
    }
    if let Some(k) = panel.snapshot_every {
        cfg.snapshot_every = k;
    }
    if let Some(t) = panel.table {
        cfg.table = t;
    }
    cfg
}

/// Runs every panel from the same seeded initial condition and writes the
/// trajectory CSV, a summary and start/end scatter plots per panel.
pub fn cmd_flow(p: &FlowParams, ctx: &RunContext) -> AppResult<Value> {
    let summaries = p
        .panels
        .par_iter()
        .map(|panel| {
            let cfg = flow_config(panel, ctx.seed, ctx.full);
            let kernel = FlowKernel::new(&cfg)?;
            let started = std::time::Instant::now();
            let run = run_flow(&cfg, None, &kernel)?;
            let seconds = started.elapsed().as_secs_f64();
            let d = cfg.d;
            let mut header = vec!["t".to_string()];
            for i in 0..cfg.particles {
                for a in 0..d {
                    header.push(format!("x{}_{}", i, a + 1));
                }
            }
            header.push("energy".into());
            let rows: Vec<Vec<f64>> = run
                .snapshots
                .iter()
                .zip(&run.energies)
                .map(|(s, &(t, e))| {
                    let mut row = vec![t];
                    row.extend_from_slice(s.positions());
                    row.push(e);
                    row
                })
                .collect();
            ctx.csv(&format!("{}_trajectory.csv", panel.name), &header, &rows)?;
            if d == 2 {
                for (tag, state) in [("start", &run.initial), ("end", &run.final_state)] {
                    let pts: Vec<[f64; 2]> = (0..state.len()).map(|i| [state.point(i)[0], state.point(i)[1]]).collect();
                    let title = format!("{} t={:.2}", panel.name, state.time);
                    let svg = scatter_svg(&title, &pts, 480).replacen('\n', &format!("\n<!-- config {} -->\n", ctx.config_hash), 1);
                    write_atomic(&ctx.path(&format!("{}_{tag}.svg", panel.name)), svg.as_bytes())?;
                }
            }
            let (first, last) = (run.energies[0], *run.energies.last().expect("at least one energy"));
            Ok(json!({
                "name": panel.name,
                "particles": cfg.particles,
                "t_end": cfg.t_end,
                "steps": run.final_state.steps,
                "seconds": seconds,
                "energy_start": first.1,
                "energy_end": last.1,
                "energy_slope_last": energy_slope(&run.energies),
                "nn_cv": run.neighbors.cv,
                "nn_mean": run.neighbors.mean,
                "clusters": run.clusters.as_ref().map(|c| json!({
                    "threshold": c.threshold, "count": c.count, "mean_radius": c.mean_radius, "max_radius": c.max_radius, "sizes": c.sizes,
                })),
            }))
        })
        .collect::<AppResult<Vec<_>>>()?;
    ctx.finish("flow", json!({ "panels": summaries }))
}

/// Energy change per unit time over the last snapshot interval.
fn energy_slope(e: &[(f64, f64)]) -> Option<f64> {
    match e {
        [.., (t0, e0), (t1, e1)] if t1 > t0 => Some((e1 - e0) / (t1 - t0)),
        _ => None,
    }
}

/// Regenerates the set constants, then runs every invariant suite.
pub fn cmd_verify(p: &VerifyParams, ctx: &RunContext) -> AppResult<Value> {
    let fresh = calibrate(p.calibration_sets, ctx.seed)?;
    write_json(&ctx.path("set_constants.json"), &fresh)?;
    let constants: SetConstants = match &p.calibration_file {
        Some(path) => {
            let path = ctx.base.join(path);
            serde_json::from_str(&std::fs::read_to_string(&path).map_err(|e| AppError::io(&path, e))?)?
        }
        None => fresh.clone(),
    };
    let suites = run_all(p.samples, ctx.seed, &constants)?;
    let failed = suites.iter().filter(|s| !s.passed()).count();
    for s in &suites {
        eprintln!(
            "[{}] {}: {} cases, {} failures, worst {:.3e} (tol {:.1e}) {}",
            if s.passed() { "PASS" } else { "FAIL" },
            s.name,
            s.cases,
            s.failures,
            s.worst,
            s.tolerance,
            s.note
        );
    }
    ctx.finish("verify", json!({ "calibration": fresh, "checked_against": constants, "suites": suites, "failed": failed }))?;
    if failed > 0 {
        return Err(AppError::ChecksFailed(failed));
    }
    Ok(json!({ "failed": 0 }))
}

/// Writes equal-weight fixtures annotated by exhaustive bottleneck matching.
pub fn cmd_oracle(p: &OracleParams, ctx: &RunContext) -> AppResult<Value> {
    if p.n_max == 0 || p.n_max > 9 {
        return Err(AppError::Config("n_max must lie in 1..=9 for exhaustive matching".into()));
    }
    if p.dims.is_empty() || p.dims.iter().any(|&d| d == 0 || d > 3) {
        return Err(AppError::Config("dims must be a nonempty subset of 1..=3".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let fixtures = permutation_fixtures(&mut rng, p.count, p.n_max, &p.dims);
    write_json(&ctx.path("oracle_fixtures.json"), &fixtures)?;
    ctx.finish("oracle", json!({ "fixtures": fixtures.len(), "file": "oracle_fixtures.json" }))
}
