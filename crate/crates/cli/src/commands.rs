use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use gyrostat::bifurcation::{classify as classify_k, sample_curve, sigma_slice, RegionLabel, REGION_CONVENTION};
use gyrostat::contour::{contour_condition, fiber_jacobian, RankTolerance};
use gyrostat::dynamics::{integrate, integrate_directed, project, Direction};
use gyrostat::rpm::{admissible_velocities, generalized_boundary, rpm_map as map_k, RpmReport};
use gyrostat::sphere::GridSpec;
use gyrostat::{csv_row, integrals, IntegralConstants, State, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{svg, CliError, Context};

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::Io(e.into()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub struct BifurcationOptions {
    pub out_dir: PathBuf,
    pub samples: usize,
    pub k3: Vec<f64>,
    pub region_samples: usize,
    pub seed: u64,
    pub tol: f64,
}

#[derive(Serialize)]
struct RegionSample {
    k: [f64; 3],
    label: RegionLabel,
    manifold_type: &'static str,
}

#[derive(Serialize)]
struct RegionSamples {
    seed: u64,
    tolerance: f64,
    convention: &'static str,
    samples: Vec<RegionSample>,
}

pub fn bifurcation(ctx: &Context, opts: BifurcationOptions) -> Result<(), CliError> {
    let p = &ctx.params;
    p.require_generic()?;
    if opts.samples < 2 {
        return Err(CliError::Input(format!("--samples must be at least 2, got {}", opts.samples)));
    }
    std::fs::create_dir_all(&opts.out_dir)?;

    let mut curve = BufWriter::new(File::create(opts.out_dir.join("curve.csv"))?);
    writeln!(curve, "sigma,k1,k2,branch")?;
    for s in sample_curve(opts.samples, p) {
        writeln!(curve, "{},{}", csv_row(&[s.sigma, s.k1, s.k2]), s.branch.as_str())?;
    }
    curve.flush()?;

    let mut slices = BufWriter::new(File::create(opts.out_dir.join("sigma_slices.csv"))?);
    writeln!(slices, "k3,polyline_id,cylinder,branch,k1,k2")?;
    for &k3 in &opts.k3 {
        for (id, line) in sigma_slice(k3, opts.samples, p)?.iter().enumerate() {
            let branch = line.branch.map_or("", |b| b.as_str());
            for [k1, k2] in &line.points {
                writeln!(slices, "{},{id},{},{branch},{}", csv_row(&[k3]), line.cylinder, csv_row(&[*k1, *k2]))?;
            }
        }
    }
    slices.flush()?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let ks: Vec<IntegralConstants> = (0..opts.region_samples)
        .map(|_| {
            let k1: f64 = rng.gen_range(0.0..12.0);
            IntegralConstants::new(k1, rng.gen_range(0.0..12.0), rng.gen_range(-1.2..1.2) * k1.sqrt())
        })
        .collect();
    let samples = ks
        .par_iter()
        .map(|k| {
            let label = classify_k(k, p, opts.tol)?;
            Ok(RegionSample { k: k.to_array(), label, manifold_type: label.manifold_type() })
        })
        .collect::<Result<Vec<_>, gyrostat::Error>>()?;
    let report = RegionSamples { seed: opts.seed, tolerance: opts.tol, convention: REGION_CONVENTION, samples };
    let mut regions = BufWriter::new(File::create(opts.out_dir.join("regions.json"))?);
    write_json(&mut regions, &report)
}

#[derive(Serialize)]
struct Classification {
    k: IntegralConstants,
    label: RegionLabel,
    manifold_type: &'static str,
    components: usize,
    support_components: usize,
    tori: usize,
    uncertain_vertices: usize,
    consistent: bool,
    grid: gyrostat::sphere::GridDescriptor,
    convention: &'static str,
}

pub fn classify(ctx: &Context, k: IntegralConstants, grid: GridSpec, tol: f64) -> Result<(), CliError> {
    let label = classify_k(&k, &ctx.params, tol)?;
    let report = map_k(&k, &ctx.params, grid)?;
    let out = Classification {
        k,
        label,
        manifold_type: label.manifold_type(),
        components: report.component_count(),
        support_components: report.support_components,
        tori: report.tori,
        uncertain_vertices: report.uncertain.len(),
        consistent: label.torus_count().is_none_or(|n| n == report.component_count()),
        grid: report.grid,
        convention: REGION_CONVENTION,
    };
    write_json(&mut *open_output(&ctx.output)?, &out)
}

#[derive(Serialize)]
struct SimulationReport {
    initial: State,
    k: IntegralConstants,
    t_end: f64,
    tolerance: f64,
    steps: usize,
    drift: gyrostat::dynamics::Drift,
    points_in_region: usize,
    points: usize,
    reversal_error: f64,
    trajectory_csv: Option<PathBuf>,
}

pub fn simulate(ctx: &Context, state: Option<State>, t_end: f64, tol: f64, seed: u64) -> Result<(), CliError> {
    let p = &ctx.params;
    let state = match state {
        Some(s) => s,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let omega = Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let nu = Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            State::normalized(omega, nu)?
        }
    };
    let k = integrals(&state, p);
    let traj = integrate(&state, p, t_end, tol)?;
    let back = integrate_directed(traj.states.last().unwrap(), p, t_end, tol, Direction::Reversed)?;
    let end = back.states.last().unwrap();
    let reversal_error = (end.omega - state.omega).norm().max((end.nu() - state.nu()).norm());

    let curve = project(&traj);
    let inside = curve
        .points
        .par_iter()
        .map(|nu| admissible_velocities(nu, &k, p).map(|f| f.count() >= 1))
        .collect::<Result<Vec<bool>, _>>()?;

    let csv_path = ctx.output.clone().unwrap_or_else(|| PathBuf::from("trajectory.csv"));
    traj.write_csv(p, BufWriter::new(File::create(&csv_path)?))?;

    let report = SimulationReport {
        initial: state,
        k,
        t_end,
        tolerance: tol,
        steps: traj.len(),
        drift: traj.drift,
        points_in_region: inside.iter().filter(|&&b| b).count(),
        points: inside.len(),
        reversal_error,
        trajectory_csv: Some(csv_path),
    };
    write_json(&mut io::stdout().lock(), &report)
}

pub fn boundary(ctx: &Context, k: IntegralConstants) -> Result<(), CliError> {
    let b = generalized_boundary(&k, &ctx.params)?;
    let mut out = open_output(&ctx.output)?;
    writeln!(out, "curve_id,sign_pattern,nu1,nu2,nu3,omega1,omega2,omega3")?;
    for (id, c) in b.curves.iter().enumerate() {
        for (nu, w) in c.curve.points.iter().zip(&c.omegas) {
            let v = nu.vec();
            writeln!(out, "{id},{},{}", c.sign_pattern, csv_row(&[v.x, v.y, v.z, w.x, w.y, w.z]))?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct RpmOutput<'a> {
    region: RegionLabel,
    manifold_type: &'static str,
    #[serde(flatten)]
    report: &'a RpmReport,
}

pub fn rpm_map(ctx: &Context, k: IntegralConstants, grid: GridSpec, svg_path: Option<PathBuf>) -> Result<(), CliError> {
    let region = classify_k(&k, &ctx.params, gyrostat::bifurcation::DEFAULT_SIGMA_TOLERANCE)?;
    let report = map_k(&k, &ctx.params, grid)?;
    if let Some(path) = svg_path {
        let mut f = BufWriter::new(File::create(path)?);
        svg::write_hemispheres(&report, &mut f)?;
        f.flush()?;
    }
    let out = RpmOutput { region, manifold_type: region.manifold_type(), report: &report };
    write_json(&mut *open_output(&ctx.output)?, &out)
}

#[derive(Serialize)]
struct CheckSummary {
    rows: usize,
    max_abs_contour_condition: f64,
    rank_deficient: usize,
}

fn read_states(path: &Path) -> Result<Vec<State>, CliError> {
    let input_error = |line: u64, msg: String| CliError::Input(format!("{}:{line}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| input_error(0, e.to_string()))?;
    let headers = reader.headers().map_err(|e| input_error(1, e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| input_error(1, format!("missing column {name:?}")))
    };
    let cols = ["omega1", "omega2", "omega3", "nu1", "nu2", "nu3"]
        .iter()
        .map(|c| column(c))
        .collect::<Result<Vec<_>, _>>()?;
    let mut states = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| input_error(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let mut v = [0.0; 6];
        for (slot, &c) in v.iter_mut().zip(&cols) {
            let field = record.get(c).unwrap_or_default().trim();
            *slot = field.parse().map_err(|_| input_error(line, format!("not a number: {field:?}")))?;
        }
        let state = State::new(Vec3::new(v[0], v[1], v[2]), Vec3::new(v[3], v[4], v[5]))
            .map_err(|e| input_error(line, e.to_string()))?;
        states.push(state);
    }
    Ok(states)
}

pub fn check(ctx: &Context, input: &Path, tol: RankTolerance) -> Result<(), CliError> {
    let states = read_states(input)?;
    let rows: Vec<(f64, [f64; 3], usize)> = states
        .par_iter()
        .map(|s| {
            let jac = fiber_jacobian(s, &ctx.params);
            (contour_condition(s, &ctx.params), jac.singular_values, jac.rank_defect(tol))
        })
        .collect();
    let mut out = open_output(&ctx.output)?;
    writeln!(out, "row,contour_condition,s1,s2,s3,rank_defect")?;
    for (i, (c, s, d)) in rows.iter().enumerate() {
        writeln!(out, "{i},{},{d}", csv_row(&[*c, s[0], s[1], s[2]]))?;
    }
    out.flush()?;
    let summary = CheckSummary {
        rows: rows.len(),
        max_abs_contour_condition: rows.iter().map(|r| r.0.abs()).fold(0.0, f64::max),
        rank_deficient: rows.iter().filter(|r| r.2 >= 1).count(),
    };
    eprintln!("{}", serde_json::to_string(&summary).map_err(|e| CliError::Io(e.into()))?);
    Ok(())
}
