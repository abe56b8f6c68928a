use std::path::{Path, PathBuf};
use std::str::FromStr;

use goodwill_core::verification::{initial_datum, MIN_CONCLUSIVE_PATHS};
use goodwill_core::{
    invariant_measure_condition_with, refinement_study, simulate_paths, solve, verify_dominance,
    ControlPath, LabeledControl, LinearValueFunction, McConfig, RootForm, ScenarioParams,
    ViolationKind,
};

use crate::error::{exit, CliError};
use crate::scenario::Scenario;
use crate::table::{num, quantile, CsvOut};

/// A spend schedule named on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlSpec {
    Optimal,
    Zero,
    Constant(f64),
    /// The optimal schedule times a factor.
    Scaled(f64),
}

impl FromStr for ControlSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let value = |v: &str| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite() && *x >= 0.0)
                .ok_or_else(|| format!("`{s}`: expected a non-negative number after ':'"))
        };
        match s.split_once(':') {
            None if s == "optimal" => Ok(Self::Optimal),
            None if s == "zero" => Ok(Self::Zero),
            Some(("constant", v)) => Ok(Self::Constant(value(v)?)),
            Some(("scaled", v)) => Ok(Self::Scaled(value(v)?)),
            _ => Err(format!(
                "unknown control `{s}`; use optimal, zero, constant:<v> or scaled:<factor>"
            )),
        }
    }
}

impl std::fmt::Display for ControlSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Optimal => write!(f, "optimal"),
            Self::Zero => write!(f, "zero"),
            Self::Constant(v) => write!(f, "constant:{v}"),
            Self::Scaled(v) => write!(f, "scaled:{v}"),
        }
    }
}

fn build_control(
    spec: &ControlSpec,
    params: &ScenarioParams,
    vf: Option<&LinearValueFunction>,
) -> Result<ControlPath, CliError> {
    let optimal = || -> Result<ControlPath, CliError> {
        Ok(match vf {
            Some(vf) => vf.optimal_control_path(),
            None if params.a1.is_point_delay() => {
                return Err(CliError::Unsupported(format!(
                    "control `{spec}` needs the explicit solution, which requires an L² kernel a1; \
                     pass --control zero or --control constant:<v> for point-delay models"
                )))
            }
            None => solve(params)?.optimal_control_path(),
        })
    };
    Ok(match spec {
        ControlSpec::Optimal => optimal()?,
        ControlSpec::Zero => ControlPath::constant(params, 0.0)?,
        ControlSpec::Constant(v) => ControlPath::constant(params, *v)?,
        ControlSpec::Scaled(f) => optimal()?.scaled(*f)?,
    })
}

pub struct SimulateOpts {
    pub scenario: PathBuf,
    pub out: PathBuf,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    pub dt_refine: Option<usize>,
    pub control: ControlSpec,
}

/// `out.csv` → `out.refine2.csv`.
pub fn refined_path(out: &Path, factor: usize) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}.refine{factor}.{}", ext.to_string_lossy()),
        None => format!("{stem}.refine{factor}"),
    };
    out.with_file_name(name)
}

fn write_paths(
    out: &Path,
    params: &ScenarioParams,
    control: &ControlPath,
    cfg: &McConfig,
) -> Result<usize, CliError> {
    let paths = simulate_paths(params, control, cfg)?;
    let mut csv = CsvOut::create(out, &["t", "y_mean", "y_p05", "y_p95", "z"])?;
    let n_rows = paths[0].len();
    let mut column = vec![0.0; paths.len()];
    for k in 0..n_rows {
        for (c, path) in column.iter_mut().zip(&paths) {
            *c = path[k];
        }
        let mean = column.iter().sum::<f64>() / column.len() as f64;
        column.sort_by(f64::total_cmp);
        csv.numbers(&[
            k as f64 * params.dt(),
            mean,
            quantile(&column, 0.05),
            quantile(&column, 0.95),
            control.values()[k],
        ])?;
    }
    csv.finish()?;
    Ok(n_rows)
}

pub fn simulate(opts: &SimulateOpts) -> Result<i32, CliError> {
    let sc = Scenario::load(&opts.scenario)?;
    let p = &sc.params;
    let n_paths = opts.paths.unwrap_or(sc.numerics.n_paths);
    let seed = opts.seed.unwrap_or(sc.numerics.seed);
    if n_paths == 0 {
        return Err(CliError::Input("--paths must be at least 1".into()));
    }
    let control = build_control(&opts.control, p, None)?;
    let factor = opts.dt_refine.unwrap_or(1);
    if factor == 0 {
        return Err(CliError::Input("--dt-refine must be at least 1".into()));
    }
    // The coarse run sums `factor` fine increments per step so both files
    // follow the same Brownian paths.
    let cfg = McConfig::new(n_paths, seed).with_substeps(factor as u32);
    let rows = write_paths(&opts.out, p, &control, &cfg)?;
    println!(
        "simulate: {n_paths} paths, dt = {}, control {} -> {} ({rows} rows)",
        num(p.dt()),
        opts.control,
        opts.out.display()
    );
    if factor > 1 {
        let fine = p.refine(factor)?;
        let out = refined_path(&opts.out, factor);
        let rows = write_paths(
            &out,
            &fine,
            &control.refine(factor),
            &McConfig::new(n_paths, seed),
        )?;
        println!(
            "simulate: dt = {} -> {} ({rows} rows)",
            num(fine.dt()),
            out.display()
        );
    }
    Ok(exit::OK)
}

pub fn solve_cmd(scenario: &Path, out: &Path) -> Result<i32, CliError> {
    let sc = Scenario::load(scenario)?;
    let p = &sc.params;
    let vf = solve(p)?;
    let z = vf.optimal_control_path();
    let mut csv = CsvOut::create(out, &["t", "w0", "Bw", "z_star", "c"])?;
    for (k, t) in vf.times().iter().enumerate() {
        csv.numbers(&[*t, vf.w0()[k], vf.b_dot_w()[k], z.values()[k], vf.c()[k]])?;
    }
    csv.finish()?;
    let v = vf.value_function(0.0, &initial_datum(p)?)?;
    println!("v(0, x_init) = {}", num(v));
    Ok(exit::OK)
}

pub struct VerifyOpts {
    pub scenario: PathBuf,
    pub out: PathBuf,
    pub controls: Vec<ControlSpec>,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    pub corrupt_w0_scale: Option<f64>,
}

pub fn verify(opts: &VerifyOpts) -> Result<i32, CliError> {
    let sc = Scenario::load(&opts.scenario)?;
    let p = &sc.params;
    let n_paths = opts.paths.unwrap_or(sc.numerics.n_paths);
    let seed = opts.seed.unwrap_or(sc.numerics.seed);
    if n_paths < 2 {
        return Err(CliError::Input("--paths must be at least 2".into()));
    }
    let mut vf = solve(p)?;
    if let Some(f) = opts.corrupt_w0_scale {
        vf = vf.with_scaled_w0(f);
    }
    let controls = opts
        .controls
        .iter()
        .map(|spec| {
            Ok(LabeledControl::new(
                spec.to_string(),
                build_control(spec, p, Some(&vf))?,
            ))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let rep = verify_dominance(p, &vf, &controls, &McConfig::new(n_paths, seed))?;

    let mut csv = CsvOut::create(
        &opts.out,
        &[
            "label",
            "j_mean",
            "j_half_width",
            "v_value",
            "gap",
            "allowance",
            "advantage_mean",
            "advantage_half_width",
            "violation",
        ],
    )?;
    for (i, label) in rep.control_labels.iter().enumerate() {
        let kinds: Vec<&str> = rep
            .violations
            .iter()
            .filter(|v| &v.label == label)
            .map(|v| match v.kind {
                ViolationKind::Dominance => "dominance",
                ViolationKind::Identity => "identity",
            })
            .collect();
        let adv = rep.advantage_of_optimal[i];
        let mut row: Vec<String> = vec![label.clone()];
        row.extend(
            [
                rep.j_means[i],
                rep.j_half_widths[i],
                rep.v_value,
                rep.gaps[i],
                rep.allowances[i],
                adv.mean,
                adv.half_width_95,
            ]
            .iter()
            .map(|&x| num(x)),
        );
        row.push(if kinds.is_empty() {
            "none".into()
        } else {
            kinds.join("+")
        });
        csv.row(&row)?;
    }
    csv.finish()?;

    println!("v(0, x_init) = {}", num(rep.v_value));
    println!(
        "J(z*) - v = {} ± {}",
        num(rep.optimal_gap),
        num(rep.optimal_half_width)
    );
    for v in &rep.violations {
        println!("violation: {} ({:?})", v.label, v.kind);
    }
    let (verdict, code) = if !rep.conclusive() {
        ("inconclusive", exit::INCONCLUSIVE)
    } else if !rep.passed() {
        ("violation", exit::VIOLATION)
    } else {
        ("pass", exit::OK)
    };
    if !rep.conclusive() {
        println!("{n_paths} paths is below the minimum of {MIN_CONCLUSIVE_PATHS} for a verdict");
    }
    println!("verdict: {verdict}");
    Ok(code)
}

pub fn equivalence(
    scenario: &Path,
    out: &Path,
    refinements: usize,
    seed: Option<u64>,
) -> Result<i32, CliError> {
    let sc = Scenario::load(scenario)?;
    let p = &sc.params;
    if p.a1.is_point_delay() {
        return Err(CliError::Unsupported(
            "the lift is defined only for L² memory kernels; a point-delay model (a1 = { point = ... }) cannot be checked"
                .into(),
        ));
    }
    let seed = seed.unwrap_or(sc.numerics.seed);
    let base = p.n_points() - 1;
    let levels: Vec<usize> = (0..=refinements).map(|j| (base << j) + 1).collect();
    let finest = p.resample(*levels.last().unwrap())?;
    let rows = refinement_study(
        &finest,
        &levels,
        |q| Ok(solve(q)?.optimal_control_path()),
        seed,
    )?;

    let mut csv = CsvOut::create(
        out,
        &[
            "n_points",
            "dt",
            "max_err_state",
            "max_err_structural",
            "order_state",
            "order_structural",
        ],
    )?;
    let opt = |o: Option<f64>| o.map_or_else(|| "NA".to_string(), num);
    for row in &rows {
        csv.row([
            row.n_points.to_string(),
            num(row.dt),
            num(row.report.max_err_state),
            row.report
                .max_err_structural
                .map_or_else(|| "skipped".to_string(), num),
            opt(row.order_state),
            opt(row.order_structural),
        ])?;
        println!(
            "n_points = {:>6}  err_state = {:.3e}  err_structural = {}  order = {} / {}",
            row.n_points,
            row.report.max_err_state,
            row.report
                .max_err_structural
                .map_or_else(|| "skipped".to_string(), |e| format!("{e:.3e}")),
            row.order_state
                .map_or_else(|| "NA".into(), |o| format!("{o:.3}")),
            row.order_structural
                .map_or_else(|| "NA".into(), |o| format!("{o:.3}")),
        );
    }
    csv.finish()?;
    if let Some(notice) = rows.iter().find_map(|r| r.report.notice.as_ref()) {
        println!("{notice}");
    }
    Ok(exit::OK)
}

pub fn stability(a0: f64, a1: f64, form: RootForm) -> Result<i32, CliError> {
    if !(a0.is_finite() && a1.is_finite()) {
        return Err(CliError::Input("a0 and a1 must be finite".into()));
    }
    let v = invariant_measure_condition_with(a0, a1, form);
    println!("a0 = {}", num(v.a0));
    println!("a1 = {}", num(v.a1));
    println!(
        "form = {}",
        match v.form {
            RootForm::Cot => "cot",
            RootForm::Coth => "coth",
        }
    );
    let opt = |o: Option<f64>| o.map_or_else(|| "none".to_string(), num);
    println!("gamma_root = {}", opt(v.gamma_root));
    println!("bound = {}", opt(v.bound));
    println!("holds = {}", v.holds);
    Ok(if v.holds { exit::OK } else { exit::VIOLATION })
}
