//! Scenario files.
//!
//! A scenario is a TOML document with four sections; see `SCENARIO.md` at the
//! repository root for the full grammar. Unknown keys are rejected, missing
//! required keys are reported by their dotted name, and every diagnostic
//! carries a line and column.

use std::ops::Range;
use std::path::Path;

use goodwill_core::{Error as CoreError, ScenarioParams, SegmentPath, StateKernel};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::CliError;

/// Relative tolerance for table coverage of `[-r, 0]`.
const COVER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum KernelSpec {
    Constant(f64),
    Point(PointSpec),
    Table(TableSpec),
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub point: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub table: Vec<[f64; 2]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    a0: Option<Spanned<f64>>,
    a1: Option<Spanned<KernelSpec>>,
    b0: Option<Spanned<f64>>,
    b1: Option<Spanned<KernelSpec>>,
    sigma: Option<Spanned<f64>>,
    r: Option<Spanned<f64>>,
    #[serde(rename = "T")]
    horizon: Option<Spanned<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct HistorySection {
    eta0: Option<Spanned<f64>>,
    eta: Option<Spanned<KernelSpec>>,
    delta: Option<Spanned<KernelSpec>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectiveSection {
    beta: Option<Spanned<f64>>,
    gamma: Option<Spanned<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NumericsSection {
    n_points: Option<Spanned<i64>>,
    n_paths: Option<Spanned<i64>>,
    seed: Option<Spanned<i64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    model: Option<Spanned<ModelSection>>,
    history: Option<Spanned<HistorySection>>,
    objective: Option<Spanned<ObjectiveSection>>,
    numerics: Option<Spanned<NumericsSection>>,
}

/// Monte Carlo defaults carried by a scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Numerics {
    pub n_points: usize,
    pub n_paths: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: ScenarioParams,
    pub numerics: Numerics,
}

pub const DEFAULT_PATHS: usize = 1_000;

/// Byte offset to 1-based line and column.
fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before
        .rfind('\n')
        .map_or(before.len(), |i| before.len() - i - 1)
        + 1;
    (line, col)
}

struct Ctx<'a> {
    src: &'a str,
    origin: &'a str,
}

impl Ctx<'_> {
    fn err(&self, span: Option<Range<usize>>, msg: impl std::fmt::Display) -> CliError {
        match span {
            Some(s) => {
                let (line, col) = line_col(self.src, s.start);
                CliError::Input(format!("{}:{line}:{col}: {msg}", self.origin))
            }
            None => CliError::Input(format!("{}: {msg}", self.origin)),
        }
    }

    fn required<T: Clone>(
        &self,
        section: &'static str,
        section_span: Range<usize>,
        key: &'static str,
        value: &Option<Spanned<T>>,
    ) -> Result<(T, Range<usize>), CliError> {
        value
            .as_ref()
            .map(|v| (v.get_ref().clone(), v.span()))
            .ok_or_else(|| {
                self.err(
                    Some(section_span),
                    format!("missing required key `{section}.{key}`"),
                )
            })
    }
}

fn section<T: Default>(
    ctx: &Ctx,
    name: &'static str,
    sec: Option<Spanned<T>>,
    required: bool,
) -> Result<(T, Range<usize>), CliError> {
    match sec {
        Some(s) => {
            let span = s.span();
            Ok((s.into_inner(), span))
        }
        None if required => Err(ctx.err(None, format!("missing required section `[{name}]`"))),
        None => Ok((T::default(), 0..0)),
    }
}

fn positive_count(
    ctx: &Ctx,
    key: &'static str,
    v: &Spanned<i64>,
    min: i64,
) -> Result<usize, CliError> {
    let n = *v.get_ref();
    if n < min {
        return Err(ctx.err(
            Some(v.span()),
            format!("`{key}` must be an integer >= {min}, got {n}"),
        ));
    }
    Ok(n as usize)
}

/// Samples a kernel on the segment grid.
fn grid_path(
    ctx: &Ctx,
    key: &'static str,
    spec: &KernelSpec,
    span: Range<usize>,
    r: f64,
    n: usize,
) -> Result<SegmentPath, CliError> {
    let path = match spec {
        KernelSpec::Constant(v) => SegmentPath::constant(r, n, *v),
        KernelSpec::Point(_) => {
            return Err(ctx.err(
                Some(span),
                format!(
                    "`{key}` cannot be a point mass; only `model.a1` accepts {{ point = ... }}"
                ),
            ))
        }
        KernelSpec::Table(t) => {
            let knots: Vec<(f64, f64)> = t.table.iter().map(|k| (k[0], k[1])).collect();
            let table = goodwill_core::Table::new(knots.clone())
                .map_err(|e| ctx.err(Some(span.clone()), format!("`{key}`: {e}")))?;
            let (lo, hi) = knots
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| {
                    (lo.min(x), hi.max(x))
                });
            let tol = COVER_TOL * r.max(1.0);
            if lo > -r + tol || hi < -tol {
                return Err(ctx.err(
                    Some(span),
                    format!("`{key}` table covers [{lo}, {hi}] but must cover [-{r}, 0]"),
                ));
            }
            let grid = SegmentPath::zeros(r, n).map_err(|e| ctx.err(Some(span.clone()), e))?;
            let mut sorted = knots.clone();
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            // Tables written on the grid itself are taken verbatim.
            let aligned = sorted.len() == n
                && sorted
                    .iter()
                    .enumerate()
                    .all(|(i, &(x, _))| x == grid.xi(i));
            if aligned {
                SegmentPath::new(r, sorted.iter().map(|k| k.1).collect())
            } else {
                SegmentPath::from_fn(r, n, |xi| table.eval(xi))
            }
        }
    };
    path.map_err(|e| ctx.err(Some(span), format!("`{key}`: {e}")))
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: cannot read: {e}", path.display())))?;
        Self::parse(&src, &path.display().to_string())
    }

    /// Parses and validates scenario text. `origin` prefixes diagnostics.
    pub fn parse(src: &str, origin: &str) -> Result<Self, CliError> {
        let ctx = Ctx { src, origin };
        let raw: RawScenario = toml::from_str(src).map_err(|e| {
            let msg = e.message().trim_end().to_string();
            ctx.err(e.span(), msg)
        })?;

        let (model, mspan) = section(&ctx, "model", raw.model, true)?;
        let (history, hspan) = section(&ctx, "history", raw.history, true)?;
        let (objective, ospan) = section(&ctx, "objective", raw.objective, true)?;
        let (numerics, nspan) = section(&ctx, "numerics", raw.numerics, true)?;

        let (a0, _) = ctx.required("model", mspan.clone(), "a0", &model.a0)?;
        let (a1, a1_span) = ctx.required("model", mspan.clone(), "a1", &model.a1)?;
        let (b0, _) = ctx.required("model", mspan.clone(), "b0", &model.b0)?;
        let (b1, b1_span) = ctx.required("model", mspan.clone(), "b1", &model.b1)?;
        let (sigma, _) = ctx.required("model", mspan.clone(), "sigma", &model.sigma)?;
        let (r, r_span) = ctx.required("model", mspan.clone(), "r", &model.r)?;
        let (horizon, _) = ctx.required("model", mspan, "T", &model.horizon)?;
        let (eta0, _) = ctx.required("history", hspan, "eta0", &history.eta0)?;
        let (beta, _) = ctx.required("objective", ospan.clone(), "beta", &objective.beta)?;
        let (gamma, _) = ctx.required("objective", ospan, "gamma", &objective.gamma)?;
        let n_points_raw = numerics.n_points.as_ref().ok_or_else(|| {
            ctx.err(
                Some(nspan.clone()),
                "missing required key `numerics.n_points`",
            )
        })?;
        let n = positive_count(&ctx, "numerics.n_points", n_points_raw, 2)?;
        let n_paths = match &numerics.n_paths {
            Some(v) => positive_count(&ctx, "numerics.n_paths", v, 1)?,
            None => DEFAULT_PATHS,
        };
        let seed = match &numerics.seed {
            Some(v) => positive_count(&ctx, "numerics.seed", v, 0)? as u64,
            None => 0,
        };
        if !(r.is_finite() && r > 0.0) {
            return Err(ctx.err(Some(r_span), format!("`model.r` must be > 0, got {r}")));
        }

        let a1 = match a1 {
            KernelSpec::Point(p) => StateKernel::PointDelay { a1: p.point },
            spec => StateKernel::Distributed(grid_path(&ctx, "model.a1", &spec, a1_span, r, n)?),
        };
        let b1 = grid_path(&ctx, "model.b1", &b1, b1_span, r, n)?;
        let eta = match &history.eta {
            Some(s) => grid_path(&ctx, "history.eta", s.get_ref(), s.span(), r, n)?,
            None => SegmentPath::constant(r, n, eta0).map_err(|e| ctx.err(None, e))?,
        };
        let delta = match &history.delta {
            Some(s) => grid_path(&ctx, "history.delta", s.get_ref(), s.span(), r, n)?,
            None => SegmentPath::zeros(r, n).map_err(|e| ctx.err(None, e))?,
        };

        let params = ScenarioParams {
            a0,
            a1,
            b0,
            b1,
            sigma,
            r,
            horizon,
            eta0,
            eta,
            delta,
            beta,
            gamma,
        };
        params.validate().map_err(|e| {
            let key = match &e {
                CoreError::InvalidParameter { name, .. } => Some(*name),
                CoreError::HorizonNotMultiple { .. } => Some("T"),
                _ => None,
            };
            let span = key.and_then(|k| locate(&model, &history, &objective, k));
            ctx.err(span, e)
        })?;
        Ok(Self {
            params,
            numerics: Numerics {
                n_points: n,
                n_paths,
                seed,
            },
        })
    }

    /// Serialises to scenario text; [`Scenario::parse`] reads it back to an
    /// identical value.
    pub fn emit(&self) -> String {
        let p = &self.params;
        let path = |s: &SegmentPath| {
            let v = s.values();
            if v.iter().all(|&x| x == v[0]) {
                KernelSpec::Constant(v[0])
            } else {
                KernelSpec::Table(TableSpec {
                    table: (0..v.len()).map(|i| [s.xi(i), v[i]]).collect(),
                })
            }
        };
        let a1 = match &p.a1 {
            StateKernel::Distributed(s) => path(s),
            StateKernel::PointDelay { a1 } => KernelSpec::Point(PointSpec { point: *a1 }),
        };

        #[derive(Serialize)]
        struct Model {
            a0: f64,
            a1: KernelSpec,
            b0: f64,
            b1: KernelSpec,
            sigma: f64,
            r: f64,
            #[serde(rename = "T")]
            horizon: f64,
        }
        #[derive(Serialize)]
        struct History {
            eta0: f64,
            eta: KernelSpec,
            delta: KernelSpec,
        }
        #[derive(Serialize)]
        struct Objective {
            beta: f64,
            gamma: f64,
        }
        #[derive(Serialize)]
        struct NumericsOut {
            n_points: i64,
            n_paths: i64,
            seed: i64,
        }
        #[derive(Serialize)]
        struct Out {
            model: Model,
            history: History,
            objective: Objective,
            numerics: NumericsOut,
        }
        let out = Out {
            model: Model {
                a0: p.a0,
                a1,
                b0: p.b0,
                b1: path(&p.b1),
                sigma: p.sigma,
                r: p.r,
                horizon: p.horizon,
            },
            history: History {
                eta0: p.eta0,
                eta: path(&p.eta),
                delta: path(&p.delta),
            },
            objective: Objective {
                beta: p.beta,
                gamma: p.gamma,
            },
            numerics: NumericsOut {
                n_points: self.numerics.n_points as i64,
                n_paths: self.numerics.n_paths as i64,
                seed: self.numerics.seed as i64,
            },
        };
        toml::to_string(&out).expect("scenario values are representable in TOML")
    }
}

fn locate(
    model: &ModelSection,
    history: &HistorySection,
    objective: &ObjectiveSection,
    key: &str,
) -> Option<Range<usize>> {
    let s = |v: &Option<Spanned<f64>>| v.as_ref().map(|x| x.span());
    let k = |v: &Option<Spanned<KernelSpec>>| v.as_ref().map(|x| x.span());
    match key {
        "a0" => s(&model.a0),
        "a1" => k(&model.a1),
        "b0" => s(&model.b0),
        "b1" => k(&model.b1),
        "sigma" => s(&model.sigma),
        "r" => s(&model.r),
        "T" => s(&model.horizon),
        "eta0" => s(&history.eta0),
        "eta" => k(&history.eta),
        "delta" => k(&history.delta),
        "beta" => s(&objective.beta),
        "gamma" => s(&objective.gamma),
        _ => None,
    }
}
