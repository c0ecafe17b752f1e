use pdm_core::format::{pair, sci, Sci};
use pdm_core::mass::SampledFunction;
use pdm_core::oracle::{discretize_pdm, eigenvalues, is_real, locate_level};
use pdm_core::pct::{build_target_problem, PctScheme, TargetProblem};
use pdm_core::reference::{ReferencePotential, Sign};
use pdm_core::Complex64;
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig};
use crate::error::Result;
use crate::output::{csv_preamble, csv_table, Envelope};
use crate::verify::{Check, VerifyReport, TRANSPORT_EIGEN_TOL};

fn targets(config: &RunConfig) -> Result<Vec<TargetProblem>> {
    let (scheme, reference, grid) = (config.scheme()?, config.reference()?, config.grid()?);
    config
        .levels
        .iter()
        .map(|n| {
            Ok(build_target_problem(
                scheme,
                reference,
                config.branch(),
                n,
                config.convention,
                config.formula,
                &grid,
            )?)
        })
        .collect()
}

fn operator(scheme: &PctScheme, t: &TargetProblem) -> Result<pdm_core::oracle::DiscreteOperator> {
    let mass = *scheme.mass();
    Ok(discretize_pdm(
        |x| mass.eval(x),
        |x| t.potential_at(x),
        t.grid(),
        t.convention,
    )?)
}

fn level_suffix(n: usize, q: Option<i8>) -> String {
    match q {
        Some(q) => format!("[n={n},q={q:+}]"),
        None => format!("[n={n}]"),
    }
}

#[derive(Debug, Serialize)]
pub struct SpectrumRow {
    pub n: usize,
    pub q: Option<i8>,
    pub analytic: [Sci; 2],
    pub numeric: Option<[Sci; 2]>,
    pub gap: Sci,
    pub real: bool,
}

#[derive(Serialize)]
struct SpectrumResult<'a> {
    scheme: PctScheme,
    reference: ReferencePotential,
    grid: pdm_core::mass::GridSpec,
    tolerance: Sci,
    rows: &'a [SpectrumRow],
}

/// Closed-form levels (both quasi-parity towers for the oscillator), each
/// paired with the finite-difference eigenvalue of its own target problem.
pub fn spectrum_rows(config: &RunConfig) -> Result<Vec<SpectrumRow>> {
    let scheme = config.scheme()?;
    let grid = config.grid()?;
    let references = match config.reference()? {
        ReferencePotential::GenOscillator(o) => vec![
            ReferencePotential::GenOscillator(o.with_parity(Sign::Plus)),
            ReferencePotential::GenOscillator(o.with_parity(Sign::Minus)),
        ],
        r => vec![r],
    };
    let mut rows = Vec::new();
    for reference in references {
        for n in config.levels.iter() {
            let t = build_target_problem(
                scheme,
                reference,
                config.branch(),
                n,
                config.convention,
                config.formula,
                &grid,
            )?;
            let spectrum = eigenvalues(&operator(&scheme, &t)?)?;
            let e = t.energy();
            let numeric = locate_level(&spectrum, e, TRANSPORT_EIGEN_TOL);
            rows.push(SpectrumRow {
                n,
                q: t.level.quasi_parity,
                analytic: pair(e),
                numeric: numeric.map(pair),
                gap: Sci(numeric.map_or(f64::INFINITY, |z| (z - e).norm())),
                real: numeric.is_some_and(is_real),
            });
        }
    }
    rows.sort_by(|a, b| {
        a.analytic[0]
            .0
            .total_cmp(&b.analytic[0].0)
            .then(a.n.cmp(&b.n))
    });
    Ok(rows)
}

pub fn cmd_spectrum(config: &RunConfig) -> Result<String> {
    let rows = spectrum_rows(config)?;
    match config.format {
        OutputFormat::Json => Envelope::new(
            "spectrum",
            config,
            SpectrumResult {
                scheme: config.scheme()?,
                reference: config.reference()?,
                grid: config.grid()?,
                tolerance: Sci(TRANSPORT_EIGEN_TOL),
                rows: &rows,
            },
        )
        .to_json(),
        OutputFormat::Csv => {
            let columns = [
                "n",
                "q",
                "E_re",
                "E_im",
                "numeric_re",
                "numeric_im",
                "gap",
                "real",
            ];
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let (nr, ni) = r
                        .numeric
                        .map_or(("nan".into(), "nan".into()), |z| (sci(z[0].0), sci(z[1].0)));
                    vec![
                        r.n.to_string(),
                        r.q.map_or(String::new(), |q| format!("{q:+}")),
                        sci(r.analytic[0].0),
                        sci(r.analytic[1].0),
                        nr,
                        ni,
                        sci(r.gap.0),
                        r.real.to_string(),
                    ]
                })
                .collect();
            Ok(csv_table(
                &csv_preamble("spectrum", config)?,
                &strings(&columns),
                &body,
            ))
        }
    }
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[derive(Serialize)]
struct PotentialLevel<'a> {
    n: usize,
    q: Option<i8>,
    energy: [Sci; 2],
    pt_defect: Sci,
    potential: &'a SampledFunction,
}

#[derive(Serialize)]
struct PotentialResult<'a> {
    scheme: PctScheme,
    reference: ReferencePotential,
    mass: SampledFunction,
    omega: SampledFunction,
    levels: Vec<PotentialLevel<'a>>,
}

pub fn cmd_potential(config: &RunConfig) -> Result<String> {
    let scheme = config.scheme()?;
    let grid = config.grid()?;
    let targets = targets(config)?;
    let mass_fn = *scheme.mass();
    let mass = SampledFunction::from_real(grid, "mass", |x| mass_fn.eval(x))?;
    let omega = targets[0].omega_on_grid()?;
    match config.format {
        OutputFormat::Json => Envelope::new(
            "potential",
            config,
            PotentialResult {
                scheme,
                reference: config.reference()?,
                mass,
                omega,
                levels: targets
                    .iter()
                    .map(|t| PotentialLevel {
                        n: t.level.n,
                        q: t.level.quasi_parity,
                        energy: pair(t.energy()),
                        pt_defect: Sci(t.pt_defect),
                        potential: &t.potential,
                    })
                    .collect(),
            },
        )
        .to_json(),
        OutputFormat::Csv => {
            let mut comments = csv_preamble("potential", config)?;
            let mut columns = strings(&["x", "re", "im", "mass", "omega_re", "omega_im"]);
            for (i, t) in targets.iter().enumerate() {
                let tag = level_suffix(t.level.n, t.level.quasi_parity);
                comments.push(format!(
                    "V{tag}: E = {} {} pt_defect = {}",
                    sci(t.energy().re),
                    sci(t.energy().im),
                    sci(t.pt_defect)
                ));
                if i > 0 {
                    columns.push(format!("re{tag}"));
                    columns.push(format!("im{tag}"));
                }
            }
            let body: Vec<Vec<String>> = (0..grid.len())
                .map(|j| {
                    let mut row = vec![sci(grid.point(j))];
                    let v0 = targets[0].potential.values()[j];
                    row.extend([sci(v0.re), sci(v0.im), sci(mass.values()[j].re)]);
                    row.extend([sci(omega.values()[j].re), sci(omega.values()[j].im)]);
                    for t in &targets[1..] {
                        let v = t.potential.values()[j];
                        row.extend([sci(v.re), sci(v.im)]);
                    }
                    row
                })
                .collect();
            Ok(csv_table(&comments, &columns, &body))
        }
    }
}

#[derive(Serialize)]
struct WaveLevel<'a> {
    n: usize,
    q: Option<i8>,
    energy: [Sci; 2],
    residual_raw: Sci,
    residual: Sci,
    psi: &'a SampledFunction,
    phi: SampledFunction,
}

#[derive(Serialize)]
struct WaveResult<'a> {
    scheme: PctScheme,
    reference: ReferencePotential,
    y: Vec<Sci>,
    levels: Vec<WaveLevel<'a>>,
}

pub fn cmd_wavefunction(config: &RunConfig) -> Result<String> {
    let scheme = config.scheme()?;
    let reference = config.reference()?;
    let grid = config.grid()?;
    let targets = targets(config)?;
    let ys: Vec<f64> = grid.points().iter().map(|&x| scheme.y_of_x(x)).collect();
    let mut levels = Vec::new();
    for t in &targets {
        let op = operator(&scheme, t)?;
        let e = t.energy();
        let (n, branch) = (t.level.n, t.branch);
        let phi = SampledFunction::from_fn(grid, format!("phi(y(x))[n={n}]"), |x| {
            reference.wavefunction(branch, n, scheme.y_of_x(x))
        })?;
        levels.push(WaveLevel {
            n,
            q: t.level.quasi_parity,
            energy: pair(e),
            residual_raw: Sci(op.residual(&t.psi, e)?),
            residual: Sci(op.residual_extrapolated(&t.psi, e)?),
            psi: &t.psi,
            phi,
        });
    }
    match config.format {
        OutputFormat::Json => Envelope::new(
            "wavefunction",
            config,
            WaveResult {
                scheme,
                reference,
                y: ys.iter().map(|&y| Sci(y)).collect(),
                levels,
            },
        )
        .to_json(),
        OutputFormat::Csv => {
            let mut comments = csv_preamble("wavefunction", config)?;
            let mut columns = strings(&["x", "re", "im", "y", "phi_re", "phi_im"]);
            for (i, l) in levels.iter().enumerate() {
                let tag = level_suffix(l.n, l.q);
                comments.push(format!(
                    "psi{tag}: E = {} {} residual = {} residual_second_order = {}",
                    sci(l.energy[0].0),
                    sci(l.energy[1].0),
                    sci(l.residual.0),
                    sci(l.residual_raw.0)
                ));
                if i > 0 {
                    columns.extend([
                        format!("re{tag}"),
                        format!("im{tag}"),
                        format!("phi_re{tag}"),
                        format!("phi_im{tag}"),
                    ]);
                }
            }
            let body: Vec<Vec<String>> = (0..grid.len())
                .map(|j| {
                    let mut row = vec![sci(grid.point(j))];
                    for (i, l) in levels.iter().enumerate() {
                        let (p, f): (Complex64, Complex64) = (l.psi.values()[j], l.phi.values()[j]);
                        row.extend([sci(p.re), sci(p.im)]);
                        if i == 0 {
                            row.push(sci(ys[j]));
                        }
                        row.extend([sci(f.re), sci(f.im)]);
                    }
                    row
                })
                .collect();
            Ok(csv_table(&comments, &columns, &body))
        }
    }
}

pub fn render_verify(config: &RunConfig, report: &VerifyReport) -> Result<String> {
    match config.format {
        OutputFormat::Json => Envelope::new("verify", config, report).to_json(),
        OutputFormat::Csv => {
            let mut comments = csv_preamble("verify", config)?;
            comments.push(format!("conventions: {}", report.conventions_path));
            comments.push(format!(
                "overall: {}",
                if report.pass { "PASS" } else { "FAIL" }
            ));
            let body: Vec<Vec<String>> = report.checks.iter().map(check_row).collect();
            Ok(csv_table(
                &comments,
                &strings(&["check", "n", "value", "tolerance", "status", "detail"]),
                &body,
            ))
        }
    }
}

fn check_row(c: &Check) -> Vec<String> {
    vec![
        c.name.clone(),
        c.n.map_or(String::new(), |n| n.to_string()),
        sci(c.value.0),
        sci(c.tolerance.0),
        if c.pass { "PASS" } else { "FAIL" }.into(),
        format!("\"{}\"", c.detail.replace('"', "'")),
    ]
}
