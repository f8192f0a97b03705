//! Command runner behind the `emh` binary.
//!
//! Each command turns a [`RunConfig`] into one CSV table with a fixed header.
//! Sweep points run on the rayon pool; rows keep the input order
//! (`a` outermost, then `theta`, then `q`).

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::elliptic::EllipticData;
use crate::error::{EmhError, Result};
use crate::fieldexp::{multipole_coeffs, BlochParams};
use crate::homog::{dispersion, effective_tensor_asymptotic, effective_tensor_full};
use crate::oracle::{lambda2_fit, lambda2_quadrature, PlaneWaveOperator};
use crate::report::{sci, CsvTable};
use crate::validate::{outcomes_csv, run_criterion, CriterionOutcome, CRITERIA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Exit code for an error: bad input is a configuration error.
pub fn exit_code(err: &EmhError) -> i32 {
    if err.is_input_error() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Elliptic,
    Coeffs,
    Tensor,
    Dispersion,
    Oracle,
    Validate,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Elliptic,
        Command::Coeffs,
        Command::Tensor,
        Command::Dispersion,
        Command::Oracle,
        Command::Validate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Elliptic => "elliptic",
            Command::Coeffs => "coeffs",
            Command::Tensor => "tensor",
            Command::Dispersion => "dispersion",
            Command::Oracle => "oracle",
            Command::Validate => "validate",
        }
    }

    /// Output file name, `<command>.csv`.
    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name())
    }

    pub fn header(&self) -> &'static [&'static str] {
        match self {
            Command::Elliptic => &[
                "tau1",
                "tau2",
                "s4",
                "s6",
                "s8",
                "eta1",
                "eta2_tilde",
                "legendre_residual",
            ],
            Command::Coeffs => &[
                "a", "eps", "theta", "A1", "B1", "C1", "D1", "A2", "B2", "C2", "D2",
            ],
            Command::Tensor => &[
                "a",
                "eps",
                "q",
                "theta",
                "eps1_full",
                "eps2_full",
                "eps1_asym",
                "eps2_asym",
            ],
            Command::Dispersion => &["a", "q", "theta", "nu2_asym"],
            Command::Oracle => &[
                "a",
                "q",
                "theta",
                "nu2_pw",
                "lambda2_pw",
                "lambda2_quad",
            ],
            Command::Validate => &[
                "criterion",
                "name",
                "check",
                "measured",
                "threshold",
                "relation",
                "passed",
            ],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Command::ALL.iter().map(Command::name).collect();
                format!("unknown command `{s}`; expected one of {}", names.join(", "))
            })
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub command: Command,
    pub table: CsvTable,
    /// Criterion outcomes (`validate` only).
    pub outcomes: Vec<CriterionOutcome>,
}

impl RunOutput {
    /// Ids of failed criteria.
    pub fn failed(&self) -> Vec<u32> {
        self.outcomes
            .iter()
            .filter(|o| !o.passed())
            .map(|o| o.id)
            .collect()
    }

    pub fn exit_code(&self) -> i32 {
        if self.failed().is_empty() {
            EXIT_OK
        } else {
            EXIT_VALIDATION
        }
    }

    /// Writes the table into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(self.command.file_name());
        fs::write(&path, self.table.render())?;
        Ok(path)
    }
}

/// Runs `command`; the caller writes the table and reports.
pub fn run(command: Command, config: &RunConfig) -> Result<RunOutput> {
    let mut table = CsvTable::new(command.header());
    let mut outcomes = Vec::new();
    match command {
        Command::Elliptic => elliptic(config, &mut table)?,
        Command::Coeffs => coeffs(config, &mut table)?,
        Command::Tensor => tensor(config, &mut table)?,
        Command::Dispersion => dispersion_rows(config, &mut table)?,
        Command::Oracle => oracle(config, &mut table)?,
        Command::Validate => {
            outcomes = (1..=CRITERIA)
                .map(|id| run_criterion(id, &config.validation))
                .collect::<Result<Vec<_>>>()?;
            table = outcomes_csv(&outcomes);
        }
    }
    Ok(RunOutput {
        command,
        table,
        outcomes,
    })
}

fn elliptic(config: &RunConfig, table: &mut CsvTable) -> Result<()> {
    let l = &config.lattice;
    let e = EllipticData::new(l)?;
    let s = |k| e.s(k).expect("lattice sums through s48 are stored");
    table.push_numbers(&[
        l.tau1(),
        l.tau2(),
        s(4),
        s(6),
        s(8),
        e.eta1(),
        e.eta2_tilde(),
        e.legendre_residual(),
    ]);
    Ok(())
}

fn push_all(table: &mut CsvTable, rows: Vec<Vec<f64>>) {
    for r in rows {
        table.push_numbers(&r);
    }
}

fn coeffs(config: &RunConfig, table: &mut CsvTable) -> Result<()> {
    let e = EllipticData::new(&config.lattice)?;
    let eps = config.lattice.eps_in();
    let points: Vec<(f64, f64)> = config
        .sweep_a
        .iter()
        .flat_map(|&a| config.sweep_theta.iter().map(move |&t| (a, t)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(a, theta)| {
            let l = config.lattice.with_inclusion(a, eps)?;
            let c = multipole_coeffs(&l, &e, theta);
            let mut row = vec![a, eps, c.theta];
            row.extend_from_slice(&c.as_array());
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    push_all(table, rows);
    Ok(())
}

/// `(a, theta, q)` triples in output order.
fn grid(config: &RunConfig) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for &a in &config.sweep_a {
        for &t in &config.sweep_theta {
            for &q in &config.sweep_q {
                out.push((a, t, q));
            }
        }
    }
    out
}

fn tensor(config: &RunConfig, table: &mut CsvTable) -> Result<()> {
    let e = EllipticData::new(&config.lattice)?;
    let eps = config.lattice.eps_in();
    let rows = grid(config)
        .par_iter()
        .map(|&(a, theta, q)| {
            let l = config.lattice.with_inclusion(a, eps)?;
            let b = BlochParams::new(q, theta)?;
            let full = effective_tensor_full(&l, &e, &b)?;
            let asym = effective_tensor_asymptotic(&l, &e, &b);
            Ok(vec![
                a,
                eps,
                q,
                b.theta(),
                full.eps1_star,
                full.eps2_star,
                asym.eps1_star,
                asym.eps2_star,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    push_all(table, rows);
    Ok(())
}

fn dispersion_rows(config: &RunConfig, table: &mut CsvTable) -> Result<()> {
    let eps = config.lattice.eps_in();
    for (a, theta, q) in grid(config) {
        let l = config.lattice.with_inclusion(a, eps)?;
        let d = dispersion(&l, &BlochParams::new(q, theta)?);
        table.push_numbers(&[a, q, d.theta, d.nu_squared]);
    }
    Ok(())
}

fn oracle(config: &RunConfig, table: &mut CsvTable) -> Result<()> {
    let e = EllipticData::new(&config.lattice)?;
    let eps = config.lattice.eps_in();
    for &a in &config.sweep_a {
        let l = config.lattice.with_inclusion(a, eps)?;
        let op = PlaneWaveOperator::new(&l, config.oracle)?;
        for &theta in &config.sweep_theta {
            let fit = lambda2_fit(&op, theta, &config.q_list)?;
            let quad = lambda2_quadrature(
                &l,
                &e,
                &multipole_coeffs(&l, &e, theta),
                config.quadrature_resolution,
            )?;
            let nu2 = config
                .sweep_q
                .par_iter()
                .map(|&q| Ok(op.eigenvalues(&BlochParams::new(q, theta)?, 1)?.eigenvalues[0]))
                .collect::<Result<Vec<f64>>>()?;
            let theta = BlochParams::new(0.0, theta)?.theta();
            for (&q, v) in config.sweep_q.iter().zip(nu2) {
                table.push_numbers(&[a, q, theta, v, fit.lambda2, quad]);
            }
        }
    }
    Ok(())
}

/// Plain-text pass/fail table for `validate`.
pub fn validation_report(outcomes: &[CriterionOutcome]) -> String {
    let mut out = String::new();
    for o in outcomes {
        out.push_str(&o.summary());
        out.push('\n');
    }
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.passed())
        .map(|o| format!("C{}", o.id))
        .collect();
    if failed.is_empty() {
        out.push_str(&format!("all {} criteria passed\n", outcomes.len()));
    } else {
        out.push_str(&format!("failed: {}\n", failed.join(", ")));
    }
    out
}

/// Formats one number the way the CSV does.
pub fn format_number(x: f64) -> String {
    sci(x)
}
