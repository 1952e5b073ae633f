//! Canned scenarios behind `cca reproduce`.

use clap::ValueEnum;
use num_complex::Complex64;

use super::{
    default_period, lindblad_outputs, push_report, series_table, transfer_table, Cell, Table,
};
use crate::detection::{
    find_noon_times, find_w_times, transfer_probability_closed_form, DetectionConfig,
    PEAK_TRANSFER_TIME,
};
use crate::error::Result;
use crate::evolution::{
    closed_form_survival, probability_series, uniform_grid, DEFAULT_GRID_POINTS,
};
use crate::fock::OccupationState;
use crate::lindblad::{theta_grid, LossParams, DEFAULT_DT, DEFAULT_THETA_POINTS};
use crate::spectral::ModelParams;
use crate::states::PureState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
    Fig11,
    Table1,
    Table2,
    Table3,
    All,
}

impl Target {
    pub const EACH: [Target; 14] = [
        Target::Fig1,
        Target::Fig2,
        Target::Fig3,
        Target::Fig4,
        Target::Fig5,
        Target::Fig6,
        Target::Fig7,
        Target::Fig8,
        Target::Fig9,
        Target::Fig10,
        Target::Fig11,
        Target::Table1,
        Target::Table2,
        Target::Table3,
    ];

    pub fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }
}

#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub table: Table,
    pub json: Option<serde_json::Value>,
}

/// The three weak coherent inputs `(α₁, α₂, α₃)` used for the W/NOON scan.
pub const COHERENT_CASES: [(&str, [f64; 3]); 3] = [
    ("case1", [0.1, 0.1, 0.1]),
    ("case2", [0.01, 0.1, 0.01]),
    ("case3", [0.1, 0.01, 0.1]),
];

pub fn coherent_case(params: &ModelParams, imag: [f64; 3]) -> Result<PureState> {
    let alphas = imag.map(|a| Complex64::new(0.0, a));
    PureState::weak_coherent(params.cavities(), &alphas)
}

fn occ(label: &str) -> OccupationState {
    label.parse().expect("literal occupation")
}

fn fock(params: &ModelParams, label: &str) -> Result<PureState> {
    PureState::fock(params.cavities(), &occ(label))
}

fn single_site_labels(photons: u32) -> Vec<OccupationState> {
    (0..3)
        .map(|i| {
            let mut v = vec![0; 3];
            v[i] = photons;
            OccupationState::new(v)
        })
        .collect()
}

fn two_periods(params: &ModelParams) -> Result<Vec<f64>> {
    uniform_grid(0.0, 2.0 * default_period(params)?, DEFAULT_GRID_POINTS)
}

/// Columns from several initial states side by side, headers prefixed.
fn side_by_side(
    params: &ModelParams,
    times: &[f64],
    runs: &[(String, PureState, Vec<OccupationState>)],
) -> Result<Table> {
    let mut header = vec!["t".to_string()];
    let mut columns = Vec::new();
    for (prefix, state, labels) in runs {
        let series = probability_series(state, params, times, labels)?;
        for (j, label) in labels.iter().enumerate() {
            header.push(format!("{prefix}:{}", label.label()));
            columns.push(
                series
                    .probabilities
                    .column(j)
                    .iter()
                    .copied()
                    .collect::<Vec<_>>(),
            );
        }
    }
    let mut table = Table::new(header);
    for (i, t) in times.iter().enumerate() {
        let mut row = vec![Cell::Num(*t)];
        row.extend(columns.iter().map(|c| Cell::Num(c[i])));
        table.push(row);
    }
    Ok(table)
}

fn build(target: Target) -> Result<Artifact> {
    let three = ModelParams::reference(3)?;
    let four = ModelParams::reference(4)?;
    let mut json = None;
    let table = match target {
        Target::Fig1 => {
            let runs = (1..=4)
                .map(|m| {
                    let label = OccupationState::new(vec![m, 0, 0]);
                    Ok((
                        format!("m{m}"),
                        PureState::fock(three.cavities(), &label)?,
                        vec![label],
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            side_by_side(&three, &two_periods(&three)?, &runs)?
        }
        Target::Fig2 => {
            let mut table = Table::new(["t", "3000-0-0"]);
            for t in two_periods(&three)? {
                table.push(vec![
                    t.into(),
                    closed_form_survival(3000, &three, t)?.into(),
                ]);
            }
            table
        }
        Target::Fig3 | Target::Fig4 | Target::Fig5 => {
            let photons = match target {
                Target::Fig3 => 1,
                Target::Fig4 => 2,
                _ => 3,
            };
            let runs = COHERENT_CASES
                .iter()
                .map(|(name, a)| {
                    Ok((
                        name.to_string(),
                        coherent_case(&three, *a)?,
                        single_site_labels(photons),
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            side_by_side(&three, &two_periods(&three)?, &runs)?
        }
        Target::Fig6 => {
            let runs = [0.1, 0.5]
                .iter()
                .map(|&a| {
                    Ok((
                        format!("alpha{a}i"),
                        coherent_case(&three, [a; 3])?,
                        vec![occ("100"), occ("010")],
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            side_by_side(&three, &two_periods(&three)?, &runs)?
        }
        Target::Fig7 => series_table(
            &fock(&three, "010")?,
            &three,
            &two_periods(&three)?,
            &single_site_labels(1),
        )?,
        Target::Fig8 => {
            let labels = ["200", "020", "002", "110", "011", "101"].map(occ);
            series_table(
                &fock(&three, "020")?,
                &three,
                &two_periods(&three)?,
                &labels,
            )?
        }
        Target::Fig9 => {
            let thetas = [0.0, 0.25, 0.5, 0.75, 1.0].map(|c: f64| 0.5 * c.asin());
            transfer_table(
                &four,
                &thetas,
                &uniform_grid(0.0, 120.0, 1201)?,
                true,
                false,
            )?
        }
        Target::Fig10 => {
            let mut table = Table::new(["t", "theta", "C", "p"]);
            for c in uniform_grid(0.0, 1.0, 101)? {
                let p = transfer_probability_closed_form(PEAK_TRANSFER_TIME, c);
                table.push(vec![
                    PEAK_TRANSFER_TIME.into(),
                    (0.5 * c.asin()).into(),
                    c.into(),
                    p.into(),
                ]);
            }
            table
        }
        Target::Fig11 => {
            let (table, diag) = lindblad_outputs(
                &three,
                &LossParams::new(0.1)?,
                &theta_grid(DEFAULT_THETA_POINTS),
                &[10.0, 100.0],
                DEFAULT_DT,
            )?;
            json = Some(diag);
            table
        }
        Target::Table1 => {
            let cfg = DetectionConfig::default();
            let mut table = Table::new(["case", "kind", "photons", "time", "probability"]);
            for (name, a) in COHERENT_CASES {
                let state = coherent_case(&three, a)?;
                for k in 1..=3 {
                    push_report(
                        &mut table,
                        &[name.into()],
                        &find_w_times(&state, &three, k, &cfg)?,
                    );
                    push_report(
                        &mut table,
                        &[name.into()],
                        &find_noon_times(&state, &three, k, &cfg)?,
                    );
                }
            }
            table
        }
        Target::Table2 => super::wnoon_table(&fock(&three, "010")?, &three, &[1])?,
        Target::Table3 => super::wnoon_table(&fock(&three, "020")?, &three, &[2])?,
        Target::All => unreachable!("expanded by reproduce"),
    };
    Ok(Artifact {
        name: target.name(),
        table,
        json,
    })
}

/// Data for one target, or for every target with [`Target::All`].
pub fn reproduce(target: Target) -> Result<Vec<Artifact>> {
    match target {
        Target::All => Target::EACH.iter().map(|t| build(*t)).collect(),
        one => Ok(vec![build(one)?]),
    }
}
