//! Worked examples and figure data.

use std::fmt::Write as _;

use serde::Serialize;

use polygamy::exponents::{
    alpha0_closed_form_example1, entanglement_threshold_t, find_alpha0, find_alpha1,
};
use polygamy::measures::{concurrence_mixed, measure_vector, MeasureKind, MeasureVector};
use polygamy::states::{fmt_f64, isotropic_mixture, w3, w_class_state, PartitionSpec, PureState};
use polygamy::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub quantity: String,
    pub quoted: f64,
    pub computed: f64,
    pub diff: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Row {
    fn new(quantity: &str, quoted: f64, computed: f64, tol: f64) -> Self {
        let diff = (computed - quoted).abs();
        Self {
            quantity: quantity.to_string(),
            quoted,
            computed,
            diff,
            tol,
            pass: diff <= tol,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleTable {
    pub example: u8,
    pub rows: Vec<Row>,
    pub all_pass: bool,
}

impl ExampleTable {
    fn new(example: u8, rows: Vec<Row>) -> Self {
        let all_pass = rows.iter().all(|r| r.pass);
        Self {
            example,
            rows,
            all_pass,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:<28} {:>14} {:>20} {:>10} {:>8}  status\n",
            "quantity", "quoted", "computed", "diff", "tol"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<28} {:>14.7} {:>20.15} {:>10.2e} {:>8.0e}  {}",
                r.quantity,
                r.quoted,
                r.computed,
                r.diff,
                r.tol,
                if r.pass { "ok" } else { "MISMATCH" }
            );
        }
        s
    }
}

fn partition(n: usize) -> Result<PartitionSpec> {
    PartitionSpec::with_focus(n, 0)
}

pub fn w3_vector(kind: MeasureKind) -> Result<MeasureVector> {
    measure_vector(&w3().into(), &partition(3)?, kind, None)
}

pub fn example2_state() -> Result<PureState> {
    let a = 1.0 / 10f64.sqrt();
    w_class_state(
        a,
        &[
            1.0 / 15f64.sqrt(),
            a,
            (2.0 / 15f64).sqrt(),
            (3.0 / 5f64).sqrt(),
        ],
    )
}

pub fn example2_vector() -> Result<MeasureVector> {
    measure_vector(
        &example2_state()?.into(),
        &partition(4)?,
        MeasureKind::Concurrence,
        None,
    )
}

/// α₀ from the Wootters pair concurrences of the W mixture at weight t.
pub fn example1_alpha0(t: f64) -> Result<f64> {
    let rho = isotropic_mixture(t, &w3())?;
    let pairs = [&[0, 1], &[0, 2]]
        .into_iter()
        .map(|keep| concurrence_mixed(&rho.partial_trace(keep)?))
        .collect::<Result<Vec<_>>>()?;
    // The global value does not enter f, only the pairs.
    let mv = MeasureVector::new(MeasureKind::Concurrence, 1.0, pairs)?;
    Ok(find_alpha0(&mv)?.threshold)
}

pub fn example(which: u8) -> Result<ExampleTable> {
    match which {
        1 => {
            let c = w3_vector(MeasureKind::Concurrence)?;
            let t09 = 0.9;
            let rows = vec![
                Row::new("C(A|BC), t=1", 2.0 * 2f64.sqrt() / 3.0, c.global, 1e-10),
                Row::new("C(AB), t=1", 2.0 / 3.0, c.pairs[0], 1e-10),
                Row::new("C(AC), t=1", 2.0 / 3.0, c.pairs[1], 1e-10),
                Row::new("alpha0, t=1", 1.70951, example1_alpha0(1.0)?, 1e-4),
                Row::new(
                    "alpha0 closed form, t=0.9",
                    alpha0_closed_form_example1(t09)?,
                    example1_alpha0(t09)?,
                    1e-6,
                ),
                Row::new(
                    "entanglement onset t*",
                    0.783612,
                    entanglement_threshold_t(&w3(), &partition(3)?)?,
                    1e-5,
                ),
            ];
            Ok(ExampleTable::new(1, rows))
        }
        2 => {
            let mv = example2_vector()?;
            let b1 = 1.0 / 15f64.sqrt();
            let b = [
                1.0 / 10f64.sqrt(),
                (2.0 / 15f64).sqrt(),
                (3.0 / 5f64).sqrt(),
            ];
            let mut rows: Vec<Row> = (0..3)
                .map(|i| {
                    Row::new(
                        &format!("C(AB{})", i + 1),
                        2.0 * b1 * b[i],
                        mv.pairs[i],
                        1e-10,
                    )
                })
                .collect();
            rows.push(Row::new(
                "C(A|B1B2B3)",
                2.0 * 14f64.sqrt() / 15.0,
                mv.global,
                1e-6,
            ));
            rows.push(Row::new(
                "alpha0",
                0.783586,
                find_alpha0(&mv)?.threshold,
                1e-5,
            ));
            Ok(ExampleTable::new(2, rows))
        }
        3 => {
            let e = w3_vector(MeasureKind::EoF)?;
            let a1 = find_alpha1(&e)?;
            let rows = vec![
                Row::new("E(A|BC)", 0.918296, e.global, 1e-6),
                Row::new("E(AB)", 0.550048, e.pairs[0], 1e-6),
                Row::new("E(AC)", 0.550048, e.pairs[1], 1e-6),
                Row::new("alpha0 (EoF)", 1.15959, find_alpha0(&e)?.threshold, 1e-4),
                Row::new("alpha1 (EoF)", 1.35244, a1.threshold, 1e-4),
                Row::new(
                    "sign changes of g",
                    1.0,
                    a1.sign_changes.unwrap_or(0) as f64,
                    0.0,
                ),
            ];
            Ok(ExampleTable::new(3, rows))
        }
        _ => Err(Error::BadParameter(format!("no example {which}"))),
    }
}

/// Inclusive grid from `start:stop:step`; `stop` is always the last point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && start < stop && step > 0.0) {
            return Err(Error::BadParameter(format!(
                "grid {start}:{stop}:{step} needs start < stop and step > 0"
            )));
        }
        Ok(Self { start, stop, step })
    }

    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::BadParameter(format!(
                "grid `{spec}` is not a:b:step"
            )));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::BadParameter(format!("grid `{spec}`: bad number `{s}`")))
        };
        Self::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        let mut pts: Vec<f64> = (0..=n).map(|k| self.start + k as f64 * self.step).collect();
        let last = *pts.last().unwrap();
        if (self.stop - last).abs() <= 1e-9 * self.step {
            *pts.last_mut().unwrap() = self.stop;
        } else {
            pts.push(self.stop);
        }
        pts
    }
}

pub fn default_grid(figure: u8) -> Grid {
    match figure {
        1 => Grid {
            start: 0.783612,
            stop: 1.0,
            step: 0.001,
        },
        _ => Grid {
            start: 0.0,
            stop: 2.5,
            step: 0.005,
        },
    }
}

/// `alpha,lhs,rhs` rows with lhs = global^α and rhs = Σ pairs^α.
pub fn power_curve_csv(mv: &MeasureVector, alphas: &[f64]) -> String {
    let mut out = String::from("alpha,lhs,rhs\n");
    for &a in alphas {
        let rhs: f64 = mv.entangled_pairs().map(|(_, p)| p.powf(a)).sum();
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_f64(a),
            fmt_f64(mv.global.powf(a)),
            fmt_f64(rhs)
        );
    }
    out
}

pub fn figure_csv(which: u8, grid: Option<Grid>) -> Result<String> {
    let grid = grid.unwrap_or_else(|| default_grid(which));
    let pts = grid.points();
    match which {
        1 => {
            let mut out = String::from("t,alpha0\n");
            for t in pts {
                let _ = writeln!(out, "{},{}", fmt_f64(t), fmt_f64(example1_alpha0(t)?));
            }
            Ok(out)
        }
        2 => Ok(power_curve_csv(&w3_vector(MeasureKind::Concurrence)?, &pts)),
        3 => Ok(power_curve_csv(&example2_vector()?, &pts)),
        4 => Ok(power_curve_csv(&w3_vector(MeasureKind::EoF)?, &pts)),
        _ => Err(Error::BadParameter(format!("no figure {which}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_include_stop() {
        let g = default_grid(1).points();
        assert_eq!(g[0], 0.783612);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(g.len(), 218);
        let g = default_grid(2).points();
        assert_eq!(g.len(), 501);
        assert_eq!(*g.last().unwrap(), 2.5);
    }

    #[test]
    fn grid_errors() {
        assert!(Grid::parse("1:0:0.1").is_err());
        assert!(Grid::parse("0:1:0").is_err());
        assert!(Grid::parse("0:1").is_err());
        assert!(Grid::parse("0:x:1").is_err());
        assert_eq!(
            Grid::parse("0:1:0.5").unwrap().points(),
            vec![0.0, 0.5, 1.0]
        );
    }

    #[test]
    fn figure2_origin() {
        let csv = figure_csv(2, Some(Grid::new(0.0, 1.0, 0.5).unwrap())).unwrap();
        let first: Vec<f64> = csv
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .map(|x| x.parse().unwrap())
            .collect();
        assert_eq!(first, vec![0.0, 1.0, 2.0]);
    }
}
