//! Phase scan for gluing two towers: a column of `n1` nodes on the unit
//! circle next to a column of `n2` nodes at scale `lambda` and phase `phi`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::forces::{force_of, layer_force_sum};

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// End slopes of the two-layer glue configuration with unit residues:
/// `left = (0, g1, g1 + g2)`, `right = (n1, 0, n1 - n2)` with
/// `g1 = n2 - n1` and `g2 = -n2`. Both `Theta1` and `Theta2` vanish.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlueTemplate {
    pub n1: usize,
    pub n2: usize,
    pub theta_left: Vec<f64>,
    pub theta_right: Vec<f64>,
}

impl GlueTemplate {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::ShapeMismatch(
                "both columns need at least one node".into(),
            ));
        }
        let (a, b) = (n1 as f64, n2 as f64);
        let g1 = b - a;
        let g2 = -b;
        Ok(GlueTemplate {
            n1,
            n2,
            theta_left: vec![0.0, g1, g1 + g2],
            theta_right: vec![a, 0.0, a - b],
        })
    }

    pub fn mu(&self) -> usize {
        lcm(self.n1, self.n2)
    }

    pub fn config(&self, lambda: f64, phi: f64) -> Configuration {
        let column = |n: usize, scale: Complex64| -> Vec<Complex64> {
            (1..=n)
                .map(|k| scale * Complex64::from_polar(1.0, TAU * k as f64 / n as f64))
                .collect()
        };
        Configuration::new(
            vec![
                column(self.n1, Complex64::new(1.0, 0.0)),
                column(self.n2, Complex64::from_polar(lambda, phi)),
            ],
            self.theta_left.clone(),
            self.theta_right.clone(),
        )
    }

    /// `Im G_2`, the imaginary part of the summed force on the second column.
    pub fn im_g2(&self, lambda: f64, phi: f64) -> Result<f64> {
        let report = force_of(&self.config(lambda, phi))?;
        Ok(layer_force_sum(&report, 2)?.im)
    }
}

/// `points` equally spaced phases on `[0, 2 pi)`.
pub fn phi_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| TAU * i as f64 / points as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlueScan {
    pub mu: usize,
    pub lambda: f64,
    pub samples: Vec<(f64, f64)>,
    /// Phases where `Im G_2` vanishes or changes sign, in `[0, 2 pi)`.
    pub zeros: Vec<f64>,
}

impl GlueScan {
    /// Largest distance from a detected zero to the nearest multiple of `pi / mu`.
    pub fn worst_zero_offset(&self) -> f64 {
        let spacing = PI / self.mu as f64;
        self.zeros
            .iter()
            .map(|z| {
                let k = (z / spacing).round();
                (z - k * spacing).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi,im_g2\n");
        for (phi, v) in &self.samples {
            out.push_str(&format!("{:.17e},{:.17e}\n", phi, v));
        }
        out
    }
}

/// Evaluates `Im G_2` on a periodic phase grid (assumed sorted, covering one
/// period) and reports its zeros: exact (relative to the sample maximum) or
/// located by linear interpolation across a sign change, including the
/// wrap-around pair. Zeros closer than one grid step are merged.
pub fn glue_phase_scan(template: &GlueTemplate, lambda: f64, grid: &[f64]) -> Result<GlueScan> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::ShapeMismatch(format!(
            "lambda = {} must lie in (0, 1)",
            lambda
        )));
    }
    let samples = grid
        .iter()
        .map(|&phi| template.im_g2(lambda, phi).map(|v| (phi, v)))
        .collect::<Result<Vec<_>>>()?;
    let max = samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
    let step = if grid.len() > 1 {
        TAU / grid.len() as f64
    } else {
        TAU
    };
    let mut zeros: Vec<f64> = Vec::new();
    let m = samples.len();
    for i in 0..m {
        let (p0, v0) = samples[i];
        if v0.abs() <= 1e-12 * max {
            zeros.push(p0);
            continue;
        }
        let (mut p1, v1) = samples[(i + 1) % m];
        if i + 1 == m {
            p1 += TAU;
        }
        if v1.abs() > 1e-12 * max && v0.signum() != v1.signum() {
            let z = p0 + (p1 - p0) * v0 / (v0 - v1);
            zeros.push(z.rem_euclid(TAU));
        }
    }
    zeros.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::new();
    for z in zeros {
        match merged.last() {
            Some(&last) if z - last <= step => {}
            _ => merged.push(z),
        }
    }
    if merged.len() > 1 && merged[0] + TAU - merged[merged.len() - 1] <= step {
        merged.pop();
    }
    Ok(GlueScan {
        mu: template.mu(),
        lambda,
        samples,
        zeros: merged,
    })
}

/// Least-squares slope of `ln |Im G_2|` against `ln lambda` at phase `phi`.
pub fn glue_slope(template: &GlueTemplate, phi: f64, lambdas: &[f64]) -> Result<f64> {
    let points = lambdas
        .iter()
        .map(|&l| template.im_g2(l, phi).map(|v| (l.ln(), v.abs().ln())))
        .collect::<Result<Vec<_>>>()?;
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Log-spaced `count` values covering `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count.max(2) - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_is_consistent() {
        for (a, b) in [(1, 1), (2, 3), (2, 2), (4, 1)] {
            let t = GlueTemplate::new(a, b).unwrap();
            let cfg = t.config(0.1, 0.3);
            assert!(cfg.theta1().abs() < 1e-15);
            assert!(cfg.theta2().abs() < 1e-15);
            assert_eq!(cfg.derive_residues().unwrap().interior(), &[1.0, 1.0]);
        }
    }

    #[test]
    fn closed_form_of_im_g2() {
        // n1 n2 lambda^mu sin(mu phi) / |1 - y|^2 with y = (lambda e^{i phi})^mu.
        for (a, b) in [(1, 1), (2, 3), (2, 2)] {
            let t = GlueTemplate::new(a, b).unwrap();
            let mu = t.mu() as i32;
            for &(lambda, phi) in &[(0.1, 0.3), (0.2, 1.7), (0.05, 4.0)] {
                let y = Complex64::from_polar(lambda, phi).powi(mu);
                let expected = (a * b) as f64 * lambda.powi(mu) * (mu as f64 * phi).sin()
                    / (1.0 - y).norm_sqr();
                let got = t.im_g2(lambda, phi).unwrap();
                assert!(
                    (got - expected).abs() < 1e-12 * expected.abs().max(1e-300) + 1e-15,
                    "{} vs {}",
                    got,
                    expected
                );
            }
        }
    }

    #[test]
    fn zeros_at_multiples() {
        let grid = phi_grid(400);
        for (a, b) in [(1, 1), (2, 3)] {
            let t = GlueTemplate::new(a, b).unwrap();
            let scan = glue_phase_scan(&t, 0.1, &grid).unwrap();
            assert_eq!(scan.zeros.len(), 2 * t.mu());
            assert!(scan.worst_zero_offset() <= PI / 200.0);
        }
    }

    #[test]
    fn slope_matches_mu() {
        let t = GlueTemplate::new(2, 2).unwrap();
        let s = glue_slope(&t, PI / 8.0, &log_space(0.01, 0.1, 5)).unwrap();
        assert!((s - 2.0).abs() < 0.1);
    }
}
