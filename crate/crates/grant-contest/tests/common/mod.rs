#![allow(dead_code)]

use grant_contest::survey::SurveyRecord;
use grant_contest::synth::{generate, SynthConfig};
use nalgebra::{DMatrix, DVector};

pub fn record(id: usize, field: &str, research: f64, fundraising: f64, other: f64, grant: f64) -> SurveyRecord {
    SurveyRecord {
        id: format!("r{id}"),
        field: field.to_string(),
        hrs_research: research,
        hrs_fundraising: fundraising,
        hrs_other: other,
        grant_expected: grant,
        grant_guaranteed: 0.0,
        covariates: Vec::new(),
    }
}

/// 200 records in fields of size 65, 65, 33, 17, 9, 5, 3, 3. Field sizes
/// minus one are powers of two and every G/F ratio is a multiple of 1/16,
/// so leave-one-out averages are exact in binary floating point.
pub fn dyadic_panel() -> Vec<SurveyRecord> {
    let sizes = [65, 65, 33, 17, 9, 5, 3, 3];
    let hours = [0.5, 1.0, 2.0, 4.0];
    let mut out = Vec::new();
    let mut id = 0;
    for (f, &size) in sizes.iter().enumerate() {
        for j in 0..size {
            let fundraising = hours[(id * 7 + j) % 4];
            let grant = ((id * 37 + 11) % 29) as f64 / 8.0;
            out.push(record(id, &format!("field{f}"), 10.0, fundraising, 5.0, grant));
            id += 1;
        }
    }
    // interleave fields so grouping cannot rely on order
    let n = out.len();
    (0..n).map(|i| out[(i * 73) % n].clone()).collect()
}

/// Leave-one-out averages by direct summation over every other record.
pub fn brute_force_instrument(records: &[SurveyRecord]) -> Vec<f64> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut sum = 0.0;
            let mut count = 0usize;
            for (j, o) in records.iter().enumerate() {
                if j != i && o.field == r.field {
                    sum += o.grant_expected / o.hrs_fundraising;
                    count += 1;
                }
            }
            sum / count as f64
        })
        .collect()
}

/// Synthetic regression panel with no zero-hour responses.
pub fn regression_panel(records: usize, seed: u64) -> (SynthConfig, Vec<SurveyRecord>) {
    let cfg = SynthConfig {
        records,
        seed,
        zero_research: 0.0,
        zero_other: 0.0,
        zero_fundraising: 0.0,
        ..SynthConfig::default()
    };
    let recs = generate(&cfg);
    (cfg, recs)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn poisson_loglik(y: &[f64], rows: &[Vec<f64>], beta: &[f64]) -> f64 {
    y.iter()
        .zip(rows)
        .map(|(yi, xi)| {
            let eta: f64 = xi.iter().zip(beta).map(|(a, b)| a * b).sum();
            yi * eta - eta.exp()
        })
        .sum()
}

/// Newton-Raphson on the Poisson log-likelihood with step halving, from
/// the intercept-only solution.
pub fn newton_poisson(y: &DVector<f64>, x: &DMatrix<f64>) -> Vec<f64> {
    let (n, k) = x.shape();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..k).map(|j| x[(i, j)]).collect()).collect();
    let y: Vec<f64> = y.iter().copied().collect();
    let mut beta = vec![0.0; k];
    beta[0] = (y.iter().sum::<f64>() / n as f64).ln();
    for _ in 0..200 {
        let mut grad = vec![0.0; k];
        let mut hess = vec![vec![0.0; k]; k];
        for (yi, xi) in y.iter().zip(&rows) {
            let mu = xi.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>().exp();
            for a in 0..k {
                grad[a] += (yi - mu) * xi[a];
                for b in 0..k {
                    hess[a][b] += mu * xi[a] * xi[b];
                }
            }
        }
        if grad.iter().all(|g| g.abs() < 1e-9) {
            break;
        }
        let step = gauss_solve(hess, grad);
        let base = poisson_loglik(&y, &rows, &beta);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + t * s).collect();
            if poisson_loglik(&y, &rows, &trial) >= base || t < 1e-8 {
                beta = trial;
                break;
            }
            t *= 0.5;
        }
    }
    beta
}
