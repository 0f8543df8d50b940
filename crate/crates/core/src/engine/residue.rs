use super::{Complex64, Evaluator};
use crate::error::Result;

/// Offsets `ε` at which `ε·f(1+ε)` is sampled.
pub const RESIDUE_STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Residue at `s = 1` by least-squares linear extrapolation of `ε·Re f(1+ε)`
/// to `ε = 0`.
pub fn residue_probe(f: &Evaluator<'_>, tol: f64) -> Result<f64> {
    let mut pts = Vec::with_capacity(RESIDUE_STEPS.len());
    for &eps in &RESIDUE_STEPS {
        // ε·f(1+ε) needs f to ~tol/ε
        let r = f(Complex64::new(1.0 + eps, 0.0), tol / eps)?;
        pts.push((eps, eps * r.value.re));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(my - sxy / sxx * mx)
}
