use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradMismatch {
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
    /// One-sided slopes `(f(p+h) − f(p))/h` and `(f(p) − f(p−h))/h`.
    pub forward: f64,
    pub backward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub checked: usize,
    pub tol: f64,
    pub max_rel_error: f64,
    pub worst_index: Option<usize>,
    pub violations: Vec<GradMismatch>,
    /// Entries where the step straddles a kink: the one-sided slopes disagree
    /// and the analytic value matches one of them. Not counted as violations
    /// and left out of `max_rel_error`.
    pub kinks: Vec<GradMismatch>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Relative error with a floor on the denominator so that two tiny
/// gradients do not count as a mismatch.
fn rel_error(a: f64, n: f64) -> f64 {
    rel_error_floor(a, n, 1e-8)
}

fn rel_error_floor(a: f64, n: f64, floor: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(floor)
}

/// Rounding noise of a difference quotient at loss value `f`, with headroom.
fn roundoff(f: f64, h: f64) -> f64 {
    16.0 * f64::EPSILON * f.abs() / h
}

/// Central-difference check of `analytic` against `loss` at the listed indices.
pub fn grad_check<F>(params: &[f64], analytic: &[f64], mut loss: F, indices: &[usize], h: f64, tol: f64) -> GradCheckReport
where
    F: FnMut(&[f64]) -> f64,
{
    let mut p = params.to_vec();
    let f0 = loss(&p);
    let mut rep = GradCheckReport { checked: 0, tol, max_rel_error: 0.0, worst_index: None, violations: Vec::new(), kinks: Vec::new() };
    for &i in indices {
        let orig = p[i];
        p[i] = orig + h;
        let up = loss(&p);
        p[i] = orig - h;
        let down = loss(&p);
        p[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        // below `noise` the difference quotient cannot resolve the gradient,
        // so the floor keeps such a gap under `tol`
        let noise = roundoff(f0.abs().max(up.abs()).max(down.abs()), h);
        let e = rel_error_floor(analytic[i], numeric, (noise / tol).max(1e-8));
        rep.checked += 1;
        if e.is_nan() || e > tol {
            let (forward, backward) = ((up - f0) / h, (f0 - down) / h);
            let m = GradMismatch { index: i, analytic: analytic[i], numeric, rel_error: e, forward, backward };
            let one_sided = rel_error(analytic[i], forward).min(rel_error(analytic[i], backward));
            if rel_error(forward, backward) > tol && one_sided <= tol {
                rep.kinks.push(m);
                continue;
            }
            rep.violations.push(m);
        }
        if e > rep.max_rel_error || rep.worst_index.is_none() {
            rep.max_rel_error = e;
            rep.worst_index = Some(i);
        }
    }
    rep
}
