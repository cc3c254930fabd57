//! Numerical quadrature over the real line for integrands with Gaussian decay.
//!
//! Two rules are provided: a fixed-node Gauss-Hermite rule, exact for
//! polynomial-times-Gaussian integrands of sufficient order, and an adaptive
//! Simpson rule used as an independent cross-check. Every integrand in this
//! crate is a polynomial times a Gaussian envelope, so the fixed rule is the
//! default and the adaptive rule is reserved for validation.
//!
//! Rule construction is memoized per node count behind a mutex; the cached
//! rules themselves are immutable, so concurrent integration stays safe.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Hard cap on the node count; above this the intermediate orthonormal
/// Hermite values overflow f64 at the outermost nodes.
pub const MAX_NODES: usize = 512;

/// Minimum node count accepted by [`QuadratureSpec`]; the integrands handled
/// here (pump orders up to ~80) need far fewer, so this is a generous floor.
pub const MIN_SPEC_NODES: usize = 64;

const DEFAULT_NODES: usize = 128;

/// Half-width of the adaptive-Simpson interval in units of the Gaussian
/// scale. exp(-14^2) is far below f64 resolution for every integrand here.
const SIMPSON_HALF_WIDTH: f64 = 14.0;

/// Integration rule selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureMethod {
    /// Fixed-node Gauss-Hermite rule with the given node count.
    GaussHermite { nodes: usize },
    /// Recursive adaptive Simpson with an absolute tolerance.
    AdaptiveSimpson { tolerance: f64 },
}

/// A quadrature request: the rule plus the Gaussian length scale of the
/// integrand. `scale` is the `s` for which the integrand decays roughly like
/// exp(-x^2/s^2); nodes are placed at `s * t_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    pub scale: f64,
}

impl QuadratureSpec {
    /// Fixed Gauss-Hermite rule. Node count must lie in `[64, 512]`.
    pub fn gauss_hermite(nodes: usize) -> Result<Self> {
        if !(MIN_SPEC_NODES..=MAX_NODES).contains(&nodes) {
            return Err(Error::domain(format!(
                "gauss-hermite node count must be in [{MIN_SPEC_NODES}, {MAX_NODES}], got {nodes}"
            )));
        }
        Ok(QuadratureSpec {
            method: QuadratureMethod::GaussHermite { nodes },
            scale: 1.0,
        })
    }

    /// Adaptive Simpson rule with the given absolute tolerance.
    pub fn adaptive_simpson(tolerance: f64) -> Result<Self> {
        if tolerance.is_nan() || tolerance <= 0.0 {
            return Err(Error::domain(format!(
                "simpson tolerance must be positive, got {tolerance}"
            )));
        }
        Ok(QuadratureSpec {
            method: QuadratureMethod::AdaptiveSimpson { tolerance },
            scale: 1.0,
        })
    }

    /// Sets the Gaussian length scale of the integrand.
    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain(format!(
                "quadrature scale must be positive and finite, got {scale}"
            )));
        }
        self.scale = scale;
        Ok(self)
    }
}

impl Default for QuadratureSpec {
    /// 128-node Gauss-Hermite at unit scale.
    fn default() -> Self {
        QuadratureSpec {
            method: QuadratureMethod::GaussHermite {
                nodes: DEFAULT_NODES,
            },
            scale: 1.0,
        }
    }
}

/// Fixed rules are immutable once built, so one instance per node count is
/// shared process-wide.
fn cached_rule(nodes: usize) -> Result<Arc<GaussHermiteRule>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermiteRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("rule cache lock");
    if let Some(rule) = guard.get(&nodes) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(GaussHermiteRule::new(nodes)?);
    guard.insert(nodes, Arc::clone(&rule));
    Ok(rule)
}

/// Integrates `f` over the whole real line according to `spec`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64> {
    match spec.method {
        QuadratureMethod::GaussHermite { nodes } => {
            let rule = cached_rule(nodes)?;
            Ok(rule.integrate(f, spec.scale))
        }
        QuadratureMethod::AdaptiveSimpson { tolerance } => {
            // Seed the recursion with panels no wider than the Gaussian
            // scale, so a narrow or odd integrand cannot hide between the
            // first coarse sample points.
            let half = SIMPSON_HALF_WIDTH * spec.scale;
            let panels = 2 * SIMPSON_HALF_WIDTH as usize;
            let panel_tol = tolerance / panels as f64;
            let mut total = 0.0;
            for k in 0..panels {
                let a = -half + 2.0 * half * k as f64 / panels as f64;
                let b = -half + 2.0 * half * (k + 1) as f64 / panels as f64;
                total += adaptive_simpson(&f, a, b, panel_tol)?;
            }
            Ok(total)
        }
    }
}

/// Fixed Gauss-Hermite rule for the weight `exp(-t^2)` on the real line.
///
/// Nodes are the roots of the order-n Hermite polynomial, found by Newton
/// iteration on the orthonormal recurrence; the iteration stays O(1) per
/// node so the rule is stable well past the node counts used here.
#[derive(Debug, Clone)]
pub struct GaussHermiteRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// weights[k] * exp(nodes[k]^2), assembled in log space so large node
    /// counts do not overflow.
    corrected_weights: Vec<f64>,
}

impl GaussHermiteRule {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_NODES {
            return Err(Error::domain(format!(
                "gauss-hermite rule needs 1..={MAX_NODES} nodes, got {n}"
            )));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let mut corrected = vec![0.0; n];
        let nf = n as f64;

        // Golub-Welsch: the roots are the eigenvalues of the symmetric
        // tridiagonal Jacobi matrix with zero diagonal and off-diagonal
        // sqrt(k/2). The QL sweep locates every root globally; a short
        // Newton polish then brings each one to full precision.
        let diag = vec![0.0; n];
        let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
        let mut eigen = tridiagonal_eigenvalues(diag, off)?;
        eigen.sort_by(|a, b| a.partial_cmp(b).unwrap());

        // Work on the positive half and mirror; symmetry pins the layout.
        let upper = n / 2;
        for i in 0..upper {
            let mut x = eigen[n - 1 - i];
            let mut converged = false;
            for _ in 0..20 {
                let (h_n, h_nm1) = orthonormal_hermite_pair(n, x);
                // H~_n'(x) = sqrt(2n) H~_{n-1}(x)
                let step = h_n / ((2.0 * nf).sqrt() * h_nm1);
                x -= step;
                if step.abs() <= 5e-14 * (1.0 + x.abs()) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::quadrature(format!(
                    "newton polish for gauss-hermite root {i} of {n} did not converge"
                )));
            }
            let (_, h_nm1) = orthonormal_hermite_pair(n, x);
            let w = 1.0 / (nf * h_nm1 * h_nm1);
            let ln_w = -(nf.ln()) - 2.0 * h_nm1.abs().ln();
            let idx_hi = n - 1 - i;
            nodes[idx_hi] = x;
            weights[idx_hi] = w;
            corrected[idx_hi] = (ln_w + x * x).exp();
            nodes[i] = -x;
            weights[i] = w;
            corrected[i] = corrected[idx_hi];
        }
        if n % 2 == 1 {
            // Center the middle root exactly.
            let mid = n / 2;
            nodes[mid] = 0.0;
            let (_, h_nm1) = orthonormal_hermite_pair(n, 0.0);
            weights[mid] = 1.0 / (nf * h_nm1 * h_nm1);
            corrected[mid] = weights[mid];
        }
        // A wrong or duplicated root shows up immediately in the zeroth
        // moment and in the node ordering; refuse to hand out such a rule.
        let zeroth: f64 = weights.iter().sum();
        let sqrt_pi = core::f64::consts::PI.sqrt();
        if (zeroth - sqrt_pi).abs() > 1e-10 * sqrt_pi
            || nodes.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::quadrature(format!(
                "gauss-hermite rule of {n} nodes failed validation (sum w = {zeroth})"
            )));
        }
        Ok(GaussHermiteRule {
            nodes,
            weights,
            corrected_weights: corrected,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Computes the weighted integral `∫ exp(-t^2) g(t) dt`.
    pub fn integrate_weighted<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * g(t))
            .sum()
    }

    /// Computes `∫ f(x) dx` for an `f` that decays like `exp(-x^2/scale^2)`,
    /// by sampling at `x = scale * t_k` with weight-corrected abscissae.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, scale: f64) -> f64 {
        scale
            * self
                .nodes
                .iter()
                .zip(&self.corrected_weights)
                .map(|(&t, &cw)| cw * f(scale * t))
                .sum::<f64>()
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix by the implicit QL
/// algorithm with Wilkinson shifts. `diag` holds the diagonal, `off` the
/// `n - 1` off-diagonal entries.
fn tridiagonal_eigenvalues(mut diag: Vec<f64>, off: Vec<f64>) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(diag);
    }
    let mut e = off;
    e.push(0.0);
    for l in 0..n {
        let mut iterations = 0;
        loop {
            // Look for a negligible off-diagonal element splitting the matrix.
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 50 {
                return Err(Error::quadrature(
                    "tridiagonal QL iteration did not converge".to_string(),
                ));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflowed = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    e[m] = 0.0;
                    underflowed = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if underflowed {
                continue;
            }
            diag[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(diag)
}

/// Evaluates the orthonormal Hermite functions (weight exp(-t^2), unit L2
/// norm) at `x`, returning `(H~_n(x), H~_{n-1}(x))`.
fn orthonormal_hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 0.0_f64;
    let mut p = core::f64::consts::PI.powf(-0.25);
    for j in 0..n {
        let jf = j as f64;
        let next = x * (2.0 / (jf + 1.0)).sqrt() * p - (jf / (jf + 1.0)).sqrt() * p_prev;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// Recursive adaptive Simpson on `[a, b]` with Richardson acceptance.
fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    const MAX_DEPTH: u32 = 48;
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let err = left + right - whole;
        if err.abs() <= 15.0 * tol {
            return Ok(left + right + err / 15.0);
        }
        if depth == 0 {
            return Err(Error::quadrature(format!(
                "adaptive simpson did not converge on [{a}, {b}] (residual {err:e})"
            )));
        }
        let half_tol = 0.5 * tol;
        Ok(recurse(f, a, m, fa, flm, fm, left, half_tol, depth - 1)?
            + recurse(f, m, b, fm, frm, fb, right, half_tol, depth - 1)?)
    }

    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}
