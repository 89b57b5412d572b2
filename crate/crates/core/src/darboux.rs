//! Generalized Darboux directions.
//!
//! The x1-axis of a normal-form germ is a generalized Darboux direction when
//! the `x_1`-dependent part `x_1 q(x)` of the contact 3-jet vanishes. The
//! same condition reads `C_1st = 0` for `2 <= s, t <= n` in the cubic form;
//! both sides are computed independently and compared.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::contact::{pencil_contact, BCoefficients};
use crate::cubic::{binary_cubic, cubic_tensor_closed, CubicTensor};
use crate::error::{MkitError, Result};
use crate::jetalgebra::TruncatedPolynomial;
use crate::moutard::moutard_beta;
use crate::normalform::{align_direction, normalize, HypersurfaceGerm};
use crate::scalar::{Backend, Scalar};

/// Default float threshold on the normalized `q` norm.
pub const DEFAULT_THRESHOLD: f64 = 1e-9;

/// Directions with `|h(v, v)|` below this are skipped in scans.
const NULL_SKIP: f64 = 1e-6;

/// Both characterizations of the x1-axis at one germ.
#[derive(Clone, Debug)]
pub struct DarbouxReport<S> {
    /// Tested direction in the coordinates of the germ handed in.
    pub direction: Vec<S>,
    pub b: BCoefficients<S>,
    pub c111: S,
    /// `((s, t), C_1st)` for `2 <= s <= t <= n`, 0-based.
    pub c_slice: Vec<((usize, usize), S)>,
    pub verdict_b: bool,
    pub verdict_c: bool,
    pub agreement: bool,
    /// `x_1`-independence of the contact 3-jet.
    pub cubic_free_of_x1: bool,
    /// `|q| / max|K|` (plain `|q|` when `K` is negligible).
    pub q_norm: f64,
    pub c_norm: f64,
}

fn cubic_scale<S: Scalar>(germ: &HypersurfaceGerm<S>) -> f64 {
    // Cubic parts below this are rounding noise of the normalization.
    let m = germ.cubic_magnitude();
    if m > 1e-9 {
        m
    } else {
        1.0
    }
}

/// Tests the x1-axis with the default float threshold.
pub fn is_generalized_darboux<S: Scalar>(germ: &HypersurfaceGerm<S>) -> Result<DarbouxReport<S>> {
    is_generalized_darboux_with(germ, DEFAULT_THRESHOLD)
}

/// Tests the x1-axis. On the exact backend the verdicts are exact and a
/// disagreement is an error; on floats both norms are compared with
/// `threshold`.
pub fn is_generalized_darboux_with<S: Scalar>(germ: &HypersurfaceGerm<S>, threshold: f64) -> Result<DarbouxReport<S>> {
    let n = germ.n();
    let beta = moutard_beta(germ);
    let (cj, b) = pencil_contact(germ, &beta)?;
    let c = cubic_tensor_closed(germ);
    let mut c_slice = Vec::new();
    for s in 1..n {
        for t in s..n {
            c_slice.push(((s, t), c.get(0, s, t)));
        }
    }
    let scale = cubic_scale(germ);
    let q_norm = b.q_norm() / scale;
    let c_norm = c_slice.iter().map(|(_, v)| v.to_f64().powi(2)).sum::<f64>().sqrt() / scale;
    let exact = S::BACKEND == Backend::Exact;
    let (verdict_b, verdict_c, free) = if exact {
        (b.q_vanishes(0.0), c_slice.iter().all(|(_, v)| v.is_zero()), cj.cubic_free_of_x1(0.0))
    } else {
        (q_norm <= threshold, c_norm <= threshold, cj.cubic_free_of_x1(threshold * scale))
    };
    let agreement = verdict_b == verdict_c;
    if exact && (!agreement || free != verdict_b) {
        return Err(MkitError::InternalMismatch(format!(
            "Darboux verdicts disagree: q = 0 is {verdict_b}, C slice = 0 is {verdict_c}, d phi3/dx1 = 0 is {free}"
        )));
    }
    Ok(DarbouxReport {
        direction: (0..n).map(|i| if i == 0 { S::one() } else { S::zero() }).collect(),
        b,
        c111: c.get(0, 0, 0),
        c_slice,
        verdict_b,
        verdict_c,
        agreement,
        cubic_free_of_x1: free,
        q_norm,
        c_norm,
    })
}

/// Aligns the frame to `v` and tests the new x1-axis.
pub fn darboux_at<S: Scalar>(germ: &HypersurfaceGerm<S>, v: &[S], threshold: f64) -> Result<DarbouxReport<S>> {
    let (aligned, _) = align_direction(germ, v)?;
    let mut report = is_generalized_darboux_with(&aligned, threshold)?;
    report.direction = v.to_vec();
    Ok(report)
}

/// One real root of `C(v, v, v) = 0` on a surface.
#[derive(Clone, Debug, Serialize)]
pub struct SurfaceDirection {
    /// Unit vector with `v2 > 0`, or `v1 > 0` when `v2 = 0`.
    pub direction: [f64; 2],
    /// Multiplicity as a root of the cubic.
    pub multiplicity: usize,
    /// `b_122` after aligning to the direction; `None` for null directions.
    pub b122: Option<f64>,
    pub c111: Option<f64>,
    /// Cubic-term magnitude of the aligned germ; both values above are
    /// compared against the threshold times this.
    pub aligned_scale: Option<f64>,
    pub verified: bool,
}

/// Darboux directions of a surface germ.
#[derive(Clone, Debug, Serialize)]
pub struct SurfaceDirections {
    /// `C(v, v, v)` coefficients of `v1^3, v1^2 v2, v1 v2^2, v2^3`.
    pub cubic: [f64; 4],
    /// The cubic form vanishes: every direction is a Darboux direction.
    pub all_directions: bool,
    pub real: Vec<SurfaceDirection>,
    pub complex_pairs: usize,
}

fn canonical_direction(v: [f64; 2]) -> [f64; 2] {
    let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let mut u = [v[0] / norm, v[1] / norm];
    if u[1] < 0.0 || (u[1] == 0.0 && u[0] < 0.0) {
        u = [-u[0], -u[1]];
    }
    if u[0] == 0.0 {
        u[0] = 0.0;
    }
    u
}

fn horner(c: &[f64], t: f64) -> (f64, f64) {
    let (mut p, mut dp) = (0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * t + p;
        p = p * t + a;
    }
    (p, dp)
}

fn newton_polish(c: &[f64], mut t: f64) -> f64 {
    for _ in 0..8 {
        let (p, dp) = horner(c, t);
        if dp == 0.0 {
            break;
        }
        let step = p / dp;
        t -= step;
        if step.abs() <= 1e-16 * (1.0 + t.abs()) {
            break;
        }
    }
    t
}

/// Relative size below which a discriminant counts as zero.
const DISCRIMINANT_TOL: f64 = 1e-12;

/// Real roots of `sum_i c[i] t^i` (ascending, nonzero leading term, degree at
/// most 3) with multiplicities, and the number of complex-conjugate pairs.
///
/// Repeated roots come from the closed forms selected by the discriminant;
/// simple roots from companion-matrix eigenvalues polished by Newton steps.
fn real_roots(c: &[f64]) -> (Vec<(f64, usize)>, usize) {
    let m = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let c: Vec<f64> = c.iter().map(|x| x / m).collect();
    match c.len() - 1 {
        0 => (Vec::new(), 0),
        1 => (vec![(-c[0] / c[1], 1)], 0),
        2 => {
            let (a, b, cc) = (c[2], c[1], c[0]);
            let disc = b * b - 4.0 * a * cc;
            if disc.abs() <= DISCRIMINANT_TOL {
                (vec![(-b / (2.0 * a), 2)], 0)
            } else if disc > 0.0 {
                let q = -0.5 * (b + b.signum() * disc.sqrt());
                let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, cc / q) };
                (vec![(newton_polish(&c, r1), 1), (newton_polish(&c, r2), 1)], 0)
            } else {
                (Vec::new(), 1)
            }
        }
        3 => {
            let (a, b, cc, d) = (c[3], c[2], c[1], c[0]);
            let disc = 18.0 * a * b * cc * d - 4.0 * b.powi(3) * d + b * b * cc * cc
                - 4.0 * a * cc.powi(3)
                - 27.0 * a * a * d * d;
            let d0 = b * b - 3.0 * a * cc;
            if disc.abs() <= DISCRIMINANT_TOL {
                if d0.abs() <= DISCRIMINANT_TOL.sqrt() {
                    return (vec![(-b / (3.0 * a), 3)], 0);
                }
                let double = (9.0 * a * d - b * cc) / (2.0 * d0);
                let simple = (4.0 * a * b * cc - 9.0 * a * a * d - b.powi(3)) / (a * d0);
                return (vec![(double, 2), (newton_polish(&c, simple), 1)], 0);
            }
            let mut comp = DMatrix::<f64>::zeros(3, 3);
            comp[(1, 0)] = 1.0;
            comp[(2, 1)] = 1.0;
            for i in 0..3 {
                comp[(i, 2)] = -c[i] / a;
            }
            let mut eig: Vec<_> = comp.complex_eigenvalues().iter().copied().collect();
            if disc > 0.0 {
                (eig.iter().map(|z| (newton_polish(&c, z.re), 1)).collect(), 0)
            } else {
                eig.sort_by(|x, y| x.im.abs().total_cmp(&y.im.abs()));
                (vec![(newton_polish(&c, eig[0].re), 1)], 1)
            }
        }
        _ => unreachable!("binary cubic has degree at most 3"),
    }
}

/// Real roots of the binary cubic `a v1^3 + b v1^2 v2 + c v1 v2^2 + d v2^3`
/// as unit directions with multiplicities, and the number of
/// complex-conjugate pairs. `None` when every coefficient is negligible.
pub fn binary_cubic_roots(coeffs: [f64; 4]) -> Option<(Vec<([f64; 2], usize)>, usize)> {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale <= 1e-12 {
        return None;
    }
    let tiny = 1e-13 * scale;
    let [a, b, c, d] = coeffs;
    // Dehomogenize on the larger end coefficient so the leading term is safe.
    // Each dropped leading degree is a root at `lost_dir`.
    let (mut poly, lost_dir, to_dir): (Vec<f64>, [f64; 2], fn(f64) -> [f64; 2]) = if a.abs() >= d.abs() {
        // t = v1 / v2: a t^3 + b t^2 + c t + d
        (vec![d, c, b, a], [1.0, 0.0], |t| [t, 1.0])
    } else {
        // s = v2 / v1: d s^3 + c s^2 + b s + a
        (vec![a, b, c, d], [0.0, 1.0], |s| [1.0, s])
    };
    let mut dropped = 0;
    while poly.len() > 1 && poly.last().is_some_and(|x| x.abs() <= tiny) {
        poly.pop();
        dropped += 1;
    }
    let (roots, complex) = real_roots(&poly);
    let mut real: Vec<([f64; 2], usize)> =
        roots.into_iter().map(|(t, k)| (canonical_direction(to_dir(t)), k)).collect();
    if dropped > 0 {
        real.push((canonical_direction(lost_dir), dropped));
    }
    real.sort_by(|x, y| x.0[0].total_cmp(&y.0[0]).then(x.0[1].total_cmp(&y.0[1])));
    Some((real, complex))
}

/// Darboux directions `C(v, v, v) = 0` of a surface germ, each checked by
/// aligning the frame to it and reading `b_122` off the contact function.
pub fn darboux_directions_surface<S: Scalar>(germ: &HypersurfaceGerm<S>) -> Result<SurfaceDirections> {
    if germ.n() != 2 {
        return Err(MkitError::Dimension("surface Darboux directions need n = 2".into()));
    }
    let c: CubicTensor<S> = cubic_tensor_closed(germ);
    let coeffs = binary_cubic(&c)?;
    let cubic = [coeffs[0].to_f64(), coeffs[1].to_f64(), coeffs[2].to_f64(), coeffs[3].to_f64()];
    let Some((roots, complex_pairs)) = binary_cubic_roots(cubic) else {
        return Ok(SurfaceDirections { cubic, all_directions: true, real: Vec::new(), complex_pairs: 0 });
    };
    let fg = germ.as_float();
    let mut real = Vec::new();
    for (dir, multiplicity) in roots {
        let hv = fg.signature().inner(&dir, &dir);
        if hv.abs() < NULL_SKIP {
            real.push(SurfaceDirection {
                direction: dir,
                multiplicity,
                b122: None,
                c111: None,
                aligned_scale: None,
                verified: false,
            });
            continue;
        }
        let (aligned, _) = align_direction(&fg, &dir)?;
        let (_, b) = pencil_contact(&aligned, &moutard_beta(&aligned))?;
        let b122 = b.b1ss[0];
        let c111 = cubic_tensor_closed(&aligned).get(0, 0, 0);
        // Near-null directions blow the aligned coefficients up, so the
        // residuals are judged relative to the aligned cubic terms.
        let scale = cubic_scale(&aligned);
        let verified = b122.abs() <= DEFAULT_THRESHOLD * scale && c111.abs() <= DEFAULT_THRESHOLD * scale;
        real.push(SurfaceDirection {
            direction: dir,
            multiplicity,
            b122: Some(b122),
            c111: Some(c111),
            aligned_scale: Some(scale),
            verified,
        });
    }
    Ok(SurfaceDirections { cubic, all_directions: false, real, complex_pairs })
}

/// Axis-aligned lattice, inclusive of both ends on every axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub steps: Vec<usize>,
}

impl Grid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, steps: Vec<usize>) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != steps.len() {
            return Err(MkitError::Dimension("grid bounds and steps differ in length".into()));
        }
        Ok(Grid { lower, upper, steps })
    }

    /// The same `[lo, hi]` interval with `steps` points on each of `n` axes.
    pub fn cube(n: usize, lo: f64, hi: f64, steps: usize) -> Self {
        Grid { lower: vec![lo; n], upper: vec![hi; n], steps: vec![steps; n] }
    }

    pub fn len(&self) -> usize {
        if self.steps.is_empty() {
            0
        } else {
            self.steps.iter().product()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in row-major order (last axis fastest).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let total = self.len();
        let n = self.steps.len();
        (0..total)
            .map(|mut idx| {
                let mut p = vec![0.0; n];
                for axis in (0..n).rev() {
                    let k = self.steps[axis];
                    let i = idx % k;
                    idx /= k;
                    p[axis] = if k == 1 {
                        self.lower[axis]
                    } else {
                        self.lower[axis] + (self.upper[axis] - self.lower[axis]) * i as f64 / (k - 1) as f64
                    };
                }
                p
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub threshold: f64,
    /// Sampled directions per point (n >= 3, and surfaces with vanishing
    /// cubic form).
    pub directions: usize,
    pub seed: u64,
    /// Worker threads; `None` reads `MKIT_THREADS`, falling back to the
    /// machine's parallelism.
    pub threads: Option<usize>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { threshold: DEFAULT_THRESHOLD, directions: 64, seed: 0, threads: None }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PointOutcome {
    Degenerate {
        reason: String,
    },
    Evaluated {
        signature: Vec<i8>,
        /// Best direction in germ coordinates.
        best_direction: Vec<f64>,
        /// Best direction as an ambient tangent vector, unit length.
        best_direction_ambient: Vec<f64>,
        best_q_norm: f64,
        verdict: bool,
        /// `q` norm of every evaluated direction.
        cell_q_norms: Vec<f64>,
        /// Directions skipped for being (nearly) null.
        skipped_null: usize,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct PointResult {
    pub index: usize,
    pub point: Vec<f64>,
    #[serde(flatten)]
    pub outcome: PointOutcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanSummary {
    pub points: usize,
    pub degenerate: usize,
    pub passing_points: usize,
    pub cells: usize,
    pub passing_cells: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocusScanResult {
    pub n: usize,
    pub threshold: f64,
    pub seed: u64,
    pub points: Vec<PointResult>,
    pub summary: ScanSummary,
}

impl LocusScanResult {
    /// Fraction of evaluated (point, direction) cells with `q` norm at most
    /// `threshold`.
    pub fn passing_fraction(&self, threshold: f64) -> f64 {
        let (mut pass, mut total) = (0usize, 0usize);
        for p in &self.points {
            if let PointOutcome::Evaluated { cell_q_norms, .. } = &p.outcome {
                total += cell_q_norms.len();
                pass += cell_q_norms.iter().filter(|&&q| q <= threshold).count();
            }
        }
        if total == 0 {
            0.0
        } else {
            pass as f64 / total as f64
        }
    }
}

/// Unit directions sampled on the upper half of the unit sphere in `R^n`
/// (directions are unoriented): an evenly spaced half-circle for `n = 2`, a
/// Fibonacci lattice for `n = 3`, seeded Gaussian samples above.
pub fn sample_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0]],
        2 => (0..count)
            .map(|i| {
                let t = std::f64::consts::PI * (i as f64 + 0.5) / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * i as f64;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if v[n - 1] < 0.0 {
                        v.iter_mut().for_each(|x| *x = -*x);
                    }
                    v.iter().map(|x| x / norm).collect()
                })
                .collect()
        }
    }
}

fn threads_from_env() -> Option<usize> {
    std::env::var("MKIT_THREADS").ok()?.trim().parse().ok().filter(|&t| t > 0)
}

/// Pool with `threads` workers, else `MKIT_THREADS`, else rayon's default.
pub(crate) fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads.or_else(threads_from_env) {
        builder = builder.num_threads(t);
    }
    builder.build().map_err(|e| MkitError::InvalidInput(format!("thread pool: {e}")))
}

fn ambient_unit(linear: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let w: Vec<f64> = linear.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    w.iter().map(|x| x / norm).collect()
}

fn scan_point(f: &TruncatedPolynomial<f64>, p: &[f64], samples: &[Vec<f64>], threshold: f64) -> PointOutcome {
    let (germ, frame) = match normalize(f, p, 4) {
        Ok(x) => x,
        Err(e) => return PointOutcome::Degenerate { reason: e.to_string() },
    };
    let n = germ.n();
    let mut cells: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut skipped = 0;
    let mut use_samples = n != 2;
    if n == 2 {
        match darboux_directions_surface(&germ) {
            Ok(sd) if sd.all_directions => use_samples = true,
            Ok(sd) => {
                for d in sd.real {
                    match (d.b122, d.aligned_scale) {
                        (Some(b), Some(s)) => cells.push((d.direction.to_vec(), b.abs() / s)),
                        _ => skipped += 1,
                    }
                }
            }
            Err(e) => return PointOutcome::Degenerate { reason: e.to_string() },
        }
    }
    if use_samples {
        for v in samples {
            if germ.signature().inner(v, v).abs() < NULL_SKIP {
                skipped += 1;
                continue;
            }
            match darboux_at(&germ, v, threshold) {
                Ok(r) => cells.push((v.clone(), r.q_norm)),
                Err(_) => skipped += 1,
            }
        }
    }
    let best = cells.iter().min_by(|a, b| a.1.total_cmp(&b.1)).cloned();
    let (best_direction, best_q_norm) = best.unwrap_or((vec![f64::NAN; n], f64::INFINITY));
    PointOutcome::Evaluated {
        signature: germ.signature().entries().to_vec(),
        best_direction_ambient: ambient_unit(&frame.linear, &best_direction),
        best_direction,
        verdict: best_q_norm <= threshold,
        best_q_norm,
        cell_q_norms: cells.into_iter().map(|c| c.1).collect(),
        skipped_null: skipped,
    }
}

/// Normalizes the graph `y = F(x)` at every grid point and records the
/// Darboux direction with the smallest `q` norm. Points are independent and
/// processed in parallel; results are ordered by grid index.
pub fn darboux_locus_scan(f: &TruncatedPolynomial<f64>, grid: &Grid, options: &ScanOptions) -> Result<LocusScanResult> {
    let n = f.n_vars();
    if grid.steps.len() != n {
        return Err(MkitError::Dimension(format!("grid has {} axes, F has {n} variables", grid.steps.len())));
    }
    if grid.is_empty() {
        return Err(MkitError::EmptyGrid);
    }
    let points = grid.points();
    let samples = sample_directions(n, options.directions.max(1), options.seed);
    let pool = thread_pool(options.threads)?;
    let results: Vec<PointResult> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(index, p)| PointResult {
                index,
                point: p.clone(),
                outcome: scan_point(f, p, &samples, options.threshold),
            })
            .collect()
    });

    let mut summary =
        ScanSummary { points: results.len(), degenerate: 0, passing_points: 0, cells: 0, passing_cells: 0 };
    for r in &results {
        match &r.outcome {
            PointOutcome::Degenerate { .. } => summary.degenerate += 1,
            PointOutcome::Evaluated { verdict, cell_q_norms, .. } => {
                summary.passing_points += *verdict as usize;
                summary.cells += cell_q_norms.len();
                summary.passing_cells += cell_q_norms.iter().filter(|&&q| q <= options.threshold).count();
            }
        }
    }
    if summary.degenerate == summary.points {
        return Err(MkitError::AllPointsDegenerate);
    }
    Ok(LocusScanResult { n, threshold: options.threshold, seed: options.seed, points: results, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalform::Signature;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn sig(e: &[i8]) -> Signature {
        Signature::new(e.to_vec()).unwrap()
    }

    #[test]
    fn darboux_examples() {
        let g = HypersurfaceGerm::<Rational>::builder(sig(&[1, 1, 1]), 4).build().unwrap();
        let r = is_generalized_darboux(&g).unwrap();
        assert!(r.verdict_b && r.verdict_c && r.agreement);

        let g = HypersurfaceGerm::builder(sig(&[1, 1, 1]), 4)
            .cubic([0, 0, 0], q(3, 1))
            .cubic([0, 1, 1], q(1, 1))
            .cubic([0, 2, 2], q(1, 1))
            .build()
            .unwrap();
        let r = is_generalized_darboux(&g).unwrap();
        assert!(r.verdict_b && r.verdict_c);
        assert!(r.c_slice.iter().all(|(_, v)| *v == q(0, 1)));

        let g = HypersurfaceGerm::builder(sig(&[1, 1, 1]), 4).cubic([0, 1, 2], q(1, 1)).build().unwrap();
        let r = is_generalized_darboux(&g).unwrap();
        assert!(!r.verdict_b && !r.verdict_c);
        assert_eq!(r.b.b1st, vec![((1, 2), q(-2, 1))]);
    }

    #[test]
    fn surface_directions_of_k111_germ() {
        let g = HypersurfaceGerm::builder(sig(&[1, 1]), 4).cubic([0, 0, 0], q(1, 1)).build().unwrap();
        let sd = darboux_directions_surface(&g).unwrap();
        assert!(!sd.all_directions);
        assert_eq!(sd.complex_pairs, 0);
        let s3 = 3f64.sqrt() / 2.0;
        let want = [[-s3, 0.5], [0.0, 1.0], [s3, 0.5]];
        assert_eq!(sd.real.len(), 3);
        for (d, w) in sd.real.iter().zip(want) {
            assert_eq!(d.multiplicity, 1);
            assert!((d.direction[0] - w[0]).abs() < 1e-10 && (d.direction[1] - w[1]).abs() < 1e-10, "{d:?}");
            assert!(d.verified);
        }
    }

    #[test]
    fn surface_all_directions() {
        let g = HypersurfaceGerm::<Rational>::builder(sig(&[1, -1]), 4).build().unwrap();
        assert!(darboux_directions_surface(&g).unwrap().all_directions);
    }

    #[test]
    fn binary_cubic_degree_drop() {
        // v1 v2 (v1 - v2): roots (1,0), (0,1), (1,1)/sqrt2
        let (roots, cx) = binary_cubic_roots([0.0, 1.0, -1.0, 0.0]).unwrap();
        assert_eq!(cx, 0);
        assert_eq!(roots.len(), 3);
        let r = 1.0 / 2f64.sqrt();
        let want = [[0.0, 1.0], [r, r], [1.0, 0.0]];
        for ((a, k), b) in roots.iter().zip(want) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12 && *k == 1, "{roots:?}");
        }
        // v1^3 + v1 v2^2 = v1 (v1^2 + v2^2)
        let (roots, cx) = binary_cubic_roots([1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!((roots.len(), cx), (1, 1));
        assert!(binary_cubic_roots([0.0; 4]).is_none());
    }

    #[test]
    fn repeated_roots_keep_their_multiplicity() {
        // (v1 + v2)^3
        let (roots, cx) = binary_cubic_roots([2.625, 7.875, 7.875, 2.625]).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert_eq!((roots.len(), cx, roots[0].1), (1, 0, 3));
        assert!((roots[0].0[0] + r).abs() < 1e-14 && (roots[0].0[1] - r).abs() < 1e-14);
        // v1^2 (v1 - 2 v2)
        let (roots, cx) = binary_cubic_roots([1.0, -2.0, 0.0, 0.0]).unwrap();
        assert_eq!(cx, 0);
        assert_eq!(roots.iter().map(|r| r.1).collect::<Vec<_>>(), vec![2, 1]);
        assert_eq!(roots[0].0, [0.0, 1.0]);
        // v2^2 (3 v1 + v2): double root at infinity of t = v1 / v2
        let (roots, _) = binary_cubic_roots([0.0, 0.0, 3.0, 1.0]).unwrap();
        assert_eq!(roots.iter().map(|r| r.1).sum::<usize>(), 3);
        assert!(roots.iter().any(|(d, k)| *k == 2 && d[0] == 1.0 && d[1] == 0.0));
    }

    #[test]
    fn grid_points_are_row_major() {
        let g = Grid::new(vec![0.0, -1.0], vec![1.0, 1.0], vec![2, 3]).unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1], vec![0.0, 0.0]);
        assert_eq!(pts[3], vec![1.0, -1.0]);
    }

    #[test]
    fn paraboloid_scan_is_darboux_everywhere() {
        let f = TruncatedPolynomial::from_terms(2, 2, [(vec![2u32, 0], 0.5), (vec![0, 2], 0.5)]);
        let res = darboux_locus_scan(&f, &Grid::cube(2, -1.0, 1.0, 3), &ScanOptions::default()).unwrap();
        assert_eq!(res.summary.points, 9);
        assert_eq!(res.summary.passing_points, 9);
    }

    #[test]
    fn degenerate_points_are_reported() {
        // y = x1^3 + x2^2 is parabolic along x1 = 0.
        let f = TruncatedPolynomial::from_terms(2, 3, [(vec![3u32, 0], 1.0), (vec![0, 2], 1.0)]);
        let res = darboux_locus_scan(
            &f,
            &Grid::new(vec![0.0, 0.0], vec![1.0, 0.0], vec![2, 1]).unwrap(),
            &ScanOptions::default(),
        )
        .unwrap();
        assert_eq!(res.summary.degenerate, 1);
        assert!(matches!(res.points[0].outcome, PointOutcome::Degenerate { .. }));
        let zero = TruncatedPolynomial::from_terms(2, 3, [(vec![3u32, 0], 1.0)]);
        assert_eq!(
            darboux_locus_scan(&zero, &Grid::cube(2, 0.0, 0.0, 1), &ScanOptions::default()).unwrap_err(),
            MkitError::AllPointsDegenerate
        );
    }

    #[test]
    fn scan_is_deterministic_across_thread_counts() {
        let f = TruncatedPolynomial::from_terms(
            3,
            3,
            [
                (vec![2u32, 0, 0], 0.5),
                (vec![0, 2, 0], 0.5),
                (vec![0, 0, 2], -0.5),
                (vec![1, 1, 1], 0.3),
                (vec![3, 0, 0], 0.2),
            ],
        );
        let grid = Grid::cube(3, -0.5, 0.5, 2);
        let a = darboux_locus_scan(&f, &grid, &ScanOptions { threads: Some(1), directions: 20, ..Default::default() })
            .unwrap();
        let b = darboux_locus_scan(&f, &grid, &ScanOptions { threads: Some(4), directions: 20, ..Default::default() })
            .unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
