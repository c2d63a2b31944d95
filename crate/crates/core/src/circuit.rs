//! The companion RLC circuit: grounded-Laplacian assembly, resonance
//! condition, the quoted closed-form eigenvalue branches (evaluated literally,
//! for cross-checking against the dense eigensolve), boundary-resonance
//! frequency sweeps, and two-point admittance.
//!
//! SI units throughout: henry, farad, ohm, s⁻¹.

use crate::eig;
use crate::mat::CMat;
use crate::parallel::{par_map_indexed, resolve_threads};
use crate::scalar::{c, cis, cr, r, Real};
use num_complex::Complex;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum CircuitError<R: Real> {
    #[error("circuit element {name} must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: R },
    #[error("inductor series loss must be non-negative, got {0}")]
    NegativeLoss(R),
    #[error("the closed-form branches are derived for lossless inductors")]
    LossNotSupported,
    #[error("admittance between a node and itself at zero offset is undefined")]
    BadNodePair,
    #[error("node labels must be in 0..4, got {0}")]
    BadNode(usize),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("frequency range must satisfy 0 < lo < hi, got ({lo}, {hi})")]
    BadRange { lo: R, hi: R },
}

/// RLC circuit parameters. `omega` is the drive angular frequency; the
/// derived quantities a₁, a₂, b are recomputed on demand, never cached.
/// `inductor_loss` is an optional series resistance on every inductor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircuitParams<R: Real> {
    /// Inductance on the intra-type bonds (henry).
    pub l1: R,
    /// Inductance on the other bond type (henry).
    pub l2: R,
    /// Grounding capacitance (farad).
    pub c: R,
    /// Grounding resistance in parallel with the capacitor (ohm).
    pub r: R,
    /// Drive angular frequency (s⁻¹).
    pub omega: R,
    /// Optional series resistance on each inductor (ohm).
    pub inductor_loss: Option<R>,
}

impl<R: Real> CircuitParams<R> {
    pub fn new(l1: R, l2: R, c: R, r: R, omega: R) -> Self {
        Self { l1, l2, c, r, omega, inductor_loss: None }
    }

    pub fn validate(&self) -> Result<(), CircuitError<R>> {
        for (name, value) in [
            ("L1", self.l1),
            ("L2", self.l2),
            ("C", self.c),
            ("R", self.r),
            ("omega", self.omega),
        ] {
            if !(value > R::zero()) || !value.is_finite() {
                return Err(CircuitError::NonPositive { name, value });
            }
        }
        if let Some(loss) = self.inductor_loss {
            if !(loss >= R::zero()) || !loss.is_finite() {
                return Err(CircuitError::NegativeLoss(loss));
            }
        }
        Ok(())
    }

    /// `a_j = 1/(ω²L_j)`, generalized to `1/(ω²L_j − iωR_L)` with series
    /// inductor loss.
    pub fn a(&self, l: R) -> Complex<R> {
        let w2l = self.omega * self.omega * l;
        match self.inductor_loss {
            Some(loss) if loss > R::zero() => cr(R::one()) / c(w2l, -self.omega * loss),
            _ => cr(R::one() / w2l),
        }
    }

    pub fn a1(&self) -> Complex<R> {
        self.a(self.l1)
    }

    pub fn a2(&self) -> Complex<R> {
        self.a(self.l2)
    }

    /// Diagonal entry `b = C − i/(Rω) − 2a₁ − 2a₂`.
    pub fn b(&self) -> Complex<R> {
        c(self.c, -R::one() / (self.r * self.omega))
            - (self.a1() + self.a2()) * cr(r::<R>(2.0))
    }
}

/// Which orientation of the printed phase pattern to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PhaseConvention {
    /// The matrix exactly as printed.
    #[default]
    AsPrinted,
    /// The transpose (every modulation phase sign flipped); provided because
    /// the printed phase signs run opposite to the lattice-model convention.
    Transposed,
}

/// The 4×4 circuit Laplacian at dimensionless modulation phases
/// `(k_x, k_y)`:
///
/// ```text
/// | b                  a2+a1 e^{-ikx}  0               a2+a1 e^{-iky} |
/// | a2+a1 e^{+ikx}     b               a2+a1 e^{-iky}  0              |
/// | 0                  a2+a1 e^{+iky}  b               a2+a1 e^{-ikx} |
/// | a2+a1 e^{+iky}     0               a2+a1 e^{+ikx}  b              |
/// ```
pub fn circuit_laplacian<R: Real>(
    circ: &CircuitParams<R>,
    kx: R,
    ky: R,
    convention: PhaseConvention,
) -> Result<CMat<R>, CircuitError<R>> {
    circ.validate()?;
    let (kx, ky) = match convention {
        PhaseConvention::AsPrinted => (kx, ky),
        PhaseConvention::Transposed => (-kx, -ky),
    };
    let zero = Complex::new(R::zero(), R::zero());
    let a1 = circ.a1();
    let a2 = circ.a2();
    let b = circ.b();
    let bond = |phase: R| a2 + a1 * cis(phase);
    Ok(CMat::from_rows(&[
        &[b, bond(-kx), zero, bond(-ky)],
        &[bond(kx), b, bond(-ky), zero],
        &[zero, bond(ky), b, bond(-kx)],
        &[bond(ky), zero, bond(kx), b],
    ]))
}

/// The frequency at which the imaginary part of the secular equation closes:
/// `ω* = sqrt(2 / ((L1 + L2) C))`.
pub fn resonance_frequency<R: Real>(l1: R, l2: R, cap: R) -> Result<R, CircuitError<R>> {
    for (name, value) in [("L1", l1), ("L2", l2), ("C", cap)] {
        if !(value > R::zero()) || !value.is_finite() {
            return Err(CircuitError::NonPositive { name, value });
        }
    }
    Ok((r::<R>(2.0) / ((l1 + l2) * cap)).sqrt())
}

/// The quoted closed-form branches at one modulation phase pair, evaluated
/// literally, in the fixed ascending label order
/// `[b0 − S₊, b0 − S₋, b0 + S₋, b0 + S₊]` with
/// `S_± = sqrt(1/(Rω)² + P ± sqrt(P² − Q²))` and `b0 = C − 2a₁ − 2a₂`.
#[derive(Clone, Copy, Debug)]
pub struct ClosedCircuitSpectrum<R: Real> {
    /// The four branch values; complex so that negative radicands are
    /// reported rather than hidden.
    pub branches: [Complex<R>; 4],
    pub b0: R,
    pub p: R,
    pub q_squared: R,
    /// True when `P² < Q²` (complex inner root).
    pub inner_complex: bool,
    /// True per branch when the outer radicand went negative.
    pub non_real: [bool; 4],
}

/// Evaluate the printed closed-form eigenvalue branches. The dense eigensolve
/// of the Laplacian is the oracle these are compared against; see the
/// discrepancy log for the quantified mismatch.
pub fn circuit_spectrum_closed<R: Real>(
    circ: &CircuitParams<R>,
    kx: R,
    ky: R,
) -> Result<ClosedCircuitSpectrum<R>, CircuitError<R>> {
    circ.validate()?;
    if circ.inductor_loss.map_or(false, |x| x > R::zero()) {
        return Err(CircuitError::LossNotSupported);
    }
    let two = r::<R>(2.0);
    let four = r::<R>(4.0);
    let a1 = circ.a1().re;
    let a2 = circ.a2().re;
    let b0 = circ.c - two * a1 - two * a2;
    let p = two * a1 * a1 + two * a1 * a2 * (kx.cos() + ky.cos()) + two * a2 * a2;
    // Transcribed as printed: the sum over j = x, y applies to the first
    // square; the product term is subtracted once.
    let sq = |kj: R| {
        let t = two * a1 * a1 + two * a1 * a2 * kj.cos() + two * a2 * a2;
        t * t
    };
    let q_squared = sq(kx) + sq(ky)
        - (a1 * a1 + two * a1 * a2 * ky.cos() + a2 * a2)
            * (two * a2 * a2 + four * a1 * a2 * kx.cos() + two * a1 * a1 * (two * kx).cos());
    let inner = (cr(p * p - q_squared)).sqrt();
    let inner_complex = p * p < q_squared;
    let rw = R::one() / (circ.r * circ.omega);
    let s_small = (cr(rw * rw + p) - inner).sqrt();
    let s_big = (cr(rw * rw + p) + inner).sqrt();
    let branches = [
        cr(b0) - s_big,
        cr(b0) - s_small,
        cr(b0) + s_small,
        cr(b0) + s_big,
    ];
    let tol = r::<R>(1e-12) * (R::one() + rw * rw + p.abs());
    let non_real = [
        s_big.im.abs() > tol,
        s_small.im.abs() > tol,
        s_small.im.abs() > tol,
        s_big.im.abs() > tol,
    ];
    Ok(ClosedCircuitSpectrum { branches, b0, p, q_squared, inner_complex, non_real })
}

/// One branch crossing found by a frequency sweep.
#[derive(Clone, Copy, Debug)]
pub struct Crossing<R: Real> {
    /// Branch index 0..4 in the ascending label order.
    pub branch: usize,
    /// Crossing frequency, bisected to relative 1e-6.
    pub omega: R,
}

/// Frequency sweep of the four closed-form branches at one resistance.
#[derive(Clone, Debug)]
pub struct TbrSweep<R: Real> {
    pub r: R,
    pub omegas: Vec<R>,
    /// Real parts of the four branches per sample.
    pub branches: Vec<[R; 4]>,
    /// Sign-change-bracketed zero crossings, bisected in ω.
    pub crossings: Vec<Crossing<R>>,
    /// The imaginary-part resonance `ω* = sqrt(2/((L1+L2)C))` — an
    /// independent condition, reported alongside the crossings.
    pub resonance_omega: R,
    /// Relative spread of the smallest crossing frequency over a small grid
    /// of modulation phases (zero when no crossing exists anywhere).
    pub k_sensitivity: R,
}

fn branch_values<R: Real>(circ: &CircuitParams<R>, omega: R, kx: R, ky: R) -> [R; 4] {
    let mut at = *circ;
    at.omega = omega;
    let s = circuit_spectrum_closed(&at, kx, ky).expect("validated params");
    [s.branches[0].re, s.branches[1].re, s.branches[2].re, s.branches[3].re]
}

fn bisect_crossing<R: Real>(
    circ: &CircuitParams<R>,
    branch: usize,
    mut lo: R,
    mut hi: R,
    kx: R,
    ky: R,
) -> R {
    let f = |w: R| branch_values(circ, w, kx, ky)[branch];
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = (lo + hi) / r::<R>(2.0);
        if (hi - lo) <= r::<R>(1e-6) * mid {
            return mid;
        }
        let fm = f(mid);
        if (fm >= R::zero()) == (flo >= R::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / r::<R>(2.0)
}

fn crossings_on_range<R: Real>(
    circ: &CircuitParams<R>,
    omega_range: (R, R),
    samples: usize,
    kx: R,
    ky: R,
) -> (Vec<R>, Vec<[R; 4]>, Vec<Crossing<R>>) {
    let (lo, hi) = omega_range;
    let step = (hi - lo) / r::<R>((samples - 1) as f64);
    let threads = resolve_threads(None);
    let omegas: Vec<R> = (0..samples).map(|i| lo + step * r::<R>(i as f64)).collect();
    let rows: Vec<[R; 4]> = par_map_indexed(samples, threads, |i| {
        branch_values(circ, omegas[i], kx, ky)
    });
    let mut crossings = Vec::new();
    for b in 0..4 {
        for i in 1..samples {
            let (f0, f1) = (rows[i - 1][b], rows[i][b]);
            if f0 == R::zero() {
                crossings.push(Crossing { branch: b, omega: omegas[i - 1] });
            } else if (f0 > R::zero()) != (f1 > R::zero()) && f1 != R::zero() {
                crossings
                    .push(Crossing { branch: b, omega: bisect_crossing(circ, b, omegas[i - 1], omegas[i], kx, ky) });
            }
        }
    }
    (omegas, rows, crossings)
}

/// Sweep the branch spectrum over a frequency range for each resistance and
/// locate the boundary-resonance zero crossings. The template's `omega` and
/// `r` fields are overridden per sample.
pub fn tbr_sweep<R: Real>(
    template: &CircuitParams<R>,
    resistances: &[R],
    omega_range: (R, R),
    samples: usize,
    kx: R,
    ky: R,
) -> Result<Vec<TbrSweep<R>>, CircuitError<R>> {
    template.validate()?;
    if samples < 64 {
        return Err(CircuitError::TooFewSamples { min: 64, got: samples });
    }
    let (lo, hi) = omega_range;
    if !(lo > R::zero()) || !(hi > lo) {
        return Err(CircuitError::BadRange { lo, hi });
    }
    let resonance = resonance_frequency(template.l1, template.l2, template.c)?;
    let mut out = Vec::with_capacity(resistances.len());
    for &res in resistances {
        let mut circ = *template;
        circ.r = res;
        let (omegas, rows, crossings) = crossings_on_range(&circ, omega_range, samples, kx, ky);

        // Sensitivity of the smallest crossing frequency to the modulation
        // phases, probed on a coarse 3×3 grid over [0, π]².
        let mut firsts: Vec<R> = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                let gx = R::PI() * r::<R>(i as f64) / r::<R>(2.0);
                let gy = R::PI() * r::<R>(j as f64) / r::<R>(2.0);
                let (_, _, cs) = crossings_on_range(&circ, omega_range, samples, gx, gy);
                if let Some(first) = cs.iter().map(|cr| cr.omega).reduce(R::min) {
                    firsts.push(first);
                }
            }
        }
        let k_sensitivity = if firsts.is_empty() {
            R::zero()
        } else {
            let lo = firsts.iter().cloned().fold(R::infinity(), R::min);
            let hi = firsts.iter().cloned().fold(R::zero(), R::max);
            (hi - lo) / ((hi + lo) / r::<R>(2.0))
        };
        out.push(TbrSweep {
            r: res,
            omegas,
            branches: rows,
            crossings,
            resonance_omega: resonance,
            k_sensitivity,
        });
    }
    Ok(out)
}

/// Two-point admittance summed over a modulation-phase grid.
#[derive(Clone, Copy, Debug)]
pub struct Admittance<R: Real> {
    /// `Y = (Σ_{k,α} |ζ_α(k,β) − ζ_α(k,β') e^{ik·r}|² / λ_{k,α})⁻¹`.
    pub y: Complex<R>,
    /// Number of (k, α) terms whose eigenvalue magnitude was floored.
    pub regularized_terms: usize,
    /// Grid points per side.
    pub grid: usize,
}

/// Admittance between node β of the reference cell and node β′ of the cell
/// offset by `r_offset` (in units of the modulation wavelengths), from the
/// eigen-decomposition of the Laplacian on an n×n phase grid. The k-sum is
/// averaged over the grid (per-unit-cell admittance) so the result converges
/// under grid refinement. Near-zero Laplacian eigenvalues are floored at
/// `1e-12·‖λ‖` and counted.
pub fn two_point_admittance<R: Real>(
    circ: &CircuitParams<R>,
    beta: usize,
    beta_prime: usize,
    r_offset: (i64, i64),
    n: usize,
    convention: PhaseConvention,
) -> Result<Admittance<R>, CircuitError<R>> {
    circ.validate()?;
    if beta >= 4 {
        return Err(CircuitError::BadNode(beta));
    }
    if beta_prime >= 4 {
        return Err(CircuitError::BadNode(beta_prime));
    }
    if beta == beta_prime && r_offset == (0, 0) {
        return Err(CircuitError::BadNodePair);
    }
    if n < 2 {
        return Err(CircuitError::TooFewSamples { min: 2, got: n });
    }
    let two_pi = r::<R>(2.0) * R::PI();
    let threads = resolve_threads(None);
    let per_point = par_map_indexed(n * n, threads, |idx| {
        let i = idx % n;
        let j = idx / n;
        let kx = two_pi * r::<R>(i as f64) / r::<R>(n as f64);
        let ky = two_pi * r::<R>(j as f64) / r::<R>(n as f64);
        let m = circuit_laplacian(circ, kx, ky, convention).expect("validated params");
        let e = eig::eigen(&m);
        let scale = e.values.iter().map(|v| v.norm()).fold(R::zero(), R::max).max(R::min_positive_value());
        let phase = cis(kx * r::<R>(r_offset.0 as f64) + ky * r::<R>(r_offset.1 as f64));
        let mut acc = Complex::new(R::zero(), R::zero());
        let mut floored = 0usize;
        for (alpha, lam) in e.values.iter().enumerate() {
            let diff = e.vectors[alpha][beta] - e.vectors[alpha][beta_prime] * phase;
            let w = diff.norm_sqr();
            let floor = r::<R>(1e-12) * scale;
            let lam = if lam.norm() < floor {
                floored += 1;
                if lam.norm() > R::zero() {
                    *lam / cr(lam.norm() / floor)
                } else {
                    cr(floor)
                }
            } else {
                *lam
            };
            acc = acc + cr(w) / lam;
        }
        (acc, floored)
    });
    let mut sum = Complex::new(R::zero(), R::zero());
    let mut regularized_terms = 0usize;
    for (acc, fl) in per_point {
        sum = sum + acc;
        regularized_terms += fl;
    }
    let mean = sum / cr(r::<R>((n * n) as f64));
    Ok(Admittance { y: cr(R::one()) / mean, regularized_terms, grid: n })
}
