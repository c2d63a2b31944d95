//! Topological diagnostics: Wilson-loop Zak phases, Berry curvature by three
//! independent methods, the plaquette Chern integral, and the anomalous Hall
//! and Nernst responses.
//!
//! Curvature and transport are defined here only for the Hermitian (zero-gain)
//! model; requests with gain are rejected. Natural units `ħ = e = k_B = 1` are
//! used internally; `sigma_ah` is reported in units of `e²/h` and `alpha_xy`
//! in `k_B e/ħ` per unit cell.

use crate::eig;
use crate::mat::vdot;
use crate::model::{bloch_dkx, bloch_dky, build_bloch, ModelError, ModelParams, Momentum};
use crate::parallel::{par_map_indexed, resolve_threads};
use crate::scalar::{r, Real};
use num_complex::Complex;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum TopologyError<R: Real> {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("curvature and transport are defined only for the zero-gain model")]
    HermitianOnly,
    #[error("at least 16 loop segments required, got {0}")]
    TooFewSegments(usize),
    #[error("grid must have at least {min} points per side, got {got}")]
    GridTooSmall { min: usize, got: usize },
    #[error("band gap closes on the path near k = ({kx}, {ky}); separation {gap:e}")]
    GapClosure { kx: R, ky: R, gap: R },
    #[error("band set must be a non-empty strictly increasing subset of 0..4")]
    BandSetInvalid,
    #[error("operation requires the t1 = u, t2 = v coupling pattern")]
    CouplingPatternRequired,
    #[error("phase takes the same quantized value at both interval ends; nothing to bisect")]
    NoTransition,
    #[error("temperature must be positive, got {0}")]
    BadTemperature(R),
    #[error("closed-form derivatives break down at k = ({kx}, {ky}): {what}")]
    ClosedFormBreakdown { kx: R, ky: R, what: String },
}

/// Loop direction for the Zak phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    X,
    Y,
}

/// How the two occupied-band overlaps are compounded along the Wilson loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ZakMode {
    /// Non-Abelian Wilson loop: the product of 2×2 overlap-matrix
    /// determinants. Quantizes to {0, π} for inversion-symmetric parameters
    /// and is the default.
    #[default]
    Determinant,
    /// Product of band-summed diagonal overlaps, evaluated in the
    /// parallel-transport gauge (the only gauge in which this compounding is
    /// well defined). The result reflects the circular mean of the per-band
    /// loop phases rather than their sum, so it does not quantize; kept as an
    /// alternative reading.
    BandSum,
}

/// Result of one Wilson-loop evaluation.
#[derive(Clone, Copy, Debug)]
pub struct ZakResult<R: Real> {
    pub direction: Direction,
    /// The fixed transverse wavenumber of the loop.
    pub transverse_k: R,
    /// Loop phase in `[0, 2π)`.
    pub phase: R,
    /// Number of loop segments used.
    pub segments: usize,
    /// Occupied bands (indices into the (Re, Im)-sorted spectrum).
    pub band_set: [usize; 2],
    pub mode: ZakMode,
    /// Phase recomputed with half the segments — convergence metadata.
    pub phase_half: R,
    /// Smallest occupied/empty eigenvalue separation seen on the loop.
    pub min_separation: R,
}

/// Intracell position phases picked up by the periodic part of the Bloch
/// states when the loop wraps around the zone by one reciprocal vector:
/// component c maps to `exp(-i G · r_c)` with sublattice positions
/// r = (0,0), (1/2,0), (1/2,1/2), (0,1/2) in units of the lattice vectors.
fn closure_phases<R: Real>(direction: Direction) -> [Complex<R>; 4] {
    let one = Complex::new(R::one(), R::zero());
    let neg = Complex::new(-R::one(), R::zero());
    match direction {
        Direction::X => [one, neg, neg, one],
        Direction::Y => [one, one, neg, neg],
    }
}

/// Wilson-loop phase of a sequence of occupied-pair states.
///
/// `states[α]` holds the two occupied eigenvectors at loop point α; the loop
/// closes onto `states[0]` with the componentwise `closure` phases applied.
/// Returns the phase `-arg(∏ factors)` reduced to `[0, 2π)`. Exposed so the
/// gauge invariance of both modes can be tested with externally rotated
/// states.
pub fn wilson_phase<R: Real>(
    states: &[[Vec<Complex<R>>; 2]],
    closure: &[Complex<R>; 4],
    mode: ZakMode,
) -> R {
    let n = states.len();
    assert!(n >= 2, "need at least two loop points");
    let mut log_phase = R::zero();
    for alpha in 0..n {
        let cur = &states[alpha];
        let nxt_owned: [Vec<Complex<R>>; 2];
        let nxt = if alpha + 1 < n {
            &states[alpha + 1]
        } else {
            nxt_owned = [
                states[0][0].iter().zip(closure.iter()).map(|(v, ph)| *v * *ph).collect(),
                states[0][1].iter().zip(closure.iter()).map(|(v, ph)| *v * *ph).collect(),
            ];
            &nxt_owned
        };
        let m = [
            [vdot(&cur[0], &nxt[0]), vdot(&cur[0], &nxt[1])],
            [vdot(&cur[1], &nxt[0]), vdot(&cur[1], &nxt[1])],
        ];
        let factor = match mode {
            ZakMode::Determinant => m[0][0] * m[1][1] - m[0][1] * m[1][0],
            ZakMode::BandSum => m[0][0] + m[1][1],
        };
        // Accumulate the argument factor by factor: each segment phase is
        // small, so no unwrapping issue arises inside the loop.
        log_phase += factor.arg();
    }
    let two_pi = r::<R>(2.0) * R::PI();
    let mut phase = -log_phase;
    phase -= (phase / two_pi).floor() * two_pi;
    if phase >= two_pi {
        phase -= two_pi;
    }
    phase
}

/// Occupied pair (two smallest real parts) at each loop point, ordered by
/// maximal-overlap continuity with the previous point. Also returns the
/// smallest occupied/empty separation and where it occurred.
fn occupied_loop_states<R: Real>(
    params: &ModelParams<R>,
    direction: Direction,
    transverse_k: R,
    n: usize,
) -> Result<(Vec<[Vec<Complex<R>>; 2]>, R), TopologyError<R>> {
    let two_pi = r::<R>(2.0) * R::PI();
    let kpoint = |alpha: usize| {
        let along = -R::PI() / params.a
            + two_pi * r::<R>(alpha as f64) / (r::<R>(n as f64) * params.a);
        match direction {
            Direction::X => Momentum::new(along, transverse_k),
            Direction::Y => Momentum::new(transverse_k, along),
        }
    };
    let threads = resolve_threads(None);
    let eigs = par_map_indexed(n, threads, |alpha| {
        eig::eigen(&build_bloch(params, kpoint(alpha)))
    });

    let mut min_sep = R::infinity();
    let mut min_at = kpoint(0);
    let mut states: Vec<[Vec<Complex<R>>; 2]> = Vec::with_capacity(n);
    for (alpha, e) in eigs.iter().enumerate() {
        let scale = e.values.iter().map(|v| v.norm()).fold(R::zero(), R::max).max(R::one());
        let mut sep = R::infinity();
        for i in 0..2 {
            for j in 2..4 {
                sep = sep.min((e.values[i] - e.values[j]).norm());
            }
        }
        if sep < min_sep {
            min_sep = sep;
            min_at = kpoint(alpha);
        }
        if sep < r::<R>(1e-9) * scale {
            return Err(TopologyError::GapClosure { kx: min_at.kx, ky: min_at.ky, gap: sep });
        }
        let mut pair = [e.vectors[0].clone(), e.vectors[1].clone()];
        if let Some(prev) = states.last() {
            // Keep band identity along the loop: swap the pair when the
            // crossed overlaps dominate the direct ones.
            let direct = vdot(&prev[0], &pair[0]).norm() + vdot(&prev[1], &pair[1]).norm();
            let crossed = vdot(&prev[0], &pair[1]).norm() + vdot(&prev[1], &pair[0]).norm();
            if crossed > direct {
                pair.swap(0, 1);
            }
            // Parallel-transport gauge: rotate each state so its overlap with
            // the previous point is real positive. The determinant mode is
            // indifferent to this; the band-summed mode is defined only in a
            // smooth gauge, which this fixes canonically.
            for j in 0..2 {
                let ov = vdot(&prev[j], &pair[j]);
                if ov.norm() > R::epsilon() {
                    let ph = (ov / ov.norm()).conj();
                    for x in pair[j].iter_mut() {
                        *x = *x * ph;
                    }
                }
            }
        }
        states.push(pair);
    }
    Ok((states, min_sep))
}

/// Wilson-loop Zak phase along one zone direction at fixed transverse
/// wavenumber. `n` is the number of loop segments (≥ 16); the result carries
/// the phase recomputed at `n/2` segments as convergence metadata.
pub fn zak_phase<R: Real>(
    params: &ModelParams<R>,
    direction: Direction,
    transverse_k: R,
    n: usize,
    mode: ZakMode,
) -> Result<ZakResult<R>, TopologyError<R>> {
    params.validate()?;
    if n < 16 {
        return Err(TopologyError::TooFewSegments(n));
    }
    let closure = closure_phases::<R>(direction);
    let (states, min_separation) = occupied_loop_states(params, direction, transverse_k, n)?;
    let phase = wilson_phase(&states, &closure, mode);
    let (states_half, _) = occupied_loop_states(params, direction, transverse_k, n / 2)?;
    let phase_half = wilson_phase(&states_half, &closure, mode);
    Ok(ZakResult {
        direction,
        transverse_k,
        phase,
        segments: n,
        band_set: [0, 1],
        mode,
        phase_half,
        min_separation,
    })
}

/// One row of a Zak-phase sweep over the hopping ratio u/v.
#[derive(Clone, Copy, Debug)]
pub struct ZakRow<R: Real> {
    pub ratio: R,
    /// Phase along x at transverse k_y = 0, absent when the gap closed.
    pub phi_x: Option<R>,
    /// Phase along y at transverse k_x = 0, absent when the gap closed.
    pub phi_y: Option<R>,
}

/// Sweep the ratio u/v (with the t₁ = u, t₂ = v coupling pattern and fixed
/// v = t₂ taken from the template) and record both Zak components per ratio.
/// Rows where the gap closes are flagged by `None` entries rather than
/// aborting the sweep.
pub fn zak_map<R: Real>(
    template: &ModelParams<R>,
    ratio_range: (R, R),
    samples: usize,
    n: usize,
    mode: ZakMode,
) -> Result<Vec<ZakRow<R>>, TopologyError<R>> {
    template.validate()?;
    require_coupling_pattern(template)?;
    if samples < 2 {
        return Err(TopologyError::GridTooSmall { min: 2, got: samples });
    }
    let (lo, hi) = ratio_range;
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = r::<R>(i as f64) / r::<R>((samples - 1) as f64);
        let ratio = lo + (hi - lo) * t;
        let p = params_at_ratio(template, ratio);
        let phi_x = zak_phase(&p, Direction::X, R::zero(), n, mode).ok().map(|z| z.phase);
        let phi_y = zak_phase(&p, Direction::Y, R::zero(), n, mode).ok().map(|z| z.phase);
        rows.push(ZakRow { ratio, phi_x, phi_y });
    }
    Ok(rows)
}

fn require_coupling_pattern<R: Real>(p: &ModelParams<R>) -> Result<(), TopologyError<R>> {
    let tol = r::<R>(1e-12) * (R::one() + p.u.abs() + p.v.abs());
    if (p.t1 - p.u).abs() > tol || (p.t2 - p.v).abs() > tol {
        return Err(TopologyError::CouplingPatternRequired);
    }
    Ok(())
}

fn params_at_ratio<R: Real>(template: &ModelParams<R>, ratio: R) -> ModelParams<R> {
    let mut p = *template;
    p.u = ratio * template.v;
    p.t1 = p.u;
    p.t2 = template.v;
    p
}

fn phase_is_pi<R: Real>(phase: R) -> bool {
    let two_pi = r::<R>(2.0) * R::PI();
    let to_pi = (phase - R::PI()).abs();
    let to_zero = phase.min(two_pi - phase);
    to_pi < to_zero
}

/// Bisect the u/v ratio at which the given Zak component jumps between π and
/// 0. Errors when both interval ends quantize to the same value.
pub fn transition_ratio<R: Real>(
    template: &ModelParams<R>,
    direction: Direction,
    ratio_range: (R, R),
    n: usize,
    mode: ZakMode,
) -> Result<R, TopologyError<R>> {
    template.validate()?;
    require_coupling_pattern(template)?;
    let eval = |ratio: R| -> Result<bool, TopologyError<R>> {
        let p = params_at_ratio(template, ratio);
        Ok(phase_is_pi(zak_phase(&p, direction, R::zero(), n, mode)?.phase))
    };
    let (mut lo, mut hi) = ratio_range;
    let at_lo = eval(lo)?;
    let at_hi = eval(hi)?;
    if at_lo == at_hi {
        return Err(TopologyError::NoTransition);
    }
    for _ in 0..60 {
        let mid = (lo + hi) / r::<R>(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        // A gap closure exactly at the transition is expected; treat an
        // unresolvable midpoint as belonging to neither side and nudge it.
        match eval(mid) {
            Ok(side) if side == at_lo => lo = mid,
            Ok(_) => hi = mid,
            Err(_) => {
                let nudged = mid + (hi - lo) * r::<R>(1e-3);
                match eval(nudged) {
                    Ok(side) if side == at_lo => lo = nudged,
                    Ok(_) => hi = nudged,
                    // The gap closes on both probes: the transition (where the
                    // bulk gap does close) has been bracketed to within the
                    // nudge; report the midpoint.
                    Err(_) => return Ok(mid),
                }
            }
        }
        if hi - lo < r::<R>(1e-9) {
            break;
        }
    }
    Ok((lo + hi) / r::<R>(2.0))
}

// ---------------------------------------------------------------------------
// Berry curvature
// ---------------------------------------------------------------------------

/// Which evaluation of the curvature to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurvatureMethod {
    /// Sum-over-states formula with analytic ∂H/∂k (the reference method).
    Kubo,
    /// Gauge-invariant four-overlap plaquette at a small step.
    FiniteDifference,
    /// Derivatives of the normalized closed-form eigenvector components,
    /// evaluated with forward-mode dual numbers (no finite differencing).
    ClosedFormDerivatives,
}

/// A curvature value plus a flag marking degeneracy regularization.
#[derive(Clone, Copy, Debug)]
pub struct Curvature<R: Real> {
    pub value: R,
    /// True when an energy denominator was floored (near-degenerate k).
    pub regularized: bool,
}

fn require_hermitian<R: Real>(params: &ModelParams<R>) -> Result<(), TopologyError<R>> {
    if params.gains.iter().any(|g| *g != R::zero()) {
        return Err(TopologyError::HermitianOnly);
    }
    Ok(())
}

/// z-component of the Berry curvature of one band (0..4, (Re, Im)-sorted).
/// Defined only for the zero-gain model.
pub fn berry_curvature<R: Real>(
    params: &ModelParams<R>,
    k: Momentum<R>,
    band: usize,
    method: CurvatureMethod,
) -> Result<Curvature<R>, TopologyError<R>> {
    params.validate()?;
    require_hermitian(params)?;
    assert!(band < 4, "band index out of range");
    match method {
        CurvatureMethod::Kubo => Ok(kubo_all_bands(params, k)[band]),
        CurvatureMethod::FiniteDifference => Ok(plaquette_curvature(params, k, band)),
        CurvatureMethod::ClosedFormDerivatives => closed_form_curvature(params, k, band),
    }
}

/// Kubo curvature of all four bands at one momentum, with floored energy
/// denominators near degeneracies.
fn kubo_all_bands<R: Real>(params: &ModelParams<R>, k: Momentum<R>) -> [Curvature<R>; 4] {
    let e = eig::eigen(&build_bloch(params, k));
    let dx = bloch_dkx(params, k);
    let dy = bloch_dky(params, k);
    let bandwidth = (e.values[3].re - e.values[0].re).abs().max(R::one());
    let floor = r::<R>(1e-6) * bandwidth;
    let floor2 = floor * floor;
    let mut out = [Curvature { value: R::zero(), regularized: false }; 4];
    // Precompute the matrix elements once.
    let mut mx = [[Complex::new(R::zero(), R::zero()); 4]; 4];
    let mut my = [[Complex::new(R::zero(), R::zero()); 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            mx[a][b] = vdot(&e.vectors[a], &dx.matvec(&e.vectors[b]));
            my[a][b] = vdot(&e.vectors[a], &dy.matvec(&e.vectors[b]));
        }
    }
    for alpha in 0..4 {
        let mut acc = R::zero();
        let mut flagged = false;
        for beta in 0..4 {
            if beta == alpha {
                continue;
            }
            let de = e.values[alpha].re - e.values[beta].re;
            let mut den = de * de;
            if den < floor2 {
                den = floor2;
                flagged = true;
            }
            acc += (mx[alpha][beta] * my[beta][alpha]).im / den;
        }
        out[alpha] = Curvature { value: -r::<R>(2.0) * acc, regularized: flagged };
    }
    out
}

/// Gauge-invariant plaquette curvature at step `h` in k.
fn plaquette_curvature<R: Real>(
    params: &ModelParams<R>,
    k: Momentum<R>,
    band: usize,
) -> Curvature<R> {
    let h = r::<R>(1e-4) / params.a;
    let at = |kx: R, ky: R| {
        let e = eig::eigen(&build_bloch(params, Momentum::new(kx, ky)));
        (e.vectors[band].clone(), e.has_degeneracy())
    };
    let (v00, f0) = at(k.kx, k.ky);
    let (v10, f1) = at(k.kx + h, k.ky);
    let (v11, f2) = at(k.kx + h, k.ky + h);
    let (v01, f3) = at(k.kx, k.ky + h);
    let loop_product =
        vdot(&v00, &v10) * vdot(&v10, &v11) * vdot(&v11, &v01) * vdot(&v01, &v00);
    Curvature {
        value: -loop_product.arg() / (h * h),
        regularized: f0 || f1 || f2 || f3,
    }
}

// --- forward-mode dual numbers for the closed-form derivative method -------

/// Real number carrying first derivatives with respect to kx and ky.
#[derive(Clone, Copy, Debug)]
struct Dual<R: Real> {
    v: R,
    dx: R,
    dy: R,
}

impl<R: Real> Dual<R> {
    fn con(v: R) -> Self {
        Self { v, dx: R::zero(), dy: R::zero() }
    }
    fn add(self, o: Self) -> Self {
        Self { v: self.v + o.v, dx: self.dx + o.dx, dy: self.dy + o.dy }
    }
    fn sub(self, o: Self) -> Self {
        Self { v: self.v - o.v, dx: self.dx - o.dx, dy: self.dy - o.dy }
    }
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
        }
    }
    fn neg(self) -> Self {
        Self { v: -self.v, dx: -self.dx, dy: -self.dy }
    }
    fn scale(self, c: R) -> Self {
        Self { v: self.v * c, dx: self.dx * c, dy: self.dy * c }
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let inv = R::one() / (r::<R>(2.0) * s);
        Self { v: s, dx: self.dx * inv, dy: self.dy * inv }
    }
    fn sin(self) -> Self {
        let c = self.v.cos();
        Self { v: self.v.sin(), dx: self.dx * c, dy: self.dy * c }
    }
    fn cos(self) -> Self {
        let s = -self.v.sin();
        Self { v: self.v.cos(), dx: self.dx * s, dy: self.dy * s }
    }
}

/// Complex number over duals.
#[derive(Clone, Copy, Debug)]
struct CDual<R: Real> {
    re: Dual<R>,
    im: Dual<R>,
}

impl<R: Real> CDual<R> {
    fn real(d: Dual<R>) -> Self {
        Self { re: d, im: Dual::con(R::zero()) }
    }
    fn add(self, o: Self) -> Self {
        Self { re: self.re.add(o.re), im: self.im.add(o.im) }
    }
    fn sub(self, o: Self) -> Self {
        Self { re: self.re.sub(o.re), im: self.im.sub(o.im) }
    }
    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }
    fn conj(self) -> Self {
        Self { re: self.re, im: self.im.neg() }
    }
    fn norm_sqr(self) -> Dual<R> {
        self.re.mul(self.re).add(self.im.mul(self.im))
    }
}

/// Curvature from the analytic derivatives of the normalized closed-form
/// eigenvector components: with `u_j = N^{-1/2}(Δ_j0 + iΔ_j1)`,
/// `Ω = -2 Σ_j (P_jx Q_jy − Q_jx P_jy)` where `P_j·`/`Q_j·` are the
/// derivatives of the normalized real/imaginary parts. Derivatives come from
/// forward-mode duals, not finite differences.
fn closed_form_curvature<R: Real>(
    params: &ModelParams<R>,
    k: Momentum<R>,
    band: usize,
) -> Result<Curvature<R>, TopologyError<R>> {
    let breakdown = |what: &str| TopologyError::ClosedFormBreakdown {
        kx: k.kx,
        ky: k.ky,
        what: what.into(),
    };
    let (u, t1, v, t2) = (params.u, params.t1, params.v, params.t2);
    let akx = Dual { v: params.a * k.kx, dx: params.a, dy: R::zero() };
    let aky = Dual { v: params.a * k.ky, dx: R::zero(), dy: params.a };

    let p = CDual { re: Dual::con(t2).add(aky.cos().scale(v)), im: aky.sin().scale(-v) };
    let s = CDual { re: Dual::con(u).add(akx.cos().scale(t1)), im: akx.sin().scale(t1) };
    let q = CDual { re: Dual::con(v).add(aky.cos().scale(t2)), im: aky.sin().scale(t2) };
    let rr = CDual { re: Dual::con(t1).add(akx.cos().scale(u)), im: akx.sin().scale(u) };
    let p2 = p.norm_sqr();
    let s2 = s.norm_sqr();
    let q2 = q.norm_sqr();

    // Zero-gain closed forms: A = |p|² + |s|², F₁ + iF₂ = q·r·s,
    // J = 2|p|²|s|² + 2(t₂ + v cos aky)F₁ − 2(v sin aky)F₂.
    let a_piece = p2.add(s2);
    let qrs = q.mul(rr).mul(s);
    let j = p2
        .mul(s2)
        .scale(r::<R>(2.0))
        .add(Dual::con(t2).add(aky.cos().scale(v)).mul(qrs.re).scale(r::<R>(2.0)))
        .sub(aky.sin().scale(v).mul(qrs.im).scale(r::<R>(2.0)));
    if j.v <= R::zero() {
        return Err(breakdown("the inner discriminant is not positive (band touching)"));
    }
    let sqrt_j = j.sqrt();
    let inner = a_piece.sub(sqrt_j);
    if inner.v <= R::zero() {
        return Err(breakdown("the middle bands touch (A = sqrt(J))"));
    }
    let outer = a_piece.add(sqrt_j);

    // Unshifted energies in ascending order for the zero-gain model.
    let e = match band {
        0 => outer.sqrt().neg(),
        1 => inner.sqrt().neg(),
        2 => inner.sqrt(),
        _ => outer.sqrt(),
    };

    // Zero-gain eigenvector components (adjugate column).
    let e2 = CDual::real(e.mul(e));
    let ec = CDual::real(e);
    let psi = [
        p.mul(e2).sub(p.mul(CDual::real(q2))).add(qrs),
        ec.mul(p.mul(s.conj()).add(q.mul(rr))),
        rr.mul(e2).add(p.mul(q.conj()).mul(s.conj())).sub(rr.mul(CDual::real(s2))),
        ec.mul(e2.sub(CDual::real(q2)).sub(CDual::real(s2))),
    ];

    let mut n = Dual::con(R::zero());
    for ps in &psi {
        n = n.add(ps.re.mul(ps.re)).add(ps.im.mul(ps.im));
    }
    let hop = u.abs().max(t1.abs()).max(v.abs()).max(t2.abs()).max(e.v.abs());
    let scale6 = (R::one() + hop).powi(6);
    if n.v < r::<R>(1e-10) * scale6 {
        return Err(breakdown("the closed-form eigenvector vanishes at this momentum"));
    }

    // Derivatives of the normalized components via the quotient rule:
    // d(N^{-1/2} Δ) = N^{-1/2} dΔ − (1/2) N^{-3/2} dN · Δ.
    let n_m12 = R::one() / n.v.sqrt();
    let n_m32 = n_m12 / n.v;
    let half = r::<R>(0.5);
    let mut omega = R::zero();
    for ps in &psi {
        let pjx = n_m12 * ps.re.dx - half * n_m32 * n.dx * ps.re.v;
        let pjy = n_m12 * ps.re.dy - half * n_m32 * n.dy * ps.re.v;
        let qjx = n_m12 * ps.im.dx - half * n_m32 * n.dx * ps.im.v;
        let qjy = n_m12 * ps.im.dy - half * n_m32 * n.dy * ps.im.v;
        omega += pjx * qjy - qjx * pjy;
    }
    Ok(Curvature { value: -r::<R>(2.0) * omega, regularized: false })
}

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

/// Which weighting produced `alpha_xy`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransportMode {
    /// Zero-temperature step occupation; `alpha_xy` not evaluated (zero).
    HallZeroT,
    /// Low-temperature expansion: `α_xy = (π²T/3) Σ_n ∫ Ω (−∂f/∂ε) d²k/(2π)²`,
    /// linear in T by construction.
    NernstLowT,
    /// Entropy-density weighting `α_xy = Σ_n ∫ Ω s(E_n) d²k/(2π)²`.
    NernstFiniteT,
}

/// Anomalous transport coefficients from a Berry-curvature grid sum.
#[derive(Clone, Copy, Debug)]
pub struct TransportResult<R: Real> {
    /// Anomalous Hall conductivity in units of e²/h.
    pub sigma_ah: R,
    /// Anomalous Nernst coefficient in natural units (k_B e/ħ per unit cell).
    pub alpha_xy: R,
    pub mu: R,
    pub temperature: R,
    /// Grid points per side.
    pub grid: usize,
    pub mode: TransportMode,
    /// Fraction of grid points dropped because curvature needed degeneracy
    /// regularization there.
    pub excluded_fraction: R,
    /// Smallest distance from any band energy to μ seen on the grid; a tiny
    /// value warns that μ sits at a band edge.
    pub mu_band_distance: R,
}

/// Fermi-Dirac occupation, overflow safe. `t = 0` means a sharp step.
pub fn fermi_occupation<R: Real>(energy: R, mu: R, t: R) -> R {
    if t <= R::zero() {
        return if energy < mu {
            R::one()
        } else if energy > mu {
            R::zero()
        } else {
            r::<R>(0.5)
        };
    }
    let x = (energy - mu) / t;
    let cap = r::<R>(50.0);
    if x > cap {
        R::zero()
    } else if x < -cap {
        R::one()
    } else {
        R::one() / (R::one() + x.exp())
    }
}

/// `−∂f/∂ε` of the Fermi-Dirac distribution, overflow safe.
pub fn fermi_derivative_neg<R: Real>(energy: R, mu: R, t: R) -> R {
    let x = (energy - mu) / t;
    let cap = r::<R>(100.0);
    if x.abs() > cap {
        return R::zero();
    }
    let sech = R::one() / ((x / r::<R>(2.0)).cosh());
    sech * sech / (r::<R>(4.0) * t)
}

/// `log(1 + exp(z))` without overflow.
pub fn softplus<R: Real>(z: R) -> R {
    if z > R::zero() {
        z + z.neg().exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Entropy density `s(ε) = ((ε−μ)/T) f(ε) + log(1 + e^{(μ−ε)/T})` in units
/// of k_B, overflow safe.
pub fn entropy_density<R: Real>(energy: R, mu: R, t: R) -> R {
    let w = (energy - mu) / t;
    w * fermi_occupation(energy, mu, t) + softplus(-w)
}

fn transport_engine<R: Real>(
    params: &ModelParams<R>,
    mu: R,
    t: R,
    n: usize,
    mode: TransportMode,
) -> Result<TransportResult<R>, TopologyError<R>> {
    params.validate()?;
    require_hermitian(params)?;
    if n < 32 {
        return Err(TopologyError::GridTooSmall { min: 32, got: n });
    }
    let two_pi = r::<R>(2.0) * R::PI();
    let dk = two_pi / (r::<R>(n as f64) * params.a);
    let threads = resolve_threads(None);
    // Midpoint grid over the full zone, row-major, x fastest.
    let per_point = par_map_indexed(n * n, threads, |idx| {
        let i = idx % n;
        let j = idx / n;
        let kx = -R::PI() / params.a + dk * (r::<R>(i as f64) + r::<R>(0.5));
        let ky = -R::PI() / params.a + dk * (r::<R>(j as f64) + r::<R>(0.5));
        let k = Momentum::new(kx, ky);
        let omegas = kubo_all_bands(params, k);
        let e = eig::eigen(&build_bloch(params, k));
        let energies = [e.values[0].re, e.values[1].re, e.values[2].re, e.values[3].re];
        (omegas, energies)
    });

    let cell = dk * dk;
    let mut sigma = R::zero();
    let mut alpha = R::zero();
    let mut excluded = 0usize;
    let mut mu_dist = R::infinity();
    for (omegas, energies) in &per_point {
        for en in energies {
            mu_dist = mu_dist.min((*en - mu).abs());
        }
        if omegas.iter().any(|o| o.regularized) {
            excluded += 1;
            continue;
        }
        for b in 0..4 {
            let omega = omegas[b].value;
            let en = energies[b];
            sigma += fermi_occupation(en, mu, t) * omega;
            match mode {
                TransportMode::HallZeroT => {}
                TransportMode::NernstLowT => {
                    alpha += fermi_derivative_neg(en, mu, t) * omega;
                }
                TransportMode::NernstFiniteT => {
                    alpha += entropy_density(en, mu, t) * omega;
                }
            }
        }
    }
    sigma = sigma * cell / two_pi;
    alpha = match mode {
        TransportMode::HallZeroT => R::zero(),
        TransportMode::NernstLowT => {
            alpha * cell / (two_pi * two_pi) * (R::PI() * R::PI() * t / r::<R>(3.0))
        }
        TransportMode::NernstFiniteT => alpha * cell / (two_pi * two_pi),
    };
    Ok(TransportResult {
        sigma_ah: sigma,
        alpha_xy: alpha,
        mu,
        temperature: t,
        grid: n,
        mode,
        excluded_fraction: r::<R>(excluded as f64) / r::<R>((n * n) as f64),
        mu_band_distance: mu_dist,
    })
}

/// Anomalous Hall conductivity `σ_AH = Σ_α (1/2π) ∫ f(E_α − μ) Ω_α d²k` in
/// units of e²/h, on an n×n midpoint grid. `temperature = None` uses the
/// zero-temperature step occupation.
pub fn anomalous_hall<R: Real>(
    params: &ModelParams<R>,
    mu: R,
    n: usize,
    temperature: Option<R>,
) -> Result<TransportResult<R>, TopologyError<R>> {
    transport_engine(params, mu, temperature.unwrap_or(R::zero()), n, TransportMode::HallZeroT)
}

/// Low- or finite-temperature anomalous Nernst coefficient on an n×n midpoint
/// grid; also fills `sigma_ah` with the Fermi-weighted Hall sum at the same
/// temperature.
pub fn nernst<R: Real>(
    params: &ModelParams<R>,
    mu: R,
    temperature: R,
    n: usize,
    mode: TransportMode,
) -> Result<TransportResult<R>, TopologyError<R>> {
    if temperature <= R::zero() {
        return Err(TopologyError::BadTemperature(temperature));
    }
    let mode = match mode {
        TransportMode::HallZeroT => TransportMode::NernstLowT,
        m => m,
    };
    transport_engine(params, mu, temperature, n, mode)
}

// ---------------------------------------------------------------------------
// Chern number
// ---------------------------------------------------------------------------

/// Plaquette Chern integral of a band set.
#[derive(Clone, Copy, Debug)]
pub struct ChernResult<R: Real> {
    /// The raw plaquette sum divided by 2π.
    pub value: R,
    /// Distance of `value` to the nearest integer.
    pub integer_distance: R,
    /// Grid points per side.
    pub grid: usize,
    /// Smallest separation between the band set and its complement on the grid.
    pub min_gap: R,
}

/// Plaquette (four-overlap) field-strength sum over a cyclic state grid.
///
/// `states[j][i]` holds the selected-band eigenvectors at grid point
/// `(kx_i, ky_j)`; the grid wraps with the componentwise `closure_x` /
/// `closure_y` phases. Exposed so gauge invariance can be tested with
/// externally rotated states. Returns the total field strength divided by 2π.
pub fn plaquette_sum<R: Real>(
    states: &[Vec<Vec<Vec<Complex<R>>>>],
    closure_x: &[Complex<R>; 4],
    closure_y: &[Complex<R>; 4],
) -> R {
    let n = states.len();
    let m = states[0][0].len(); // bands in the set
    let shift = |vs: &Vec<Vec<Complex<R>>>, ph: &[Complex<R>; 4]| -> Vec<Vec<Complex<R>>> {
        vs.iter()
            .map(|v| v.iter().zip(ph.iter()).map(|(x, p)| *x * *p).collect())
            .collect()
    };
    let det_overlap = |a: &Vec<Vec<Complex<R>>>, b: &Vec<Vec<Complex<R>>>| -> Complex<R> {
        match m {
            1 => vdot(&a[0], &b[0]),
            2 => {
                vdot(&a[0], &b[0]) * vdot(&a[1], &b[1])
                    - vdot(&a[0], &b[1]) * vdot(&a[1], &b[0])
            }
            _ => {
                // General small-m determinant by Laplace expansion is
                // overkill here; the model has at most 4 bands, so fall back
                // to 3x3 explicitly.
                let o = |i: usize, j: usize| vdot(&a[i], &b[j]);
                o(0, 0) * (o(1, 1) * o(2, 2) - o(1, 2) * o(2, 1))
                    - o(0, 1) * (o(1, 0) * o(2, 2) - o(1, 2) * o(2, 0))
                    + o(0, 2) * (o(1, 0) * o(2, 1) - o(1, 1) * o(2, 0))
            }
        }
    };
    let at = |i: usize, j: usize| -> Vec<Vec<Complex<R>>> {
        let (iw, jw) = (i % n, j % n);
        let mut vs = states[jw][iw].clone();
        if i == n {
            vs = shift(&vs, closure_x);
        }
        if j == n {
            vs = shift(&vs, closure_y);
        }
        vs
    };
    let two_pi = r::<R>(2.0) * R::PI();
    let mut total = R::zero();
    for j in 0..n {
        for i in 0..n {
            let v00 = at(i, j);
            let v10 = at(i + 1, j);
            let v11 = at(i + 1, j + 1);
            let v01 = at(i, j + 1);
            let loop_product = det_overlap(&v00, &v10)
                * det_overlap(&v10, &v11)
                * det_overlap(&v11, &v01)
                * det_overlap(&v01, &v00);
            total += -loop_product.arg();
        }
    }
    total / two_pi
}

/// Chern integral of a band set on an n×n grid via the gauge-invariant
/// plaquette method. Errors when the set is not gapped from its complement
/// everywhere on the grid.
pub fn chern_number<R: Real>(
    params: &ModelParams<R>,
    bands: &[usize],
    n: usize,
) -> Result<ChernResult<R>, TopologyError<R>> {
    params.validate()?;
    require_hermitian(params)?;
    if n < 8 {
        return Err(TopologyError::GridTooSmall { min: 8, got: n });
    }
    if bands.is_empty()
        || bands.len() > 3
        || bands.windows(2).any(|w| w[1] <= w[0])
        || bands.iter().any(|&b| b >= 4)
    {
        return Err(TopologyError::BandSetInvalid);
    }
    let complement: Vec<usize> = (0..4).filter(|b| !bands.contains(b)).collect();
    let two_pi = r::<R>(2.0) * R::PI();
    let dk = two_pi / (r::<R>(n as f64) * params.a);
    let threads = resolve_threads(None);
    let kpt = |i: usize, j: usize| {
        Momentum::new(
            -R::PI() / params.a + dk * r::<R>(i as f64),
            -R::PI() / params.a + dk * r::<R>(j as f64),
        )
    };
    let solved = par_map_indexed(n * n, threads, |idx| {
        let i = idx % n;
        let j = idx / n;
        let e = eig::eigen(&build_bloch(params, kpt(i, j)));
        let vs: Vec<Vec<Complex<R>>> = bands.iter().map(|&b| e.vectors[b].clone()).collect();
        let mut gap = R::infinity();
        for &b in bands {
            for &c in &complement {
                gap = gap.min((e.values[b] - e.values[c]).norm());
            }
        }
        (vs, gap)
    });
    let mut min_gap = R::infinity();
    let mut min_at = (0usize, 0usize);
    for (idx, (_, gap)) in solved.iter().enumerate() {
        if *gap < min_gap {
            min_gap = *gap;
            min_at = (idx % n, idx / n);
        }
    }
    if min_gap < r::<R>(1e-8) {
        let k = kpt(min_at.0, min_at.1);
        return Err(TopologyError::GapClosure { kx: k.kx, ky: k.ky, gap: min_gap });
    }
    let mut states: Vec<Vec<Vec<Vec<Complex<R>>>>> = Vec::with_capacity(n);
    let mut it = solved.into_iter();
    for _ in 0..n {
        let mut row = Vec::with_capacity(n);
        for _ in 0..n {
            row.push(it.next().expect("grid sized").0);
        }
        states.push(row);
    }
    let value = plaquette_sum(&states, &closure_phases(Direction::X), &closure_phases(Direction::Y));
    let nearest = value.round();
    Ok(ChernResult { value, integer_distance: (value - nearest).abs(), grid: n, min_gap })
}
