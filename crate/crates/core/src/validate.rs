//! The discrepancy registry: every closed-form expression the crate carries
//! in [`FormulaSet::Literal`](crate::spectrum::FormulaSet) form — plus the
//! other transcribed formulas with known slips — is compared here against its
//! ground-truth oracle, and the deviation is reported with a name, a
//! description, and a tolerance. A flagged entry means the literal form
//! disagrees with the oracle; the paired `*-corrected` entry shows the
//! re-derived form passing the same measure.

use crate::circuit::{circuit_laplacian, circuit_spectrum_closed, CircuitError, CircuitParams, PhaseConvention};
use crate::eig::{self, matching_distance};
use crate::mat::vec_norm;
use crate::model::{build_bloch, ModelError, ModelParams, Momentum};
use crate::scalar::{r, Real};
use crate::spectrum::{
    closed_form_eigenvector, closed_form_energies, closed_form_pieces, j_oracle, FormulaSet,
};
use crate::topology::{
    entropy_density, fermi_derivative_neg, fermi_occupation, zak_phase, Direction, TopologyError,
    ZakMode,
};
use num_complex::Complex;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum ValidateError<R: Real> {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Circuit(#[from] CircuitError<R>),
    #[error(transparent)]
    Topology(#[from] TopologyError<R>),
    #[error("unknown check name `{0}`")]
    UnknownCheck(String),
}

/// One registry entry: a measured deviation of an implemented formula from
/// its oracle.
#[derive(Clone, Debug)]
pub struct DiscrepancyEntry<R: Real> {
    /// Stable machine-readable name.
    pub name: &'static str,
    /// What is compared against what, and where any slip sits.
    pub description: &'static str,
    /// Worst relative deviation measured over the sample set.
    pub magnitude: R,
    /// Deviations above this are flagged as mismatches.
    pub tolerance: R,
    /// Number of sample evaluations contributing to `magnitude`.
    pub samples: usize,
}

impl<R: Real> DiscrepancyEntry<R> {
    /// True when the measured deviation exceeds the tolerance.
    pub fn flagged(&self) -> bool {
        self.magnitude > self.tolerance
    }
}

/// Names of every check in registry order; `run_checks` accepts any subset.
pub const CHECK_NAMES: [&str; 10] = [
    "discriminant-literal",
    "discriminant-corrected",
    "spectrum-literal",
    "spectrum-corrected",
    "eigenvector-literal",
    "eigenvector-corrected",
    "circuit-closed-form",
    "hall-prefactor",
    "nernst-weight-sign",
    "wilson-band-sum",
];

/// Deterministic momentum samples: an off-symmetry grid plus the zone
/// center, scaled into the first zone for lattice constant `a`.
fn sample_momenta<R: Real>(a: R) -> Vec<Momentum<R>> {
    let vals = [-2.9, -1.3, -0.4, 0.7, 1.9, 2.6];
    let mut out = Vec::with_capacity(vals.len() * vals.len() + 1);
    for &x in &vals {
        for &y in &vals {
            out.push(Momentum { kx: r::<R>(x) / a, ky: r::<R>(y) / a });
        }
    }
    out.push(Momentum { kx: R::zero(), ky: R::zero() });
    out
}

fn hop_scale<R: Real>(p: &ModelParams<R>) -> R {
    let h = p.u.abs().max(p.t1.abs()).max(p.v.abs()).max(p.t2.abs());
    (R::one() + h) * (R::one() + h)
}

/// Worst relative deviation of the chosen discriminant formula from the
/// oracle value (the product of pairwise band separations reduced to the
/// inner radical).
fn discriminant_check<R: Real>(
    params: &ModelParams<R>,
    set: FormulaSet,
) -> Result<(R, usize), ValidateError<R>> {
    let mut worst = R::zero();
    let mut count = 0usize;
    let scale = hop_scale(params) * hop_scale(params);
    for k in sample_momenta(params.a) {
        let pieces = closed_form_pieces(params, k, set)?;
        let oracle = j_oracle(params, k);
        let diff = (Complex::new(pieces.j, R::zero()) - oracle).norm();
        worst = worst.max(diff / scale);
        count += 1;
    }
    Ok((worst, count))
}

/// Worst relative matching distance between the closed-form energy multiset
/// and the dense eigensolve.
fn spectrum_check<R: Real>(
    params: &ModelParams<R>,
    set: FormulaSet,
) -> Result<(R, usize), ValidateError<R>> {
    let mut worst = R::zero();
    let mut count = 0usize;
    let scale = hop_scale(params);
    for k in sample_momenta(params.a) {
        let closed = closed_form_energies(params, k, set)?;
        let e = eig::eigen(&build_bloch(params, k));
        worst = worst.max(matching_distance(&closed, &e.values) / scale);
        count += 1;
    }
    Ok((worst, count))
}

/// Worst relative eigen-equation residual `‖Hψ − Eψ‖∞ / ‖ψ‖` of the
/// closed-form eigenvectors (skipping vanishing/defective vectors, which the
/// exceptional-point machinery owns).
fn eigenvector_check<R: Real>(
    params: &ModelParams<R>,
    set: FormulaSet,
) -> Result<(R, usize), ValidateError<R>> {
    let mut worst = R::zero();
    let mut count = 0usize;
    let scale = hop_scale(params);
    for k in sample_momenta(params.a) {
        let energies = closed_form_energies(params, k, set)?;
        let h = build_bloch(params, k);
        for band in 0..4 {
            let comp = closed_form_eigenvector(params, k, band, energies[band], set)?;
            let norm = vec_norm(&comp.psi);
            if norm < r::<R>(1e-8) * scale {
                continue;
            }
            let hpsi = h.matvec(&comp.psi);
            let mut res = R::zero();
            for j in 0..4 {
                res = res.max((hpsi[j] - energies[band] * comp.psi[j]).norm());
            }
            worst = worst.max(res / (norm * scale));
            count += 1;
        }
    }
    Ok((worst, count))
}

/// Worst relative mismatch between the quoted closed-form circuit branches
/// and the sorted real parts of the dense Laplacian eigensolve.
fn circuit_check<R: Real>(circ: &CircuitParams<R>) -> Result<(R, usize), ValidateError<R>> {
    let mut worst = R::zero();
    let mut count = 0usize;
    let ks = [
        (R::zero(), R::zero()),
        (r::<R>(1.0), r::<R>(2.0)),
        (r::<R>(0.7), r::<R>(-1.3)),
        (r::<R>(-2.2), r::<R>(0.4)),
    ];
    for (kx, ky) in ks {
        let closed = circuit_spectrum_closed(circ, kx, ky)?;
        let m = circuit_laplacian(circ, kx, ky, PhaseConvention::AsPrinted)?;
        let e = eig::eigen(&m);
        let mut oracle: Vec<R> = e.values.iter().map(|v| v.re).collect();
        oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let scale = oracle.iter().fold(R::zero(), |m, x| m.max(x.abs())).max(R::min_positive_value());
        let mut diff = R::zero();
        for (o, c) in oracle.iter().zip(closed.branches.iter()) {
            diff = diff.max((*o - c.re).abs());
        }
        worst = worst.max(diff / scale);
        count += 1;
    }
    Ok((worst, count))
}

/// Ratio deviation of the printed Hall normalization `1/(2π)³` from the one
/// that reproduces `σ_AH = C·e²/h` for a filled Chern-`C` band, `1/(2π)`,
/// measured by integrating the unit function over the zone with each.
fn hall_prefactor_check<R: Real>() -> (R, usize) {
    let two_pi = r::<R>(2.0) * R::PI();
    let zone = two_pi * two_pi;
    let printed = zone / (two_pi * two_pi * two_pi);
    let correct = zone / two_pi;
    ((correct / printed - R::one()).abs(), 1)
}

/// The printed low-temperature Nernst weight is `+∂f/∂E`; the entropy-density
/// limit requires `−∂f/∂ε`. Both integrate over energy to a sign-definite
/// unit; the printed sign lands at −1, a deviation of 2. The entropy density
/// itself is also cross-checked against its Sommerfeld integral here.
fn nernst_weight_check<R: Real>() -> (R, usize) {
    let t = r::<R>(0.05);
    let mu = r::<R>(0.3);
    let n = 40001usize;
    let lo = mu - r::<R>(40.0) * t;
    let step = r::<R>(80.0) * t / r::<R>((n - 1) as f64);
    let mut printed_integral = R::zero();
    let mut entropy_integral = R::zero();
    for i in 0..n {
        let e = lo + step * r::<R>(i as f64);
        let w = if i == 0 || i == n - 1 { step / r::<R>(2.0) } else { step };
        // +∂f/∂E as printed = −(−∂f/∂ε).
        printed_integral = printed_integral - fermi_derivative_neg(e, mu, t) * w;
        entropy_integral = entropy_integral + entropy_density(e, mu, t) * w;
    }
    let sommerfeld = R::PI() * R::PI() * t / r::<R>(3.0);
    let dev = (printed_integral - R::one())
        .abs()
        .max((entropy_integral / sommerfeld - R::one()).abs() * r::<R>(1e-3));
    // Sanity anchor so a broken occupation function cannot silently pass.
    let f_mid = fermi_occupation(mu, mu, t);
    let dev = dev.max((f_mid - r::<R>(0.5)).abs());
    (dev, n)
}

/// Deviation of the literal band-summed Wilson loop from the nearest
/// quantized value in {0, π}, in units of π, at a point where the
/// determinant-mode loop is cleanly quantized.
fn wilson_band_sum_check<R: Real>() -> Result<(R, usize), ValidateError<R>> {
    let params = ModelParams::hermitian(r::<R>(0.5), r::<R>(0.5), R::one(), R::one(), R::zero());
    let det = zak_phase(&params, Direction::X, R::zero(), 256, ZakMode::Determinant)?;
    let sum = zak_phase(&params, Direction::X, R::zero(), 256, ZakMode::BandSum)?;
    let dist = |phi: R| {
        let pi = R::PI();
        let d0 = phi.min((r::<R>(2.0) * pi - phi).abs());
        let dpi = (phi - pi).abs();
        d0.min(dpi) / pi
    };
    // The determinant mode anchors the measure: if IT ever stopped
    // quantizing, the band-sum deviation would be meaningless.
    Ok((dist(sum.phase).max(dist(det.phase) * r::<R>(1e-6)), 2))
}

fn entry<R: Real>(
    name: &'static str,
    description: &'static str,
    tolerance: R,
    measured: (R, usize),
) -> DiscrepancyEntry<R> {
    DiscrepancyEntry { name, description, magnitude: measured.0, tolerance, samples: measured.1 }
}

/// Run a subset of the registry (names from [`CHECK_NAMES`]) against the
/// supplied lattice and circuit parameters.
pub fn run_checks<R: Real>(
    params: &ModelParams<R>,
    circ: &CircuitParams<R>,
    names: &[&str],
) -> Result<Vec<DiscrepancyEntry<R>>, ValidateError<R>> {
    let tight = r::<R>(1e-9);
    let mut out = Vec::with_capacity(names.len());
    for &requested in names {
        let Some(&name) = CHECK_NAMES.iter().find(|&&n| n == requested) else {
            return Err(ValidateError::UnknownCheck(requested.to_string()));
        };
        let e = match name {
            "discriminant-literal" => entry(
                name,
                "inner radical J, literal transcription, vs the oracle pairwise-separation \
                 product; the gain term, a missing cos factor, a spurious constant term and \
                 a dropped sine term all land here",
                tight,
                discriminant_check(params, FormulaSet::Literal)?,
            ),
            "discriminant-corrected" => entry(
                name,
                "inner radical J, re-derived form, vs the same oracle",
                tight,
                discriminant_check(params, FormulaSet::Corrected)?,
            ),
            "spectrum-literal" => entry(
                name,
                "closed-form energy multiset, literal transcription, vs the dense eigensolve",
                tight,
                spectrum_check(params, FormulaSet::Literal)?,
            ),
            "spectrum-corrected" => entry(
                name,
                "closed-form energy multiset, re-derived form, vs the dense eigensolve",
                tight,
                spectrum_check(params, FormulaSet::Corrected)?,
            ),
            "eigenvector-literal" => entry(
                name,
                "closed-form eigenvector eigen-equation residual, literal transcription; a \
                 sign slip in one cofactor term, a sine-for-cosine slip and a malformed \
                 fourth component land here",
                tight,
                eigenvector_check(params, FormulaSet::Literal)?,
            ),
            "eigenvector-corrected" => entry(
                name,
                "closed-form eigenvector eigen-equation residual, adjugate-derived form",
                tight,
                eigenvector_check(params, FormulaSet::Corrected)?,
            ),
            "circuit-closed-form" => entry(
                name,
                "quoted circuit branch formula vs the dense Laplacian eigensolve; the quoted \
                 form folds the resistive width into the radical instead of a constant \
                 imaginary shift",
                tight,
                circuit_check(circ)?,
            ),
            "hall-prefactor" => entry(
                name,
                "printed Hall zone normalization 1/(2pi)^3 vs the Chern sum rule's 1/(2pi)",
                r::<R>(1e-12),
                hall_prefactor_check(),
            ),
            "nernst-weight-sign" => entry(
                name,
                "printed low-temperature Nernst weight +df/dE vs the entropy-density limit \
                 -df/de (unit energy integral)",
                r::<R>(1e-6),
                nernst_weight_check(),
            ),
            "wilson-band-sum" => entry(
                name,
                "band-summed Wilson loop vs {0, pi} quantization where the determinant-mode \
                 loop quantizes cleanly",
                r::<R>(0.01),
                wilson_band_sum_check()?,
            ),
            _ => unreachable!("name comes from CHECK_NAMES"),
        };
        out.push(e);
    }
    Ok(out)
}

/// Run the complete registry.
pub fn run_all<R: Real>(
    params: &ModelParams<R>,
    circ: &CircuitParams<R>,
) -> Result<Vec<DiscrepancyEntry<R>>, ValidateError<R>> {
    run_checks(params, circ, &CHECK_NAMES)
}
