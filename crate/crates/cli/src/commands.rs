//! The ten subcommands: each consumes the typed config, runs the relevant
//! core operations, writes CSV tables plus a JSON summary, and reports
//! whether validation mismatches were found.

use crate::config::RunConfig;
use crate::output::{write_summary, Cell, Provenance, Table};
use anyhow::{anyhow, Result};
use serde_json::json;
use ssh2d_core::circuit::{tbr_sweep, two_point_admittance};
use ssh2d_core::exceptional::{
    detect_ep, scan_discriminant_zeros, self_orthogonality, DegeneracyClass, EpOptions, KRect,
};
use ssh2d_core::model::{
    bloch_consistency_report, build_real_space, spectral_phs_distance, symmetry_residuals,
    Boundary, Momentum,
};
use ssh2d_core::spectrum::{fermi_gap, kx_line, oracle_bands, closed_form_pieces, FormulaSet};
use ssh2d_core::topology::{
    anomalous_hall, berry_curvature, chern_number, nernst, transition_ratio, zak_map, Direction,
    ZakMode,
};
use ssh2d_core::{eig, validate};
use std::f64::consts::PI;
use std::path::Path;

/// Distinguishes invalid-config failures (exit 1) from numerical failures
/// (exit 2).
pub enum CommandError {
    Config(anyhow::Error),
    Numeric(anyhow::Error),
}

fn cfg_err<E: std::fmt::Display>(e: E) -> CommandError {
    CommandError::Config(anyhow!("{e}"))
}

fn num_err<E: std::fmt::Display>(e: E) -> CommandError {
    CommandError::Numeric(anyhow!("{e}"))
}

/// Result of a command: the JSON summary plus whether `validate` found
/// mismatches (drives exit code 3).
pub struct Outcome {
    pub summary: serde_json::Value,
    pub mismatches: bool,
}

fn ok(summary: serde_json::Value) -> Result<Outcome, CommandError> {
    Ok(Outcome { summary, mismatches: false })
}

fn write(table: &Table, dir: &Path, prov: &Provenance) -> Result<(), CommandError> {
    table.write(dir, prov).map_err(CommandError::Numeric)?;
    Ok(())
}

pub fn run(
    cfg: &RunConfig,
    dir: &Path,
    prov: &Provenance,
) -> Result<Outcome, CommandError> {
    match cfg.command.as_str() {
        "bands" => bands(cfg, dir, prov),
        "symmetry" => symmetry(cfg, dir, prov),
        "ep-scan" => ep_scan(cfg, dir, prov),
        "zak" => zak(cfg, dir, prov),
        "berry" => berry(cfg, dir, prov),
        "nernst" => transport(cfg, dir, prov, true),
        "ahc" => transport(cfg, dir, prov, false),
        "circuit" => circuit(cfg, dir, prov),
        "realspace" => realspace(cfg, dir, prov),
        "validate" => run_validate(cfg, dir, prov),
        other => Err(cfg_err(format!("unknown command `{other}`"))),
    }
}

fn line_momenta(cfg: &RunConfig) -> Result<(Vec<Momentum<f64>>, f64), CommandError> {
    let line = cfg.line.as_ref().ok_or_else(|| cfg_err("a `line` block is required"))?;
    if line.samples < 2 {
        return Err(cfg_err("line.samples must be at least 2"));
    }
    let params = cfg.model().map_err(CommandError::Config)?;
    let ks = match line.akx_range {
        None => kx_line(&params, line.aky, line.samples),
        Some([lo, hi]) => {
            if !(hi > lo) {
                return Err(cfg_err("line.akx_range must be increasing"));
            }
            (0..line.samples)
                .map(|i| {
                    let t = i as f64 / (line.samples - 1) as f64;
                    Momentum::new((lo + (hi - lo) * t) / params.a, line.aky / params.a)
                })
                .collect()
        }
    };
    Ok((ks, line.aky))
}

fn bands(cfg: &RunConfig, dir: &Path, prov: &Provenance) -> Result<Outcome, CommandError> {
    let params = cfg.model().map_err(CommandError::Config)?;
    let (ks, aky) = line_momenta(cfg)?;
    let mut table = Table::new(
        "bands",
        &[
            "akx", "re_e1", "re_e2", "re_e3", "re_e4", "im_e1", "im_e2", "im_e3", "im_e4",
        ],
    );
    for &k in &ks {
        let e = oracle_bands(&params, k);
        let mut row: Vec<Cell> = vec![(params.a * k.kx).into()];
        for v in &e.values {
            row.push(v.re.into());
        }
        for v in &e.values {
            row.push(v.im.into());
        }
        table.push(row);
    }
    write(&table, dir, prov)?;
    let gap = fermi_gap(&params, &ks).map_err(num_err)?;
    let summary = json!({
        "command": "bands",
        "aky": aky,
        "samples": ks.len(),
        "fermi_gap_on_line": gap,
    });
    write_summary(dir, "bands", &summary).map_err(CommandError::Numeric)?;
    ok(summary)
}

fn symmetry(cfg: &RunConfig, dir: &Path, prov: &Provenance) -> Result<Outcome, CommandError> {
    let params = cfg.model().map_err(CommandError::Config)?;
    let grid = cfg.grid.as_ref().ok_or_else(|| cfg_err("a `grid` block is required"))?;
    if grid.n < 2 {
        return Err(cfg_err("grid.n must be at least 2"));
    }
    let n = grid.n;
    let probe = symmetry_residuals(&params, Momentum::new(0.1, 0.2));
    let keys: Vec<String> = probe.keys().cloned().collect();
    let mut columns: Vec<&str> = vec!["kx", "ky"];
    for k in &keys {
        columns.push(k.as_str());
    }
    columns.push("spectral_phs");
    let mut table = Table::new("symmetry", &columns);
    let mut maxima = vec![0.0f64; keys.len() + 1];
    for j in 0..n {
        for i in 0..n {
            let kx = -PI / params.a + 2.0 * PI * (i as f64 + 0.5) / (n as f64 * params.a);
            let ky = -PI / params.a + 2.0 * PI * (j as f64 + 0.5) / (n as f64 * params.a);
            let k = Momentum::new(kx, ky);
            let res = symmetry_residuals(&params, k);
            let spectral = spectral_phs_distance(&params, k);
            let mut row: Vec<Cell> = vec![kx.into(), ky.into()];
            for (idx, key) in keys.iter().enumerate() {
                let v = res[key];
                maxima[idx] = maxima[idx].max(v);
                row.push(v.into());
            }
            maxima[keys.len()] = maxima[keys.len()].max(spectral);
            row.push(spectral.into());
            table.push(row);
        }
    }
    write(&table, dir, prov)?;
    let mut max_obj = serde_json::Map::new();
    for (idx, key) in keys.iter().enumerate() {
        max_obj.insert(key.clone(), json!(maxima[idx]));
    }
    max_obj.insert("spectral_phs".into(), json!(maxima[keys.len()]));
    let summary = json!({
        "command": "symmetry",
        "grid": n,
        "max_residuals": max_obj,
    });
    write_summary(dir, "symmetry", &summary).map_err(CommandError::Numeric)?;
    ok(summary)
}

fn ep_scan(cfg: &RunConfig, dir: &Path, prov: &Provenance) -> Result<Outcome, CommandError> {
    let params = cfg.model().map_err(CommandError::Config)?;
    let (ks, aky) = line_momenta(cfg)?;
    let conventions = cfg.conventions();
    let component_pairing = conventions.component_pairing().map_err(CommandError::Config)?;

    // Discriminant and self-orthogonality along the line.
    let mut j_table = Table::new("ep_discriminant", &["akx", "j_corrected", "j_literal"]);
    let mut so_table = Table::new(
        "ep_self_orthogonality",
        &["akx", "abs_n1", "abs_n2", "abs_n3", "abs_n4", "abs_c1", "abs_c2"],
    );
    for &k in &ks {
        let corr = closed_form_pieces(&params, k, FormulaSet::Corrected).map_err(num_err)?;
        let lit = closed_form_pieces(&params, k, FormulaSet::Literal).map_err(num_err)?;
        j_table.push(vec![(params.a * k.kx).into(), corr.j.into(), lit.j.into()]);
        let so = self_orthogonality(&params, k).map_err(num_err)?;
        so_table.push(vec![
            (params.a * k.kx).into(),
            so.band_unconjugated[0].norm().into(),
            so.band_unconjugated[1].norm().into(),
            so.band_unconjugated[2].norm().into(),
            so.band_unconjugated[3].norm().into(),
            so.component_unconjugated[0].norm().into(),
            so.component_unconjugated[1].norm().into(),
        ]);
    }
    write(&j_table, dir, prov)?;
    write(&so_table, dir, prov)?;

    // Refined discriminant roots for both formula sets.
    let akx_lo = params.a * ks.first().unwrap().kx;
    let akx_hi = params.a * ks.last().unwrap().kx;
    let range = (akx_lo / params.a, akx_hi / params.a);
    let roots_corr =
        scan_discriminant_zeros(&params, aky / params.a, range, ks.len().max(64), FormulaSet::Corrected)
            .map_err(num_err)?;
    let roots_lit =
        scan_discriminant_zeros(&params, aky / params.a, range, ks.len().max(64), FormulaSet::Literal)
            .map_err(num_err)?;

    // Degeneracy detection in a band around the line.
    let mut opts = EpOptions::default();
    if let Some(t) = cfg.tolerances.as_ref() {
        if let Some(g) = t.ep_gap {
            opts.tol_e = g;
        }
        if let Some(v) = t.ep_overlap {
            opts.tol_v = v;
        }
    }
    let region = KRect {
        lo: Momentum::new(range.0, (aky - 0.5) / params.a),
        hi: Momentum::new(range.1, (aky + 0.5) / params.a),
    };
    let eps = detect_ep(&params, region, 32, opts).map_err(num_err)?;

    // Median self-orthogonality magnitudes over a coarse zone grid for
    // normalizing the at-root values.
    let mut mags1 = Vec::new();
    let mut mags2 = Vec::new();
    let m = 32usize;
    for j in 0..m {
        for i in 0..m {
            let k = Momentum::new(
                -PI / params.a + 2.0 * PI * (i as f64 + 0.5) / (m as f64 * params.a),
                -PI / params.a + 2.0 * PI * (j as f64 + 0.5) / (m as f64 * params.a),
            );
            let so = self_orthogonality(&params, k).map_err(num_err)?;
            if component_pairing {
                mags1.push(so.component_unconjugated[0].norm());
                mags2.push(so.component_unconjugated[1].norm());
            } else {
                mags1.push(so.band_unconjugated[0].norm());
                mags2.push(so.band_unconjugated[1].norm());
            }
        }
    }
    let median = |v: &mut Vec<f64>| -> f64 {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    };
    let med1 = median(&mut mags1);
    let med2 = median(&mut mags2);

    let root_json = |roots: &[ssh2d_core::exceptional::DiscriminantRoot<f64>]| {
        roots
            .iter()
            .map(|r| json!({"akx": params.a * r.kx, "j_at_root": r.j_at_root}))
            .collect::<Vec<_>>()
    };
    let ep_json: Vec<_> = eps
        .iter()
        .map(|e| {
            json!({
                "akx": params.a * e.k.kx,
                "aky": params.a * e.k.ky,
                "bands": [e.bands.0, e.bands.1],
                "gap": e.gap,
                "coalescence": e.coalescence,
                "j_value": e.j_value,
                "self_orthogonality": [e.self_orthogonality.0, e.self_orthogonality.1],
                "class": match e.class {
                    DegeneracyClass::ExceptionalPoint => "exceptional-point",
                    DegeneracyClass::AccidentalDegeneracy => "accidental-degeneracy",
                },
            })
        })
        .collect();
    let summary = json!({
        "command": "ep-scan",
        "aky": aky,
        "pairing": if component_pairing { "component-unconjugated" } else { "band-unconjugated" },
        "discriminant_roots_corrected": root_json(&roots_corr),
        "discriminant_roots_literal": root_json(&roots_lit),
        "degeneracies": ep_json,
        "self_orthogonality_medians": [med1, med2],
    });
    write_summary(dir, "ep_scan", &summary).map_err(CommandError::Numeric)?;
    ok(summary)
}

fn zak(cfg: &RunConfig, dir: &Path, prov: &Provenance) -> Result<Outcome, CommandError> {
    let params = cfg.model().map_err(CommandError::Config)?;
    let sweep = cfg.sweep.as_ref().ok_or_else(|| cfg_err("a `sweep` block is required"))?;
    let mode = cfg.conventions().wilson().map_err(CommandError::Config)?;
    let rows = zak_map(
        &params,
        (sweep.range[0], sweep.range[1]),
        sweep.samples,
        sweep.segments,
        mode,
    )
    .map_err(num_err)?;

    let mut table = Table::new("zak", &["ratio", "phi_x", "phi_y", "status"]);
    let mut worst_quantization = 0.0f64;
    for row in &rows {
        let status = if row.phi_x.is_some() && row.phi_y.is_some() { "ok" } else { "gap-closed" };
        for phi in [row.phi_x, row.phi_y].into_iter().flatten() {
            let d = phi.min((2.0 * PI - phi).abs()).min((phi - PI).abs()) / PI;
            worst_quantization = worst_quantization.max(d);
        }
        table.push(vec![
            row.ratio.into(),
            row.phi_x.unwrap_or(0.0).into(),
            row.phi_y.unwrap_or(0.0).into(),
            status.into(),
        ]);
    }
    write(&table, dir, prov)?;

    let ratio_x = transition_ratio(
        &params,
        Direction::X,
        (sweep.range[0], sweep.range[1]),
        sweep.segments,
        mode,
    );
    let ratio_y = transition_ratio(
        &params,
        Direction::Y,
        (sweep.range[0], sweep.range[1]),
        sweep.segments,
        mode,
    );
    let summary = json!({
        "command": "zak",
        "mode": match mode { ZakMode::Determinant => "determinant", ZakMode::BandSum => "band-sum" },
        "segments": sweep.segments,
        "quantized_phases": [0.0, PI],
        "worst_quantization_distance_over_pi": worst_quantization,
        "transition_ratio_x": ratio_x.ok(),
        "transition_ratio_y": ratio_y.ok(),
    });
    write_summary(dir, "zak", &summary).map_err(CommandError::Numeric)?;
    ok(summary)
}

fn berry(cfg: &RunConfig, dir: &Path, prov: &Provenance) -> Result<Outcome, CommandError> {
    let params = cfg.model().map_err(CommandError::Config)?;
    let grid = cfg.grid.as_ref().ok_or_else(|| cfg_err("a `grid` block is required"))?;
    if grid.n < 2 {
        return Err(cfg_err("grid.n must be at least 2"));
    }
    let method = grid.curvature_method().map_err(CommandError::Config)?;
    let bands = grid.bands.clone().unwrap_or_else(|| vec![0, 1, 2, 3]);
    if bands.is_empty() || bands.iter().any(|&b| b >= 4) {
        return Err(cfg_err("grid.bands must be non-empty indices in 0..4"));
    }
    let n = grid.n;
    let mut columns: Vec<String> = vec!["kx".into(), "ky".into()];
    for b in &bands {
        columns.push(format!("omega_{b}"));
    }
    columns.push("status".into());
    let col_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let mut table = Table::new("berry", &col_refs);
    let cell = (2.0 * PI / (n as f64 * params.a)).powi(2);
    let mut band_sums = vec![0.0f64; bands.len()];
    for j in 0..n {
        for i in 0..n {
            let kx = -PI / params.a + 2.0 * PI * (i as f64 + 0.5) / (n as f64 * params.a);
            let ky = -PI / params.a + 2.0 * PI * (j as f64 + 0.5) / (n as f64 * params.a);
            let mut row: Vec<Cell> = vec![kx.into(), ky.into()];
            let mut regularized = false;
            for (idx, &b) in bands.iter().enumerate() {
                let c = berry_curvature(&params, Momentum::new(kx, ky), b, method)
                    .map_err(num_err)?;
                regularized |= c.regularized;
                band_sums[idx] += c.value * cell / (2.0 * PI);
                row.push(c.value.into());
            }
            row.push(if regularized { "regularized" } else { "ok" }.into());
            table.push(row);
        }
    }
    write(&table, dir, prov)?;

    let chern = chern_number(&params, &[0, 1], n.max(16));
    let summary = json!({
        "command": "berry",
        "grid": n,
        "method": grid.method.clone().unwrap_or_else(|| "kubo".into()),
        "bands": bands,
        "band_integrals_over_2pi": band_sums,
        "occupied_pair_chern": match chern {
            Ok(c) => json!({"value": c.value, "integer_distance": c.integer_distance, "min_gap": c.min_gap}),
            Err(e) => json!({"error": e.to_string()}),
        },
    });
    write_summary(dir, "berry", &summary).map_err(CommandError::Numeric)?;
    ok(summary)
}

fn transport(
    cfg: &RunConfig,
    dir: &Path,
    prov: &Provenance,
    is_nernst: bool,
) -> Result<Outcome, CommandError> {
    let params = cfg.model().map_err(CommandError::Config)?;
    let block = cfg
        .transport
        .as_ref()
        .ok_or_else(|| cfg_err("a `transport` block is required"))?;
    if block.samples < 1 {
        return Err(cfg_err("transport.samples must be at least 1"));
    }
    let mode = block.transport_mode().map_err(CommandError::Config)?;
    let name = if is_nernst { "nernst" } else { "ahc" };
    let mut table = Table::new(
        name,
        &["mu", "sigma_ah", "alpha_xy", "excluded_fraction", "mu_band_distance"],
    );
    let [lo, hi] = block.mu_range;
    for i in 0..block.samples {
        let mu = if block.samples == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (block.samples - 1) as f64
        };
        let res = if is_nernst {
            let t = block.temperature.ok_or_else(|| {
                cfg_err("nernst requires transport.temperature")
            })?;
            nernst(&params, mu, t, block.grid, mode).map_err(num_err)?
        } else {
            anomalous_hall(&params, mu, block.grid, block.temperature).map_err(num_err)?
        };
        table.push(vec![
            mu.into(),
            res.sigma_ah.into(),
            res.alpha_xy.into(),
            res.excluded_fraction.into(),
            res.mu_band_distance.into(),
        ]);
    }
    write(&table, dir, prov)?;
    let summary = json!({
        "command": name,
        "grid": block.grid,
        "temperature": block.temperature,
        "mode": block.mode.clone().unwrap_or_else(|| "low-t".into()),
        "samples": block.samples,
    });
    write_summary(dir, name, &summary).map_err(CommandError::Numeric)?;
    ok(summary)
}

fn circuit(cfg: &RunConfig, dir: &Path, prov: &Provenance) -> Result<Outcome, CommandError> {
    let block = cfg.circuit.as_ref().ok_or_else(|| cfg_err("a `circuit` block is required"))?;
    let template = block.params();
    template.validate().map_err(cfg_err)?;
    if block.r_values.is_empty() {
        return Err(cfg_err("circuit.r_values must be non-empty"));
    }
    let convention = cfg.conventions().circuit().map_err(CommandError::Config)?;
    let sweeps = tbr_sweep(
        &template,
        &block.r_values,
        (block.omega_range[0], block.omega_range[1]),
        block.samples,
        block.kx,
        block.ky,
    )
    .map_err(num_err)?;

    let mut table = Table::new("circuit_sweep", &["r", "omega", "e1", "e2", "e3", "e4"]);
    let mut crossings = Vec::new();
    for s in &sweeps {
        for (omega, branches) in s.omegas.iter().zip(s.branches.iter()) {
            table.push(vec![
                s.r.into(),
                (*omega).into(),
                branches[0].into(),
                branches[1].into(),
                branches[2].into(),
                branches[3].into(),
            ]);
        }
        for c in &s.crossings {
            crossings.push(json!({"r": s.r, "branch": c.branch, "omega": c.omega}));
        }
    }
    write(&table, dir, prov)?;

    let admittance = match block.admittance.as_ref() {
        None => serde_json::Value::Null,
        Some(a) => {
            let y = two_point_admittance(
                &template,
                a.beta,
                a.beta_prime,
                (a.offset[0], a.offset[1]),
                a.n,
                convention,
            )
            .map_err(num_err)?;
            json!({
                "re": y.y.re,
                "im": y.y.im,
                "regularized_terms": y.regularized_terms,
                "grid": y.grid,
            })
        }
    };
    let summary = json!({
        "command": "circuit",
        "resonance_omega": sweeps[0].resonance_omega,
        "crossings": crossings,
        "k_sensitivity": sweeps.iter().map(|s| json!({"r": s.r, "value": s.k_sensitivity})).collect::<Vec<_>>(),
        "admittance": admittance,
    });
    write_summary(dir, "circuit", &summary).map_err(CommandError::Numeric)?;
    ok(summary)
}

fn realspace(cfg: &RunConfig, dir: &Path, prov: &Provenance) -> Result<Outcome, CommandError> {
    let params = cfg.model().map_err(CommandError::Config)?;
    let lattice = cfg.lattice.as_ref().ok_or_else(|| cfg_err("a `lattice` block is required"))?;
    let bc = lattice.boundary_condition().map_err(CommandError::Config)?;
    let h = build_real_space(&params, lattice.nx, lattice.ny, bc).map_err(num_err)?;
    let e = eig::eigen(&h.matrix);
    let mut table = Table::new("realspace_spectrum", &["index", "re", "im"]);
    for (i, v) in e.values.iter().enumerate() {
        table.push(vec![(i as f64).into(), v.re.into(), v.im.into()]);
    }
    write(&table, dir, prov)?;
    let consistency = if bc == Boundary::Pbc && lattice.nx >= 2 && lattice.ny >= 2 {
        let rep = bloch_consistency_report(&params, lattice.nx, lattice.ny, bc).map_err(num_err)?;
        json!({"max_distance": rep.max_distance, "momenta": rep.rows.len()})
    } else {
        serde_json::Value::Null
    };
    let summary = json!({
        "command": "realspace",
        "nx": lattice.nx,
        "ny": lattice.ny,
        "boundary": if bc == Boundary::Pbc { "pbc" } else { "obc" },
        "eigenvalues": e.values.len(),
        "solver_converged": e.converged,
        "bloch_consistency": consistency,
    });
    write_summary(dir, "realspace", &summary).map_err(CommandError::Numeric)?;
    ok(summary)
}

fn run_validate(cfg: &RunConfig, dir: &Path, prov: &Provenance) -> Result<Outcome, CommandError> {
    let params = cfg.model().map_err(CommandError::Config)?;
    let circ = cfg
        .circuit
        .as_ref()
        .map(|b| b.params())
        .unwrap_or_else(|| ssh2d_core::CircuitParams::new(1e-4, 1e-4, 1e-8, 1.0, 3e4));
    let names: Vec<&str> = match cfg.checks.as_ref() {
        None => validate::CHECK_NAMES.to_vec(),
        Some(list) => list.iter().map(|s| s.as_str()).collect(),
    };
    let entries = validate::run_checks(&params, &circ, &names).map_err(|e| match e {
        validate::ValidateError::UnknownCheck(_) => cfg_err(e),
        other => num_err(other),
    })?;

    let mut table = Table::new(
        "validate",
        &["check", "magnitude", "tolerance", "samples", "status"],
    );
    let mut flagged_names = Vec::new();
    for e in &entries {
        if e.flagged() {
            flagged_names.push(e.name);
        }
        table.push(vec![
            e.name.into(),
            e.magnitude.into(),
            e.tolerance.into(),
            (e.samples as f64).into(),
            if e.flagged() { "mismatch" } else { "ok" }.into(),
        ]);
    }
    write(&table, dir, prov)?;
    let summary = json!({
        "command": "validate",
        "checks_run": names,
        "mismatches": flagged_names,
        "entries": entries.iter().map(|e| json!({
            "check": e.name,
            "description": e.description,
            "magnitude": e.magnitude,
            "tolerance": e.tolerance,
            "samples": e.samples,
            "flagged": e.flagged(),
        })).collect::<Vec<_>>(),
    });
    write_summary(dir, "validate", &summary).map_err(CommandError::Numeric)?;
    Ok(Outcome { mismatches: !flagged_names.is_empty(), summary })
}
