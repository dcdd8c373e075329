use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;

use super::table::{fmt_num, Output, Table};
use super::{grid, parse_range, potential_label, solver, Cli, Command, FieldArgs, PotentialArg};
use crate::error::{Error, Result};
use crate::flatband::{
    build_compact_eigenfunction, kirchhoff_residual, DIRICHLET_TOL, PHI_SQUARED_TOL,
};
use crate::geometry::{build_geometry, magnetic_phases, MagneticPhases};
use crate::hill::{HillScan, HillSolver};
use crate::lyapunov::{lyapunov_from, ChannelParams};
use crate::oracle::{SuiteRegistry, VerifyConfig, MAX_CONDITION};
use crate::roots::{TANGENT_TOL, X_TOL};
use crate::spectrum::{gaps_full, BandEndpoints, Endpoint, GapRecord, SpectralContext};

pub(super) fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Geometry(a) => geometry(cli, a).map(|_| 0),
        Command::Hill(a) => hill(cli, a).map(|_| 0),
        Command::Lyapunov(a) => lyapunov(cli, a).map(|_| 0),
        Command::Bands(a) => bands(cli, a).map(|_| 0),
        Command::Gaps(a) => gaps(cli, a).map(|_| 0),
        Command::Sweep(a) => sweep(cli, a).map(|_| 0),
        Command::Flatband(a) => flatband(cli, a).map(|_| 0),
        Command::Verify(a) => verify(cli, a),
    }
}

struct Fmt(usize);

impl Fmt {
    fn f(&self, x: f64) -> String {
        fmt_num(x, self.0)
    }
}

fn header(cli: &Cli, command: &str) -> Vec<String> {
    vec![
        format!("armchair {command} {}", env!("CARGO_PKG_VERSION")),
        format!("integrator={} precision={}", cli.integrator, cli.precision),
    ]
}

fn spectral_meta(
    cli: &Cli,
    command: &str,
    pot: &PotentialArg,
    n: usize,
    phases: MagneticPhases,
    xmax: f64,
) -> Vec<String> {
    let f = Fmt(cli.precision as usize);
    let mut m = header(cli, command);
    m.push(format!(
        "potential={} N={n} xmax={}",
        potential_label(pot),
        f.f(xmax)
    ));
    m.push(format!(
        "a1={} a2={} a={}",
        f.f(phases.a1),
        f.f(phases.a2),
        f.f(phases.a())
    ));
    m.push(format!(
        "tolerances: scan_dx={} root_x={X_TOL:e} tangency={TANGENT_TOL:e} empty_gap=1e-10*max(1,|lambda|)",
        crate::hill::SCAN_DX
    ));
    m
}

fn emit(out: Option<&Path>, text: String) -> Result<()> {
    match out {
        Some(p) => {
            let mut o = Output::default();
            o.push(p, text);
            o.commit()
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn phases_for(field: &FieldArgs, n: usize) -> Result<MagneticPhases> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    field.phases(n)
}

fn geometry(cli: &Cli, a: &super::GeometryArgs) -> Result<()> {
    let f = Fmt(cli.precision as usize);
    let r = parse_range(&a.cells, 2)?;
    if r.iter().any(|x| x.fract() != 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cells '{}' must be integers",
            a.cells
        )));
    }
    let g = build_geometry(a.n, r[0] as i64..=r[1] as i64)?;
    let p = magnetic_phases(a.b, a.n)?;
    let c = &g.constants;
    let mut t = Table::new(&["n", "j", "k", "x1", "y1", "z1", "x2", "y2", "z2"]);
    t.meta_lines(&header(cli, "geometry"));
    t.meta(format!("N={} B={} cells={}", a.n, f.f(a.b), a.cells));
    t.meta(format!(
        "R={} R1={} R2={} h={} a1={} a2={} a={}",
        f.f(c.radius),
        f.f(c.r1),
        f.f(c.r2),
        f.f(c.height),
        f.f(p.a1),
        f.f(p.a2),
        f.f(p.a())
    ));
    for (label, e) in &g.edges {
        let s = g.vertices[label];
        let mut row = vec![
            label.n.to_string(),
            label.j.to_string(),
            label.k.to_string(),
        ];
        row.extend(s.iter().map(|&x| f.f(x)));
        row.extend((0..3).map(|i| f.f(s[i] + e[i])));
        t.row(row);
    }
    emit(a.out.as_deref(), t.render())
}

fn hill(cli: &Cli, a: &super::HillArgs) -> Result<()> {
    let f = Fmt(cli.precision as usize);
    let scan = HillScan::with_step(solver(cli, &a.potential)?, a.xmax, a.dx)?;
    let mut t = Table::new(&["x", "lambda", "F", "F_minus"]);
    t.meta_lines(&header(cli, "hill"));
    t.meta(format!(
        "potential={} xmax={} dx={} root_x={X_TOL:e} tangency={TANGENT_TOL:e}",
        potential_label(&a.potential),
        f.f(a.xmax),
        f.f(scan.dx)
    ));
    for p in &scan.points {
        let v = &p.values;
        t.row(vec![f.f(p.x), f.f(v.lambda), f.f(v.f), f.f(v.f_minus)]);
    }
    let lm = &scan.landmarks;
    let mut l = Table::new(&["kind", "n", "value"]);
    l.meta("landmarks");
    let mut push = |kind: &str, n: usize, v: f64| l.row(vec![kind.into(), n.to_string(), f.f(v)]);
    push("ground", 0, lm.ground);
    push("ground_mass", 0, lm.ground_mass);
    for (i, &mu) in lm.dirichlet.iter().enumerate() {
        push("dirichlet", i + 1, mu);
    }
    for (i, &eta) in lm.eta.iter().enumerate() {
        push("eta", i + 1, eta);
    }
    for (i, &(lo, hi)) in lm.edges.iter().enumerate() {
        push("gap_lo", i + 1, lo);
        push("gap_hi", i + 1, hi);
    }
    for m in &lm.masses {
        push("mass_minus", m.n, m.minus);
        push("mass_plus", m.n, m.plus);
    }
    emit(a.out.as_deref(), format!("{}\n{}", t.render(), l.render()))
}

fn lyapunov_table(f: &Fmt, solver: &HillSolver, ch: &ChannelParams, xs: &[f64]) -> Result<Table> {
    let values = xs
        .par_iter()
        .map(|&x| solver.values_at_x(x))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&[
        "x",
        "lambda",
        "F",
        "F_minus",
        "xi",
        "rho",
        "F1_re",
        "F1_im",
        "F2_re",
        "F2_im",
        "in_band_1",
        "in_band_2",
    ]);
    for (x, v) in xs.iter().zip(&values) {
        let ly = lyapunov_from(v, ch);
        let [f1, f2] = ly.branches.as_complex();
        let flag = |nu: usize| if ly.branches.in_band(nu) { "1" } else { "0" }.to_string();
        t.row(vec![
            f.f(*x),
            f.f(v.lambda),
            f.f(v.f),
            f.f(v.f_minus),
            f.f(ly.xi),
            f.f(ly.rho),
            f.f(f1.re),
            f.f(f1.im),
            f.f(f2.re),
            f.f(f2.im),
            flag(0),
            flag(1),
        ]);
    }
    Ok(t)
}

fn lyapunov(cli: &Cli, a: &super::LyapunovArgs) -> Result<()> {
    let f = Fmt(cli.precision as usize);
    let r = parse_range(&a.xrange, 3)?;
    let ch = ChannelParams::from_a(a.k, a.n, a.a)?;
    let mut t = lyapunov_table(
        &f,
        &solver(cli, &a.potential)?,
        &ch,
        &grid(r[0], r[1], r[2]),
    )?;
    t.meta_lines(&header(cli, "lyapunov"));
    t.meta(format!(
        "potential={} N={} k={} a={} xrange={}",
        potential_label(&a.potential),
        a.n,
        a.k,
        f.f(a.a),
        a.xrange
    ));
    emit(a.out.as_deref(), t.render())
}

fn gap_table(f: &Fmt, gaps: &[GapRecord]) -> Table {
    let mut t = Table::new(&[
        "m",
        "lo",
        "hi",
        "empty",
        "class",
        "lo_provenance",
        "hi_provenance",
    ]);
    for g in gaps {
        t.row(vec![
            g.index.to_string(),
            f.f(g.lo.value),
            f.f(g.hi.value),
            g.empty.to_string(),
            g.class.as_str().into(),
            g.lo.tag.to_string(),
            g.hi.tag.to_string(),
        ]);
    }
    t
}

fn endpoint_table(f: &Fmt, e: &BandEndpoints) -> Table {
    let mut t = Table::new(&["nu", "p", "side", "value", "provenance"]);
    let mut push = |nu: usize, p: usize, pair: &(Endpoint, Endpoint)| {
        for (side, ep) in [("minus", &pair.0), ("plus", &pair.1)] {
            t.row(vec![
                nu.to_string(),
                p.to_string(),
                side.into(),
                f.f(ep.value),
                ep.tag.to_string(),
            ]);
        }
    };
    for nu in 1..=2 {
        for (n, pair) in e.even[nu - 1].iter().enumerate() {
            push(nu, 2 * n, pair);
        }
        for (i, pair) in e.odd[nu - 1].iter().enumerate() {
            push(nu, 2 * i + 1, pair);
        }
    }
    t
}

fn bands(cli: &Cli, a: &super::BandsArgs) -> Result<()> {
    let f = Fmt(cli.precision as usize);
    let phases = phases_for(&a.field, a.n)?;
    let solver = solver(cli, &a.potential)?;
    let scan = HillScan::new(solver.clone(), a.xmax)?;
    let full = gaps_full(&scan, a.n, phases)?;
    let mut meta = spectral_meta(cli, "bands", &a.potential, a.n, phases, a.xmax);
    meta.insert(2, a.field.describe());
    let xs: Vec<f64> = scan.points.iter().map(|p| p.x).collect();

    let mut out = Output::default();
    for spec in &full.channels {
        let k = spec.channel.k;
        let mut t = lyapunov_table(&f, &solver, &spec.channel, &xs)?;
        t.meta_lines(&meta).meta(format!("channel k={k}"));
        out.push(a.out.join(format!("channel_k{k}.csv")), t.render());
        let mut t = endpoint_table(&f, &spec.endpoints);
        t.meta_lines(&meta).meta(format!("channel k={k}"));
        out.push(a.out.join(format!("endpoints_k{k}.csv")), t.render());
        let mut t = gap_table(&f, &spec.gaps);
        t.meta_lines(&meta).meta(format!("channel k={k}"));
        out.push(a.out.join(format!("gaps_k{k}.csv")), t.render());
    }
    let mut t = gap_table(&f, &full.gaps);
    t.meta_lines(&meta).meta("full operator");
    out.push(a.out.join("gaps.csv"), t.render());
    let mut t = Table::new(&["n", "mu"]);
    t.meta_lines(&meta);
    for (i, &mu) in full.flat_bands.iter().enumerate() {
        t.row(vec![(i + 1).to_string(), f.f(mu)]);
    }
    out.push(a.out.join("flat_bands.csv"), t.render());
    out.commit()
}

fn gaps(cli: &Cli, a: &super::GapsArgs) -> Result<()> {
    let f = Fmt(cli.precision as usize);
    let phases = phases_for(&a.field, a.n)?;
    let scan = HillScan::new(solver(cli, &a.potential)?, a.xmax)?;
    let full = gaps_full(&scan, a.n, phases)?;
    let mut t = gap_table(&f, &full.gaps);
    let mut meta = spectral_meta(cli, "gaps", &a.potential, a.n, phases, a.xmax);
    meta.insert(2, a.field.describe());
    t.meta_lines(&meta);
    emit(a.out.as_deref(), t.render())
}

fn sweep(cli: &Cli, a: &super::SweepArgs) -> Result<()> {
    let f = Fmt(cli.precision as usize);
    let r = parse_range(&a.b, 3)?;
    let bs = grid(r[0], r[1], r[2]);
    let scan = HillScan::new(solver(cli, &a.potential)?, a.xmax)?;
    let ctx = SpectralContext::new(&scan)?;
    let rows = bs
        .par_iter()
        .map(|&b| {
            let phases = magnetic_phases(b, a.n)?;
            Ok((b, phases.a(), ctx.full(a.n, phases)?.gaps))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["B", "a", "m", "lo", "hi", "empty", "class"]);
    let mut meta = spectral_meta(
        cli,
        "sweep",
        &a.potential,
        a.n,
        MagneticPhases::new(0.0, 0.0),
        a.xmax,
    );
    meta[3] = format!("B={}", a.b);
    t.meta_lines(&meta);
    for (b, phase, gaps) in rows {
        for g in gaps {
            t.row(vec![
                f.f(b),
                f.f(phase),
                g.index.to_string(),
                f.f(g.lo.value),
                f.f(g.hi.value),
                g.empty.to_string(),
                g.class.as_str().into(),
            ]);
        }
    }
    emit(a.out.as_deref(), t.render())
}

fn flatband(cli: &Cli, a: &super::FlatbandArgs) -> Result<()> {
    let f = Fmt(cli.precision as usize);
    if a.n_dirichlet == 0 {
        return Err(Error::InvalidArgument("Dirichlet index starts at 1".into()));
    }
    let phases = phases_for(&a.field, a.n)?;
    let ch = ChannelParams::new(a.k, a.n, phases)?;
    let solver = solver(cli, &a.potential)?;
    let (lo, hi) = solver.potential().range();
    let x_max = PI * (a.n_dirichlet as f64 + 2.0) + lo.abs().max(hi.abs()).sqrt();
    let scan = HillScan::new(solver.clone(), x_max)?;
    let mu = *scan
        .landmarks
        .dirichlet
        .get(a.n_dirichlet - 1)
        .ok_or_else(|| {
            Error::InternalInconsistency(format!(
                "Dirichlet eigenvalue {} not found",
                a.n_dirichlet
            ))
        })?;
    let ef = build_compact_eigenfunction(&solver, &ch, mu, a.nu)?;
    let residual = kirchhoff_residual(&ef.edge_data(), &ch);

    let mut t = Table::new(&["n", "j", "re", "im"]);
    t.meta_lines(&header(cli, "flatband"));
    t.meta(format!(
        "potential={} N={} {} k={}",
        potential_label(&a.potential),
        a.n,
        a.field.describe(),
        a.k
    ));
    t.meta(format!(
        "a1={} a2={} a={}",
        f.f(phases.a1),
        f.f(phases.a2),
        f.f(phases.a())
    ));
    t.meta(format!(
        "n_dirichlet={} nu={} mu={} phi_d={} degenerate={}",
        a.n_dirichlet,
        a.nu,
        f.f(mu),
        f.f(ef.phi),
        ef.degenerate
    ));
    t.meta(format!(
        "tolerances: dirichlet={DIRICHLET_TOL:e} phi_squared={PHI_SQUARED_TOL:e}"
    ));
    t.meta(format!("kirchhoff_residual={}", f.f(residual)));
    for (&(n, j), c) in &ef.coeffs {
        t.row(vec![n.to_string(), j.to_string(), f.f(c.re), f.f(c.im)]);
    }
    emit(a.out.as_deref(), t.render())
}

fn verify(cli: &Cli, a: &super::VerifyArgs) -> Result<i32> {
    let f = Fmt(cli.precision as usize);
    let suites = SuiteRegistry::default().select(&a.suite)?;
    let phases = phases_for(&a.field, a.n)?;
    let solver = solver(cli, &a.potential)?;
    let config = VerifyConfig {
        n_around: a.n,
        phases,
        samples: a.samples,
        seed: a.seed,
        fd_points: a.fd_points,
        ..VerifyConfig::default()
    };
    let reports = suites
        .iter()
        .map(|s| s.run(&solver, &config))
        .collect::<Result<Vec<_>>>()?;

    let mut t = Table::new(&["suite", "check", "value", "tolerance", "status"]);
    t.meta_lines(&header(cli, "verify"));
    t.meta(format!(
        "suite={} potential={} N={} {}",
        a.suite,
        potential_label(&a.potential),
        a.n,
        a.field.describe()
    ));
    t.meta(format!(
        "a1={} a2={} a={}",
        f.f(phases.a1),
        f.f(phases.a2),
        f.f(phases.a())
    ));
    t.meta(format!(
        "samples={} seed={} lambda_max={} identity_tol={:e} max_condition={MAX_CONDITION:e}",
        config.samples, config.seed, config.lambda_max, config.identity_tol
    ));
    t.meta(format!(
        "fd_points={} fd_ratio_points={} fd_thetas={} fd_lambda_max={} fd_band_tol={:e} fd_ratio={}..{}",
        config.fd_points, config.fd_ratio_points, config.fd_thetas, config.fd_lambda_max, config.fd_band_tol, config.fd_ratio.0, config.fd_ratio.1
    ));
    let mut ok = true;
    for r in &reports {
        for c in &r.checks {
            ok &= c.passed;
            let status = if c.passed { "PASS" } else { "FAIL" };
            t.row(vec![
                r.suite.into(),
                c.name.clone(),
                f.f(c.value),
                f.f(c.tolerance),
                status.into(),
            ]);
        }
    }
    emit(a.out.as_deref(), t.render())?;
    Ok(if ok { 0 } else { 1 })
}
