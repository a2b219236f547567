//! Task runners. Each writes its artifacts into the output directory and
//! returns a one-line summary plus whether every solve converged.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use ccmin::ccdiag::{self, CurvePoint, MCCurve, ProblemAtInfinity};
use ccmin::energy::ProblemSpec;
use ccmin::grid::{Field, GridSpec};
use ccmin::io;
use ccmin::rearrange::{self, PlateauAnchor, SurgeryReport};
use ccmin::solve::{minimize_constrained, SolveConfig, SolveResult};
use ccmin::{Error, Result};

use crate::config::{Experiment, MInf, TaskConfig};

pub struct Outcome {
    pub summary: String,
    pub converged: bool,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn kv(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), io::fmt_f64)
}

fn point(c: f64, r: &SolveResult) -> CurvePoint {
    CurvePoint {
        c,
        m: r.m_value,
        beta: r.beta,
        iterations: r.iterations,
        converged: r.converged,
    }
}

fn solve_report(p: &ProblemSpec, c: f64, r: &SolveResult) -> Vec<(String, String)> {
    vec![
        kv("family", p.family()),
        kv("c", io::fmt_f64(c)),
        kv("m", io::fmt_f64(r.m_value)),
        kv("beta", opt(r.beta)),
        kv("el_residual", opt(r.el_residual)),
        kv("iterations", r.iterations),
        kv("converged", r.converged),
        kv("stop_reason", r.stop_reason.name()),
        kv("constraint_error", io::fmt_f64(r.constraint_error)),
        kv("gradient_residual", io::fmt_f64(r.gradient_residual)),
        kv("symmetrizations", r.symmetrizations),
        kv("grid_extent", io::fmt_f64(r.grid_extent)),
    ]
}

pub fn run(exp: &Experiment) -> Result<Outcome> {
    let (p, cfg, dir) = (&exp.problem, &exp.solve, exp.out_dir.as_path());
    match &exp.task {
        TaskConfig::Solve { c } => solve(p, *c, cfg, dir),
        TaskConfig::Sweep {
            c_list,
            m_inf,
            alpha,
        } => sweep(p, c_list, *m_inf, *alpha, cfg, dir),
        TaskConfig::CertifyChoquard {
            c,
            t_grid,
            seed_width,
        } => certify_choquard(p, *c, t_grid, *seed_width, dir),
        TaskConfig::CertifyQuasilinear { theta_grid } => certify_quasilinear(p, theta_grid, dir),
        TaskConfig::Rho0 { lo, hi, tol } => rho0(p, (*lo, *hi), *tol, cfg, dir),
        TaskConfig::Audit { c, gaussian_widths } => audit(p, *c, gaussian_widths, cfg, dir),
        TaskConfig::SurgeryDemo {
            c,
            plateau_mass,
            anchor_radius,
            dip_offset,
            truncate_radius,
            extra_mass,
            eps,
        } => {
            let d = Demo {
                c: *c,
                plateau_mass: *plateau_mass,
                anchor_radius: *anchor_radius,
                dip_offset: *dip_offset,
                truncate_radius: *truncate_radius,
                extra_mass: *extra_mass,
                eps: *eps,
            };
            surgery_demo(p, cfg, dir, &d)
        }
    }
}

fn solve(p: &ProblemSpec, c: f64, cfg: &SolveConfig, dir: &Path) -> Result<Outcome> {
    let r = minimize_constrained(p, c, cfg, None)?;
    let curve = MCCurve {
        points: vec![point(c, &r)],
        minimizers: Vec::new(),
    };
    io::write_mass_curve(create(dir, "mass_curve.csv")?, &curve)?;
    io::write_trace(create(dir, "trace.csv")?, &r.trace)?;
    io::write_field(create(dir, "field.csv")?, &r.minimizer)?;
    io::write_key_values(create(dir, "report.txt")?, &solve_report(p, c, &r))?;
    Ok(Outcome {
        summary: format!(
            "solve: family={} c={c} m={:.10e} beta={} iterations={} converged={}",
            p.family(),
            r.m_value,
            r.beta.map_or("none".into(), |b| format!("{b:.10e}")),
            r.iterations,
            r.converged
        ),
        converged: r.converged,
    })
}

fn sweep(
    p: &ProblemSpec,
    c_list: &[f64],
    m_inf: MInf,
    alpha: Option<f64>,
    cfg: &SolveConfig,
    dir: &Path,
) -> Result<Outcome> {
    let curve = ccdiag::scan_mass_curve(p, c_list, cfg)?;
    io::write_mass_curve(create(dir, "mass_curve.csv")?, &curve)?;
    for (i, u) in curve.minimizers.iter().enumerate() {
        io::write_field(create(dir, &format!("field_{i:03}.csv"))?, u)?;
    }
    let mut report = vec![kv("family", p.family()), kv("points", curve.len())];
    let mut verdict = String::new();
    if curve.len() >= 2 {
        let at_inf = match m_inf {
            MInf::Zero => ProblemAtInfinity::Zero,
            MInf::Autonomous => ProblemAtInfinity::Autonomous,
        };
        let tol = ccdiag::default_tol(&curve);
        let cc = ccdiag::check_subadditivity(&curve, &at_inf, tol)?;
        verdict = format!(" monotone={} subadditive={}", cc.monotone, cc.subadditive);
        report.extend(cc.to_key_values());
        if let Some(a) = alpha {
            let v = ccdiag::homogeneity_bound_check(&curve, a, tol)?;
            report.push(kv("homogeneity_alpha", io::fmt_f64(a)));
            report.push(kv("homogeneity_violations", v.len()));
            verdict.push_str(&format!(" homogeneity_violations={}", v.len()));
        }
    }
    io::write_key_values(create(dir, "report.txt")?, &report)?;
    let converged = curve.points.iter().all(|q| q.converged);
    let m: Vec<String> = curve
        .points
        .iter()
        .map(|q| format!("{:.6e}", q.m))
        .collect();
    Ok(Outcome {
        summary: format!(
            "sweep: family={} points={} m=[{}]{verdict} converged={converged}",
            p.family(),
            curve.len(),
            m.join(", ")
        ),
        converged,
    })
}

fn write_certificate(name: &str, cert: &ccdiag::Certificate, dir: &Path) -> Result<Outcome> {
    io::write_scan(create(dir, "certificate.csv")?, &cert.rows)?;
    io::write_key_values(
        create(dir, "report.txt")?,
        &[
            kv("certificate", name),
            kv("best_param", io::fmt_f64(cert.best_param)),
            kv("value", io::fmt_f64(cert.value)),
            kv("success", cert.success),
            kv("constraint_check", io::fmt_f64(cert.constraint_check)),
        ],
    )?;
    Ok(Outcome {
        summary: format!(
            "{name}: best_param={:.6} value={:.10e} success={} constraint_check={:.2e}",
            cert.best_param, cert.value, cert.success, cert.constraint_check
        ),
        converged: true,
    })
}

fn certify_choquard(
    p: &ProblemSpec,
    c: f64,
    t_grid: &[f64],
    width: f64,
    dir: &Path,
) -> Result<Outcome> {
    let g = Field::from_radial(p.grid().clone(), |r| (-(r / width).powi(2)).exp());
    let w = g.scaled((c / g.norm2_sq()).sqrt());
    let cert = ccdiag::certificate_choquard(p, c, &w, t_grid)?;
    write_certificate("certify_choquard", &cert, dir)
}

fn certify_quasilinear(p: &ProblemSpec, theta_grid: &[f64], dir: &Path) -> Result<Outcome> {
    let cert = ccdiag::certificate_quasilinear(p, theta_grid)?;
    write_certificate("certify_quasilinear", &cert, dir)
}

fn rho0(
    p: &ProblemSpec,
    bracket: (f64, f64),
    tol: f64,
    cfg: &SolveConfig,
    dir: &Path,
) -> Result<Outcome> {
    let est = ccdiag::estimate_rho0(p, bracket, cfg, tol)?;
    let mut points = est.evaluations.clone();
    points.sort_by(|a, b| a.c.total_cmp(&b.c));
    points.dedup_by(|a, b| a.c == b.c);
    // The estimate rests on the final bracket ends and the check at 2 rho0.
    let decisive = [est.lo, est.hi, 2.0 * est.rho0];
    let converged = points
        .iter()
        .filter(|q| decisive.contains(&q.c))
        .all(|q| q.converged);
    let unconverged = points.iter().filter(|q| !q.converged).count();
    io::write_mass_curve(
        create(dir, "mass_curve.csv")?,
        &MCCurve {
            points,
            minimizers: Vec::new(),
        },
    )?;
    io::write_field(create(dir, "field.csv")?, &est.minimizer_at_double)?;
    io::write_key_values(
        create(dir, "report.txt")?,
        &[
            kv("family", p.family()),
            kv("rho0", io::fmt_f64(est.rho0)),
            kv("lo", io::fmt_f64(est.lo)),
            kv("hi", io::fmt_f64(est.hi)),
            kv("m_lo", io::fmt_f64(est.m_lo)),
            kv("m_hi", io::fmt_f64(est.m_hi)),
            kv("m_at_double", io::fmt_f64(est.m_at_double)),
            kv("evaluations", est.evaluations.len()),
            kv("unconverged_evaluations", unconverged),
            kv("converged", converged),
        ],
    )?;
    Ok(Outcome {
        summary: format!(
            "rho0: rho0={:.6} bracket=[{:.6}, {:.6}] m(2 rho0)={:.6e} evaluations={} unconverged={unconverged} converged={converged}",
            est.rho0,
            est.lo,
            est.hi,
            est.m_at_double,
            est.evaluations.len()
        ),
        converged,
    })
}

fn audit_rows(tag: &str, u: &Field, out: &mut Vec<(String, String)>) -> Result<f64> {
    let a = ccdiag::inequality_audit(u)?;
    out.push(kv(&format!("{tag}_q1"), io::fmt_f64(a.q1)));
    out.push(kv(&format!("{tag}_q2"), io::fmt_f64(a.q2)));
    out.push(kv(&format!("{tag}_q3"), io::fmt_f64(a.q3)));
    out.push(kv(&format!("{tag}_q1_within_hls"), a.q1_within_hls));
    Ok(a.q1)
}

fn audit(
    p: &ProblemSpec,
    c: Option<f64>,
    widths: &[f64],
    cfg: &SolveConfig,
    dir: &Path,
) -> Result<Outcome> {
    let mut report = vec![kv(
        "hls_constant",
        io::fmt_f64(ccdiag::sharp_hls_constant()),
    )];
    let mut q1_max = f64::NEG_INFINITY;
    for (i, &w) in widths.iter().enumerate() {
        let u = Field::from_radial(p.grid().clone(), |r| (-(r / w).powi(2)).exp());
        report.push(kv(&format!("gaussian_{i}_width"), io::fmt_f64(w)));
        q1_max = q1_max.max(audit_rows(&format!("gaussian_{i}"), &u, &mut report)?);
    }
    let mut converged = true;
    if let Some(c) = c {
        let r = minimize_constrained(p, c, cfg, None)?;
        converged = r.converged;
        report.push(kv("minimizer_c", io::fmt_f64(c)));
        report.push(kv("minimizer_m", io::fmt_f64(r.m_value)));
        report.push(kv("minimizer_converged", r.converged));
        q1_max = q1_max.max(audit_rows("minimizer", &r.minimizer, &mut report)?);
        io::write_field(create(dir, "field.csv")?, &r.minimizer)?;
    }
    io::write_key_values(create(dir, "report.txt")?, &report)?;
    Ok(Outcome {
        summary: format!(
            "audit: hls_constant={:.6} max_q1={q1_max:.6} converged={converged}",
            ccdiag::sharp_hls_constant()
        ),
        converged,
    })
}

/// Even two-bump field `s(x - a) + s(x + a)` on the grid of `s`, with `a` a whole number of nodes.
fn two_bumps(s: &Field, shift: usize) -> Result<Field> {
    let v = s.component(0);
    let n = v.len();
    let at = |i: isize| {
        if (0..n as isize).contains(&i) {
            v[i as usize]
        } else {
            0.0
        }
    };
    let k = shift as isize;
    let values = (0..n as isize).map(|i| at(i - k) + at(i + k)).collect();
    Field::from_values(s.grid().clone(), 1, values)
}

struct Demo {
    c: f64,
    plateau_mass: f64,
    anchor_radius: f64,
    dip_offset: f64,
    truncate_radius: f64,
    extra_mass: f64,
    eps: f64,
}

fn surgery_demo(p: &ProblemSpec, cfg: &SolveConfig, dir: &Path, d: &Demo) -> Result<Outcome> {
    let GridSpec::Line { x_max, n } = *p.grid().spec() else {
        return Err(Error::UnsupportedGrid(
            "surgery_demo needs a line grid".into(),
        ));
    };
    let h = 2.0 * x_max / n as f64;
    let r = minimize_constrained(p, d.c, cfg, None)?;
    let s = rearrange::schwarz_rearrange(&r.minimizer)?;
    io::write_field(create(dir, "field.csv")?, &s)?;

    let mut reports: Vec<SurgeryReport> = Vec::new();
    let (plateau, rep) = rearrange::plateau_insert(
        p,
        &s,
        d.plateau_mass,
        PlateauAnchor::Radius(d.anchor_radius),
    )?;
    io::write_field(create(dir, "plateau_field.csv")?, &plateau)?;
    reports.push(rep);

    let shift = ((d.dip_offset / h).round() as usize).max(1);
    let bumps = two_bumps(&s, shift)?;
    // Inner peak nodes of the two copies.
    let x = (shift as f64 - 0.5) * h;
    let (filled, rep) = rearrange::fill_dip(p, &bumps, -x, x)?;
    io::write_field(create(dir, "dip_field.csv")?, &filled)?;
    reports.push(rep);

    let cut = rearrange::truncate_renormalize(&s, d.truncate_radius)?;
    let (joined, rep) = rearrange::add_disjoint_mass(p, &cut, d.c + d.extra_mass, d.eps)?;
    io::write_field(create(dir, "disjoint_field.csv")?, &joined)?;
    reports.push(rep);

    io::write_surgeries(create(dir, "surgeries.csv")?, &reports)?;
    let parts: Vec<String> = reports
        .iter()
        .map(|q| {
            format!(
                "{}: dI={:.3e}",
                q.surgery,
                q.energy_after.total - q.energy_before.total
            )
        })
        .collect();
    Ok(Outcome {
        summary: format!(
            "surgery_demo: {} converged={}",
            parts.join("; "),
            r.converged
        ),
        converged: r.converged,
    })
}
