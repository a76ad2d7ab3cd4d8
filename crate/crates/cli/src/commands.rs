use std::fmt::Write as _;
use std::fs;

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};
use stripgain::dominance::{classify_attractors, DominanceCertificate, GainCertificate};
use stripgain::laplace::{Direction, LaplacePair, Roc, SignalSpec, SignalTerm};
use stripgain::strip::{default_grid, log_grid, BodeRow, FrequencyRow};
use stripgain::{
    bode_data, dominance_check, forward, frequency_response_data, inverse, l2p_gain, line_norm_bisection,
    line_norm_grid, roc_options, small_gain_check, strip_gain, strip_norm, Line, LineMethod, NormResult,
    RationalFunction, SmallGainVerdict, Strip, StripGain,
};

use crate::json::{csv_num, matrix, num, nums};
use crate::{CliError, DominanceArgs, Envelope, FreqArgs, GainArgs, Inputs, LaplaceArgs, LaplaceOp, Method, NormArgs, Output, Region, SmallGainArgs};

/// Line or strip after routing a degenerate strip to its line.
pub(crate) enum Rates {
    Line(Line),
    Strip(Strip),
}

pub(crate) fn rates(region: &Region, env: &mut Envelope) -> Result<Rates, CliError> {
    match (region.line, region.strip) {
        (Some(l), _) => Ok(Rates::Line(Line::new(l)?)),
        (None, Some((lo, hi))) if lo == hi => {
            env.warn(format!("degenerate strip {lo},{hi} treated as the line at rate {lo}"));
            Ok(Rates::Line(Line::new(lo)?))
        }
        (None, Some((lo, hi))) => Ok(Rates::Strip(Strip::new(lo, hi)?)),
        (None, None) => Err(CliError::Input("one of --strip or --line is required".into())),
    }
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(CliError::Input(format!("--tol must be positive and finite, got {tol}")))
    }
}

pub(crate) fn pair(p: Option<(f64, f64)>) -> Value {
    match p {
        Some((a, b)) => nums(&[a, b]),
        None => Value::Null,
    }
}

pub(crate) fn norm_json(r: &NormResult) -> Value {
    json!({
        "value": num(r.value),
        "method": r.method.as_str(),
        "tolerance": num(r.tolerance),
        "peak_frequency": num(r.peak_frequency),
        "boundary": r.boundary.map(|b| b.as_str()),
        "bracket": pair(r.bracket),
        "boundary_values": r.boundary_values.map(|(lo, hi)| json!({ "lo": num(lo), "hi": num(hi) })),
    })
}

fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6f64.max(1e-3 * a.abs().max(b.abs()))
}

fn finish(env: &Envelope) -> Output {
    Output {
        stdout: env.render() + "\n",
        notes: Vec::new(),
    }
}

pub(crate) fn norm(a: &NormArgs, args: &[String], inputs: &mut Inputs) -> Result<Output, CliError> {
    check_tol(a.tol)?;
    let model = inputs.model(&a.model)?;
    let mut env = Envelope::new("norm", args, inputs.digest());
    let g = model.tf()?;
    let rates = rates(&a.region, &mut env)?;
    let (primary, oracle) = match &rates {
        Rates::Line(line) => {
            let ss = model.ss()?;
            let bis = || line_norm_bisection(&ss, line, a.tol);
            let grid = || line_norm_grid(&g, line, &default_grid(&g));
            match a.method {
                Method::Bisection => (bis()?, grid()?),
                Method::Grid => (grid()?, bis()?),
            }
        }
        Rates::Strip(strip) => {
            let bis = LineMethod::Bisection { tol: a.tol };
            let (m1, m2) = match a.method {
                Method::Bisection => (bis, LineMethod::Grid),
                Method::Grid => (LineMethod::Grid, bis),
            };
            (strip_norm(&g, strip, m1)?, strip_norm(&g, strip, m2)?)
        }
    };
    env.result("norm", norm_json(&primary));
    if let Rates::Line(line) = &rates {
        env.result("lambda", num(line.lambda()));
    } else if let Rates::Strip(s) = &rates {
        env.result("strip", nums(&[s.lo(), s.hi()]));
    }
    let ok = agree(primary.value, oracle.value);
    env.result(
        "oracle",
        json!({ "method": oracle.method.as_str(), "value": num(oracle.value), "agrees": ok }),
    );
    if !ok {
        env.warn(format!(
            "oracle discrepancy: {} gives {:.9e}, {} gives {:.9e}",
            primary.method.as_str(),
            primary.value,
            oracle.method.as_str(),
            oracle.value
        ));
    }
    Ok(finish(&env))
}

pub(crate) fn dominance_json(c: &DominanceCertificate) -> (Value, Value) {
    let summary = json!({
        "certified": true,
        "p": c.p,
        "lambda": num(c.lambda),
        "epsilon": num(c.epsilon),
        "lmi_residual": num(c.lmi_residual),
        "inertia": [c.inertia.negative, c.inertia.zero, c.inertia.positive],
    });
    let cert = json!({
        "P": matrix(&c.p_matrix),
        "epsilon": num(c.epsilon),
        "inertia": [c.inertia.negative, c.inertia.zero, c.inertia.positive],
        "lmi_residual": num(c.lmi_residual),
    });
    (summary, cert)
}

pub(crate) fn dominance(a: &DominanceArgs, args: &[String], inputs: &mut Inputs) -> Result<Output, CliError> {
    let model = inputs.model(&a.model)?;
    let mut env = Envelope::new("dominance", args, inputs.digest());
    let ss = model.ss()?;
    let c = dominance_check(&ss, a.p, a.lambda)?;
    let (summary, cert) = dominance_json(&c);
    env.result("dominance", summary);
    env.result("attractors", json!(classify_attractors(a.p)));
    env.certificate("dominance", cert);
    Ok(finish(&env))
}

pub(crate) fn gain_json(g: &GainCertificate) -> Value {
    json!({
        "gamma": num(g.gamma),
        "lambda": num(g.lambda),
        "p": g.p,
        "bracket": nums(&[g.bracket.0, g.bracket.1]),
        "peak_frequency": num(g.peak_frequency),
    })
}

fn gain_cert_json(g: &GainCertificate) -> Option<Value> {
    let p = g.p_matrix.as_ref()?;
    Some(json!({
        "lambda": num(g.lambda),
        "certified_gamma": g.certified_gamma.map(num),
        "P": matrix(p),
        "epsilon": num(g.epsilon),
        "lmi_residual": g.lmi_residual.map(num),
    }))
}

pub(crate) fn strip_gain_json(s: &StripGain) -> Value {
    json!({
        "gamma": num(s.gamma),
        "boundary": s.boundary.as_str(),
        "lo": gain_json(&s.lo),
        "hi": gain_json(&s.hi),
        "interior": s.interior.iter().map(|&(l, g)| json!({ "lambda": num(l), "gamma": num(g) })).collect::<Vec<_>>(),
    })
}

pub(crate) fn gain(a: &GainArgs, args: &[String], inputs: &mut Inputs) -> Result<Output, CliError> {
    check_tol(a.tol)?;
    let model = inputs.model(&a.model)?;
    let mut env = Envelope::new("gain", args, inputs.digest());
    let ss = model.ss()?;
    let mut certs = Vec::new();
    match rates(&a.region, &mut env)? {
        Rates::Line(line) => {
            let g = l2p_gain(&ss, a.p, &line, a.tol, a.certificate)?;
            env.result("gain", gain_json(&g));
            certs.push(("line", g));
        }
        Rates::Strip(strip) => {
            let s = strip_gain(&ss, a.p, &strip, a.tol, a.certificate)?;
            env.result("gain", strip_gain_json(&s));
            certs.push(("lo", s.lo));
            certs.push(("hi", s.hi));
        }
    }
    if a.certificate {
        for (key, g) in &certs {
            match gain_cert_json(g) {
                Some(v) => {
                    env.certificate(key, v);
                }
                None => {
                    env.warn(format!(
                        "no verified LMI certificate at rate {}; gamma rests on the bisection alone",
                        g.lambda
                    ));
                }
            }
        }
    }
    Ok(finish(&env))
}

pub(crate) fn smallgain(a: &SmallGainArgs, args: &[String], inputs: &mut Inputs) -> Result<Output, CliError> {
    check_tol(a.tol)?;
    let m1 = inputs.model(&a.model1)?;
    let m2 = inputs.model(&a.model2)?;
    let mut env = Envelope::new("smallgain", args, inputs.digest());
    let strip = Strip::new(a.strip.0, a.strip.1)?;
    let rep = small_gain_check(&m1.ss()?, a.p1, &m2.ss()?, a.p2, &strip, a.tol)?;
    env.result("gain1", strip_gain_json(&rep.gain1));
    env.result("gain2", strip_gain_json(&rep.gain2));
    env.result("product", num(rep.product));
    match &rep.verdict {
        SmallGainVerdict::Confirmed { closed_loop, lo, hi } => {
            env.result("verdict", json!("confirmed"));
            env.result(
                "closed_loop",
                json!({ "order": closed_loop.order(), "p": a.p1 + a.p2, "A": matrix(closed_loop.a()) }),
            );
            env.certificate("lo", dominance_json(lo).1);
            env.certificate("hi", dominance_json(hi).1);
        }
        SmallGainVerdict::Inconclusive => {
            env.result("verdict", json!("inconclusive"));
            env.warn(format!("gain product {:.6} >= 1: the small-gain test is inconclusive", rep.product));
        }
    }
    Ok(finish(&env))
}

pub(crate) fn frequency_grid(omega_min: f64, omega_max: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points == 0 {
        return Err(CliError::Input("--points must be at least 1".into()));
    }
    if !(omega_min >= 0.0) || !omega_max.is_finite() || (points > 1 && omega_max <= omega_min) {
        return Err(CliError::Input(format!(
            "need 0 <= omega-min < omega-max < inf, got {omega_min}, {omega_max}"
        )));
    }
    if omega_min > 0.0 {
        return Ok(log_grid(omega_min, omega_max, points));
    }
    let mut grid = vec![0.0];
    grid.extend(log_grid(omega_max * 1e-6, omega_max, points - 1));
    Ok(grid)
}

pub(crate) fn nyquist_csv(rows: &[FrequencyRow]) -> String {
    let mut s = String::from("omega,re,im,mag,disk_radius\n");
    for r in rows {
        let cells = [r.omega, r.re, r.im, r.mag, r.disk_radius].map(csv_num);
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

fn bode_csv(rows: &[BodeRow]) -> String {
    let mut s = String::from("omega,mag_db,phase_deg\n");
    for r in rows {
        let cells = [r.omega, r.mag_db, r.phase_deg].map(csv_num);
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

/// `min_ω Re G_λ(iω) − R|G_λ(iω)|`: how far the envelope of uncertainty
/// disks reaches to the left.
pub(crate) fn envelope_min_re(rows: &[FrequencyRow]) -> f64 {
    rows.iter().map(|r| r.re - r.disk_radius).fold(f64::INFINITY, f64::min)
}

fn freq_setup(a: &FreqArgs, inputs: &mut Inputs) -> Result<(RationalFunction, Line, Vec<f64>), CliError> {
    let model = inputs.model(&a.model)?;
    let g = model.tf()?;
    let line = Line::new(a.lambda)?;
    let grid = frequency_grid(a.omega_min, a.omega_max, a.points)?;
    Ok((g, line, grid))
}

fn emit_csv(verb: &str, a: &FreqArgs, args: &[String], inputs: &Inputs, csv: String, extra: Vec<(&str, Value)>) -> Result<Output, CliError> {
    let Some(path) = &a.out else {
        return Ok(Output {
            stdout: csv,
            notes: Vec::new(),
        });
    };
    fs::write(path, &csv).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut env = Envelope::new(verb, args, inputs.digest());
    env.result("out", json!(path.display().to_string()));
    env.result("rows", json!(a.points));
    env.result("lambda", num(a.lambda));
    for (k, v) in extra {
        env.result(k, v);
    }
    Ok(finish(&env))
}

pub(crate) fn nyquist(a: &FreqArgs, args: &[String], inputs: &mut Inputs) -> Result<Output, CliError> {
    let (g, line, grid) = freq_setup(a, inputs)?;
    let rows = frequency_response_data(&g, &line, &grid, a.uncertainty)?;
    let min_re = envelope_min_re(&rows);
    let peak = rows.iter().map(|r| r.mag).fold(0.0, f64::max);
    let extra = vec![
        ("uncertainty", num(a.uncertainty)),
        ("peak_magnitude", num(peak)),
        ("envelope_min_re", num(min_re)),
        ("clear_of_critical_half_plane", json!(min_re > -1.0)),
    ];
    emit_csv("nyquist", a, args, inputs, nyquist_csv(&rows), extra)
}

pub(crate) fn bode(a: &FreqArgs, args: &[String], inputs: &mut Inputs) -> Result<Output, CliError> {
    let (g, line, grid) = freq_setup(a, inputs)?;
    let rows = bode_data(&g, &line, &grid)?;
    let peak = rows.iter().map(|r| r.mag_db).fold(f64::NEG_INFINITY, f64::max);
    emit_csv("bode", a, args, inputs, bode_csv(&rows), vec![("peak_mag_db", num(peak))])
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFile {
    coeff: f64,
    #[serde(default)]
    coeff_im: f64,
    #[serde(default)]
    power: u32,
    exponent: f64,
    #[serde(default)]
    exponent_im: f64,
    direction: DirectionFile,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum DirectionFile {
    Causal,
    Anticausal,
}

fn parse_signal(raw: &str, inputs: &mut Inputs) -> Result<SignalSpec, CliError> {
    let trimmed = raw.trim_start();
    let text = if trimmed.starts_with('[') || trimmed.starts_with('{') {
        raw.to_string()
    } else {
        inputs.read(std::path::Path::new(raw))?
    };
    let terms: Vec<TermFile> = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("signal, line {} column {}: {e}", e.line(), e.column())))?;
    let terms = terms
        .into_iter()
        .map(|t| {
            let dir = match t.direction {
                DirectionFile::Causal => Direction::Causal,
                DirectionFile::Anticausal => Direction::Anticausal,
            };
            SignalTerm::new(Complex64::new(t.coeff, t.coeff_im), t.power, Complex64::new(t.exponent, t.exponent_im), dir)
        })
        .collect();
    Ok(SignalSpec::new(terms)?)
}

pub(crate) fn term_json(t: &SignalTerm) -> Value {
    json!({
        "coeff": num(t.coeff.re),
        "coeff_im": num(t.coeff.im),
        "power": t.power,
        "exponent": num(t.exponent.re),
        "exponent_im": num(t.exponent.im),
        "direction": t.direction.as_str(),
    })
}

fn roc_json(r: &Roc) -> Value {
    json!({ "lo": num(r.lo()), "hi": num(r.hi()), "text": r.to_string() })
}

fn rational_json(f: &RationalFunction) -> Value {
    let poles: Vec<Value> = f.poles().iter().map(|p| nums(&[p.re, p.im])).collect();
    json!({ "num": nums(f.num().coeffs()), "den": nums(f.den().coeffs()), "poles": poles })
}

pub(crate) fn laplace(a: &LaplaceArgs, args: &[String], inputs: &mut Inputs) -> Result<Output, CliError> {
    match &a.op {
        LaplaceOp::Forward { signal } => {
            let spec = parse_signal(signal, inputs)?;
            let mut env = Envelope::new("laplace", args, inputs.digest());
            let LaplacePair { f, roc } = forward(&spec)?;
            env.result("transform", rational_json(&f));
            env.result("roc", roc_json(&roc));
            Ok(finish(&env))
        }
        LaplaceOp::Invert { model, roc } => {
            let model = inputs.model(model)?;
            let mut env = Envelope::new("laplace", args, inputs.digest());
            let f = model.tf()?;
            let rocs = match roc {
                Some((lo, hi)) => vec![Roc::new(*lo, *hi)?],
                None => roc_options(&f),
            };
            let mut out = Vec::new();
            for r in &rocs {
                let spec = inverse(&f, r)?;
                out.push(json!({ "roc": roc_json(r), "terms": spec.terms().iter().map(term_json).collect::<Vec<_>>() }));
            }
            env.result("inverses", Value::Array(out));
            Ok(finish(&env))
        }
    }
}
