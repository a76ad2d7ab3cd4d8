//! Saturated integral control of a damped mass with a first-order actuator
//! lag: nominal loop `k_i/(s²(s+d))` through a unit-sector saturation,
//! multiplicative lag uncertainty `Δ = −τs/(1+τs)`.

use std::fs;

use serde_json::{json, Value};
use stripgain::dominance::{count_right, sector_slope_gain, slope_closed_loop, slope_grid, DEFAULT_SLOPES};
use stripgain::strip::frequency_response_data;
use stripgain::{
    classify_attractors, feedback_compose, realize, small_gain_check, strip_gain, strip_norm, LineMethod,
    RationalFunction, SmallGainVerdict, StateSpace, Strip,
};

use crate::commands::{dominance_json, envelope_min_re, frequency_grid, norm_json, nyquist_csv, strip_gain_json};
use crate::json::{num, nums};
use crate::{CliError, Envelope, Inputs, Output, Sec5Args};

const P: usize = 2;

/// Published figures for the reference setup, shown next to ours.
struct Reported;

impl Reported {
    const DELTA_LO: f64 = 1.1111;
    const DELTA_HI: f64 = 1.0526;
    const GAMMA_LO: f64 = 0.3528;
    const GAMMA_HI: f64 = 0.1414;
    const MARGIN: f64 = 2.8345;
}

fn is_reference_setup(a: &Sec5Args) -> bool {
    a.d == 5.0 && a.ki == -1.0 && a.tau == 0.1 && a.strip == (1.0, 2.0)
}

fn annotation(quantity: &str, reported: f64, computed: f64) -> Value {
    json!({
        "quantity": quantity,
        "reported": num(reported),
        "computed": num(computed),
        "note": "reported value is not asserted; the computed value is authoritative",
    })
}

fn lag_uncertainty(tau: f64) -> Result<RationalFunction, CliError> {
    if tau == 0.0 {
        return Ok(RationalFunction::zero());
    }
    Ok(RationalFunction::from_coeffs(&[0.0, -tau], &[1.0, tau])?)
}

fn eig_json(ss: &StateSpace) -> Result<Value, CliError> {
    let mut ev = ss.eigenvalues()?;
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(Value::Array(ev.iter().map(|e| nums(&[e.re, e.im])).collect()))
}

pub(crate) fn run(a: &Sec5Args, args: &[String], inputs: &Inputs) -> Result<Output, CliError> {
    for (name, v) in [("d", a.d), ("ki", a.ki), ("tau", a.tau), ("tol", a.tol)] {
        if !v.is_finite() {
            return Err(CliError::Input(format!("--{name} must be finite")));
        }
    }
    if a.d < 0.0 || a.tau < 0.0 {
        return Err(CliError::Input("--d and --tau must be non-negative".into()));
    }
    let mut env = Envelope::new("example-sec5", args, inputs.digest());
    let strip = Strip::new(a.strip.0, a.strip.1)?;
    let (lo_line, hi_line) = (strip.lo_line(), strip.hi_line());
    env.result(
        "parameters",
        json!({ "d": num(a.d), "ki": num(a.ki), "tau": num(a.tau), "strip": nums(&[strip.lo(), strip.hi()]) }),
    );

    // uncertainty
    let delta = lag_uncertainty(a.tau)?;
    let delta_norm = strip_norm(&delta, &strip, LineMethod::Bisection { tol: a.tol })?;
    let delta_grid = strip_norm(&delta, &strip, LineMethod::Grid)?;
    let (d_lo, d_hi) = delta_norm.boundary_values.unwrap_or((delta_norm.value, delta_norm.value));
    let delta_right = delta.pole_partition(&strip)?.0;
    env.result(
        "delta",
        json!({
            "num": nums(delta.num().coeffs()),
            "den": nums(delta.den().coeffs()),
            "poles_right_of_strip": delta_right,
            "norm": norm_json(&delta_norm),
            "grid_oracle": num(delta_grid.value),
        }),
    );

    // nominal loop and its slope-1 closure
    let g = RationalFunction::from_coeffs(&[a.ki], &[0.0, 0.0, a.d, 1.0])?;
    let g_ss = realize(&g)?;
    let t1 = slope_closed_loop(&g_ss, 1.0)?;
    let nominal = strip_gain(&t1, P, &strip, a.tol, true)?;
    let gamma = nominal.lo.bracket.1.max(nominal.hi.bracket.1);
    env.result(
        "nominal",
        json!({
            "num": nums(g.num().coeffs()),
            "den": nums(g.den().coeffs()),
            "slope_1_gain": strip_gain_json(&nominal),
        }),
    );
    for (key, c) in [("nominal_lo", &nominal.lo), ("nominal_hi", &nominal.hi)] {
        if let (Some(p), Some(gc)) = (&c.p_matrix, c.certified_gamma) {
            env.certificate(
                key,
                json!({ "lambda": num(c.lambda), "certified_gamma": num(gc), "P": crate::json::matrix(p), "epsilon": num(c.epsilon) }),
            );
        } else {
            env.warn(format!("no verified LMI certificate for the slope-1 loop at rate {}", c.lambda));
        }
    }

    let slopes = slope_grid(0.0, 1.0, DEFAULT_SLOPES);
    let mut grid_bounds = Vec::new();
    for line in [&lo_line, &hi_line] {
        match sector_slope_gain(&g_ss, &slopes, P, line, a.tol) {
            Ok(b) => grid_bounds.push(json!({
                "lambda": num(line.lambda()),
                "gamma": num(b.gamma),
                "label": b.label,
                "per_slope": b.per_slope.iter().map(|&(s, g)| json!({ "slope": num(s), "gamma": num(g) })).collect::<Vec<_>>(),
            })),
            Err(e) => {
                env.warn(format!("slope-grid bound unavailable at rate {}: {e}", line.lambda()));
            }
        }
    }
    env.result("slope_grid", Value::Array(grid_bounds));
    env.warn("slope-grid bound: maximum over linearizations at sampled slopes in [0, 1], not a common-certificate sector bound");

    // small gain
    let product = delta_norm.bracket.map_or(delta_norm.value, |b| b.1) * gamma;
    let margin = if gamma > 0.0 { 1.0 / gamma } else { f64::INFINITY };
    let mut small_gain_ok = product < 1.0;
    let neg_delta = realize(&delta.scale(-1.0))?;
    if delta_right > 0 {
        small_gain_ok = false;
        env.warn(format!(
            "the uncertainty has {delta_right} pole(s) right of the strip, so it is not 0-dominant and the small-gain test does not apply"
        ));
    } else {
        let rep = small_gain_check(&t1, P, &neg_delta, 0, &strip, a.tol)?;
        if let SmallGainVerdict::Confirmed { lo, hi, .. } = &rep.verdict {
            env.certificate("perturbed_lo", dominance_json(lo).1);
            env.certificate("perturbed_hi", dominance_json(hi).1);
        } else {
            small_gain_ok = false;
        }
    }
    env.result(
        "small_gain",
        json!({ "product": num(product), "holds": small_gain_ok, "tolerated_uncertainty_norm": num(margin) }),
    );

    // direct check on the perturbed loop, lag included
    let perturbed = feedback_compose(&t1, &neg_delta)?;
    let mid = 0.5 * (strip.lo() + strip.hi());
    let mut counts = Vec::new();
    let mut eig_ok = true;
    for lam in [strip.lo(), mid, strip.hi()] {
        let k = count_right(perturbed.a(), lam)?;
        eig_ok &= k == P;
        counts.push(json!({ "lambda": num(lam), "right": k }));
    }
    env.result(
        "perturbed",
        json!({ "order": perturbed.order(), "eigenvalues": eig_json(&perturbed)?, "counts": counts, "dominant": eig_ok }),
    );

    // Nyquist envelope at the lower rate
    let omegas = frequency_grid(1e-3, 1e3, a.points)?;
    let rows = frequency_response_data(&g, &lo_line, &omegas, delta_norm.value)?;
    let min_re = envelope_min_re(&rows);
    let nominal_min_re = rows.iter().map(|r| r.re).fold(f64::INFINITY, f64::min);
    let clear = min_re > -1.0;
    if let Some(path) = &a.out {
        fs::write(path, nyquist_csv(&rows)).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    env.result(
        "nyquist",
        json!({
            "lambda": num(lo_line.lambda()),
            "radius": num(delta_norm.value),
            "rows": rows.len(),
            "out": a.out.as_ref().map(|p| p.display().to_string()),
            "nominal_min_re": num(nominal_min_re),
            "envelope_min_re": num(min_re),
            "clear_of_critical_half_plane": clear,
        }),
    );

    if is_reference_setup(a) {
        let lo_g = nominal.lo.gamma;
        let hi_g = nominal.hi.gamma;
        env.result(
            "reported_comparison",
            json!([
                annotation("uncertainty norm on the line at rate 1", Reported::DELTA_LO, d_lo),
                annotation("uncertainty norm on the line at rate 2", Reported::DELTA_HI, d_hi),
                annotation("uncertainty norm on the strip", Reported::DELTA_LO.max(Reported::DELTA_HI), delta_norm.value),
                annotation("nominal gain at rate 1", Reported::GAMMA_LO, lo_g),
                annotation("nominal gain at rate 2", Reported::GAMMA_HI, hi_g),
                annotation("nominal strip gain", Reported::GAMMA_LO.max(Reported::GAMMA_HI), nominal.gamma),
                annotation("tolerated uncertainty norm", Reported::MARGIN, margin),
            ]),
        );
    }

    let confirmed = small_gain_ok && eig_ok;
    let verdict = format!("robust 2-dominance: {}", if confirmed { "CONFIRMED" } else { "NOT CONFIRMED" });
    env.result("attractors", json!(classify_attractors(P)));
    env.result("verdict", json!(verdict));
    Ok(Output {
        stdout: env.render() + "\n",
        notes: vec![verdict],
    })
}
