//! Deterministic trajectory engine: closed-form evolution curves for the
//! tracked process statistics, their error windows, the ODE system they
//! satisfy, and numeric certification of the supersolution inequalities.
//!
//! Everything here is a pure function of (t, s) or (t, n, ε). Quantities
//! like p(t)^{-100κ} overflow doubles long before the domain ends, so error
//! functions and slacks are evaluated in log-space and expose a linear value
//! only when it is representable.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TrajError {
    #[error("t = {t} outside domain [0, 1/6{closed}")]
    Domain { t: f64, closed: &'static str },
    #[error("step h = {h} is not usable at t = {t}")]
    BadStep { t: f64, h: f64 },
}

/// Rescaled time → edge-survival fraction `p(t) = 1 − 6t`.
///
/// Domain `0 ≤ t ≤ 1/6`.
pub fn p_of(t: f64) -> Result<f64, TrajError> {
    if !(0.0..=1.0 / 6.0).contains(&t) {
        return Err(TrajError::Domain { t, closed: "]" });
    }
    Ok(1.0 - 6.0 * t)
}

/// Survival factor `r(t) = exp(−(7776/25)(1−s)² t³)`.
pub fn r_of(t: f64, s: f64) -> f64 {
    (-(7776.0 / 25.0) * (1.0 - s) * (1.0 - s) * t * t * t).exp()
}

/// Derived constants of a run: the special fraction and the error-window
/// exponents, plus the horizon `t_max` at which `p` reaches `n^{−δ}`.
#[derive(Clone, Copy, Debug)]
pub struct TrajectoryParams {
    pub n: f64,
    pub epsilon: f64,
    pub s: f64,
    pub delta: f64,
    pub kappa: f64,
    pub omega: f64,
    pub t_max: f64,
}

impl TrajectoryParams {
    /// Constants for palette slack `ε` at (possibly symbolic) size `n`.
    pub fn new(n: f64, epsilon: f64) -> Self {
        let s = (epsilon / 2.0) / (5.0 / 6.0 + epsilon / 2.0);
        Self::from_s(n, epsilon, s)
    }

    /// Constants with the special fraction given directly.
    pub fn from_s(n: f64, epsilon: f64, s: f64) -> Self {
        let q4 = (1.0 - s).powi(4);
        let delta = 1e-7 * s * q4;
        let kappa = 1e4 / (s * q4);
        let omega = 100.0 * (kappa + 1.0) * delta;
        let t_max = (1.0 - n.powf(-delta)) / 6.0;
        TrajectoryParams { n, epsilon, s, delta, kappa, omega, t_max }
    }
}

/// Identifier of a tracked-statistic trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrajId {
    Q,
    Y,
    A,
    B,
    C1,
    C2,
    C,
    D,
    E,
    F,
    Z0,
    Z1,
    Z2,
}

impl TrajId {
    pub const ALL: [TrajId; 13] = [
        TrajId::Q,
        TrajId::Y,
        TrajId::A,
        TrajId::B,
        TrajId::C1,
        TrajId::C2,
        TrajId::C,
        TrajId::D,
        TrajId::E,
        TrajId::F,
        TrajId::Z0,
        TrajId::Z1,
        TrajId::Z2,
    ];

    /// Exponent of n in the unscaled prediction `n^power · traj`.
    pub fn power(self) -> i32 {
        match self {
            TrajId::Q | TrajId::D | TrajId::E | TrajId::F | TrajId::Z0 => 3,
            TrajId::A | TrajId::B | TrajId::C | TrajId::Z1 => 2,
            TrajId::Y | TrajId::C1 | TrajId::C2 | TrajId::Z2 => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TrajId::Q => "q",
            TrajId::Y => "y",
            TrajId::A => "a",
            TrajId::B => "b",
            TrajId::C1 => "c1",
            TrajId::C2 => "c2",
            TrajId::C => "c",
            TrajId::D => "d",
            TrajId::E => "e",
            TrajId::F => "f",
            TrajId::Z0 => "z0",
            TrajId::Z1 => "z1",
            TrajId::Z2 => "z2",
        }
    }

    pub fn parse(name: &str) -> Option<TrajId> {
        TrajId::ALL.into_iter().find(|id| id.name() == name)
    }
}

/// Closed-form trajectory value at pre-validated `(p, r, s)`.
fn traj_at(id: TrajId, p: f64, r: f64, s: f64) -> f64 {
    let sq = 1.0 - s; // survival of the Bernoulli(s) special draw
    match id {
        TrajId::Q => p.powi(3) / 6.0,
        TrajId::Y => p * p,
        TrajId::A | TrajId::B => (5.0 / 6.0) * s * sq * sq * p.powi(5) * r * r,
        TrajId::C1 => (5.0 / 6.0) * s * sq * p * p * r,
        TrajId::C2 => (5.0 / 6.0) * sq * sq * p.powi(3) * r * r,
        TrajId::C => traj_at(TrajId::C1, p, r, s) * traj_at(TrajId::C2, p, r, s),
        TrajId::D | TrajId::E | TrajId::F => {
            (5.0 / 6.0) * s * sq.powi(3) * p.powi(7) * r.powi(3)
        }
        TrajId::Z0 => (5.0 / 6.0) * sq.powi(5) * p.powi(9) * r.powi(3),
        TrajId::Z1 => sq.powi(4) * (1.0 - p) * p.powi(6) * r * r,
        TrajId::Z2 => (6.0 / 5.0) * sq.powi(3) * (1.0 - p) * (1.0 - p) * p.powi(3) * r,
    }
}

/// Scaled trajectory value at rescaled time `t` with special fraction `s`.
pub fn traj(id: TrajId, t: f64, s: f64) -> Result<f64, TrajError> {
    let p = p_of(t)?;
    Ok(traj_at(id, p, r_of(t, s), s))
}

/// Identifier of an error-window function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrId {
    GY,
    GQ,
    GAb,
    GC1,
    GC2,
    GDef,
    G0,
    G1,
    G2,
    GC,
}

impl ErrId {
    pub const ALL: [ErrId; 10] = [
        ErrId::GY,
        ErrId::GQ,
        ErrId::GAb,
        ErrId::GC1,
        ErrId::GC2,
        ErrId::GDef,
        ErrId::G0,
        ErrId::G1,
        ErrId::G2,
        ErrId::GC,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ErrId::GY => "g_y",
            ErrId::GQ => "g_q",
            ErrId::GAb => "g_ab",
            ErrId::GC1 => "g_c1",
            ErrId::GC2 => "g_c2",
            ErrId::GDef => "g_def",
            ErrId::G0 => "g_0",
            ErrId::G1 => "g_1",
            ErrId::G2 => "g_2",
            ErrId::GC => "g_c",
        }
    }

    /// Offset e in the window shape `n^{−ω} p^{−100κ+e}` for the power-law
    /// families; `None` for the pure-n families and the composite `g_c`.
    fn p_offset(self) -> Option<f64> {
        match self {
            ErrId::GAb => Some(0.0),
            ErrId::GC1 => Some(-2.0),
            ErrId::GC2 => Some(-1.0),
            ErrId::GDef => Some(3.0),
            ErrId::G0 => Some(5.0),
            ErrId::G1 => Some(1.0),
            ErrId::G2 => Some(-1.0),
            _ => None,
        }
    }
}

/// An error-window width: natural log always, linear value only when
/// representable in a double.
#[derive(Clone, Copy, Debug)]
pub struct ErrValue {
    pub ln: f64,
    pub linear: Option<f64>,
}

impl ErrValue {
    fn from_ln(ln: f64) -> ErrValue {
        let linear = if ln.abs() < 700.0 { Some(ln.exp()) } else { None };
        ErrValue { ln, linear }
    }
}

/// Composite-window inner factor: `g_c / (n^{−ω} p^{−100κ})
/// = 2(c2·p⁻² + c1·p⁻¹) = (5/3)(1−s)pr[(1−s)r + s]`.
fn gc_inner(p: f64, r: f64, s: f64) -> f64 {
    (5.0 / 3.0) * (1.0 - s) * p * r * ((1.0 - s) * r + s)
}

/// Error-window width `err(id)` at time `t`. Domain `t ∈ [0, 1/6)`: the
/// power-law windows diverge as `p → 0`, and evaluation is log-space, so the
/// horizon `t_max` (where linear evaluation of `p^{−100κ}` would overflow)
/// does not bound the domain here.
pub fn err(id: ErrId, t: f64, params: &TrajectoryParams) -> Result<ErrValue, TrajError> {
    if !(0.0..1.0 / 6.0).contains(&t) {
        return Err(TrajError::Domain { t, closed: ")" });
    }
    let p = 1.0 - 6.0 * t;
    let ln_n = params.n.ln();
    let ln = match id {
        ErrId::GY => (-0.5 + params.delta) * ln_n,
        ErrId::GQ => (-1.0 + 2.0 * params.delta) * ln_n,
        ErrId::GC => {
            let r = r_of(t, params.s);
            -params.omega * ln_n - 100.0 * params.kappa * p.ln()
                + gc_inner(p, r, params.s).ln()
        }
        _ => {
            let e = id.p_offset().unwrap();
            -params.omega * ln_n + (-100.0 * params.kappa + e) * p.ln()
        }
    };
    Ok(ErrValue::from_ln(ln))
}

/// Central-difference residual of the evolution equation for `id` at `t`:
/// `|d/dt traj(id) − rhs(id)|` with the right-hand side assembled from the
/// closed forms. Defined for the seven governed ids
/// {a, c1, c2, d, z0, z1, z2}.
pub fn ode_residual(id: TrajId, t: f64, s: f64, h: f64) -> Result<f64, TrajError> {
    if h <= 0.0 || t - h < 0.0 || t + h > 1.0 / 6.0 {
        return Err(TrajError::BadStep { t, h });
    }
    let v = |id: TrajId, t: f64| traj(id, t, s);
    let deriv = (v(id, t + h)? - v(id, t - h)?) / (2.0 * h);

    let p = p_of(t)?;
    let r = r_of(t, s);
    let g = |id: TrajId| traj_at(id, p, r, s);
    let (q, y, a, c1, c2, d, z0, z1, z2) = (
        g(TrajId::Q),
        g(TrajId::Y),
        g(TrajId::A),
        g(TrajId::C1),
        g(TrajId::C2),
        g(TrajId::D),
        g(TrajId::Z0),
        g(TrajId::Z1),
        g(TrajId::Z2),
    );
    let qc = q * c1 * c2;
    let rhs = match id {
        TrajId::A | TrajId::B => {
            -5.0 * a * d / (2.0 * qc) - 6.0 * a * a * z2 / qc - 2.0 * a * y / q
        }
        TrajId::C1 => -5.0 * d * c1 / (3.0 * qc) - 3.0 * a * z2 * c1 / qc,
        TrajId::C2 => -5.0 * d * c2 / (2.0 * qc) - 6.0 * a * z2 * c2 / qc,
        TrajId::D | TrajId::E | TrajId::F => {
            -20.0 * d * d / (6.0 * qc) - 9.0 * a * z2 * d / qc - 3.0 * y * d / q
        }
        TrajId::Z0 => -5.0 * d * z0 / qc - 9.0 * a * z2 * z0 / qc - 3.0 * y * z0 / q,
        TrajId::Z1 => {
            a * z0 / qc - 10.0 * d * z1 / (3.0 * qc) - 6.0 * a * z2 * z1 / qc - 2.0 * y * z1 / q
        }
        TrajId::Z2 => {
            2.0 * a * z1 / qc - 5.0 * d * z2 / (3.0 * qc) - 3.0 * a * z2 * z2 / qc - y * z2 / q
        }
        _ => return Err(TrajError::Domain { t, closed: "]" }),
    };
    Ok((deriv - rhs).abs())
}

/// One certified supersolution slack: the left-hand side of the window
/// inequality for a family, evaluated exactly (composite window included in
/// closed form, not by its upper bound).
///
/// Every term shares the factor `n^{−ω} p^{−100κ}`; `inner` is the remaining
/// polynomial-in-p value, whose sign is the slack's sign. `ln_abs` is
/// `ln |slack|`, and `linear` is populated when the slack fits in a double.
#[derive(Clone, Copy, Debug)]
pub struct SlackValue {
    pub family: &'static str,
    pub inner: f64,
    pub positive: bool,
    pub ln_abs: f64,
    pub linear: Option<f64>,
}

/// Evaluate the seven window-inequality slacks at time `t`. Positivity of
/// every entry certifies the windows form a supersolution at this point.
pub fn check_supersolution(
    t: f64,
    params: &TrajectoryParams,
) -> Result<[SlackValue; 7], TrajError> {
    if !(0.0..1.0 / 6.0).contains(&t) {
        return Err(TrajError::Domain { t, closed: ")" });
    }
    let p = 1.0 - 6.0 * t;
    let r = r_of(t, params.s);
    let k = params.kappa;
    let gc = gc_inner(p, r, params.s);
    // d/dt of n^{−ω}p^{−100κ+e} contributes 6(100κ−e)·p^{e−1} to the inner
    // polynomial; each damping term C·κ·p^j·g_X contributes −C·κ·p^{j+e_X}.
    let dt = |e: f64| 6.0 * (100.0 * k - e) * p.powf(e - 1.0);
    let pw = |e: f64| p.powf(e);

    let inner = [
        ("ab", dt(0.0) - 30.0 * k * (pw(1.0) + pw(-1.0) + pw(-1.0) * gc)),
        ("c1", dt(-2.0) - 30.0 * k * (pw(-2.0) + pw(-3.0) + pw(-4.0) * gc + pw(-3.0))),
        ("c2", dt(-1.0) - 30.0 * k * (pw(-2.0) + pw(-2.0) + pw(-3.0) * gc + pw(-2.0))),
        ("def", dt(3.0) - 30.0 * k * (pw(3.0) + pw(2.0) + pw(2.0) + pw(1.0) * gc)),
        ("z0", dt(5.0) - 30.0 * k * (pw(5.0) + pw(4.0) + pw(4.0) + pw(3.0) * gc)),
        ("z1", dt(1.0) - 40.0 * k * (pw(2.0) + pw(1.0) + pw(1.0) + pw(-1.0) * gc)),
        ("z2", dt(-1.0) - 40.0 * k * (pw(-2.0) + pw(-2.0) + pw(-2.0) + pw(-3.0) * gc)),
    ];

    let ln_shared = -params.omega * params.n.ln() - 100.0 * k * p.ln();
    Ok(inner.map(|(family, inner)| {
        let ln_abs = ln_shared + inner.abs().ln();
        let linear = if ln_abs.abs() < 700.0 {
            Some(inner.signum() * ln_abs.exp())
        } else {
            None
        };
        SlackValue { family, inner, positive: inner > 0.0, ln_abs, linear }
    }))
}

/// One of the four closed-form rate bounds used by the drift estimates.
#[derive(Clone, Copy, Debug)]
pub struct HelperCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Evaluate the four rate bounds at `(t, s)`:
/// `d/(qc) ≤ 50p⁻¹`, `az₂/(qc) ≤ 10`, `a/(qc) ≤ 10p⁻³`, `y/q ≤ 10p⁻¹`.
pub fn helper_bounds(t: f64, s: f64) -> Result<[HelperCheck; 4], TrajError> {
    let p = p_of(t)?;
    if p <= 0.0 {
        return Err(TrajError::Domain { t, closed: ")" });
    }
    let r = r_of(t, s);
    let g = |id: TrajId| traj_at(id, p, r, s);
    let (q, y, a, d, z2) = (g(TrajId::Q), g(TrajId::Y), g(TrajId::A), g(TrajId::D), g(TrajId::Z2));
    let qc = q * g(TrajId::C1) * g(TrajId::C2);
    let checks = [
        ("d_over_qc", d / qc, 50.0 / p),
        ("az2_over_qc", a * z2 / qc, 10.0),
        ("a_over_qc", a / qc, 10.0 / p.powi(3)),
        ("y_over_q", y / q, 10.0 / p),
    ];
    Ok(checks.map(|(name, lhs, bound)| HelperCheck { name, lhs, bound, holds: lhs <= bound }))
}

/// Uniform grid of `points` times on `[lo, hi]` (default certification grid
/// is 50 points on [0.01, 0.15]).
pub fn time_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && hi > lo);
    (0..points).map(|j| lo + (hi - lo) * j as f64 / (points - 1) as f64).collect()
}

/// Default certification grid: 50 uniform points on [0.01, 0.15].
pub fn default_grid() -> Vec<f64> {
    time_grid(0.01, 0.15, 50)
}

/// CSV table of all trajectories over a grid; when `params` is given, the
/// error-window columns (natural logs) are appended.
pub fn traj_table_csv(s: f64, grid: &[f64], params: Option<&TrajectoryParams>) -> String {
    let mut out = String::from("t,p,r,q,y,a,c1,c2,c,d,z0,z1,z2");
    if params.is_some() {
        for id in ErrId::ALL {
            out.push_str(",ln_");
            out.push_str(id.name());
        }
    }
    out.push('\n');
    let cols = [
        TrajId::Q,
        TrajId::Y,
        TrajId::A,
        TrajId::C1,
        TrajId::C2,
        TrajId::C,
        TrajId::D,
        TrajId::Z0,
        TrajId::Z1,
        TrajId::Z2,
    ];
    for &t in grid {
        let p = p_of(t).expect("grid must lie in [0, 1/6]");
        let r = r_of(t, s);
        out.push_str(&format!("{t},{p},{r}"));
        for id in cols {
            out.push_str(&format!(",{}", traj_at(id, p, r, s)));
        }
        if let Some(params) = params {
            for id in ErrId::ALL {
                match err(id, t, params) {
                    Ok(e) => out.push_str(&format!(",{}", e.ln)),
                    Err(_) => out.push_str(",nan"),
                }
            }
        }
        out.push('\n');
    }
    out
}
