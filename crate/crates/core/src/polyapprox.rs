// Copyright 2026 QspSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Target polynomials in the Chebyshev basis: truncated Jacobi-Anger series for
//! cosine and sine, the exponential-decay series, the erf-based sign polynomial
//! and the even extension of the complex exponential (EECE).

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use crate::complexity::gamma;
use crate::error::{domain, QspError, Result};
use crate::numerics::{
    bessel_i_scaled, bessel_j, chebyshev_integrate, chebyshev_multiply, clenshaw, erf, lambert_w, C64,
};

/// Validation grid size used throughout.
pub const GRID_POINTS: usize = 1001;
/// Largest degree any constructor will produce.
pub const DEGREE_CAP: usize = 10_000;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    /// Parity of `d`, as carried by a degree-`d` QSP sequence.
    pub fn of_degree(d: usize) -> Self {
        if d % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Strictest tag compatible with the coefficient sparsity pattern.
    pub fn detect(coeffs: &[C64]) -> Self {
        let odd_zero = coeffs.iter().skip(1).step_by(2).all(|c| *c == ZERO);
        let even_zero = coeffs.iter().step_by(2).all(|c| *c == ZERO);
        match (odd_zero, even_zero) {
            (true, _) => Parity::Even,
            (false, true) => Parity::Odd,
            _ => Parity::Mixed,
        }
    }

    fn admits(self, k: usize) -> bool {
        match self {
            Parity::Even => k % 2 == 0,
            Parity::Odd => k % 2 == 1,
            Parity::Mixed => true,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Mixed => "mixed",
        })
    }
}

impl FromStr for Parity {
    type Err = QspError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            "mixed" => Ok(Parity::Mixed),
            _ => domain(format!("unknown parity {s:?}")),
        }
    }
}

/// Closed interval `[lo, hi]` inside `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const FULL: Interval = Interval { lo: -1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    /// `[-1, -gap] U [gap, 1]`.
    pub fn outside_gap(gap: f64) -> Vec<Interval> {
        vec![Interval::new(-1.0, -gap), Interval::new(gap, 1.0)]
    }

    /// `n` uniformly spaced points including both ends.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        if n <= 1 || self.hi == self.lo {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (n - 1) as f64;
        (0..n).map(|i| if i == n - 1 { self.hi } else { self.lo + h * i as f64 }).collect()
    }
}

/// Polynomial `sum_k c_k T_k(x)` with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevPolynomial {
    coeffs: Vec<C64>,
    parity: Parity,
    domain_note: Vec<Interval>,
}

impl ChebyshevPolynomial {
    /// Fails if the coefficients violate the declared parity.
    pub fn new(coeffs: Vec<C64>, parity: Parity, domain_note: Vec<Interval>) -> Result<Self> {
        if coeffs.is_empty() {
            return domain("a polynomial needs at least one coefficient");
        }
        if let Some(k) = (0..coeffs.len()).find(|&k| !parity.admits(k) && coeffs[k] != ZERO) {
            return Err(QspError::Contract(format!("coefficient {k} is nonzero in a polynomial tagged {parity}")));
        }
        Ok(Self { coeffs, parity, domain_note })
    }

    pub fn from_real(coeffs: &[f64], parity: Parity) -> Result<Self> {
        let c = coeffs.iter().map(|&v| C64::new(v, 0.0)).collect();
        Self::new(c, parity, vec![Interval::FULL])
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn domain_note(&self) -> &[Interval] {
        &self.domain_note
    }

    pub fn with_domain(mut self, domain_note: Vec<Interval>) -> Self {
        self.domain_note = domain_note;
        self
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    pub fn eval(&self, x: f64) -> Result<C64> {
        if !(x.abs() <= 1.0) {
            return domain(format!("polynomial evaluated outside [-1, 1] at {x}"));
        }
        Ok(clenshaw(&self.coeffs, x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> C64 {
        clenshaw(&self.coeffs, x)
    }

    /// Max of `|P|` on `[-1, 1]`: a uniform grid of `grid_points`, with every grid-local
    /// maximum refined by golden-section search over its two neighbouring cells.
    pub fn max_modulus(&self, grid_points: usize) -> f64 {
        let xs = Interval::FULL.grid(grid_points);
        let vs: Vec<f64> = xs.iter().map(|&x| self.eval_unchecked(x).norm()).collect();
        let mut best = vs.iter().copied().fold(0.0, f64::max);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let f = |x: f64| self.eval_unchecked(x).norm();
        for i in 1..xs.len().saturating_sub(1) {
            if vs[i] < vs[i - 1] || vs[i] < vs[i + 1] {
                continue;
            }
            let (mut lo, mut hi) = (xs[i - 1], xs[i + 1]);
            let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
            let (mut f1, mut f2) = (f(x1), f(x2));
            for _ in 0..60 {
                if f1 > f2 {
                    hi = x2;
                    (x2, f2) = (x1, f1);
                    x1 = hi - g * (hi - lo);
                    f1 = f(x1);
                } else {
                    lo = x1;
                    (x1, f1) = (x2, f2);
                    x2 = lo + g * (hi - lo);
                    f2 = f(x2);
                }
            }
            best = best.max(f1).max(f2);
        }
        best
    }

    /// `|P| <= 1 + 1e-9` on the validation grid.
    pub fn is_qsp_admissible(&self) -> bool {
        self.max_modulus(GRID_POINTS) <= 1.0 + 1e-9
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            parity: self.parity,
            domain_note: self.domain_note.clone(),
        }
    }

    /// Divide by the grid maximum of `|P|` when it exceeds 1.
    pub fn normalized(&self) -> Self {
        let m = self.max_modulus(GRID_POINTS);
        if m > 1.0 {
            self.scaled(1.0 / m)
        } else {
            self.clone()
        }
    }

    /// Text form: a `chebyshev parity=.. degree=..` header, then `k re im` per nonzero coefficient.
    pub fn to_text(&self) -> String {
        let mut out = format!("chebyshev parity={} degree={}\n", self.parity, self.degree());
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c != ZERO {
                out.push_str(&format!("{k} {:.16e} {:.16e}\n", c.re, c.im));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(QspError::Parse { line: 1, msg: "empty".into() })?;
        let bad = |line: usize, msg: &str| QspError::Parse { line: line + 1, msg: msg.into() };
        let mut parts = header.split_whitespace();
        if parts.next() != Some("chebyshev") {
            return Err(bad(0, "missing chebyshev header"));
        }
        let mut parity = None;
        let mut degree = None;
        for p in parts {
            match p.split_once('=') {
                Some(("parity", v)) => parity = Some(v.parse::<Parity>()?),
                Some(("degree", v)) => degree = Some(v.parse::<usize>().map_err(|_| bad(0, "bad degree"))?),
                _ => return Err(bad(0, "unexpected header field")),
            }
        }
        let parity = parity.ok_or_else(|| bad(0, "missing parity"))?;
        let degree = degree.ok_or_else(|| bad(0, "missing degree"))?;
        let mut coeffs = vec![ZERO; degree + 1];
        for (no, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(no, "expected `k re im`"));
            }
            let k: usize = f[0].parse().map_err(|_| bad(no, "bad index"))?;
            let re: f64 = f[1].parse().map_err(|_| bad(no, "bad real part"))?;
            let im: f64 = f[2].parse().map_err(|_| bad(no, "bad imaginary part"))?;
            if k > degree {
                return Err(bad(no, "index exceeds degree"));
            }
            coeffs[k] = C64::new(re, im);
        }
        Self::new(coeffs, parity, vec![Interval::FULL])
    }
}

/// Validation record for one polynomial against its target.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationReport {
    pub target_name: String,
    pub epsilon_requested: f64,
    pub epsilon_measured: f64,
    pub degree: usize,
}

/// Functions the constructors approximate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Cos {
        tau: f64,
    },
    Sin {
        tau: f64,
    },
    /// `e^{-i tau x}`.
    Exp {
        tau: f64,
    },
    /// `e^{-i tau |x|} = cos(tau x) - i sin(tau x) sign(x)`.
    Eece {
        tau: f64,
    },
    /// `e^{-a (x + 1)}`.
    ExpDecay {
        a: f64,
    },
    Sign,
    Erf {
        k: f64,
    },
}

impl Target {
    pub fn eval(&self, x: f64) -> C64 {
        match *self {
            Target::Cos { tau } => C64::new((tau * x).cos(), 0.0),
            Target::Sin { tau } => C64::new((tau * x).sin(), 0.0),
            Target::Exp { tau } => C64::from_polar(1.0, -tau * x),
            Target::Eece { tau } => C64::from_polar(1.0, -tau * x.abs()),
            Target::ExpDecay { a } => C64::new((-a * (x + 1.0)).exp(), 0.0),
            Target::Sign => C64::new(
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                },
                0.0,
            ),
            Target::Erf { k } => C64::new(erf(k * x), 0.0),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Target::Cos { tau } => format!("cos(tau={tau})"),
            Target::Sin { tau } => format!("sin(tau={tau})"),
            Target::Exp { tau } => format!("exp(-i tau x, tau={tau})"),
            Target::Eece { tau } => format!("eece(tau={tau})"),
            Target::ExpDecay { a } => format!("exp_decay(a={a})"),
            Target::Sign => "sign".into(),
            Target::Erf { k } => format!("erf(k={k})"),
        }
    }
}

/// Sup-norm distance between `poly` and `target` over uniform grids on `intervals`.
pub fn measure_error(
    poly: &ChebyshevPolynomial,
    target: &Target,
    intervals: &[Interval],
    grid_points: usize,
    epsilon_requested: f64,
) -> Result<ApproximationReport> {
    if intervals.is_empty() || grid_points == 0 {
        return domain("measure_error needs a nonempty interval list and grid");
    }
    let mut worst = 0.0f64;
    for iv in intervals {
        if !(iv.lo <= iv.hi) || iv.lo < -1.0 || iv.hi > 1.0 {
            return domain(format!("interval [{}, {}] is empty or outside [-1, 1]", iv.lo, iv.hi));
        }
        for x in iv.grid(grid_points) {
            worst = worst.max((poly.eval_unchecked(x) - target.eval(x)).norm());
        }
    }
    Ok(ApproximationReport {
        target_name: target.name(),
        epsilon_requested,
        epsilon_measured: worst,
        degree: poly.degree(),
    })
}

/// Solution `r > |tau|` of `(|tau| / r)^r = epsilon`.
pub fn r_function(tau: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0 / E) {
        return domain(format!("r_function needs epsilon in (0, 1/e), got {epsilon}"));
    }
    if tau == 0.0 || !tau.is_finite() {
        return domain(format!("r_function needs a finite nonzero tau, got {tau}"));
    }
    let t = tau.abs();
    Ok(t * lambert_w((1.0 / epsilon).ln() / t)?.exp())
}

/// `K = floor(r(e|tau|/2, 5 epsilon/4) / 2)`, and 0 at `tau = 0`.
pub fn truncation_index(tau: f64, epsilon: f64) -> Result<usize> {
    let e4 = 1.25 * epsilon;
    if !(e4 > 0.0 && e4 < 1.0 / E) {
        return domain(format!("truncation_index needs 5 epsilon/4 in (0, 1/e), got {e4}"));
    }
    if tau == 0.0 {
        return Ok(0);
    }
    Ok((0.5 * r_function(E * tau.abs() / 2.0, e4)?).floor() as usize)
}

fn check_degree(d: usize) -> Result<()> {
    if d > DEGREE_CAP {
        return Err(QspError::Capacity(format!("degree {d} exceeds the cap {DEGREE_CAP}")));
    }
    Ok(())
}

fn cos_coeffs(tau: f64, degree: usize) -> Vec<C64> {
    let mut c = vec![ZERO; degree + 1];
    c[0] = C64::new(bessel_j(0, tau), 0.0);
    for k in 1..=degree / 2 {
        let sign = if k % 2 == 0 { 2.0 } else { -2.0 };
        c[2 * k] = C64::new(sign * bessel_j(2 * k, tau), 0.0);
    }
    c
}

fn sin_coeffs(tau: f64, degree: usize) -> Vec<C64> {
    let mut c = vec![ZERO; degree + 1];
    for k in 0..=(degree.saturating_sub(1)) / 2 {
        if 2 * k + 1 > degree {
            break;
        }
        let sign = if k % 2 == 0 { 2.0 } else { -2.0 };
        c[2 * k + 1] = C64::new(sign * bessel_j(2 * k + 1, tau), 0.0);
    }
    c
}

/// Degree-`2K` truncation of the Jacobi-Anger series of `cos(tau x)`, scaled by `1/(1+epsilon)`.
pub fn jacobi_anger_cos(tau: f64, epsilon: f64) -> Result<ChebyshevPolynomial> {
    let k = truncation_index(tau, epsilon)?;
    check_degree(2 * k)?;
    let c = cos_coeffs(tau, 2 * k);
    Ok(ChebyshevPolynomial::new(c, Parity::Even, vec![Interval::FULL])?.scaled(1.0 / (1.0 + epsilon)))
}

/// Degree-`2K+1` truncation of the Jacobi-Anger series of `sin(tau x)`, scaled by `1/(1+epsilon)`.
pub fn jacobi_anger_sin(tau: f64, epsilon: f64) -> Result<ChebyshevPolynomial> {
    let k = truncation_index(tau, epsilon)?;
    check_degree(2 * k + 1)?;
    let c = sin_coeffs(tau, 2 * k + 1);
    Ok(ChebyshevPolynomial::new(c, Parity::Odd, vec![Interval::FULL])?.scaled(1.0 / (1.0 + epsilon)))
}

/// Jacobi-Anger cosine series cut at a given even degree, normalized to `|P| <= 1`.
pub fn jacobi_anger_cos_degree(tau: f64, degree: usize) -> Result<ChebyshevPolynomial> {
    if degree % 2 != 0 {
        return domain(format!("cosine degree must be even, got {degree}"));
    }
    check_degree(degree)?;
    Ok(ChebyshevPolynomial::new(cos_coeffs(tau, degree), Parity::Even, vec![Interval::FULL])?.normalized())
}

/// Jacobi-Anger sine series cut at a given odd degree, normalized to `|P| <= 1`.
pub fn jacobi_anger_sin_degree(tau: f64, degree: usize) -> Result<ChebyshevPolynomial> {
    if degree % 2 != 1 {
        return domain(format!("sine degree must be odd, got {degree}"));
    }
    check_degree(degree)?;
    Ok(ChebyshevPolynomial::new(sin_coeffs(tau, degree), Parity::Odd, vec![Interval::FULL])?.normalized())
}

/// Degree bound `sqrt(2 max(a e^2, ln(2/eps)) ln(4/eps))` for the decay series.
pub fn exp_decay_degree(a: f64, epsilon: f64) -> f64 {
    (2.0 * (a * E * E).max((2.0 / epsilon).ln()) * (4.0 / epsilon).ln()).sqrt()
}

fn exp_decay_coeffs(a: f64, degree: usize) -> Vec<C64> {
    (0..=degree)
        .map(|j| {
            let w = if j == 0 { 1.0 } else { 2.0 };
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            C64::new(w * sign * bessel_i_scaled(j, a), 0.0)
        })
        .collect()
}

/// Truncated modified Jacobi-Anger series of `e^{-a(x+1)}`.
pub fn exp_decay_poly(a: f64, epsilon: f64) -> Result<ChebyshevPolynomial> {
    if !(a > 0.0) {
        return domain(format!("exp_decay_poly needs a > 0, got {a}"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return domain(format!("exp_decay_poly needs epsilon in (0, 1), got {epsilon}"));
    }
    let d = exp_decay_degree(a, epsilon).ceil() as usize;
    check_degree(d)?;
    ChebyshevPolynomial::new(exp_decay_coeffs(a, d), Parity::Mixed, vec![Interval::FULL])
}

/// Steepness `k = (sqrt 2 / Delta) sqrt(W(8 / (pi eps^2)))` of the erf surrogate.
pub fn sign_steepness(epsilon: f64, delta: f64) -> Result<f64> {
    Ok(2f64.sqrt() / delta * lambert_w(8.0 / (PI * epsilon * epsilon))?.sqrt())
}

/// Odd polynomial of degree `gamma(eps, Delta)` within `eps` of `sign(x)` for `|x| >= Delta/2`.
pub fn sign_poly(epsilon: f64, delta: f64) -> Result<ChebyshevPolynomial> {
    let d = gamma(epsilon, delta)?;
    check_degree(d)?;
    let k = sign_steepness(epsilon, delta)?;
    // e^{-k^2 u^2} = e^{-a (T_2(u) + 1)} with a = k^2/2, and T_j(-T_2(u)) = (-1)^j T_{2j}(u).
    let half = (d - 1) / 2;
    let decay = exp_decay_coeffs(k * k / 2.0, half);
    let mut gauss = vec![ZERO; 2 * half + 1];
    for (j, c) in decay.into_iter().enumerate() {
        gauss[2 * j] = c;
    }
    let scale = 2.0 * k / PI.sqrt();
    let mut c: Vec<C64> = chebyshev_integrate(&gauss).into_iter().map(|v| v * scale).collect();
    for v in c.iter_mut().step_by(2) {
        *v = ZERO;
    }
    let p = ChebyshevPolynomial::new(c, Parity::Odd, Interval::outside_gap(delta / 2.0))?;
    Ok(p.normalized())
}

/// `P^cos_{eps/6} - i P^sin_{eps/6} P^sign_{eps/3, Delta}`, within `eps` of `e^{-i tau |x|}`
/// for `|x| >= Delta/2`. Both summands are even, so the result is tagged even.
pub fn eece_poly(epsilon: f64, delta: f64, tau: f64) -> Result<ChebyshevPolynomial> {
    let pc = jacobi_anger_cos(tau, epsilon / 6.0)?;
    let ps = jacobi_anger_sin(tau, epsilon / 6.0)?;
    let psign = sign_poly(epsilon / 3.0, delta)?;
    let prod = chebyshev_multiply(ps.coeffs(), psign.coeffs());
    check_degree(prod.len() - 1)?;
    let mut c = vec![ZERO; prod.len().max(pc.coeffs().len())];
    for (k, v) in pc.coeffs().iter().enumerate() {
        c[k] += v;
    }
    for (k, v) in prod.iter().enumerate() {
        c[k] += C64::new(v.im, -v.re);
    }
    for v in c.iter_mut().skip(1).step_by(2) {
        *v = ZERO;
    }
    let p = ChebyshevPolynomial::new(c, Parity::Even, Interval::outside_gap(delta / 2.0))?;
    Ok(p.normalized())
}
