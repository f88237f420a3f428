//! The contour integral I₂(n,t) over Γ₂ and recovery of H_n(½+int) from it.
//!
//! Two routes compute the same number. `RealAxis` collapses Γ₂ onto the cut
//! [z1, ∞) and integrates two real-line integrals whose integrands are products
//! of real powers; it works for every t ≥ 0 but needs working precision that
//! grows with n·t. `Steepest` follows the steepest-descent path through ζ₁(t)
//! and is the only practical choice for large n with 0 < t < T.

use super::critical::{Branch, CriticalData};
use super::quad::{pi, GaussLegendre};
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use rug::ops::Pow;
use rug::Assign;
use rug::{Complex, Float, Integer};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    RealAxis,
    Steepest,
    /// Steepest descent for large n inside (0, T), falling back to the real axis.
    Auto,
}

#[derive(Clone, Debug)]
pub struct ContourOptions {
    /// Starting working precision in bits.
    pub prec: u32,
    /// Requested relative accuracy of the result.
    pub tol: f64,
    /// Give up with `NonConvergence` beyond this working precision.
    pub max_prec: u32,
    pub route: Route,
}

impl Default for ContourOptions {
    fn default() -> Self {
        Self { prec: crate::DEFAULT_PRECISION, tol: 1e-15, max_prec: 1 << 15, route: Route::Auto }
    }
}

#[derive(Clone, Debug)]
pub struct ContourResult {
    pub integral: Complex,
    /// Absolute error estimate for `integral`.
    pub est_error: Float,
    pub n: u32,
    pub t: f64,
    pub route: Route,
    /// Working precision of the accepted pass.
    pub prec: u32,
}

impl ContourResult {
    /// Error relative to the part of `integral` that `reconstruct_h` keeps.
    pub fn rel_error(&self) -> f64 {
        let a = used_part(self.n, &self.integral);
        if a.is_zero() {
            return f64::INFINITY;
        }
        Float::with_val(a.prec(), &self.est_error / &a).to_f64()
    }
}

/// Route preferred by `Auto`.
pub fn auto_prefers_steepest(cd: &CriticalData, n: u32, t: f64) -> bool {
    t > 0.0 && t < cd.t_end() && n as f64 * (1.0 + t) > 1200.0
}

pub fn contour_integral(cd: &CriticalData, n: u32, t: f64, opts: &ContourOptions) -> Result<ContourResult> {
    if n < 3 {
        return Err(Error::Invalid(format!("contour integral needs n ≥ 3, got {n}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Invalid(format!("t = {t} must be finite and ≥ 0")));
    }
    if !(opts.tol > 0.0 && opts.tol < 1.0) || opts.prec < 32 || opts.max_prec < opts.prec {
        return Err(Error::Invalid("contour options out of range".into()));
    }
    match opts.route {
        Route::RealAxis => real_axis(cd, n, t, opts),
        Route::Steepest => steepest(cd, n, t, opts),
        Route::Auto => {
            if auto_prefers_steepest(cd, n, t) {
                steepest(cd, n, t, opts).or_else(|_| real_axis(cd, n, t, opts))
            } else {
                real_axis(cd, n, t, opts)
            }
        }
    }
}

/// H_n(½+int) from I₂: n!·Im I₂/π for even n, −i·n!·Re I₂/π for odd n.
pub fn reconstruct_h(n: u32, integral: &Complex) -> Complex {
    let p = integral.prec().0;
    let fact = Float::with_val(p, Integer::from(Integer::factorial(n)));
    let scale = fact / pi(p);
    if n % 2 == 0 {
        Complex::with_val(p, (Float::with_val(p, integral.imag() * &scale), 0))
    } else {
        Complex::with_val(p, (0, -Float::with_val(p, integral.real() * &scale)))
    }
}

/// |Im I| for even n, |Re I| for odd n: the part `reconstruct_h` keeps.
fn used_part(n: u32, z: &Complex) -> Float {
    let p = z.prec().0;
    if n % 2 == 0 {
        Float::with_val(p, z.imag().abs_ref())
    } else {
        Float::with_val(p, z.real().abs_ref())
    }
}

fn abs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

fn log2f(x: &Float) -> f64 {
    if x.is_zero() {
        f64::NEG_INFINITY
    } else {
        x.clone().log2().to_f64()
    }
}

// ---------------------------------------------------------------- real axis

/// A linear factor p + q·w raised to the power of its group.
struct Lin {
    p: Float,
    q: Float,
    group: usize,
}

/// Π_j (p_j + q_j w)^{β_j}, each factor positive on the interval in use.
struct Part {
    lins: Vec<Lin>,
    betas: Vec<Complex>,
}

impl Part {
    fn beta(&self, j: usize) -> &Complex {
        &self.betas[self.lins[j].group]
    }

    fn value_at(&self, j: usize, w: &Float) -> Float {
        let l = &self.lins[j];
        Float::with_val(w.prec(), &l.q * w) + &l.p
    }

    fn eval(&self, w: &Float) -> Complex {
        let p = w.prec();
        let mut re = Float::new(p);
        let mut im = Float::new(p);
        let mut prod = Float::new(p);
        let mut term = Float::new(p);
        for (g, beta) in self.betas.iter().enumerate() {
            prod.assign(1);
            for l in self.lins.iter().filter(|l| l.group == g) {
                term.assign(&l.q * w);
                term += &l.p;
                prod *= &term;
            }
            prod.ln_mut();
            term.assign(beta.real() * &prod);
            re += &term;
            if !beta.imag().is_zero() {
                term.assign(beta.imag() * &prod);
                im += &term;
            }
        }
        re.exp_mut();
        let (sin, cos) = im.sin_cos(Float::new(p));
        Complex::with_val(p, (cos * &re, sin * &re))
    }

    fn singularities(&self) -> Vec<f64> {
        self.lins.iter().map(|l| -(l.p.to_f64()) / l.q.to_f64()).collect()
    }

    fn rate(&self, w: f64) -> f64 {
        self.lins
            .iter()
            .map(|l| {
                let b = &self.betas[l.group];
                let babs = b.real().to_f64().hypot(b.imag().to_f64());
                babs * l.q.to_f64().abs() / (l.p.to_f64() + l.q.to_f64() * w).abs()
            })
            .sum()
    }

    /// Width δ for the endpoint expansion at e, where factor m vanishes.
    fn endpoint_delta(&self, e: f64, m: usize, span: f64) -> f64 {
        let mut rate = 0.0f64;
        let mut maxx = 0.0f64;
        for (j, l) in self.lins.iter().enumerate() {
            if j == m {
                continue;
            }
            let b = self.beta(j);
            let babs = b.real().to_f64().hypot(b.imag().to_f64());
            let x = l.q.to_f64().abs() / (l.p.to_f64() + l.q.to_f64() * e);
            rate += babs * x;
            maxx = maxx.max(x);
        }
        (1.0 / (8.0 * rate)).min(1.0 / (16.0 * maxx)).min(span / 4.0)
    }

    /// ∫ over [e, e+δ] (σ = 1) or [e−δ, e] (σ = −1) by the convergent series
    /// of the integrand around its vanishing factor m.
    /// Returns (value, truncation bound, Σ|terms|).
    fn endpoint(&self, e: &Float, sigma: i32, m: usize, delta: &Float) -> (Complex, Float, Float) {
        let p = e.prec();
        let beta_m = self.beta(m).clone();
        let mut lnpref = Complex::new(p);
        let mut ys: Vec<(Float, Complex)> = Vec::new();
        for (j, l) in self.lins.iter().enumerate() {
            if j == m {
                continue;
            }
            let c = self.value_at(j, e);
            lnpref += Complex::with_val(p, self.beta(j) * c.clone().ln());
            let y = Float::with_val(p, &l.q * delta) * sigma / c;
            ys.push((y, self.beta(j).clone()));
        }
        let qm = Float::with_val(p, self.lins[m].q.abs_ref());
        lnpref += Complex::with_val(p, &beta_m * qm.ln());
        let bm1 = Complex::with_val(p, &beta_m + 1u32);
        lnpref += Complex::with_val(p, &bm1 * delta.clone().ln());
        let kmax = (p as usize + 16) / 3 + 4;
        // log of the non-vanishing part as a power series in v = u/δ
        let mut lcoef = vec![Complex::new(p); kmax + 1];
        let mut pows: Vec<Float> = ys.iter().map(|(y, _)| y.clone()).collect();
        for (k, lk) in lcoef.iter_mut().enumerate().skip(1) {
            let mut s = Complex::new(p);
            for (idx, (y, b)) in ys.iter().enumerate() {
                s += Complex::with_val(p, b * &pows[idx]);
                pows[idx] *= y;
            }
            if k % 2 == 0 {
                s = -s;
            }
            *lk = s / k as u32;
        }
        let mut g = vec![Complex::new(p); kmax + 1];
        g[0] = Complex::with_val(p, 1);
        for k in 1..=kmax {
            let mut s = Complex::new(p);
            for i in 1..=k {
                s += Complex::with_val(p, &lcoef[i] * &g[k - i]) * i as u32;
            }
            g[k] = s / k as u32;
        }
        let mut sum = Complex::new(p);
        let mut mag = Float::new(p);
        for (k, gk) in g.iter().enumerate() {
            let term = Complex::with_val(p, gk / Complex::with_val(p, &bm1 + k as u32));
            mag += abs(&term);
            sum += term;
        }
        let pref = lnpref.exp();
        let pa = abs(&pref);
        let tail = (abs(&g[kmax]) + abs(&g[kmax - 1])) * 4u32 * &pa;
        (sum * &pref, tail, mag * pa)
    }
}

/// Panel boundaries from a, sized by distance to singularities and by the
/// local rate of change of the log-integrand.
fn layout(a: f64, end: Option<f64>, sing: &[f64], rate: &dyn Fn(f64) -> f64, dmax: f64, done: &mut dyn FnMut(f64) -> bool) -> Result<Vec<f64>> {
    let mut bounds = vec![a];
    let mut w = a;
    for _ in 0..1_000_000 {
        let d = sing.iter().map(|s| (w - s).abs()).fold(f64::INFINITY, f64::min);
        let h = (0.5 * d).min(dmax / rate(w));
        if let Some(b) = end {
            if w + h >= b {
                bounds.push(b);
                return Ok(bounds);
            }
        }
        w += h;
        bounds.push(w);
        if end.is_none() && done(w) {
            return Ok(bounds);
        }
    }
    Err(Error::NonConvergence("panel layout did not terminate".into()))
}

struct PassOut {
    value: Complex,
    qerr: Float,
    mag: Float,
}

struct Rules {
    a: GaussLegendre,
    b: GaussLegendre,
    dmax: f64,
}

impl Rules {
    fn new(digits: f64, prec: u32) -> Self {
        let m1 = (0.8 * digits).ceil() as usize + 10;
        let m2 = m1 + m1 / 4 + 4;
        Self { a: GaussLegendre::new(m1, prec), b: GaussLegendre::new(m2, prec), dmax: (m1 as f64 / 2.0).max(2.0) }
    }
}

/// Σ over panels with both rules: (coarse, fine, Σ|fine terms|).
fn panels(part: &Part, bounds: &[Float], rules: &Rules) -> (Complex, Complex, Float) {
    let p = bounds[0].prec();
    let (mut sa, mut sb, mut mag) = (Complex::new(p), Complex::new(p), Float::new(p));
    for win in bounds.windows(2) {
        let (va, _) = rules.a.panel_real(&win[0], &win[1], |w| part.eval(w));
        let (vb, mb) = rules.b.panel_real(&win[0], &win[1], |w| part.eval(w));
        sa += va;
        sb += vb;
        mag += mb;
    }
    (sa, sb, mag)
}

fn to_bounds(f: &[f64], first: Float, last: Option<Float>) -> Vec<Float> {
    let p = first.prec();
    let mut out: Vec<Float> = f.iter().map(|&x| Float::with_val(p, x)).collect();
    out[0] = first;
    if let Some(l) = last {
        *out.last_mut().unwrap() = l;
    }
    out
}

fn real_axis_pass(cd: &CriticalData, n: u32, t: f64, wp: u32, digits: f64, tol: f64, iref: Option<f64>) -> Result<PassOut> {
    let z1 = Float::with_val(wp, &cd.z1);
    let z2 = Float::with_val(wp, &cd.z2);
    let nt = Float::with_val(wp, t) * n;
    let alpha = Complex::with_val(wp, (0.5, &nt));
    let alpha_bar = Complex::with_val(wp, (0.5, -nt.clone()));
    let bw = Complex::with_val(wp, (-(n as i64) - 1, 0));
    let betas = vec![alpha, alpha_bar, bw];
    let zero = Float::new(wp);
    let one = Float::with_val(wp, 1);
    let lin = |p: &Float, q: &Float, group: usize| Lin { p: p.clone(), q: q.clone(), group };
    let neg = |x: &Float| Float::with_val(wp, -x);
    let part1 =
        Part { lins: vec![lin(&neg(&z1), &z1, 0), lin(&z2, &neg(&z1), 0), lin(&z1, &z1, 1), lin(&z2, &z1, 1), lin(&zero, &one, 2)], betas: betas.clone() };
    let part2 = Part { lins: vec![lin(&neg(&z1), &z2, 0), lin(&neg(&z2), &z2, 0), lin(&z1, &z2, 1), lin(&z2, &z2, 1), lin(&zero, &one, 2)], betas };
    let rules = Rules::new(digits, wp);
    let rho = Float::with_val(wp, &z2 / &z1);
    let rho_f = rho.to_f64();

    // J1 on [1, z2/z1]
    let span = rho_f - 1.0;
    let d_lo = part1.endpoint_delta(1.0, 0, span);
    let d_hi = part1.endpoint_delta(rho_f, 1, span);
    let dl = Float::with_val(wp, d_lo);
    let dh = Float::with_val(wp, d_hi);
    let (e1a, t1a, m1a) = part1.endpoint(&one, 1, 0, &dl);
    let (e1b, t1b, m1b) = part1.endpoint(&rho, -1, 1, &dh);
    let a1 = Float::with_val(wp, &one + &dl);
    let b1 = Float::with_val(wp, &rho - &dh);
    let sing1 = part1.singularities();
    let rate1 = |w: f64| part1.rate(w);
    let f1 = layout(1.0 + d_lo, Some(rho_f - d_hi), &sing1, &rate1, rules.dmax, &mut |_| true)?;
    let (j1a, j1b, mag1) = panels(&part1, &to_bounds(&f1, a1, Some(b1)), &rules);
    let j1 = Complex::with_val(wp, &j1b + &e1a) + &e1b;
    let err1 = abs(&Complex::with_val(wp, &j1a - &j1b)) + t1a + t1b;
    let mag1 = mag1 + m1a + m1b;

    let pi_nt = Float::with_val(wp, &nt * pi(wp));
    let ep = pi_nt.clone().exp();
    let em = Float::with_val(wp, -&pi_nt).exp();
    let z1n = Float::with_val(wp, (&z1).pow(n));
    let z2n = Float::with_val(wp, (&z2).pow(n));
    let p1 = Complex::with_val(wp, (0, -(Float::with_val(wp, &ep + &em) / &z1n)));
    let p2 = (Float::with_val(wp, em.square_ref()) - Float::with_val(wp, ep.square_ref())) / &z2n;
    let p1a = abs(&p1);
    let p2a = Float::with_val(wp, p2.abs_ref());
    let s1 = Complex::with_val(wp, &p1 * &j1);

    // J2 on [1, R]; R set by the tail bound 4 z2² R^{2−n}/(n−2) against the target
    // the tail must sit below both the requested accuracy and the rounding floor
    let floor = (Float::with_val(wp, &p1a * &mag1).ln().to_f64()) - wp as f64 * std::f64::consts::LN_2;
    let ln_target = floor.min(tol.ln() - 100f64.ln() + iref.unwrap_or_else(|| abs(&s1).ln().to_f64()));
    let ln_p2 = if p2a.is_zero() { f64::NEG_INFINITY } else { p2a.clone().ln().to_f64() };
    let z2f = z2.to_f64();
    let ln_c = (4.0 * z2f * z2f / (n as f64 - 2.0)).ln();
    let tail_ln = |r: f64| ln_p2 + ln_c + (2.0 - n as f64) * r.ln();
    let d2 = part2.endpoint_delta(1.0, 1, 1.0);
    let d2f = Float::with_val(wp, d2);
    let (e2, t2e, m2e) = part2.endpoint(&one, 1, 1, &d2f);
    let sing2 = part2.singularities();
    let rate2 = |w: f64| part2.rate(w);
    let mut done = |w: f64| tail_ln(w) <= ln_target;
    let f2 = layout(1.0 + d2, None, &sing2, &rate2, rules.dmax, &mut done)?;
    let r_end = *f2.last().unwrap();
    let a2 = Float::with_val(wp, &one + &d2f);
    let (j2a, j2b, mag2) = panels(&part2, &to_bounds(&f2, a2, None), &rules);
    let j2 = Complex::with_val(wp, &j2b + &e2);
    let tail = if ln_p2.is_finite() { Float::with_val(wp, tail_ln(r_end)).exp() } else { Float::new(wp) };
    let err2 = abs(&Complex::with_val(wp, &j2a - &j2b)) + t2e;
    let mag2 = mag2 + m2e;

    let value = s1 + Complex::with_val(wp, &j2 * &p2);
    let qerr = Float::with_val(wp, &p1a * &err1) + Float::with_val(wp, &p2a * &err2) + tail;
    let mag = Float::with_val(wp, &p1a * &mag1) + Float::with_val(wp, &p2a * &mag2);
    Ok(PassOut { value, qerr, mag })
}

fn real_axis(cd: &CriticalData, n: u32, t: f64, opts: &ContourOptions) -> Result<ContourResult> {
    let tol_digits = -opts.tol.log10();
    let mut wp = opts.prec;
    let mut digits = tol_digits + 3.0;
    let mut iref = None;
    loop {
        let out = real_axis_pass(cd, n, t, wp, digits, opts.tol, iref)?;
        // beyond T one part of I dominates the other exponentially, so accuracy is judged on the part H uses
        let absv = used_part(n, &out.value);
        let round = Float::with_val(wp, &out.mag) >> (wp as i32 - 8);
        let err = Float::with_val(wp, &out.qerr + &round);
        let ok = Float::with_val(wp, &absv * opts.tol);
        if !absv.is_zero() && err <= ok {
            return Ok(ContourResult { integral: out.value, est_error: err, n, t, route: Route::RealAxis, prec: wp });
        }
        if wp >= opts.max_prec {
            return Err(Error::NonConvergence(format!(
                "real-axis contour at n = {n}, t = {t}: relative error {:.3e} at the {wp}-bit cap",
                Float::with_val(wp, &err / &absv).to_f64()
            )));
        }
        let loss = if absv.is_zero() { wp as f64 } else { (log2f(&out.mag) - log2f(&absv)).clamp(0.0, wp as f64) };
        // an unconverged pass gives no usable estimate of the cancellation
        let unresolved = out.qerr > Float::with_val(wp, &absv / 10u32);
        let grown = if unresolved { 2.0 * digits } else { digits + 8.0 };
        digits = (tol_digits + loss * std::f64::consts::LOG10_2 + 3.0).max(grown);
        let need = (loss + tol_digits / std::f64::consts::LOG10_2 + 48.0).max(digits / std::f64::consts::LOG10_2 + 32.0).ceil() as u32;
        wp = need.max(wp + wp / 2).min(opts.max_prec);
        if !absv.is_zero() {
            iref = Some(absv.ln().to_f64());
        }
    }
}

// ---------------------------------------------------------- steepest descent

struct Geo {
    z1: f64,
    z2: f64,
    t: f64,
    n: f64,
}

impl Geo {
    fn phi(&self, z: C64) -> C64 {
        let (a, b) = (C64::new(self.z1, 0.0), C64::new(self.z2, 0.0));
        let it = C64::new(0.0, self.t);
        z.ln() - it * ((a - z).ln() + (b - z).ln() - (a + z).ln() - (b + z).ln())
    }

    fn dphi(&self, z: C64) -> C64 {
        let (a, b) = (C64::new(self.z1, 0.0), C64::new(self.z2, 0.0));
        let it = C64::new(0.0, self.t);
        z.inv() + it * ((a - z).inv() + (b - z).inv() + (a + z).inv() + (b + z).inv())
    }

    fn d2phi(&self, z: C64) -> C64 {
        let (a, b) = (C64::new(self.z1, 0.0), C64::new(self.z2, 0.0));
        let it = C64::new(0.0, self.t);
        let sq = |w: C64| (w * w).inv();
        -sq(z) + it * (sq(a - z) + sq(b - z) - sq(a + z) - sq(b + z))
    }

    fn dist(&self, z: C64) -> f64 {
        [0.0, self.z1, -self.z1, self.z2, -self.z2].iter().map(|&s| (z - s).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Trace step; `coarse` drops the n-dependent limits once the integrand
    /// is negligible and only the geometry of the path matters.
    fn step(&self, z: C64, coarse: bool) -> f64 {
        let h = (0.02 * z.norm()).min(0.05 * self.dist(z));
        if coarse {
            return h;
        }
        let g = self.dphi(z).norm();
        h.min(0.3 / (self.n * self.d2phi(z).norm()).sqrt()).min(2.0 / (self.n * g))
    }

    fn psi_abs(&self, z: C64) -> f64 {
        let (a, b) = (C64::new(self.z1, 0.0), C64::new(self.z2, 0.0));
        ((a - z) * (b - z) * (a + z) * (b + z)).norm().sqrt() / z.norm()
    }
}

enum TraceEnd {
    Stopped,
    Crossed(f64),
}

/// Ascent path of Re φ from start, until n·(Re φ − re0) > stop or the real axis.
/// With `stop = ∞` the trace runs until it crosses the real axis or leaves |z| < far.
fn trace(geo: &Geo, pts: &mut Vec<C64>, re0: f64, stop: f64, far: f64, fine: f64) -> Result<TraceEnd> {
    let mut z = *pts.last().unwrap();
    let mut coarse = false;
    let dir = |w: C64| {
        let g = geo.dphi(w).conj();
        g / g.norm()
    };
    for _ in 0..400_000 {
        let h = geo.step(z, coarse);
        if !(h > 1e-13) {
            break;
        }
        let zm = z + dir(z) * (0.5 * h);
        let next = z + dir(zm) * h;
        if (z.im > 0.0) != (next.im > 0.0) || next.im == 0.0 {
            let x = z.re + (next.re - z.re) * z.im / (z.im - next.im);
            pts.push(C64::new(x, 0.0));
            return Ok(TraceEnd::Crossed(x));
        }
        z = next;
        pts.push(z);
        let gap = geo.n * (geo.phi(z).re - re0);
        if gap > stop || z.norm() > far {
            return Ok(TraceEnd::Stopped);
        }
        coarse = gap > fine;
    }
    Err(Error::NonConvergence("steepest path trace stalled".into()))
}

/// Polyline for Γ₂ deformed through ζ₁(t): far end of the upward branch, ζ₁,
/// the crossing x* ∈ (0, z1), then the ray x* − i·x*(e^v − 1).
fn steepest_path(geo: &Geo, zeta: C64, stop: f64) -> Result<(Vec<C64>, C64)> {
    let re0 = geo.phi(zeta).re;
    let a2 = geo.d2phi(zeta);
    let mut d = C64::new(1.0, 0.0) / a2.sqrt();
    d = d / d.norm() * (0.1 / (geo.n * a2.norm()).sqrt()).min(0.05 * geo.dist(zeta));
    let far = 1e3 * geo.z2;
    let mut pa = vec![zeta, zeta + d];
    let mut pb = vec![zeta, zeta - d];
    let mut ea = trace(geo, &mut pa, re0, stop, far, stop)?;
    let mut eb = trace(geo, &mut pb, re0, stop, far, stop)?;
    // for large n the integrand is negligible long before the descending
    // branch meets the real axis; keep following both until one of them does
    if let (TraceEnd::Stopped, TraceEnd::Stopped) = (&ea, &eb) {
        let mut qa = pa.clone();
        let mut qb = pb.clone();
        let fa = trace(geo, &mut qa, re0, f64::INFINITY, 4.0 * geo.z2, stop)?;
        let fb = trace(geo, &mut qb, re0, f64::INFINITY, 4.0 * geo.z2, stop)?;
        match (fa, fb) {
            (TraceEnd::Crossed(x), TraceEnd::Stopped) => {
                pa = qa;
                ea = TraceEnd::Crossed(x);
            }
            (TraceEnd::Stopped, TraceEnd::Crossed(x)) => {
                pb = qb;
                eb = TraceEnd::Crossed(x);
            }
            _ => {}
        }
    }
    let (up, down, xs) = match (ea, eb) {
        (TraceEnd::Crossed(x), TraceEnd::Stopped) => (pb, pa, x),
        (TraceEnd::Stopped, TraceEnd::Crossed(x)) => (pa, pb, x),
        _ => return Err(Error::NonConvergence("steepest path does not reach (0, z1)".into())),
    };
    if !(xs > 0.0 && xs < geo.z1) {
        return Err(Error::NonConvergence(format!("steepest path crosses the real axis at {xs}")));
    }
    let down_dir = (down[1] - zeta) / (down[1] - zeta).norm();
    let mut path: Vec<C64> = up.into_iter().rev().collect();
    path.extend(down.into_iter().skip(1));
    let mut v = 0.0f64;
    for _ in 0..1_000_000 {
        let z = C64::new(xs, -xs * (v.exp() - 1.0));
        let speed = xs * v.exp();
        let mut dv = (0.02f64).min(0.05 * geo.dist(z) / speed);
        if geo.n * (geo.phi(z).re - re0) <= stop {
            dv = dv.min(1.0 / (geo.n * geo.dphi(z).norm() * speed));
        }
        v += dv;
        let next = C64::new(xs, -xs * (v.exp() - 1.0));
        path.push(next);
        let gap = geo.n * (geo.phi(next).re - re0);
        if gap < -5.0 {
            return Err(Error::NonConvergence("integrand grows along the descent ray".into()));
        }
        if gap > stop {
            return Ok((path, down_dir));
        }
    }
    Err(Error::NonConvergence("descent ray did not terminate".into()))
}

/// Unit direction at ζ₁(t) of the steepest branch that runs to (0, z1),
/// i.e. the side from which Γ₂ enters the saddle.
pub fn descent_entry_direction(cd: &CriticalData, n: u32, t: f64) -> Result<(f64, f64)> {
    let zeta = cd.zeta(t, Branch::One)?;
    let geo = Geo { z1: cd.z1.to_f64(), z2: cd.z2.to_f64(), t, n: n as f64 };
    let zf = C64::new(zeta.real().to_f64(), zeta.imag().to_f64());
    let (_, d) = steepest_path(&geo, zf, 40.0)?;
    Ok((d.re, d.im))
}

fn steepest(cd: &CriticalData, n: u32, t: f64, opts: &ContourOptions) -> Result<ContourResult> {
    if !(t > 0.0 && t < cd.t_end()) {
        return Err(Error::OutOfWindow(format!("steepest route needs 0 < t < T, got {t}")));
    }
    let mut wp = opts.prec + 32;
    let mut digits = -opts.tol.log10() + 3.0;
    for _ in 0..4 {
        let local = cd.with_prec(wp);
        let zeta = local.zeta(t, Branch::One)?;
        let phi0 = local.phi(&zeta, t);
        let geo = Geo { z1: cd.z1.to_f64(), z2: cd.z2.to_f64(), t, n: n as f64 };
        let zf = C64::new(zeta.real().to_f64(), zeta.imag().to_f64());
        let stop = (digits + 2.0) * std::f64::consts::LN_10;
        let (path, _) = steepest_path(&geo, zf, stop)?;
        let m1 = (0.4 * digits).ceil() as usize + 8;
        let ra = GaussLegendre::new(m1, wp);
        let rb = GaussLegendre::new(m1 + m1 / 4 + 4, wp);
        let tc = Complex::with_val(wp, (t, 0));
        let f = |z: &Complex| -> Complex {
            let ph = Complex::with_val(wp, local.phi_c(z, &tc) - &phi0) * n;
            local.psi(z) * (-ph).exp()
        };
        let re0 = geo.phi(zf).re;
        let gaps: Vec<f64> = path.iter().map(|&z| geo.n * (geo.phi(z).re - re0)).collect();
        let verts: Vec<Complex> = path.iter().map(|z| Complex::with_val(wp, (z.re, z.im))).collect();
        let (mut ja, mut jb, mut mag) = (Complex::new(wp), Complex::new(wp), Float::new(wp));
        let mut skipped = 0.0f64;
        for (k, w) in verts.windows(2).enumerate() {
            if gaps[k].min(gaps[k + 1]) > stop {
                let bound = |i: usize| geo.psi_abs(path[i]) * (-gaps[i]).exp();
                skipped += (path[k + 1] - path[k]).norm() * bound(k).max(bound(k + 1));
                continue;
            }
            ja += ra.panel_complex(&w[0], &w[1], f).0;
            let (v, m) = rb.panel_complex(&w[0], &w[1], f);
            jb += v;
            mag += m;
        }
        let absj = abs(&jb);
        let trunc = Float::with_val(wp, &absj * ((-stop).exp() * 10.0));
        let err = abs(&Complex::with_val(wp, &ja - &jb)) + trunc + (mag >> (wp as i32 - 8)) + skipped;
        let scale = Complex::with_val(wp, Complex::with_val(wp, &phi0 * n)).exp().recip();
        let integral = -(jb * &scale);
        let est_error = err * abs(&scale);
        let part = used_part(n, &integral);
        if !part.is_zero() && est_error <= Float::with_val(wp, &part * opts.tol) {
            return Ok(ContourResult { integral, est_error, n, t, route: Route::Steepest, prec: wp });
        }
        if wp >= opts.max_prec {
            break;
        }
        wp = (wp * 2).min(opts.max_prec);
        digits += 10.0;
    }
    Err(Error::NonConvergence(format!("steepest-descent contour at n = {n}, t = {t} did not reach the tolerance")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sheffer::{h_poly, QuadraticQ};
    use rug::Rational;

    fn exact_h(z1: i64, z2: i64, n: u32, t: f64, prec: u32) -> Complex {
        let q = QuadraticQ::roots(Rational::from(z1), Rational::from(z2)).unwrap();
        let h = h_poly(&q, n as usize).unwrap();
        let x = Complex::with_val(prec, (0.5, n as f64 * t));
        h.eval_complex(&x)
    }

    fn rel(a: &Complex, b: &Complex) -> f64 {
        let p = a.prec().0;
        (abs(&Complex::with_val(p, a - b)) / abs(b)).to_f64()
    }

    #[test]
    fn real_axis_matches_exact_polynomial() {
        let opts = ContourOptions { route: Route::RealAxis, ..Default::default() };
        for (z1, z2, n, t) in [(1, 3, 12, 0.2), (1, 3, 7, 0.1), (1, 7, 8, 0.2), (1, 7, 9, 0.3), (2, 5, 20, 0.5)] {
            let cd = CriticalData::new(&Rational::from(z1), &Rational::from(z2), 128).unwrap();
            let r = contour_integral(&cd, n, t, &opts).unwrap();
            let h = reconstruct_h(n, &r.integral);
            let e = exact_h(z1, z2, n, t, r.prec);
            assert!(rel(&h, &e) < 1e-12, "({z1},{z2}) n={n} t={t}: {}", rel(&h, &e));
            assert!(r.rel_error() < 1e-15);
        }
    }

    #[test]
    fn past_t_the_kept_part_is_accurate() {
        // here the discarded part of I dwarfs the kept one
        let cd = CriticalData::new(&Rational::from(1), &Rational::from(3), 128).unwrap();
        for (n, t) in [(10, 2.0), (20, 1.5), (21, 1.0)] {
            let r = contour_integral(&cd, n, t, &ContourOptions::default()).unwrap();
            let h = reconstruct_h(n, &r.integral);
            let e = exact_h(1, 3, n, t, 2048);
            assert!(rel(&h, &e) < 1e-12, "n={n} t={t}: {}", rel(&h, &e));
        }
    }

    #[test]
    fn steepest_matches_real_axis() {
        let cd = CriticalData::new(&Rational::from(1), &Rational::from(3), 128).unwrap();
        for (n, t) in [(30, 0.25), (31, 0.4), (60, 0.1)] {
            let a = contour_integral(&cd, n, t, &ContourOptions { route: Route::RealAxis, ..Default::default() }).unwrap();
            let b = contour_integral(&cd, n, t, &ContourOptions { route: Route::Steepest, ..Default::default() }).unwrap();
            assert!(rel(&b.integral, &a.integral) < 1e-12, "n={n} t={t}: {}", rel(&b.integral, &a.integral));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let cd = CriticalData::new(&Rational::from(1), &Rational::from(3), 128).unwrap();
        let o = ContourOptions::default();
        assert!(matches!(contour_integral(&cd, 2, 0.1, &o), Err(Error::Invalid(_))));
        assert!(matches!(contour_integral(&cd, 10, f64::NAN, &o), Err(Error::Invalid(_))));
        let capped = ContourOptions { prec: 64, max_prec: 64, tol: 1e-30, route: Route::RealAxis };
        assert!(matches!(contour_integral(&cd, 40, 0.5, &capped), Err(Error::NonConvergence(_))));
    }
}
